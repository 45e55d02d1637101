use eftqc::models::{AlgorithmCostModel, ErrorBudgetMode, ScalabilityModel, SurfaceCodeModel};
use eftqc::reach::{
    contour, max_logical_qubits_closed_form, max_logical_qubits_lower_bound, max_logical_qubits_numeric,
    satisfies_success_condition, success_rhs, DistanceMode, ReachProblem,
};
use proptest::prelude::*;

fn problem(p0: f64, s: f64, alpha: f64, beta: f64, p_c: f64) -> ReachProblem {
    ReachProblem::new(
        ScalabilityModel::power_law(p0, s).unwrap(),
        SurfaceCodeModel::default(),
        AlgorithmCostModel::new(alpha, beta, p_c, ErrorBudgetMode::UnionBound).unwrap(),
        DistanceMode::Continuous,
    )
    .unwrap()
}

prop_compose! {
    fn power_law_problem()(
        log_p0 in -5.0f64..-2.5,
        s in 1.0f64..6.0,
        log_alpha in 4.0f64..12.0,
        beta in 0.3f64..1.5,
        p_c in 0.01f64..0.5,
    ) -> ReachProblem {
        problem(10f64.powf(log_p0), s, 10f64.powf(log_alpha), beta, p_c)
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn reach_methods_are_ordered(p in power_law_problem()) {
        let numeric = max_logical_qubits_numeric(&p).unwrap() as f64;
        prop_assume!(numeric >= 1.0);
        let closed = max_logical_qubits_closed_form(&p).unwrap();
        prop_assert!(closed <= numeric + 1.0, "closed {closed} numeric {numeric}");
        prop_assert!(closed >= numeric, "closed {closed} numeric {numeric}");
        if let Ok(lower) = max_logical_qubits_lower_bound(&p) {
            prop_assert!(lower <= closed, "lower {lower} closed {closed}");
        }
    }

    #[test]
    fn burden_invariance(p in power_law_problem(), factor in 0.01f64..1.0) {
        let scaled = ReachProblem {
            cost: AlgorithmCostModel::new(
                p.cost.alpha() * factor,
                p.cost.beta(),
                p.cost.p_c() * factor,
                ErrorBudgetMode::UnionBound,
            )
            .unwrap(),
            ..p
        };
        prop_assert_eq!(max_logical_qubits_numeric(&p).unwrap(), max_logical_qubits_numeric(&scaled).unwrap());
        let (a, b) = (
            max_logical_qubits_closed_form(&p).unwrap(),
            max_logical_qubits_closed_form(&scaled).unwrap(),
        );
        prop_assert!(((a - b) / a).abs() < 1e-9);
    }

    #[test]
    fn rhs_peaks_at_optimal_count(log_p0 in -5.0f64..-2.5, s in 1.0f64..6.0) {
        let p = problem(10f64.powf(log_p0), s, 4.12e9, 0.515, 0.1);
        let q_opt = p.optimal_physical_qubits().unwrap();
        let q_max = p.max_physical_qubits().unwrap();
        prop_assume!(q_max > 10.0);
        // Log-spaced scan over [1, Q_max].
        let n = 4000;
        let best = (0..=n)
            .map(|i| q_max.powf(i as f64 / n as f64))
            .max_by(|a, b| {
                let fa = success_rhs(&p.scalability, &p.code, *a).unwrap();
                let fb = success_rhs(&p.scalability, &p.code, *b).unwrap();
                fa.total_cmp(&fb)
            })
            .unwrap();
        prop_assert!(((best - q_opt) / q_opt).abs() < 1e-3 * q_max.ln(), "scan {best} vs {q_opt}");
        let at_opt = success_rhs(&p.scalability, &p.code, q_opt).unwrap();
        let at_best = success_rhs(&p.scalability, &p.code, best).unwrap();
        prop_assert!(at_opt >= at_best * (1.0 - 1e-3));
    }
}

#[test]
fn closed_form_and_numeric_agree_within_five_percent() {
    // 20 spread draws; reaches stay above 20 so integer rounding alone
    // cannot exceed 5%.
    for i in 0..20u32 {
        let t = f64::from(i) / 19.0;
        let u = f64::from((i * 7) % 20) / 19.0;
        let p = problem(10f64.powf(-4.5 + 0.7 * t), 3.0 + 2.0 * u, 10f64.powf(10.0 - 2.0 * u), 0.4 + 0.3 * t, 0.1);
        let numeric = max_logical_qubits_numeric(&p).unwrap() as f64;
        let closed = max_logical_qubits_closed_form(&p).unwrap();
        assert!(numeric >= 20.0, "draw {i}: reach {numeric}");
        assert!(((closed - numeric) / numeric).abs() <= 0.05, "draw {i}: {closed} vs {numeric}");
        assert_eq!(closed.floor(), numeric, "draw {i}");
    }
}

#[test]
fn contour_feasibility_switches_once() {
    for (s, mode) in [
        (2.5, DistanceMode::Continuous),
        (3.5, DistanceMode::Continuous),
        (4.0, DistanceMode::DiscreteOdd),
        (3.5, DistanceMode::DiscreteOdd),
    ] {
        let p = ReachProblem {
            distance_mode: mode,
            ..problem(1e-4, s, 4.12e9, 0.515, 0.1)
        };
        let series = contour(&p, 1..=400, 3).unwrap();
        let flips = series.points.windows(2).filter(|w| w[0].feasible != w[1].feasible).count();
        assert!(flips <= 1, "s = {s}, {mode:?}: {flips} transitions");
        assert!(series.points[0].feasible);
    }
}

#[test]
fn infinite_scalability_eventually_succeeds() {
    let p = ReachProblem::new(
        ScalabilityModel::infinite(1e-3).unwrap(),
        SurfaceCodeModel::default(),
        AlgorithmCostModel::default(),
        DistanceMode::Continuous,
    )
    .unwrap();
    for q_logical in [1u64, 10, 100, 1000, 10_000] {
        let mut q_phys = 8.0 * q_logical as f64;
        while !satisfies_success_condition(&p, q_logical, q_phys).unwrap() {
            q_phys *= 2.0;
            assert!(q_phys < 1e15, "q_logical = {q_logical}");
        }
    }
}
