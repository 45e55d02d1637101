use std::path::Path;

use serde::Serialize;
use serde_json::{json, Value};

use eftqc::calibration::{compare_fits, load_calibration_csv, CalibrationSeries};
use eftqc::models::{msd_table, AlgorithmCostModel, ScalabilityKind, ScalabilityModel, SurfaceCodeModel};
use eftqc::reach::{self, Regime, ReachMethod, ReachProblem, ReachResult};
use eftqc::rfe::{self, CalibrationOptions, NoiseModel, RfeExperiment};

use crate::config::{Config, MethodChoice, NoiseKind};
use crate::error::CliError;

/// What a command produces before anything touches the disk.
pub struct Output {
    pub result: Value,
    /// File name and contents.
    pub tables: Vec<(&'static str, String)>,
}

/// Non-finite floats as strings, matching the library's serialization.
fn num(x: f64) -> Value {
    if x.is_finite() {
        json!(x)
    } else if x.is_nan() {
        json!("nan")
    } else if x > 0.0 {
        json!("inf")
    } else {
        json!("-inf")
    }
}

fn to_value<T: Serialize>(x: &T) -> Value {
    serde_json::to_value(x).expect("serializable")
}

/// Shortest round-trip text for a float; exponent form at the extremes.
fn fmt_f64(x: f64) -> String {
    format!("{x:?}")
}

fn table<const N: usize>(header: [&str; N], rows: impl IntoIterator<Item = [String; N]>) -> Result<String, CliError> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(header).map_err(|e| CliError::Io(e.to_string()))?;
    for row in rows {
        w.write_record(&row).map_err(|e| CliError::Io(e.to_string()))?;
    }
    let bytes = w.into_inner().map_err(|e| CliError::Io(e.to_string()))?;
    Ok(String::from_utf8(bytes).expect("ascii output"))
}

pub fn scalability(c: &Config) -> Result<ScalabilityModel, CliError> {
    let s = &c.scalability;
    ScalabilityModel::new(s.kind, s.p0, s.scale).map_err(CliError::config)
}

pub fn problem(c: &Config) -> Result<ReachProblem, CliError> {
    let code = SurfaceCodeModel::new(c.surface_code.a, c.surface_code.p_th).map_err(CliError::config)?;
    let a = &c.algorithm;
    let cost = AlgorithmCostModel::new(a.alpha, a.beta, a.p_c, a.error_budget_mode).map_err(CliError::config)?;
    let p = ReachProblem::new(scalability(c)?, code, cost, c.reach.distance_mode).map_err(CliError::config)?;
    if a.burden_reduction == 1.0 {
        Ok(p)
    } else {
        p.with_burden_reduction(a.burden_reduction).map_err(CliError::config)
    }
}

pub fn run_reach(c: &Config) -> Result<Output, CliError> {
    let p = problem(c)?;
    let is_log = p.scalability.kind() == ScalabilityKind::Logarithmic;
    let methods: Vec<ReachMethod> = match c.reach.method {
        MethodChoice::All if is_log => vec![ReachMethod::NumericSearch],
        MethodChoice::All => vec![ReachMethod::ClosedForm, ReachMethod::LowerBound, ReachMethod::NumericSearch],
        MethodChoice::ClosedForm | MethodChoice::LowerBound if is_log => {
            return Err(CliError::Config(
                "closed-form and lower-bound reach exist only for the power-law model; use reach.method = \"numeric_search\"".into(),
            ));
        }
        MethodChoice::ClosedForm => vec![ReachMethod::ClosedForm],
        MethodChoice::LowerBound => vec![ReachMethod::LowerBound],
        MethodChoice::NumericSearch => vec![ReachMethod::NumericSearch],
    };
    let explicit = c.reach.method != MethodChoice::All;

    let mut entries = serde_json::Map::new();
    let mut solved: Vec<ReachResult> = Vec::new();
    let mut first_err = None;
    for m in methods {
        let key = to_value(&m).as_str().expect("unit variant").to_string();
        match reach::solve(&p, m) {
            Ok(r) => {
                entries.insert(key, to_value(&r));
                solved.push(r);
            }
            Err(e) if explicit => return Err(e.into()),
            Err(e) => {
                entries.insert(key, json!({ "error": e.to_string() }));
                first_err.get_or_insert(e);
            }
        }
    }
    // Numeric search is the headline when available.
    let headline = solved
        .iter()
        .find(|r| r.method == ReachMethod::NumericSearch)
        .or_else(|| solved.first())
        .copied();
    let (q_logical_max, q_phys_opt, q_phys_max, headline_method) = match headline {
        Some(h) => (json!(h.q_logical_max), h.q_phys_opt, h.q_phys_max, to_value(&h.method)),
        // Without a scale-dependent error floor there is no finite reach.
        None if p.scalability.is_infinite() => (json!("inf"), f64::INFINITY, f64::INFINITY, Value::Null),
        None => return Err(first_err.expect("at least one method ran").into()),
    };

    let result = json!({
        "problem": to_value(&p),
        "burden_reduction": num(c.algorithm.burden_reduction),
        "burden_factor": num(p.burden_factor()),
        "ln_burden_factor": num(p.cost.ln_burden_factor(&p.code)),
        "q_phys_opt": num(q_phys_opt),
        "q_phys_max": num(q_phys_max),
        "q_logical_max": q_logical_max,
        "headline_method": headline_method,
        "methods": entries,
    });
    Ok(Output {
        result,
        tables: Vec::new(),
    })
}

pub fn run_contour(c: &Config) -> Result<Output, CliError> {
    let p = problem(c)?;
    let cc = &c.contour;
    let series = reach::contour(&p, cc.q_logical_min..=cc.q_logical_max, cc.step)?;
    let csv = table(
        ["q_logical", "q_phys_required", "feasible"],
        series.points.iter().map(|pt| {
            [
                pt.q_logical.to_string(),
                pt.q_phys_required.map(fmt_f64).unwrap_or_default(),
                pt.feasible.to_string(),
            ]
        }),
    )?;
    let result = json!({
        "problem": to_value(&p),
        "scalability_label": series.scalability_label,
        "reach": series.reach(),
        "points": to_value(&series.points),
    });
    Ok(Output {
        result,
        tables: vec![("contour.csv", csv)],
    })
}

pub fn run_regimes(c: &Config) -> Result<Output, CliError> {
    let r = &c.regimes;
    let grid = reach::regimes_grid((r.s_min, r.s_max), (r.ratio_min, r.ratio_max), (r.s_points, r.ratio_points))
        .map_err(CliError::config)?;
    let csv = table(
        ["s", "ratio", "q_max", "regime"],
        grid.cells.iter().map(|cell| {
            [
                fmt_f64(cell.s),
                fmt_f64(cell.ratio),
                fmt_f64(cell.q_max),
                cell.regime.label().to_string(),
            ]
        }),
    )?;

    // Where the configured architecture sits, as an exact point and as the
    // nearest grid cell.
    let sc = scalability(c)?;
    let configured = if sc.kind() == ScalabilityKind::PowerLaw && !sc.is_infinite() {
        let code = SurfaceCodeModel::new(c.surface_code.a, c.surface_code.p_th).map_err(CliError::config)?;
        let ratio = sc.p0() / code.p_th();
        let q_max = sc.max_physical_qubits(&code).map_err(CliError::config)?;
        let nearest = grid.nearest(sc.scale(), ratio).map(to_value);
        json!({
            "s": sc.scale(),
            "ratio": ratio,
            "q_max": num(q_max),
            "regime": Regime::classify(q_max).label(),
            "nearest_cell": nearest,
        })
    } else {
        Value::Null
    };
    let mut counts = serde_json::Map::new();
    for cell in &grid.cells {
        let n = counts.entry(cell.regime.label()).or_insert(json!(0));
        *n = json!(n.as_u64().unwrap_or(0) + 1);
    }
    let result = json!({
        "levels": grid.levels,
        "s_values": grid.s_values,
        "ratio_values": grid.ratio_values,
        "cells": grid.cells.len(),
        "regime_counts": counts,
        "configured_point": configured,
    });
    Ok(Output {
        result,
        tables: vec![("regimes.csv", csv)],
    })
}

pub fn experiment(c: &Config) -> Result<RfeExperiment, CliError> {
    let r = &c.rfe;
    let n = &r.noise;
    let conflict = |field: &str| {
        CliError::Config(format!("rfe.noise.{field} is set but rfe.noise.kind is {:?}", n.kind))
    };
    if n.kind != NoiseKind::Gaussian && n.sigma != 0.0 {
        return Err(conflict("sigma"));
    }
    if n.kind != NoiseKind::ExpDecay && n.lambda != 0.0 {
        return Err(conflict("lambda"));
    }
    let noise = match n.kind {
        NoiseKind::Ideal => NoiseModel::Ideal,
        NoiseKind::Gaussian => NoiseModel::Gaussian {
            sigma: n.sigma,
            eta_resample: n.eta_resample,
        },
        NoiseKind::ExpDecay => NoiseModel::ExpDecay { lambda: n.lambda },
    };
    RfeExperiment::new(r.theta, r.depths, r.grid_size, r.shots, noise, r.seed).map_err(CliError::config)
}

pub fn run_rfe_sim(c: &Config) -> Result<Output, CliError> {
    let exp = experiment(c)?;
    let run = rfe::run_rfe(&exp)?;
    let csv = table(
        ["j", "re", "im", "abs"],
        run.spectrum
            .iter()
            .enumerate()
            .map(|(j, z)| [j.to_string(), fmt_f64(z.re), fmt_f64(z.im), fmt_f64(z.norm())]),
    )?;
    let failure = if c.rfe.trials > 0 {
        to_value(&rfe::estimate_failure_rate(&exp, c.rfe.trials)?)
    } else {
        Value::Null
    };
    let result = json!({
        "experiment": to_value(&exp),
        "epsilon": exp.epsilon(),
        "theta_hat": run.theta_hat,
        "peak_index": run.peak_index,
        "circular_error": rfe::circular_error(run.theta_hat, exp.theta),
        "failed": rfe::is_failure(run.theta_hat, exp.theta, exp.grid_size),
        "shots_used": run.shots_used,
        "clamped_shots": run.clamped_shots,
        "burden_reduction": rfe::burden_reduction_from_depth(exp.depths, exp.grid_size)?,
        "failure": failure,
    });
    Ok(Output {
        result,
        tables: vec![("spectrum.csv", csv)],
    })
}

pub fn run_rfe_calibrate(c: &Config) -> Result<Output, CliError> {
    let exp = experiment(c)?;
    let k = &c.calibrate;
    let opts = CalibrationOptions {
        trials_per_probe: k.trials_per_probe,
        ceiling: k.ceiling,
        max_retries: k.max_retries,
    };
    let cal = rfe::calibrate_samples(&exp, k.delta, &opts)?;
    let result = json!({
        "experiment": to_value(&exp),
        "options": to_value(&opts),
        "calibration": to_value(&cal),
    });
    Ok(Output {
        result,
        tables: Vec::new(),
    })
}

pub fn run_fit(c: &Config) -> Result<Output, CliError> {
    let f = &c.fit;
    let (series, generator) = if !f.input.is_empty() {
        let path = Path::new(&f.input);
        if !path.is_file() {
            return Err(CliError::Input(format!("calibration file {} not found", path.display())));
        }
        (load_calibration_csv(path)?, Value::Null)
    } else if !f.synthetic_sizes.is_empty() {
        let model = scalability(c)?;
        let series = CalibrationSeries::synthetic_noisy(&model, &f.synthetic_sizes, f.synthetic_noise, f.seed)
            .map_err(CliError::config)?;
        (series, to_value(&model))
    } else {
        return Err(CliError::Input(
            "fit needs --input <csv> or fit.synthetic_sizes".into(),
        ));
    };
    let outcomes = compare_fits(&series);
    let Some(best) = outcomes.iter().find(|o| o.report.is_some()) else {
        let reasons: Vec<String> = outcomes.iter().filter_map(|o| o.error.clone()).collect();
        return Err(CliError::Domain(format!("no model fits the data: {}", reasons.join("; "))));
    };
    let result = json!({
        "source": series.source_label,
        "rows": series.points.len(),
        "distinct_sizes": series.distinct_sizes(),
        "generating_model": generator,
        "best": to_value(&best.kind),
        "outcomes": to_value(&outcomes),
        "points": to_value(&series.points),
    });
    Ok(Output {
        result,
        tables: Vec::new(),
    })
}

pub fn run_msd() -> Output {
    Output {
        result: json!({ "factories": to_value(&msd_table()) }),
        tables: Vec::new(),
    }
}
