//! Reach of a finite-scalability architecture: the largest logical qubit
//! count whose algorithm still succeeds.
//!
//! The algorithm succeeds when
//!
//! ```text
//! sqrt(8 Q_L) ln(B Q_L^beta) <= sqrt(Q_phys) ln(p_th / p(Q_phys))
//! ```
//!
//! with burden factor `B = A alpha / p_C`. This is the per-operation bound
//! `p_L <= p_C / (alpha Q_L^beta)` rewritten with `Q_phys = 2 (d+1)^2 Q_L`
//! and a real-valued distance `d`.

use std::f64::consts::E;
use std::ops::RangeInclusive;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
pub use crate::lambert::{lambert_w0, lambert_w0_of_exp};
use crate::models::{
    physical_qubits_for_code, AlgorithmCostModel, ScalabilityKind, ScalabilityModel,
    SurfaceCodeModel,
};
use crate::numeric::bisect_threshold;

/// Relative bracket width at which `required_physical_qubits` stops.
pub const Q_PHYS_REL_TOL: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DistanceMode {
    /// Real-valued distance; the smooth surrogate used for contours.
    #[default]
    Continuous,
    /// Odd integer distances, checked against the per-operation bound.
    DiscreteOdd,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ReachProblem {
    pub scalability: ScalabilityModel,
    pub code: SurfaceCodeModel,
    pub cost: AlgorithmCostModel,
    pub distance_mode: DistanceMode,
}

impl ReachProblem {
    pub fn new(
        scalability: ScalabilityModel,
        code: SurfaceCodeModel,
        cost: AlgorithmCostModel,
        distance_mode: DistanceMode,
    ) -> Result<Self> {
        if scalability.p0() >= code.p_th() {
            return Err(Error::AboveThreshold {
                p0: scalability.p0(),
                p_th: code.p_th(),
            });
        }
        Ok(Self {
            scalability,
            code,
            cost,
            distance_mode,
        })
    }

    /// Same problem with every circuit shortened by `factor`.
    pub fn with_burden_reduction(&self, factor: f64) -> Result<Self> {
        Ok(Self {
            cost: self.cost.with_burden_reduction(factor)?,
            ..*self
        })
    }

    pub fn burden_factor(&self) -> f64 {
        self.cost.burden_factor(&self.code)
    }

    pub fn max_physical_qubits(&self) -> Result<f64> {
        self.scalability.max_physical_qubits(&self.code)
    }

    pub fn optimal_physical_qubits(&self) -> Result<f64> {
        self.scalability.optimal_physical_qubits(&self.code)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ReachMethod {
    ClosedForm,
    LowerBound,
    NumericSearch,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ReachResult {
    pub q_logical_max: u64,
    /// Unrounded value for the analytic methods; equal to `q_logical_max`
    /// for the numeric search.
    pub q_logical_value: f64,
    #[serde(with = "crate::serde_float")]
    pub q_phys_opt: f64,
    #[serde(with = "crate::serde_float")]
    pub q_phys_max: f64,
    pub method: ReachMethod,
}

/// Left-hand side `sqrt(8 Q_L) ln(B Q_L^beta)`.
///
/// Fails with [`Error::TriviallySatisfiable`] when `B Q_L^beta <= 1`: any
/// sub-threshold code then already meets the algorithm's error budget.
pub fn success_lhs(cost: &AlgorithmCostModel, code: &SurfaceCodeModel, q_logical: u64) -> Result<f64> {
    if q_logical == 0 {
        return Err(Error::Domain("logical qubit count must be at least 1".into()));
    }
    let q = q_logical as f64;
    let ln_arg = cost.ln_burden_factor(code) + cost.beta() * q.ln();
    if ln_arg <= 0.0 {
        return Err(Error::TriviallySatisfiable(ln_arg.exp()));
    }
    Ok((8.0 * q).sqrt() * ln_arg)
}

/// Right-hand side `sqrt(Q_phys) ln(p_th / p(Q_phys))`.
///
/// Past the maximal qubit count the value is negative; it is returned as-is
/// and the caller treats it as infeasible.
pub fn success_rhs(scalability: &ScalabilityModel, code: &SurfaceCodeModel, q_phys: f64) -> Result<f64> {
    if !(q_phys >= 1.0) {
        return Err(Error::Domain(format!("physical qubit count {q_phys} must be at least 1")));
    }
    if q_phys.is_infinite() {
        return Err(Error::Domain("physical qubit count must be finite".into()));
    }
    let gap = code.p_th().ln() - scalability.ln_rate(q_phys.ln());
    Ok(q_phys.sqrt() * gap)
}

/// Maximum of the right-hand side for a power law, `(2 / (e s)) (p_th/p0)^(s/2)`,
/// attained at the optimal qubit count.
pub fn power_law_rhs_maximum(scalability: &ScalabilityModel, code: &SurfaceCodeModel) -> Result<f64> {
    if scalability.kind() != ScalabilityKind::PowerLaw {
        return Err(Error::Unsupported("closed-form RHS maximum needs a power law".into()));
    }
    let s = scalability.scale();
    Ok(2.0 / (E * s) * (0.5 * scalability.ln_max_physical_qubits(code)?).exp())
}

/// Largest odd distance whose footprint fits in `q_phys`.
fn largest_odd_distance(q_phys: f64, q_logical: u64) -> Option<u32> {
    let m = (q_phys / (2.0 * q_logical as f64)).sqrt().floor();
    if !(m >= 2.0) {
        return None;
    }
    let m = m.min(f64::from(u32::MAX / 2)) as u32;
    let d = m - 1;
    Some(if d.is_multiple_of(2) { d - 1 } else { d })
}

/// Per-operation check at an odd distance: `p_L <= p_C' / G_C`.
fn odd_distance_succeeds(problem: &ReachProblem, q_logical: u64, d: u32) -> Result<bool> {
    let q_phys = physical_qubits_for_code(f64::from(d), q_logical)?;
    let p = problem.scalability.error_rate_at(q_phys)?;
    let p_l = problem.code.logical_error_rate_odd(p, d)?;
    Ok(p_l <= problem.cost.tolerable_logical_error(q_logical)?)
}

/// Whether `q_logical` logical qubits succeed on `q_phys` physical qubits.
///
/// Both modes require at least distance 1 (`q_phys >= 8 q_logical`). In
/// continuous mode the surrogate inequality is compared directly; a
/// trivially satisfiable left side succeeds whenever the hardware is
/// sub-threshold. In discrete mode `q_phys` is first rounded down to the
/// footprint of the largest odd distance that fits.
pub fn satisfies_success_condition(problem: &ReachProblem, q_logical: u64, q_phys: f64) -> Result<bool> {
    if q_logical == 0 {
        return Err(Error::Domain("logical qubit count must be at least 1".into()));
    }
    match problem.distance_mode {
        DistanceMode::Continuous => {
            if q_phys < 8.0 * q_logical as f64 {
                return Ok(false);
            }
            let rhs = success_rhs(&problem.scalability, &problem.code, q_phys)?;
            if rhs < 0.0 {
                return Ok(false);
            }
            match success_lhs(&problem.cost, &problem.code, q_logical) {
                Ok(lhs) => Ok(lhs <= rhs),
                Err(Error::TriviallySatisfiable(_)) => Ok(true),
                Err(e) => Err(e),
            }
        }
        DistanceMode::DiscreteOdd => match largest_odd_distance(q_phys, q_logical) {
            None => Ok(false),
            Some(d) => odd_distance_succeeds(problem, q_logical, d),
        },
    }
}

fn require_power_law(problem: &ReachProblem) -> Result<()> {
    if problem.scalability.kind() != ScalabilityKind::PowerLaw {
        return Err(Error::Unsupported(
            "closed-form reach assumes a power-law scalability model; use the numeric search".into(),
        ));
    }
    if problem.scalability.is_infinite() {
        return Err(Error::Unbounded("reach is unbounded for infinite scalability".into()));
    }
    if problem.cost.beta() <= 0.0 {
        return Err(Error::Domain("closed-form reach needs beta > 0".into()));
    }
    Ok(())
}

/// `Q_opt / (8 s^2 beta^2 W(sqrt(B^(1/beta) Q_opt / (8 s^2 beta^2)))^2)`.
pub fn max_logical_qubits_closed_form(problem: &ReachProblem) -> Result<f64> {
    require_power_law(problem)?;
    let s = problem.scalability.scale();
    let beta = problem.cost.beta();
    let ln_c = (8.0 * s * s * beta * beta).ln();
    let ln_q_opt = problem.scalability.ln_optimal_physical_qubits(&problem.code)?;
    let ln_arg = 0.5 * (problem.cost.ln_burden_factor(&problem.code) / beta + ln_q_opt - ln_c);
    let w = if ln_arg > 1.0 {
        lambert_w0_of_exp(ln_arg)?
    } else {
        lambert_w0(ln_arg.exp())?
    };
    Ok((ln_q_opt - ln_c).exp() / (w * w))
}

/// Lower bound from `W(x) <= ln(x)`:
/// `X / (2 e^2 s^2 beta^2 ln(B^(1/beta) X / (8 e^2 s^2 beta^2))^2)` with
/// `X = (p_th/p0)^s`.
///
/// Valid only when the logarithm's argument is at least `e^2`, since the
/// inequality on W requires its own argument to be at least `e`.
pub fn max_logical_qubits_lower_bound(problem: &ReachProblem) -> Result<f64> {
    require_power_law(problem)?;
    let s = problem.scalability.scale();
    let beta = problem.cost.beta();
    let ln_x = problem.scalability.ln_max_physical_qubits(&problem.code)?;
    let s2b2 = s * s * beta * beta;
    let ln_y = problem.cost.ln_burden_factor(&problem.code) / beta + ln_x - (8.0 * E * E * s2b2).ln();
    if ln_y < 2.0 {
        return Err(Error::Domain(format!(
            "lower bound needs a log argument of at least e^2, got exp({ln_y})"
        )));
    }
    Ok((ln_x - (2.0 * E * E * s2b2).ln()).exp() / (ln_y * ln_y))
}

/// Physical qubit count at which reach is evaluated: the maximizer of the
/// right-hand side.
fn reach_operating_point(problem: &ReachProblem) -> Result<f64> {
    let q = problem.optimal_physical_qubits()?;
    if !q.is_finite() {
        return Err(Error::Unbounded("reach is unbounded for infinite scalability".into()));
    }
    Ok(q)
}

/// Largest integer `Q_L` satisfying the success condition at the optimal
/// physical qubit count. Returns 0 when even one logical qubit fails.
pub fn max_logical_qubits_numeric(problem: &ReachProblem) -> Result<u64> {
    let q_phys = reach_operating_point(problem)?;
    let feasible = |q: u64| satisfies_success_condition(problem, q, q_phys);
    if !feasible(1)? {
        return Ok(0);
    }
    // Distance >= 1 caps Q_L at Q_phys / 8.
    let cap = (q_phys / 8.0).floor();
    if cap >= 1e18 {
        return Err(Error::Unbounded(format!("operating point {q_phys} too large to search")));
    }
    let cap = cap as u64;
    let mut lo = 1u64;
    let mut hi = 2u64;
    while hi <= cap && feasible(hi)? {
        lo = hi;
        hi = hi.saturating_mul(2);
    }
    let mut hi = hi.min(cap + 1);
    while hi - lo > 1 {
        let mid = lo + (hi - lo) / 2;
        if feasible(mid)? {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(lo)
}

pub fn solve(problem: &ReachProblem, method: ReachMethod) -> Result<ReachResult> {
    let q_phys_opt = problem.optimal_physical_qubits()?;
    let q_phys_max = problem.max_physical_qubits()?;
    let q_logical_value = match method {
        ReachMethod::ClosedForm => max_logical_qubits_closed_form(problem)?,
        ReachMethod::LowerBound => max_logical_qubits_lower_bound(problem)?,
        ReachMethod::NumericSearch => max_logical_qubits_numeric(problem)? as f64,
    };
    Ok(ReachResult {
        q_logical_max: q_logical_value.floor() as u64,
        q_logical_value,
        q_phys_opt,
        q_phys_max,
        method,
    })
}

/// Smallest physical qubit count running `q_logical` logical qubits, or
/// `None` when no count works.
///
/// Continuous mode bisects between the distance-1 footprint and the
/// optimal count. Discrete mode walks odd distances upwards until the
/// per-operation bound holds or the hardware crosses threshold.
pub fn required_physical_qubits(problem: &ReachProblem, q_logical: u64) -> Result<Option<f64>> {
    match problem.distance_mode {
        DistanceMode::Continuous => required_continuous(problem, q_logical),
        DistanceMode::DiscreteOdd => required_discrete(problem, q_logical),
    }
}

fn required_continuous(problem: &ReachProblem, q_logical: u64) -> Result<Option<f64>> {
    let lo = physical_qubits_for_code(1.0, q_logical)?;
    let pred = |q: f64| satisfies_success_condition(problem, q_logical, q).unwrap_or(false);
    if pred(lo) {
        return Ok(Some(lo));
    }
    let hi = match problem.optimal_physical_qubits()? {
        q if q.is_finite() => q,
        _ => {
            // Infinite scalability: grow until the condition holds.
            let mut hi = 2.0 * lo;
            while !pred(hi) {
                hi *= 2.0;
                if hi > 1e300 {
                    return Ok(None);
                }
            }
            hi
        }
    };
    if hi < lo || !pred(hi) {
        return Ok(None);
    }
    Ok(Some(bisect_threshold(lo, hi, Q_PHYS_REL_TOL, pred)))
}

fn required_discrete(problem: &ReachProblem, q_logical: u64) -> Result<Option<f64>> {
    let p_th = problem.code.p_th();
    let mut d = 1u32;
    while d < 2_000_000 {
        let q_phys = physical_qubits_for_code(f64::from(d), q_logical)?;
        if problem.scalability.error_rate_at(q_phys)? >= p_th {
            return Ok(None);
        }
        if odd_distance_succeeds(problem, q_logical, d)? {
            return Ok(Some(q_phys));
        }
        d += 2;
    }
    Ok(None)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ContourPoint {
    pub q_logical: u64,
    pub q_phys_required: Option<f64>,
    pub feasible: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ContourSeries {
    pub scalability_label: String,
    pub points: Vec<ContourPoint>,
}

impl ContourSeries {
    /// Last feasible logical qubit count.
    pub fn reach(&self) -> Option<u64> {
        self.points.iter().filter(|p| p.feasible).map(|p| p.q_logical).max()
    }
}

pub fn scalability_label(model: &ScalabilityModel) -> String {
    match model.kind() {
        ScalabilityKind::PowerLaw => format!("power_law s={} p0={}", model.scale(), model.p0()),
        ScalabilityKind::Logarithmic => {
            format!("logarithmic sigma={} p0={}", model.scale(), model.p0())
        }
    }
}

/// Required physical qubits along `range` sampled every `step` logical qubits.
/// Points are evaluated in parallel; output order follows the range.
pub fn contour(problem: &ReachProblem, range: RangeInclusive<u64>, step: u64) -> Result<ContourSeries> {
    if step == 0 {
        return Err(Error::Domain("contour step must be positive".into()));
    }
    if range.is_empty() || *range.start() == 0 {
        return Err(Error::Domain(format!(
            "contour range {}..={} must be non-empty and start at 1 or above",
            range.start(),
            range.end()
        )));
    }
    let qs: Vec<u64> = range.step_by(step as usize).collect();
    let points = qs
        .par_iter()
        .map(|&q_logical| {
            let q_phys_required = required_physical_qubits(problem, q_logical)?;
            Ok(ContourPoint {
                q_logical,
                q_phys_required,
                feasible: q_phys_required.is_some(),
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(ContourSeries {
        scalability_label: scalability_label(&problem.scalability),
        points,
    })
}

/// Contour levels of the maximal qubit count bounding the two transition
/// bands: NISQ to EFTQC over `1e2..1e4`, EFTQC to FTQC over `1e6..1e8`.
pub const REGIME_LEVELS: [f64; 4] = [1e2, 1e4, 1e6, 1e8];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Regime {
    #[serde(rename = "NISQ")]
    Nisq,
    #[serde(rename = "NISQ-EFTQC")]
    NisqToEftqc,
    #[serde(rename = "EFTQC")]
    Eftqc,
    #[serde(rename = "EFTQC-FTQC")]
    EftqcToFtqc,
    #[serde(rename = "FTQC")]
    Ftqc,
}

impl Regime {
    /// Advisory label for a maximal physical qubit count.
    pub fn classify(q_max: f64) -> Self {
        let [a, b, c, d] = REGIME_LEVELS;
        match q_max {
            q if q < a => Regime::Nisq,
            q if q < b => Regime::NisqToEftqc,
            q if q < c => Regime::Eftqc,
            q if q < d => Regime::EftqcToFtqc,
            _ => Regime::Ftqc,
        }
    }

    pub fn label(&self) -> &'static str {
        match self {
            Regime::Nisq => "NISQ",
            Regime::NisqToEftqc => "NISQ-EFTQC",
            Regime::Eftqc => "EFTQC",
            Regime::EftqcToFtqc => "EFTQC-FTQC",
            Regime::Ftqc => "FTQC",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RegimeCell {
    pub s: f64,
    pub ratio: f64,
    #[serde(with = "crate::serde_float")]
    pub q_max: f64,
    pub regime: Regime,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RegimesGrid {
    pub s_values: Vec<f64>,
    pub ratio_values: Vec<f64>,
    /// Row-major: all ratios for the first `s`, then the next `s`.
    pub cells: Vec<RegimeCell>,
    pub levels: [f64; 4],
}

impl RegimesGrid {
    pub fn cell(&self, s_index: usize, ratio_index: usize) -> &RegimeCell {
        &self.cells[s_index * self.ratio_values.len() + ratio_index]
    }

    /// Cell closest to `(s, ratio)`.
    pub fn nearest(&self, s: f64, ratio: f64) -> Option<&RegimeCell> {
        self.cells.iter().min_by(|a, b| {
            let da = (a.s - s).abs() + (a.ratio - ratio).abs();
            let db = (b.s - s).abs() + (b.ratio - ratio).abs();
            da.total_cmp(&db)
        })
    }
}

fn linspace(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    if n == 1 {
        return vec![lo];
    }
    let mut v: Vec<f64> = (0..n)
        .map(|i| lo + (hi - lo) * i as f64 / (n - 1) as f64)
        .collect();
    v[n - 1] = hi;
    v
}

/// `(p_th/p0)^s = ratio^(-s)` over a linear grid in `s` and in `p0/p_th`.
pub fn regimes_grid(
    s_range: (f64, f64),
    ratio_range: (f64, f64),
    resolution: (usize, usize),
) -> Result<RegimesGrid> {
    let (s_lo, s_hi) = s_range;
    let (r_lo, r_hi) = ratio_range;
    if resolution.0 == 0 || resolution.1 == 0 {
        return Err(Error::Domain("grid resolution must be at least 1x1".into()));
    }
    if !(s_lo > 0.0 && s_lo <= s_hi && s_hi.is_finite()) {
        return Err(Error::Domain(format!("invalid scalability range [{s_lo}, {s_hi}]")));
    }
    if !(r_lo > 0.0 && r_lo <= r_hi && r_hi <= 1.0) {
        return Err(Error::Domain(format!("ratio range [{r_lo}, {r_hi}] must lie in (0, 1]")));
    }
    let s_values = linspace(s_lo, s_hi, resolution.0);
    let ratio_values = linspace(r_lo, r_hi, resolution.1);
    let cells = s_values
        .par_iter()
        .flat_map_iter(|&s| {
            ratio_values.iter().map(move |&ratio| {
                let q_max = ratio.powf(-s);
                RegimeCell {
                    s,
                    ratio,
                    q_max,
                    regime: Regime::classify(q_max),
                }
            })
        })
        .collect();
    Ok(RegimesGrid {
        s_values,
        ratio_values,
        cells,
        levels: REGIME_LEVELS,
    })
}
