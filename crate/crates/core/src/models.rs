//! Closed-form hardware, code and algorithm models.
//!
//! A [`ScalabilityModel`] maps a requested physical qubit count to the
//! worst-case physical error rate. A [`SurfaceCodeModel`] turns that rate and
//! a code distance into a logical error rate. An [`AlgorithmCostModel`] says
//! how many logical operations the algorithm needs and how much total error
//! it tolerates.

use std::f64::consts::E;

use serde::{Deserialize, Serialize};

use crate::error::{finite, open_probability, positive, Error, Result};
use crate::numeric::scan_then_refine_max;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ScalabilityKind {
    /// `p0 * Q^(1/s)`
    PowerLaw,
    /// `p0 * (1 + ln(Q) / sigma)`
    Logarithmic,
}

/// Worst-case physical error rate as a function of physical qubit count.
///
/// `scale` is `s` for the power law and `sigma` for the logarithmic profile.
/// `scale = +inf` encodes infinite scalability: the error rate is `p0` at
/// every size.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawScalability")]
pub struct ScalabilityModel {
    kind: ScalabilityKind,
    p0: f64,
    #[serde(with = "crate::serde_float")]
    scale: f64,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawScalability {
    kind: ScalabilityKind,
    p0: f64,
    #[serde(with = "crate::serde_float")]
    scale: f64,
}

impl TryFrom<RawScalability> for ScalabilityModel {
    type Error = Error;

    fn try_from(raw: RawScalability) -> Result<Self> {
        Self::new(raw.kind, raw.p0, raw.scale)
    }
}

impl ScalabilityModel {
    pub fn new(kind: ScalabilityKind, p0: f64, scale: f64) -> Result<Self> {
        open_probability("p0", finite("p0", p0)?)?;
        positive("scale", scale)?;
        Ok(Self { kind, p0, scale })
    }

    pub fn power_law(p0: f64, s: f64) -> Result<Self> {
        Self::new(ScalabilityKind::PowerLaw, p0, s)
    }

    pub fn logarithmic(p0: f64, sigma: f64) -> Result<Self> {
        Self::new(ScalabilityKind::Logarithmic, p0, sigma)
    }

    /// Scale-independent error rate (`s = inf`).
    pub fn infinite(p0: f64) -> Result<Self> {
        Self::power_law(p0, f64::INFINITY)
    }

    pub fn kind(&self) -> ScalabilityKind {
        self.kind
    }

    pub fn p0(&self) -> f64 {
        self.p0
    }

    pub fn scale(&self) -> f64 {
        self.scale
    }

    pub fn is_infinite(&self) -> bool {
        self.scale.is_infinite()
    }

    /// Error rate at an integer qubit count. Values at or above 1 are
    /// returned unchanged; they mean no valid operation is possible.
    pub fn physical_error_rate(&self, q_phys: u64) -> Result<f64> {
        if q_phys == 0 {
            return Err(Error::Domain("physical qubit count must be at least 1".into()));
        }
        self.error_rate_at(q_phys as f64)
    }

    /// Continuous-argument version of [`Self::physical_error_rate`], for
    /// `q_phys >= 1`.
    pub fn error_rate_at(&self, q_phys: f64) -> Result<f64> {
        if !(q_phys >= 1.0) || !q_phys.is_finite() {
            return Err(Error::Domain(format!(
                "physical qubit count {q_phys} must be finite and at least 1"
            )));
        }
        Ok(self.rate_unchecked(q_phys))
    }

    pub(crate) fn rate_unchecked(&self, q_phys: f64) -> f64 {
        match self.kind {
            ScalabilityKind::PowerLaw => self.p0 * q_phys.powf(1.0 / self.scale),
            ScalabilityKind::Logarithmic => self.p0 * (1.0 + q_phys.ln() / self.scale),
        }
    }

    /// Natural log of the error rate, stable for very large `q_phys`.
    pub(crate) fn ln_rate(&self, ln_q: f64) -> f64 {
        match self.kind {
            ScalabilityKind::PowerLaw => self.p0.ln() + ln_q / self.scale,
            ScalabilityKind::Logarithmic => self.p0.ln() + (ln_q / self.scale).ln_1p(),
        }
    }

    fn check_sub_threshold(&self, code: &SurfaceCodeModel) -> Result<()> {
        if self.p0 < code.p_th {
            Ok(())
        } else {
            Err(Error::AboveThreshold {
                p0: self.p0,
                p_th: code.p_th,
            })
        }
    }

    /// Natural log of [`Self::max_physical_qubits`]; finite where the value
    /// itself would overflow.
    pub fn ln_max_physical_qubits(&self, code: &SurfaceCodeModel) -> Result<f64> {
        self.check_sub_threshold(code)?;
        Ok(match self.kind {
            ScalabilityKind::PowerLaw => self.scale * (code.p_th / self.p0).ln(),
            ScalabilityKind::Logarithmic => self.scale * (code.p_th - self.p0) / self.p0,
        })
    }

    /// Qubit count at which the physical error rate reaches threshold.
    ///
    /// Power law: `(p_th/p0)^s`. Logarithmic: `exp(sigma (p_th - p0) / p0)`.
    pub fn max_physical_qubits(&self, code: &SurfaceCodeModel) -> Result<f64> {
        let ln_max = self.ln_max_physical_qubits(code)?;
        Ok(match self.kind {
            // Direct power keeps exact powers of ten exact.
            ScalabilityKind::PowerLaw => (code.p_th / self.p0).powf(self.scale),
            ScalabilityKind::Logarithmic => ln_max.exp(),
        })
    }

    /// Natural log of [`Self::optimal_physical_qubits`].
    pub fn ln_optimal_physical_qubits(&self, code: &SurfaceCodeModel) -> Result<f64> {
        let ln_max = self.ln_max_physical_qubits(code)?;
        match self.kind {
            ScalabilityKind::PowerLaw => Ok(ln_max - 2.0),
            ScalabilityKind::Logarithmic => {
                if ln_max.is_infinite() {
                    return Ok(f64::INFINITY);
                }
                // Maximize ln of sqrt(Q) * ln(p_th / p(Q)) over u = ln Q.
                let objective = |u: f64| {
                    let gap = code.p_th.ln() - self.ln_rate(u);
                    if gap > 0.0 {
                        0.5 * u + gap.ln()
                    } else {
                        f64::NEG_INFINITY
                    }
                };
                Ok(scan_then_refine_max(0.0, ln_max, 512, 1e-12 * ln_max.max(1.0), objective))
            }
        }
    }

    /// Qubit count maximizing the right-hand side of the success condition,
    /// `sqrt(Q) * ln(p_th / p(Q))`.
    ///
    /// Power law: `(p_th/p0)^s / e^2`. Logarithmic: found numerically.
    pub fn optimal_physical_qubits(&self, code: &SurfaceCodeModel) -> Result<f64> {
        match self.kind {
            ScalabilityKind::PowerLaw => Ok(self.max_physical_qubits(code)? / (E * E)),
            ScalabilityKind::Logarithmic => Ok(self.ln_optimal_physical_qubits(code)?.exp()),
        }
    }
}

/// Surface-code error suppression `p_L = A (p / p_th)^((d+1)/2)` and the
/// `2 (d+1)^2` qubits-per-logical-qubit overhead.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawSurfaceCode")]
pub struct SurfaceCodeModel {
    #[serde(rename = "A")]
    a: f64,
    p_th: f64,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawSurfaceCode {
    #[serde(rename = "A")]
    a: f64,
    p_th: f64,
}

impl TryFrom<RawSurfaceCode> for SurfaceCodeModel {
    type Error = Error;

    fn try_from(raw: RawSurfaceCode) -> Result<Self> {
        Self::new(raw.a, raw.p_th)
    }
}

impl Default for SurfaceCodeModel {
    fn default() -> Self {
        Self { a: 0.1, p_th: 0.01 }
    }
}

impl SurfaceCodeModel {
    pub fn new(a: f64, p_th: f64) -> Result<Self> {
        positive("A", finite("A", a)?)?;
        open_probability("p_th", p_th)?;
        Ok(Self { a, p_th })
    }

    pub fn a(&self) -> f64 {
        self.a
    }

    pub fn p_th(&self) -> f64 {
        self.p_th
    }

    /// Logical error rate per operation at real-valued distance `d >= 1`.
    /// Results above 1 are returned as-is.
    pub fn logical_error_rate(&self, p_phys: f64, d: f64) -> Result<f64> {
        if !(p_phys > 0.0) || !p_phys.is_finite() {
            return Err(Error::Domain(format!("physical error rate {p_phys} must be positive")));
        }
        if !(d >= 1.0) || !d.is_finite() {
            return Err(Error::Domain(format!("code distance {d} must be at least 1")));
        }
        Ok(self.a * (p_phys / self.p_th).powf(0.5 * (d + 1.0)))
    }

    /// Discrete-mode variant requiring an odd integer distance.
    pub fn logical_error_rate_odd(&self, p_phys: f64, d: u32) -> Result<f64> {
        if d.is_multiple_of(2) {
            return Err(Error::Domain(format!("code distance {d} must be odd")));
        }
        self.logical_error_rate(p_phys, f64::from(d))
    }
}

/// Physical qubits for `q_logical` logical qubits at distance `d`:
/// `2 (d+1)^2 q_logical`.
pub fn physical_qubits_for_code(d: f64, q_logical: u64) -> Result<f64> {
    if !(d >= 1.0) || !d.is_finite() {
        return Err(Error::Domain(format!("code distance {d} must be at least 1")));
    }
    if q_logical == 0 {
        return Err(Error::Domain("logical qubit count must be at least 1".into()));
    }
    Ok(2.0 * (d + 1.0) * (d + 1.0) * q_logical as f64)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ErrorBudgetMode {
    /// `p_L <= p_C / G_C`
    #[default]
    UnionBound,
    /// `p_L <= ln(1 / (1 - p_C)) / G_C`, tighter as `p_C` approaches 1.
    LogRefined,
}

/// Gate count `G_C = alpha * Q_L^beta` and tolerable circuit error `p_C`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawAlgorithmCost")]
pub struct AlgorithmCostModel {
    alpha: f64,
    beta: f64,
    #[serde(rename = "p_C")]
    p_c: f64,
    error_budget_mode: ErrorBudgetMode,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawAlgorithmCost {
    alpha: f64,
    beta: f64,
    #[serde(rename = "p_C")]
    p_c: f64,
    #[serde(default)]
    error_budget_mode: ErrorBudgetMode,
}

impl TryFrom<RawAlgorithmCost> for AlgorithmCostModel {
    type Error = Error;

    fn try_from(raw: RawAlgorithmCost) -> Result<Self> {
        Self::new(raw.alpha, raw.beta, raw.p_c, raw.error_budget_mode)
    }
}

impl Default for AlgorithmCostModel {
    /// QPE gate-count fit with `p_C = 0.1`.
    fn default() -> Self {
        Self {
            alpha: 4.12e9,
            beta: 0.515,
            p_c: 0.1,
            error_budget_mode: ErrorBudgetMode::UnionBound,
        }
    }
}

impl AlgorithmCostModel {
    /// `beta = 0` is accepted: it models a gate count independent of size.
    pub fn new(alpha: f64, beta: f64, p_c: f64, error_budget_mode: ErrorBudgetMode) -> Result<Self> {
        positive("alpha", finite("alpha", alpha)?)?;
        if !(beta >= 0.0) || !beta.is_finite() {
            return Err(Error::InvalidParameter {
                name: "beta",
                value: beta,
                reason: "must be finite and non-negative",
            });
        }
        open_probability("p_C", p_c)?;
        Ok(Self {
            alpha,
            beta,
            p_c,
            error_budget_mode,
        })
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn beta(&self) -> f64 {
        self.beta
    }

    pub fn p_c(&self) -> f64 {
        self.p_c
    }

    pub fn error_budget_mode(&self) -> ErrorBudgetMode {
        self.error_budget_mode
    }

    pub fn with_error_budget_mode(mut self, mode: ErrorBudgetMode) -> Self {
        self.error_budget_mode = mode;
        self
    }

    /// Divides `alpha` by `factor`, i.e. shortens every circuit by that
    /// factor. The burden factor drops by exactly the same ratio.
    pub fn with_burden_reduction(self, factor: f64) -> Result<Self> {
        positive("burden reduction", finite("burden reduction", factor)?)?;
        Self::new(self.alpha / factor, self.beta, self.p_c, self.error_budget_mode)
    }

    pub fn gate_count(&self, q_logical: u64) -> Result<f64> {
        if q_logical == 0 {
            return Err(Error::Domain("logical qubit count must be at least 1".into()));
        }
        Ok(self.alpha * (q_logical as f64).powf(self.beta))
    }

    /// Total circuit error the budget may spend: `p_C` or `ln(1/(1-p_C))`.
    pub fn effective_tolerance(&self) -> f64 {
        match self.error_budget_mode {
            ErrorBudgetMode::UnionBound => self.p_c,
            ErrorBudgetMode::LogRefined => -(-self.p_c).ln_1p(),
        }
    }

    /// Largest per-operation logical error rate the algorithm tolerates.
    pub fn tolerable_logical_error(&self, q_logical: u64) -> Result<f64> {
        Ok(self.effective_tolerance() / self.gate_count(q_logical)?)
    }

    /// `A * alpha / p_C` (or with `ln(1/(1-p_C))` in place of `p_C`).
    pub fn burden_factor(&self, code: &SurfaceCodeModel) -> f64 {
        code.a * self.alpha / self.effective_tolerance()
    }

    /// Natural log of [`Self::burden_factor`], without overflow for tiny `p_C`.
    pub fn ln_burden_factor(&self, code: &SurfaceCodeModel) -> f64 {
        code.a.ln() + self.alpha.ln() - self.effective_tolerance().ln()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MsdQuality {
    High,
    Lower,
}

/// Smallest 15-to-1 distillation factory plus one distance-3 logical qubit.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MsdFactoryRecord {
    pub quality: MsdQuality,
    pub name: String,
    pub p_phys: f64,
    pub q_factory: u64,
    pub p_out: f64,
    pub q_min_eftqc: u64,
    #[serde(rename = "p_L")]
    pub p_l: f64,
}

pub fn msd_minimum_footprint(quality: MsdQuality) -> MsdFactoryRecord {
    match quality {
        MsdQuality::High => MsdFactoryRecord {
            quality,
            name: "(15-to-1)_{5,3,3}".into(),
            p_phys: 1e-4,
            q_factory: 522,
            p_out: 4.7e-6,
            q_min_eftqc: 554,
            p_l: 1e-5,
        },
        MsdQuality::Lower => MsdFactoryRecord {
            quality,
            name: "(15-to-1)_{7,3,3}".into(),
            p_phys: 1e-3,
            q_factory: 810,
            p_out: 5.4e-4,
            q_min_eftqc: 842,
            p_l: 1e-3,
        },
    }
}

/// Both built-in factory records, high quality first.
pub fn msd_table() -> [MsdFactoryRecord; 2] {
    [
        msd_minimum_footprint(MsdQuality::High),
        msd_minimum_footprint(MsdQuality::Lower),
    ]
}
