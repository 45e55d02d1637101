use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameter `{name}` = {value}: {reason}")]
    InvalidParameter {
        name: &'static str,
        value: f64,
        reason: &'static str,
    },

    /// The base error rate is at or above threshold, so no qubit count is
    /// ever sub-threshold.
    #[error("base error rate {p0} is not below threshold {p_th}; no sub-threshold regime exists")]
    AboveThreshold { p0: f64, p_th: f64 },

    #[error("domain error: {0}")]
    Domain(String),

    /// The algorithm tolerance exceeds the code prefactor, so the logarithm
    /// in the success condition is non-positive.
    #[error("success condition is trivially satisfied: burden term {0} <= 1")]
    TriviallySatisfiable(f64),

    #[error("unsupported model: {0}")]
    Unsupported(String),

    #[error("unbounded: {0}")]
    Unbounded(String),

    #[error("sample calibration did not converge below the ceiling of {ceiling} shots")]
    NonConvergence { ceiling: u64 },

    #[error("fit failed: {0}")]
    Fit(String),

    #[error("model inapplicable to data: {0}")]
    ModelInapplicable(String),

    #[error("{path}: malformed header: {message}")]
    MalformedHeader { path: PathBuf, message: String },

    #[error("{path}: no data rows")]
    EmptyBody { path: PathBuf },

    #[error("{path}:{line}: {message}")]
    InvalidRow {
        path: PathBuf,
        line: u64,
        message: String,
    },

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

/// Rejects NaN and infinities.
pub(crate) fn finite(name: &'static str, value: f64) -> Result<f64> {
    if value.is_finite() {
        Ok(value)
    } else {
        Err(Error::InvalidParameter {
            name,
            value,
            reason: "must be finite",
        })
    }
}

pub(crate) fn open_probability(name: &'static str, value: f64) -> Result<f64> {
    if value > 0.0 && value < 1.0 {
        Ok(value)
    } else {
        Err(Error::InvalidParameter {
            name,
            value,
            reason: "must lie in (0, 1)",
        })
    }
}

pub(crate) fn positive(name: &'static str, value: f64) -> Result<f64> {
    if value > 0.0 && !value.is_nan() {
        Ok(value)
    } else {
        Err(Error::InvalidParameter {
            name,
            value,
            reason: "must be positive",
        })
    }
}
