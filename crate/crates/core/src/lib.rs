//! Resource model for early fault-tolerant quantum computing.
//!
//! * [`models`]: scalability profiles, surface-code error suppression,
//!   algorithm gate counts and the minimal distillation footprints.
//! * [`reach`]: the largest logical qubit count a finite-scalability
//!   architecture supports, by closed form and by numeric search, plus
//!   contour and regime-grid generation.
//! * [`rfe`]: Monte-Carlo simulation of randomized Fourier phase estimation.
//! * [`calibration`]: fitting scalability profiles to device data.

#![allow(clippy::neg_cmp_op_on_partial_ord)] // `!(x > 0.0)` also rejects NaN

pub mod calibration;
pub mod error;
mod lambert;
pub mod models;
mod numeric;
pub mod reach;
pub mod rfe;
pub mod serde_float;

pub use error::{Error, Result};
