//! Principal branch of the Lambert W function.

use std::f64::consts::E;

use crate::error::{Error, Result};

const BRANCH_POINT: f64 = -1.0 / E;

/// Solves `w * exp(w) = x` on the principal branch (`w >= -1`).
///
/// Halley iteration from `ln x - ln ln x` when `x > e`, from the branch-point
/// series near `-1/e`, and from `x / (1 + x)` elsewhere.
pub fn lambert_w0(x: f64) -> Result<f64> {
    if x.is_nan() {
        return Err(Error::Domain("Lambert W of NaN".into()));
    }
    if x < BRANCH_POINT {
        // -1/e is not exactly representable; allow the rounding slop.
        if x >= BRANCH_POINT - 4.0 * f64::EPSILON {
            return Ok(-1.0);
        }
        return Err(Error::Domain(format!("Lambert W0 undefined for x = {x} < -1/e")));
    }
    if x == 0.0 {
        return Ok(0.0);
    }
    if x.is_infinite() {
        return Ok(f64::INFINITY);
    }

    let p2 = 2.0 * (E * x + 1.0);
    if p2 <= 0.0 {
        return Ok(-1.0);
    }
    let guess = if x > E {
        let l = x.ln();
        l - l.ln()
    } else if x < -0.25 {
        let p = p2.sqrt();
        -1.0 + p - p * p / 3.0 + 11.0 / 72.0 * p * p * p
    } else {
        x / (1.0 + x)
    };
    Ok(halley(x, guess))
}

fn halley(x: f64, mut w: f64) -> f64 {
    for _ in 0..64 {
        let ew = w.exp();
        let f = w * ew - x;
        if f == 0.0 {
            break;
        }
        let wp1 = w + 1.0;
        if wp1 == 0.0 {
            break;
        }
        let denom = ew * wp1 - (w + 2.0) * f / (2.0 * wp1);
        let step = f / denom;
        if !step.is_finite() {
            break;
        }
        let next = (w - step).max(-1.0);
        if (next - w).abs() <= 4.0 * f64::EPSILON * (1.0 + next.abs()) {
            w = next;
            break;
        }
        w = next;
    }
    w
}

/// `W(exp(ln_x))`, usable when `exp(ln_x)` itself overflows.
///
/// Solves `w + ln w = ln_x` by Newton iteration; requires `ln_x > 1`.
pub fn lambert_w0_of_exp(ln_x: f64) -> Result<f64> {
    if ln_x <= 700.0 {
        return lambert_w0(ln_x.exp());
    }
    let mut w = ln_x - ln_x.ln();
    for _ in 0..64 {
        let f = w + w.ln() - ln_x;
        let step = f / (1.0 + 1.0 / w);
        w -= step;
        if step.abs() <= 4.0 * f64::EPSILON * w {
            break;
        }
    }
    Ok(w)
}

#[cfg(test)]
mod tests {
    use super::*;

    /// Independent oracle: fixed-point iteration `w <- ln(x) - ln(w)`,
    /// averaged to damp oscillation.
    fn fixed_point_w(x: f64) -> f64 {
        let mut w = 1.0f64;
        for _ in 0..10_000 {
            w = 0.5 * (w + (x.ln() - w.ln()));
        }
        w
    }

    #[test]
    fn trivial_points() {
        assert_eq!(lambert_w0(0.0).unwrap(), 0.0);
        assert!((lambert_w0(E).unwrap() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn omega_constant() {
        let oracle = fixed_point_w(1.0);
        assert!((oracle - 0.567_143_290_409_783_8).abs() < 1e-15);
        assert!((lambert_w0(1.0).unwrap() - oracle).abs() < 1e-15);
    }

    #[test]
    fn branch_point_and_domain() {
        assert!((lambert_w0(BRANCH_POINT).unwrap() + 1.0).abs() < 1e-6);
        assert!(lambert_w0(-0.5).is_err());
        assert!(lambert_w0(f64::NAN).is_err());
    }

    #[test]
    fn negative_branch_residuals() {
        for i in 1..200 {
            let x = BRANCH_POINT + (i as f64) * (-BRANCH_POINT) / 200.0;
            let w = lambert_w0(x).unwrap();
            assert!(w >= -1.0);
            assert!((w * w.exp() - x).abs() <= 1e-12, "x = {x}");
        }
    }

    #[test]
    fn log_grid_residuals() {
        for i in 0..=300 {
            let x = 10f64.powf(-6.0 + 21.0 * i as f64 / 300.0);
            let w = lambert_w0(x).unwrap();
            assert!((w * w.exp() - x).abs() <= 1e-12 * x.max(1.0), "x = {x}");
        }
    }

    #[test]
    fn exp_argument_agrees_and_extends() {
        for ln_x in [2.0, 50.0, 300.0, 699.0] {
            let direct = lambert_w0(f64::exp(ln_x)).unwrap();
            assert!((lambert_w0_of_exp(ln_x).unwrap() - direct).abs() < 1e-12 * direct);
        }
        let w = lambert_w0_of_exp(5000.0).unwrap();
        assert!((w + w.ln() - 5000.0).abs() < 1e-10);
    }
}
