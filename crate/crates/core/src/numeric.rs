//! Small scalar solvers shared by the reach and model code.

/// Smallest `x` in `[lo, hi]` with `pred(x)` true, assuming `pred` is
/// monotone (false then true) on the bracket and `pred(hi)` holds.
///
/// Stops once the bracket is narrower than `rel_tol * hi`.
pub fn bisect_threshold<F>(mut lo: f64, mut hi: f64, rel_tol: f64, mut pred: F) -> f64
where
    F: FnMut(f64) -> bool,
{
    debug_assert!(lo <= hi);
    for _ in 0..400 {
        if hi - lo <= rel_tol * hi.abs() {
            break;
        }
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if pred(mid) {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    hi
}

const INV_PHI: f64 = 0.618_033_988_749_894_9;

/// Golden-section search for the maximizer of a unimodal `f` on `[lo, hi]`.
pub fn golden_section_max<F>(mut lo: f64, mut hi: f64, abs_tol: f64, f: F) -> f64
where
    F: Fn(f64) -> f64,
{
    let mut x1 = hi - INV_PHI * (hi - lo);
    let mut x2 = lo + INV_PHI * (hi - lo);
    let mut f1 = f(x1);
    let mut f2 = f(x2);
    for _ in 0..500 {
        if hi - lo <= abs_tol {
            break;
        }
        if f1 < f2 {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + INV_PHI * (hi - lo);
            f2 = f(x2);
        } else {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - INV_PHI * (hi - lo);
            f1 = f(x1);
        }
    }
    0.5 * (lo + hi)
}

/// Scans `samples + 1` evenly spaced points, then refines around the best
/// one with golden-section search. Tolerates mild non-unimodality that a
/// bare golden-section search would not.
pub fn scan_then_refine_max<F>(lo: f64, hi: f64, samples: usize, abs_tol: f64, f: F) -> f64
where
    F: Fn(f64) -> f64,
{
    let samples = samples.max(2);
    let step = (hi - lo) / samples as f64;
    let (best, _) = (0..=samples)
        .map(|i| {
            let x = lo + step * i as f64;
            (i, f(x))
        })
        .fold((0, f64::NEG_INFINITY), |acc, (i, v)| if v > acc.1 { (i, v) } else { acc });
    let a = lo + step * best.saturating_sub(1) as f64;
    let b = (lo + step * (best + 1) as f64).min(hi);
    let x = golden_section_max(a, b, abs_tol, &f);
    // Endpoints are not visited by golden-section search.
    [a, x, b]
        .into_iter()
        .fold((x, f64::NEG_INFINITY), |acc, c| {
            let v = f(c);
            if v > acc.1 {
                (c, v)
            } else {
                acc
            }
        })
        .0
}
