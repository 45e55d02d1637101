//! Randomized Fourier estimation of a single eigenphase.
//!
//! Each shot draws a circuit depth `k` uniformly from `0..K` and a phase
//! offset `phi` uniformly from `[0, 2pi)`, then samples a Hadamard-test
//! outcome `z = +-1` with `Pr(+1) = (1 + cos(k theta + phi)) / 2` (possibly
//! corrupted by algorithmic noise). The shot-level estimator
//! `2 z exp(-i 2pi k j / J) exp(-i phi)` is unbiased for the `j`-th Fourier
//! coefficient of the signal; averaging `M` of them and taking the tallest
//! bin gives `theta_hat = 2 pi j* / J`.
//!
//! # Random streams
//!
//! Every experiment owns a ChaCha8 generator keyed by its seed. Stream 0
//! supplies shots in order (k, phi, outcome, then eta for per-shot Gaussian
//! noise). Stream 1 supplies the per-depth Gaussian offsets. Trials of a
//! failure-rate estimate use seeds derived from the experiment seed and the
//! trial index with SplitMix64, so each trial is reproducible on its own and
//! results do not depend on thread count.

use std::f64::consts::{PI, TAU};

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// When Gaussian perturbations are redrawn.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EtaResample {
    /// One draw per depth `k`, shared by every shot at that depth.
    #[default]
    PerK,
    PerShot,
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum NoiseModel {
    #[default]
    Ideal,
    /// `Pr(+1) = (1 + cos(k theta + phi) + eta_k) / 2` with `eta_k ~ N(0, sigma)`.
    Gaussian {
        sigma: f64,
        #[serde(default)]
        eta_resample: EtaResample,
    },
    /// `Pr(+1) = (1 + exp(-k lambda) cos(k theta + phi)) / 2`.
    ExpDecay { lambda: f64 },
}

impl NoiseModel {
    pub fn validate(&self) -> Result<()> {
        let (name, value) = match *self {
            NoiseModel::Ideal => return Ok(()),
            NoiseModel::Gaussian { sigma, .. } => ("sigma", sigma),
            NoiseModel::ExpDecay { lambda } => ("lambda", lambda),
        };
        if value >= 0.0 && value.is_finite() {
            Ok(())
        } else {
            Err(Error::InvalidParameter {
                name,
                value,
                reason: "must be finite and non-negative",
            })
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RfeExperiment {
    /// True eigenphase in `[0, 2pi)`.
    pub theta: f64,
    /// Number of circuit depths; `k` ranges over `0..K`.
    #[serde(rename = "K")]
    pub depths: u32,
    /// Fourier grid size; target accuracy is `2pi / J`.
    #[serde(rename = "J")]
    pub grid_size: u32,
    #[serde(rename = "M")]
    pub shots: u64,
    pub noise: NoiseModel,
    pub seed: u64,
}

impl RfeExperiment {
    pub fn new(theta: f64, depths: u32, grid_size: u32, shots: u64, noise: NoiseModel, seed: u64) -> Result<Self> {
        let exp = Self {
            theta,
            depths,
            grid_size,
            shots,
            noise,
            seed,
        };
        exp.validate()?;
        Ok(exp)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.theta >= 0.0 && self.theta < TAU) {
            return Err(Error::InvalidParameter {
                name: "theta",
                value: self.theta,
                reason: "must lie in [0, 2pi)",
            });
        }
        if self.depths < 1 {
            return Err(Error::InvalidParameter {
                name: "K",
                value: 0.0,
                reason: "must be at least 1",
            });
        }
        if self.grid_size < 2 {
            return Err(Error::InvalidParameter {
                name: "J",
                value: f64::from(self.grid_size),
                reason: "must be at least 2",
            });
        }
        if self.shots < 1 {
            return Err(Error::InvalidParameter {
                name: "M",
                value: 0.0,
                reason: "must be at least 1",
            });
        }
        self.noise.validate()
    }

    /// Target accuracy `2pi / J`.
    pub fn epsilon(&self) -> f64 {
        TAU / f64::from(self.grid_size)
    }

    pub fn with_shots(mut self, shots: u64) -> Self {
        self.shots = shots;
        self
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    /// Grid point `2pi j / J`, reduced into `[0, 2pi)`.
    pub fn on_grid_theta(grid_size: u32, j: u32) -> f64 {
        TAU * f64::from(j % grid_size) / f64::from(grid_size)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RfeResult {
    pub theta_hat: f64,
    pub spectrum: Vec<Complex64>,
    pub peak_index: u32,
    pub shots_used: u64,
    /// Shots whose Gaussian-perturbed probability left `[0, 1]`.
    pub clamped_shots: u64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Shot {
    pub z: i8,
    pub k: u32,
    /// Bit pattern of `phi`; kept as bits so `Shot` can be `Eq`.
    phi_bits: u64,
}

impl Shot {
    pub fn phi(&self) -> f64 {
        f64::from_bits(self.phi_bits)
    }
}

fn unclamped_probability(theta: f64, k: u32, phi: f64, noise: &NoiseModel, eta_k: f64) -> f64 {
    let signal = (f64::from(k) * theta + phi).cos();
    match *noise {
        NoiseModel::Ideal => 0.5 * (1.0 + signal),
        NoiseModel::Gaussian { .. } => 0.5 * (1.0 + signal + eta_k),
        NoiseModel::ExpDecay { lambda } => 0.5 * (1.0 + (-f64::from(k) * lambda).exp() * signal),
    }
}

/// Probability of outcome `z = +1`, clamped to `[0, 1]`. `eta_k` is ignored
/// unless the noise is Gaussian.
pub fn outcome_probability(theta: f64, k: u32, phi: f64, noise: &NoiseModel, eta_k: f64) -> f64 {
    unclamped_probability(theta, k, phi, noise, eta_k).clamp(0.0, 1.0)
}

/// The per-shot Fourier estimator `2 z exp(-i 2pi k j / J) exp(-i phi)`.
pub fn shot_estimator(z: i8, k: u32, phi: f64, grid_size: u32, j: u32) -> Complex64 {
    let kj = (u64::from(k) * u64::from(j)) % u64::from(grid_size);
    let angle = -(TAU * kj as f64 / f64::from(grid_size)) - phi;
    Complex64::from_polar(2.0 * f64::from(z), angle)
}

/// Draws a Gaussian offset per depth (stream 1).
fn per_depth_offsets(exp: &RfeExperiment) -> Vec<f64> {
    match exp.noise {
        NoiseModel::Gaussian {
            sigma,
            eta_resample: EtaResample::PerK,
        } if sigma > 0.0 => {
            let mut rng = stream_rng(exp.seed, 1);
            let normal = Normal::new(0.0, sigma).expect("sigma validated");
            (0..exp.depths).map(|_| normal.sample(&mut rng)).collect()
        }
        _ => vec![0.0; exp.depths as usize],
    }
}

pub fn stream_rng(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

/// Draws one shot. `offsets` holds per-depth Gaussian offsets; per-shot
/// offsets are drawn from `rng` instead. Returns the shot and whether the
/// outcome probability had to be clamped.
pub fn sample_shot<R: Rng + ?Sized>(rng: &mut R, exp: &RfeExperiment, offsets: &[f64]) -> (Shot, bool) {
    let k = rng.random_range(0..exp.depths);
    let phi = rng.random::<f64>() * TAU;
    let u = rng.random::<f64>();
    let eta = match exp.noise {
        NoiseModel::Gaussian {
            sigma,
            eta_resample: EtaResample::PerShot,
        } if sigma > 0.0 => Normal::new(0.0, sigma).expect("sigma validated").sample(rng),
        NoiseModel::Gaussian { .. } => offsets[k as usize],
        _ => 0.0,
    };
    let raw = unclamped_probability(exp.theta, k, phi, &exp.noise, eta);
    let clamped = !(0.0..=1.0).contains(&raw);
    let z = if u < raw.clamp(0.0, 1.0) { 1 } else { -1 };
    (
        Shot {
            z,
            k,
            phi_bits: phi.to_bits(),
        },
        clamped,
    )
}

/// The first `n` shots of an experiment, in order.
pub fn shot_sequence(exp: &RfeExperiment, n: u64) -> Vec<Shot> {
    let offsets = per_depth_offsets(exp);
    let mut rng = stream_rng(exp.seed, 0);
    (0..n).map(|_| sample_shot(&mut rng, exp, &offsets).0).collect()
}

/// Index of the largest-magnitude bin; the lowest index wins exact ties.
pub fn peak_index(spectrum: &[Complex64]) -> usize {
    let mut best = 0;
    let mut best_mag = f64::NEG_INFINITY;
    for (j, c) in spectrum.iter().enumerate() {
        let mag = c.norm_sqr();
        if mag > best_mag {
            best = j;
            best_mag = mag;
        }
    }
    best
}

/// Runs one experiment.
///
/// Shots are binned by depth first, so the spectrum costs `O(M + K J)`
/// rather than `O(M J)`; the result equals summing `shot_estimator` over
/// all shots and bins.
pub fn run_rfe(exp: &RfeExperiment) -> Result<RfeResult> {
    exp.validate()?;
    let offsets = per_depth_offsets(exp);
    let mut rng = stream_rng(exp.seed, 0);
    let mut by_depth = vec![Complex64::new(0.0, 0.0); exp.depths as usize];
    let mut clamped_shots = 0;
    for _ in 0..exp.shots {
        let (shot, clamped) = sample_shot(&mut rng, exp, &offsets);
        clamped_shots += u64::from(clamped);
        by_depth[shot.k as usize] += Complex64::from_polar(f64::from(shot.z), -shot.phi());
    }
    let j_count = exp.grid_size;
    let scale = 2.0 / exp.shots as f64;
    let spectrum: Vec<Complex64> = (0..j_count)
        .map(|j| {
            let sum: Complex64 = by_depth
                .iter()
                .enumerate()
                .map(|(k, s)| {
                    let kj = (k as u64 * u64::from(j)) % u64::from(j_count);
                    s * Complex64::from_polar(1.0, -TAU * kj as f64 / f64::from(j_count))
                })
                .sum();
            sum * scale
        })
        .collect();
    let peak = peak_index(&spectrum) as u32;
    Ok(RfeResult {
        theta_hat: TAU * f64::from(peak) / f64::from(j_count),
        spectrum,
        peak_index: peak,
        shots_used: exp.shots,
        clamped_shots,
    })
}

/// Mean of the shot estimator over `k`, `phi` and `z`:
/// `(1/K) sum_k c_k exp(i k (theta - 2pi j / J))`, with `c_k = 1` for ideal
/// circuits and `exp(-k lambda)` under exponential decay.
pub fn expected_spectrum(theta: f64, depths: u32, grid_size: u32, noise: &NoiseModel) -> Result<Vec<Complex64>> {
    if depths < 1 || grid_size < 1 {
        return Err(Error::Domain("K and J must be positive".into()));
    }
    let decay = match *noise {
        NoiseModel::Ideal => 0.0,
        NoiseModel::ExpDecay { lambda } => lambda,
        NoiseModel::Gaussian { .. } => {
            return Err(Error::Unsupported(
                "expected spectrum under Gaussian noise depends on the eta realization".into(),
            ))
        }
    };
    let k_count = f64::from(depths);
    Ok((0..grid_size)
        .map(|j| {
            let freq = theta - TAU * f64::from(j) / f64::from(grid_size);
            let sum: Complex64 = (0..depths)
                .map(|k| {
                    let k = f64::from(k);
                    Complex64::from_polar((-k * decay).exp(), k * freq)
                })
                .sum();
            sum / k_count
        })
        .collect())
}

/// Angular distance on the circle, in `[0, pi]`.
pub fn circular_error(theta_hat: f64, theta_true: f64) -> f64 {
    let d = (theta_hat - theta_true).rem_euclid(TAU);
    d.min(TAU - d)
}

/// True when the estimate misses by more than `2pi / J`. Estimates at an
/// adjacent grid point count as accurate, so the comparison carries a few
/// ulps of slack for the rounding in `2pi j / J`.
pub fn is_failure(theta_hat: f64, theta_true: f64, grid_size: u32) -> bool {
    let eps = TAU / f64::from(grid_size);
    circular_error(theta_hat, theta_true) > eps * (1.0 + 1e-9)
}

/// 97.5% standard normal quantile.
const Z_95: f64 = 1.959_963_984_540_054;

/// 95% Wilson score interval for `successes` out of `n`.
pub fn wilson_interval(successes: u64, n: u64) -> (f64, f64) {
    if n == 0 {
        return (0.0, 1.0);
    }
    let n_f = n as f64;
    let p = successes as f64 / n_f;
    let z2 = Z_95 * Z_95;
    let denom = 1.0 + z2 / n_f;
    let centre = (p + z2 / (2.0 * n_f)) / denom;
    let half = Z_95 * (p * (1.0 - p) / n_f + z2 / (4.0 * n_f * n_f)).sqrt() / denom;
    let lo = if successes == 0 { 0.0 } else { (centre - half).max(0.0) };
    let hi = if successes == n { 1.0 } else { (centre + half).min(1.0) };
    (lo, hi)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct FailureEstimate {
    pub failures: u64,
    pub trials: u64,
    pub rate: f64,
    pub ci_low: f64,
    pub ci_high: f64,
}

impl FailureEstimate {
    pub fn from_counts(failures: u64, trials: u64) -> Self {
        let (ci_low, ci_high) = wilson_interval(failures, trials);
        Self {
            failures,
            trials,
            rate: failures as f64 / trials as f64,
            ci_low,
            ci_high,
        }
    }
}

/// SplitMix64 finalizer applied to `seed + index * golden_gamma`.
pub fn derive_seed(seed: u64, index: u64) -> u64 {
    let mut z = seed.wrapping_add(index.wrapping_add(1).wrapping_mul(0x9E37_79B9_7F4A_7C15));
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Runs `trials` independently seeded copies of `exp` in parallel.
pub fn estimate_failure_rate(exp: &RfeExperiment, trials: u64) -> Result<FailureEstimate> {
    exp.validate()?;
    if trials == 0 {
        return Err(Error::Domain("at least one trial is required".into()));
    }
    let failures = (0..trials)
        .into_par_iter()
        .map(|t| {
            let trial = exp.with_seed(derive_seed(exp.seed, t));
            run_rfe(&trial).map(|r| u64::from(is_failure(r.theta_hat, exp.theta, exp.grid_size)))
        })
        .try_reduce(|| 0, |a, b| Ok(a + b))?;
    Ok(FailureEstimate::from_counts(failures, trials))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CalibrationOptions {
    pub trials_per_probe: u64,
    pub ceiling: u64,
    /// Fresh-seed re-checks of the final answer before giving up on it.
    pub max_retries: u32,
}

impl Default for CalibrationOptions {
    fn default() -> Self {
        Self {
            trials_per_probe: 200,
            ceiling: 100_000_000,
            max_retries: 4,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SampleCalibration {
    pub shots: u64,
    pub delta: f64,
    /// Failure estimate at `shots` from the final verification probe.
    pub failure: FailureEstimate,
    pub probes: u32,
}

/// Smallest shot count `M` whose failure-rate Wilson upper bound is at most
/// `delta`.
///
/// Doubles `M` until a probe passes, then bisects. All bisection probes
/// share one seed set so their outcomes are correlated and close to
/// monotone. The answer is then re-checked with a fresh seed set; on a
/// failed re-check `M` grows by a quarter and is checked again.
pub fn calibrate_samples(template: &RfeExperiment, delta: f64, opts: &CalibrationOptions) -> Result<SampleCalibration> {
    if !(delta > 0.0 && delta < 1.0) {
        return Err(Error::InvalidParameter {
            name: "delta",
            value: delta,
            reason: "must lie in (0, 1)",
        });
    }
    if opts.trials_per_probe == 0 {
        return Err(Error::Domain("trials_per_probe must be positive".into()));
    }
    template.with_shots(1).validate()?;
    let mut probes = 0u32;
    let mut probe = |shots: u64, seed: u64| -> Result<FailureEstimate> {
        probes += 1;
        let exp = template.with_shots(shots).with_seed(seed);
        estimate_failure_rate(&exp, opts.trials_per_probe)
    };
    let passes = |est: &FailureEstimate| est.ci_high <= delta;

    let mut hi = 1u64;
    loop {
        if hi > opts.ceiling {
            return Err(Error::NonConvergence { ceiling: opts.ceiling });
        }
        if passes(&probe(hi, template.seed)?) {
            break;
        }
        hi = hi.saturating_mul(2);
    }
    let mut lo = hi / 2;
    while hi - lo > 1 {
        let mid = lo + (hi - lo) / 2;
        if passes(&probe(mid, template.seed)?) {
            hi = mid;
        } else {
            lo = mid;
        }
    }

    let mut shots = hi;
    for retry in 0..=opts.max_retries {
        let check = probe(shots, derive_seed(template.seed, u64::from(u32::MAX) + u64::from(retry)))?;
        if passes(&check) {
            return Ok(SampleCalibration {
                shots,
                delta,
                failure: check,
                probes,
            });
        }
        shots = (shots + shots.div_ceil(4)).min(opts.ceiling + 1);
        if shots > opts.ceiling {
            break;
        }
    }
    Err(Error::NonConvergence { ceiling: opts.ceiling })
}

/// Burden reduction from capping depth at `K` instead of a QPE-like `J`:
/// the ratio `J / K`.
pub fn burden_reduction_from_depth(depths: u32, grid_size: u32) -> Result<f64> {
    if depths == 0 || grid_size == 0 {
        return Err(Error::Domain("K and J must be positive".into()));
    }
    if depths > grid_size {
        return Err(Error::Domain(format!("K = {depths} exceeds J = {grid_size}")));
    }
    Ok(f64::from(grid_size) / f64::from(depths))
}

/// Circuit error implied by exponential decay at depth `k`:
/// `p_C = 1 - exp(-k lambda)`, so that `ln(1/(1-p_C)) = k lambda`.
pub fn decay_circuit_error(k: u32, lambda: f64) -> f64 {
    -(-f64::from(k) * lambda).exp_m1()
}

/// Nearest grid index to `theta`.
pub fn nearest_grid_index(theta: f64, grid_size: u32) -> u32 {
    ((theta / TAU * f64::from(grid_size)).round() as u64 % u64::from(grid_size)) as u32
}

/// Half a grid step: the error of a correctly located peak is at most this.
pub fn half_grid_step(grid_size: u32) -> f64 {
    PI / f64::from(grid_size)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ideal(theta: f64, k: u32, j: u32, m: u64, seed: u64) -> RfeExperiment {
        RfeExperiment::new(theta, k, j, m, NoiseModel::Ideal, seed).unwrap()
    }

    #[test]
    fn outcome_probability_examples() {
        let n = NoiseModel::Ideal;
        assert_eq!(outcome_probability(0.0, 0, 0.0, &n, 0.0), 1.0);
        assert!((outcome_probability(0.0, 1, PI / 2.0, &n, 0.0) - 0.5).abs() < 1e-16);
        let decay = NoiseModel::ExpDecay { lambda: 1e6 };
        assert_eq!(outcome_probability(0.3, 1, 0.0, &decay, 0.0), 0.5);
        let gauss = NoiseModel::Gaussian {
            sigma: 0.1,
            eta_resample: EtaResample::PerK,
        };
        assert_eq!(outcome_probability(0.0, 0, 0.0, &gauss, 0.5), 1.0);
        assert_eq!(outcome_probability(PI, 1, 0.0, &gauss, -0.5), 0.0);
    }

    #[test]
    fn shot_estimator_examples() {
        assert_eq!(shot_estimator(1, 0, 0.0, 8, 3), Complex64::new(2.0, 0.0));
        let c = shot_estimator(-1, 0, PI, 8, 5);
        assert!((c - Complex64::new(2.0, 0.0)).norm() < 1e-15);
        for (z, k, phi, j) in [(1, 3, 0.7, 5), (-1, 11, 5.9, 0), (1, 7, 3.1, 31)] {
            assert!((shot_estimator(z, k, phi, 32, j).norm() - 2.0).abs() < 1e-15);
        }
    }

    #[test]
    fn single_depth_always_zero() {
        let exp = ideal(1.0, 1, 16, 200, 9);
        assert!(shot_sequence(&exp, 200).iter().all(|s| s.k == 0));
    }

    #[test]
    fn shots_are_deterministic() {
        let exp = ideal(1.0, 16, 16, 50, 42);
        assert_eq!(shot_sequence(&exp, 50), shot_sequence(&exp, 50));
        assert_ne!(shot_sequence(&exp, 50), shot_sequence(&exp.with_seed(43), 50));
    }

    #[test]
    fn fixed_circuit_mean_matches_cosine() {
        // Draw z directly at a fixed (k, phi) through the same probability map.
        let theta = 0.9;
        let (k, phi) = (3u32, 0.4);
        let mut rng = stream_rng(7, 0);
        let n = 100_000;
        let p = outcome_probability(theta, k, phi, &NoiseModel::Ideal, 0.0);
        let mean = (0..n)
            .map(|_| if rng.random::<f64>() < p { 1.0 } else { -1.0 })
            .sum::<f64>()
            / n as f64;
        let expected = (f64::from(k) * theta + phi).cos();
        let sd = (1.0 - expected * expected).sqrt() / (n as f64).sqrt();
        assert!((mean - expected).abs() < 5.0 * sd);
    }

    #[test]
    fn binned_spectrum_matches_naive_accumulation() {
        let noise = NoiseModel::Gaussian {
            sigma: 0.05,
            eta_resample: EtaResample::PerShot,
        };
        let exp = RfeExperiment::new(2.2, 12, 20, 300, noise, 5).unwrap();
        let fast = run_rfe(&exp).unwrap();
        let shots = shot_sequence(&exp, exp.shots);
        for j in 0..exp.grid_size {
            let naive: Complex64 = shots
                .iter()
                .map(|s| shot_estimator(s.z, s.k, s.phi(), exp.grid_size, j))
                .sum::<Complex64>()
                / exp.shots as f64;
            assert!((naive - fast.spectrum[j as usize]).norm() < 1e-12);
        }
    }

    #[test]
    fn single_shot_spectrum_is_unimodular() {
        let r = run_rfe(&ideal(0.5, 8, 64, 1, 3)).unwrap();
        assert!(r.spectrum.iter().all(|c| (c.norm() - 2.0).abs() < 1e-12));
    }

    #[test]
    fn run_is_deterministic() {
        let exp = ideal(1.3, 32, 32, 500, 11);
        assert_eq!(run_rfe(&exp).unwrap(), run_rfe(&exp).unwrap());
    }

    #[test]
    fn flat_spectrum_breaks_ties_low() {
        let r = run_rfe(&ideal(0.5, 1, 16, 40, 1)).unwrap();
        assert_eq!(r.peak_index, 0);
        assert_eq!(r.theta_hat, 0.0);
    }

    #[test]
    fn peak_recovered_on_grid() {
        let theta = RfeExperiment::on_grid_theta(64, 5);
        let r = run_rfe(&ideal(theta, 64, 64, 50_000, 2)).unwrap();
        assert_eq!(r.peak_index, 5);
        assert_eq!(r.theta_hat, theta);
    }

    #[test]
    fn expected_spectrum_examples() {
        let theta = RfeExperiment::on_grid_theta(16, 3);
        let s = expected_spectrum(theta, 16, 16, &NoiseModel::Ideal).unwrap();
        assert!((s[3] - Complex64::new(1.0, 0.0)).norm() < 1e-14);
        // Dirichlet kernel vanishes at the other grid points when K = J.
        assert!(s.iter().enumerate().all(|(j, c)| j == 3 || c.norm() < 1e-14));

        let flat = expected_spectrum(1.1, 1, 8, &NoiseModel::Ideal).unwrap();
        assert!(flat.iter().all(|c| (c.norm() - 1.0).abs() < 1e-15));

        let theta = RfeExperiment::on_grid_theta(64, 20);
        let clean = expected_spectrum(theta, 64, 64, &NoiseModel::Ideal).unwrap();
        let decayed = expected_spectrum(theta, 64, 64, &NoiseModel::ExpDecay { lambda: 0.3 }).unwrap();
        assert_eq!(peak_index(&clean), peak_index(&decayed));
        assert!(decayed[20].norm() < clean[20].norm());

        let gauss = NoiseModel::Gaussian {
            sigma: 0.1,
            eta_resample: EtaResample::PerK,
        };
        assert!(expected_spectrum(theta, 4, 4, &gauss).is_err());
    }

    #[test]
    fn circular_error_examples() {
        assert_eq!(circular_error(0.0, 0.0), 0.0);
        assert!((circular_error(0.1, TAU - 0.1) - 0.2).abs() < 1e-15);
        assert!((circular_error(0.0, PI) - PI).abs() < 1e-15);
    }

    #[test]
    fn adjacent_bin_is_not_a_failure() {
        for j in [16u32, 32, 64, 1000] {
            for i in 0..j {
                let theta = RfeExperiment::on_grid_theta(j, i);
                let next = RfeExperiment::on_grid_theta(j, i + 1);
                let two = RfeExperiment::on_grid_theta(j, i + 2);
                assert!(!is_failure(next, theta, j));
                assert!(is_failure(two, theta, j));
            }
        }
    }

    #[test]
    fn wilson_interval_known_values() {
        // 0 of 200: upper = z^2 / (n + z^2)
        let (lo, hi) = wilson_interval(0, 200);
        assert_eq!(lo, 0.0);
        assert!((hi - Z_95 * Z_95 / (200.0 + Z_95 * Z_95)).abs() < 1e-15);
        // 10 of 100, statsmodels proportion_confint(method='wilson')
        let (lo, hi) = wilson_interval(10, 100);
        assert!((lo - 0.055_229_14).abs() < 1e-7);
        assert!((hi - 0.174_365_66).abs() < 1e-7);
    }

    #[test]
    fn single_trial_rate_is_binary() {
        let est = estimate_failure_rate(&ideal(1.0, 8, 8, 5, 3), 1).unwrap();
        assert!(est.rate == 0.0 || est.rate == 1.0);
    }

    #[test]
    fn failure_rate_is_thread_count_independent() {
        let exp = ideal(RfeExperiment::on_grid_theta(32, 7), 8, 32, 30, 77);
        let a = estimate_failure_rate(&exp, 64).unwrap();
        let pool = rayon::ThreadPoolBuilder::new().num_threads(1).build().unwrap();
        let b = pool.install(|| estimate_failure_rate(&exp, 64).unwrap());
        assert_eq!(a, b);
    }

    #[test]
    fn gaussian_with_zero_sigma_is_ideal() {
        let theta = 2.0;
        let base = ideal(theta, 16, 32, 400, 8);
        for resample in [EtaResample::PerK, EtaResample::PerShot] {
            let g = RfeExperiment {
                noise: NoiseModel::Gaussian {
                    sigma: 0.0,
                    eta_resample: resample,
                },
                ..base
            };
            let r = run_rfe(&g).unwrap();
            assert_eq!(r.clamped_shots, 0);
            assert_eq!(r, run_rfe(&base).unwrap());
        }
    }

    #[test]
    fn large_gaussian_noise_is_clamped_and_counted() {
        let g = RfeExperiment::new(
            1.0,
            8,
            8,
            1000,
            NoiseModel::Gaussian {
                sigma: 2.0,
                eta_resample: EtaResample::PerShot,
            },
            4,
        )
        .unwrap();
        assert!(run_rfe(&g).unwrap().clamped_shots > 0);
    }

    #[test]
    fn calibration_rejects_bad_inputs_and_hits_ceiling() {
        let t = ideal(0.0, 16, 16, 1, 1);
        assert!(calibrate_samples(&t, 0.0, &CalibrationOptions::default()).is_err());
        let opts = CalibrationOptions {
            trials_per_probe: 50,
            ceiling: 2,
            max_retries: 0,
        };
        assert!(matches!(
            calibrate_samples(&t, 0.1, &opts),
            Err(Error::NonConvergence { ceiling: 2 })
        ));
    }

    #[test]
    fn depth_reduction_ratios() {
        assert_eq!(burden_reduction_from_depth(64, 64).unwrap(), 1.0);
        assert_eq!(burden_reduction_from_depth(1, 100_000).unwrap(), 1e5);
        assert!(burden_reduction_from_depth(65, 64).is_err());
    }

    #[test]
    fn decay_error_relation() {
        let p_c = decay_circuit_error(4, 0.25);
        assert!(((1.0 / (1.0 - p_c)).ln() - 1.0).abs() < 1e-15);
        assert_eq!(decay_circuit_error(0, 3.0), 0.0);
    }

    #[test]
    fn validation() {
        assert!(RfeExperiment::new(TAU, 4, 4, 1, NoiseModel::Ideal, 0).is_err());
        assert!(RfeExperiment::new(0.0, 0, 4, 1, NoiseModel::Ideal, 0).is_err());
        assert!(RfeExperiment::new(0.0, 4, 1, 1, NoiseModel::Ideal, 0).is_err());
        assert!(RfeExperiment::new(0.0, 4, 4, 0, NoiseModel::Ideal, 0).is_err());
        assert!(RfeExperiment::new(0.0, 4, 4, 1, NoiseModel::ExpDecay { lambda: -1.0 }, 0).is_err());
    }
}
