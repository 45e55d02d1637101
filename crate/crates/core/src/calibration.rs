//! Fitting scalability profiles to device calibration data.
//!
//! Input is a CSV of worst-case two-qubit error rates against device size
//! (`qubit_count,worst_two_qubit_error[,std_dev]`). Repeated qubit counts
//! are pooled: their transformed values are averaged before regression, so
//! each distinct size counts once. When every row carries a positive
//! `std_dev`, groups are weighted by inverse variance in the fit space.

use std::collections::BTreeMap;
use std::path::Path;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::models::{ScalabilityKind, ScalabilityModel};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CalibrationPoint {
    pub q_phys: u64,
    pub error_rate: f64,
    pub std_dev: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CalibrationSeries {
    pub source_label: String,
    pub points: Vec<CalibrationPoint>,
}

impl CalibrationSeries {
    pub fn new(source_label: impl Into<String>, points: Vec<CalibrationPoint>) -> Result<Self> {
        for p in &points {
            if p.q_phys == 0 {
                return Err(Error::Domain("qubit_count must be at least 1".into()));
            }
            if !(p.error_rate > 0.0 && p.error_rate < 1.0) {
                return Err(Error::Domain(format!(
                    "error rate {} at {} qubits outside (0, 1)",
                    p.error_rate, p.q_phys
                )));
            }
            if let Some(sd) = p.std_dev {
                if !(sd >= 0.0 && sd.is_finite()) {
                    return Err(Error::Domain(format!("std_dev {sd} must be finite and non-negative")));
                }
            }
        }
        Ok(Self {
            source_label: source_label.into(),
            points,
        })
    }

    /// Noise-free samples of `model` at the given sizes.
    pub fn synthetic(model: &ScalabilityModel, sizes: &[u64]) -> Result<Self> {
        let points = sizes
            .iter()
            .map(|&q| {
                Ok(CalibrationPoint {
                    q_phys: q,
                    error_rate: model.physical_error_rate(q)?,
                    std_dev: None,
                })
            })
            .collect::<Result<Vec<_>>>()?;
        Self::new("synthetic", points)
    }

    /// Samples of `model` scaled by independent factors `1 + u`, with `u`
    /// uniform on `[-rel_noise, rel_noise]`. Stream 0 of `seed`.
    pub fn synthetic_noisy(model: &ScalabilityModel, sizes: &[u64], rel_noise: f64, seed: u64) -> Result<Self> {
        if !(0.0..1.0).contains(&rel_noise) {
            return Err(Error::InvalidParameter {
                name: "rel_noise",
                value: rel_noise,
                reason: "must lie in [0, 1)",
            });
        }
        let mut rng = crate::rfe::stream_rng(seed, 0);
        let mut series = Self::synthetic(model, sizes)?;
        if rel_noise > 0.0 {
            for p in &mut series.points {
                p.error_rate *= 1.0 + rng.random_range(-rel_noise..=rel_noise);
            }
        }
        Self::new("synthetic", series.points)
    }

    pub fn distinct_sizes(&self) -> usize {
        let mut q: Vec<u64> = self.points.iter().map(|p| p.q_phys).collect();
        q.sort_unstable();
        q.dedup();
        q.len()
    }
}

const REQUIRED: [&str; 2] = ["qubit_count", "worst_two_qubit_error"];

/// Reads a calibration CSV. Each failure mode has its own error variant;
/// row errors carry the 1-based file line.
pub fn load_calibration_csv(path: impl AsRef<Path>) -> Result<CalibrationSeries> {
    let path = path.as_ref();
    let mut reader = csv::ReaderBuilder::new().trim(csv::Trim::All).from_path(path)?;
    let headers = reader.headers()?.clone();
    let column = |name: &str| headers.iter().position(|h| h == name);
    let (Some(q_col), Some(p_col)) = (column(REQUIRED[0]), column(REQUIRED[1])) else {
        return Err(Error::MalformedHeader {
            path: path.to_path_buf(),
            message: format!(
                "expected columns qubit_count,worst_two_qubit_error[,std_dev], found `{}`",
                headers.iter().collect::<Vec<_>>().join(",")
            ),
        });
    };
    let sd_col = column("std_dev");
    if let Some(unknown) = headers
        .iter()
        .find(|h| !REQUIRED.contains(h) && *h != "std_dev")
    {
        return Err(Error::MalformedHeader {
            path: path.to_path_buf(),
            message: format!("unknown column `{unknown}`"),
        });
    }

    let mut points = Vec::new();
    for record in reader.records() {
        let record = record?;
        let line = record.position().map_or(0, |p| p.line());
        let bad = |message: String| Error::InvalidRow {
            path: path.to_path_buf(),
            line,
            message,
        };
        let field = |i: usize| record.get(i).unwrap_or("");
        let q_phys: u64 = field(q_col)
            .parse()
            .map_err(|_| bad(format!("qubit_count `{}` is not a positive integer", field(q_col))))?;
        if q_phys == 0 {
            return Err(bad("qubit_count must be at least 1".into()));
        }
        let error_rate: f64 = field(p_col)
            .parse()
            .map_err(|_| bad(format!("worst_two_qubit_error `{}` is not a number", field(p_col))))?;
        if !(error_rate > 0.0 && error_rate < 1.0) {
            return Err(bad(format!("worst_two_qubit_error {error_rate} outside (0, 1)")));
        }
        let std_dev = match sd_col.map(field) {
            None | Some("") => None,
            Some(raw) => {
                let sd: f64 = raw
                    .parse()
                    .map_err(|_| bad(format!("std_dev `{raw}` is not a number")))?;
                if !(sd >= 0.0 && sd.is_finite()) {
                    return Err(bad(format!("std_dev {sd} must be finite and non-negative")));
                }
                Some(sd)
            }
        };
        points.push(CalibrationPoint {
            q_phys,
            error_rate,
            std_dev,
        });
    }
    if points.is_empty() {
        return Err(Error::EmptyBody {
            path: path.to_path_buf(),
        });
    }
    let label = path
        .file_stem()
        .map_or_else(|| "calibration".to_string(), |s| s.to_string_lossy().into_owned());
    CalibrationSeries::new(label, points)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct FitReport {
    pub model: ScalabilityModel,
    /// RMS residual over all rows in the fit's own space: `ln p` against
    /// `ln Q` for the power law, `p` against `ln Q` for the logarithmic model.
    pub residual_rms: f64,
    /// RMS residual of the raw error rates, comparable across models.
    pub raw_rms: f64,
    pub r_squared: f64,
    pub n_points: usize,
}

/// Intercept and slope of a weighted least-squares line.
struct Line {
    intercept: f64,
    slope: f64,
    r_squared: f64,
}

/// Groups rows by size and fits `y = a + b ln Q` through the group means.
fn fit_line(series: &CalibrationSeries, transform: impl Fn(f64) -> f64, sd_transform: impl Fn(f64, f64) -> f64) -> Result<Line> {
    if series.distinct_sizes() < 2 {
        return Err(Error::Fit(
            "at least two distinct qubit counts are required".into(),
        ));
    }
    let weighted = series
        .points
        .iter()
        .all(|p| p.std_dev.is_some_and(|sd| sd > 0.0));

    // (sum w*y, sum w) per size
    let mut groups: BTreeMap<u64, (f64, f64)> = BTreeMap::new();
    for p in &series.points {
        let y = transform(p.error_rate);
        let w = if weighted {
            let sd = sd_transform(p.error_rate, p.std_dev.unwrap_or(1.0));
            1.0 / (sd * sd)
        } else {
            1.0
        };
        let e = groups.entry(p.q_phys).or_insert((0.0, 0.0));
        e.0 += w * y;
        e.1 += w;
    }
    // Unweighted groups count once each; weighted ones keep their pooled
    // inverse variance.
    let rows: Vec<(f64, f64, f64)> = groups
        .iter()
        .map(|(&q, &(wy, w))| {
            let weight = if weighted { w } else { 1.0 };
            ((q as f64).ln(), wy / w, weight)
        })
        .collect();

    let w_sum: f64 = rows.iter().map(|r| r.2).sum();
    let x_bar = rows.iter().map(|r| r.2 * r.0).sum::<f64>() / w_sum;
    let y_bar = rows.iter().map(|r| r.2 * r.1).sum::<f64>() / w_sum;
    let sxx: f64 = rows.iter().map(|r| r.2 * (r.0 - x_bar).powi(2)).sum();
    let sxy: f64 = rows.iter().map(|r| r.2 * (r.0 - x_bar) * (r.1 - y_bar)).sum();
    let syy: f64 = rows.iter().map(|r| r.2 * (r.1 - y_bar).powi(2)).sum();
    if !(sxx > 0.0) {
        return Err(Error::Fit("degenerate design: all qubit counts equal".into()));
    }
    let slope = sxy / sxx;
    let intercept = y_bar - slope * x_bar;
    let ss_res: f64 = rows
        .iter()
        .map(|r| r.2 * (r.1 - intercept - slope * r.0).powi(2))
        .sum();
    // A line through two points is exact; don't report rounding as misfit.
    let r_squared = if syy > 0.0 && rows.len() > 2 { 1.0 - ss_res / syy } else { 1.0 };
    Ok(Line {
        intercept,
        slope,
        r_squared,
    })
}

fn rms(values: impl Iterator<Item = f64>) -> f64 {
    let (sum, n) = values.fold((0.0, 0usize), |(s, n), v| (s + v * v, n + 1));
    (sum / n as f64).sqrt()
}

fn report(series: &CalibrationSeries, model: ScalabilityModel, line: &Line, transform: impl Fn(f64) -> f64) -> Result<FitReport> {
    let residual_rms = rms(series.points.iter().map(|p| {
        transform(p.error_rate) - (line.intercept + line.slope * (p.q_phys as f64).ln())
    }));
    let raw_rms = rms(
        series
            .points
            .iter()
            .map(|p| p.error_rate - model.rate_unchecked(p.q_phys as f64)),
    );
    Ok(FitReport {
        model,
        residual_rms,
        raw_rms,
        r_squared: line.r_squared,
        n_points: series.points.len(),
    })
}

/// Least squares on `ln p = ln p0 + (1/s) ln Q`.
pub fn fit_power_law(series: &CalibrationSeries) -> Result<FitReport> {
    let line = fit_line(series, f64::ln, |p, sd| sd / p)?;
    if !(line.slope > 0.0) {
        return Err(Error::ModelInapplicable(format!(
            "power-law exponent {} is not positive; error rate does not grow with size",
            line.slope
        )));
    }
    let p0 = line.intercept.exp();
    let model = ScalabilityModel::power_law(p0, 1.0 / line.slope)
        .map_err(|e| Error::ModelInapplicable(e.to_string()))?;
    report(series, model, &line, f64::ln)
}

/// Least squares on `p = a + b ln Q`, giving `p0 = a` and `sigma = a / b`.
pub fn fit_log_model(series: &CalibrationSeries) -> Result<FitReport> {
    let line = fit_line(series, |p| p, |_, sd| sd)?;
    let (a, b) = (line.intercept, line.slope);
    if !(a > 0.0) {
        return Err(Error::ModelInapplicable(format!("fitted base rate {a} is not positive")));
    }
    if !(b > 0.0) {
        return Err(Error::ModelInapplicable(format!(
            "fitted slope {b} is not positive; error rate does not grow with size"
        )));
    }
    let model = ScalabilityModel::logarithmic(a, a / b)
        .map_err(|e| Error::ModelInapplicable(e.to_string()))?;
    report(series, model, &line, |p| p)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FitOutcome {
    pub kind: ScalabilityKind,
    pub report: Option<FitReport>,
    pub error: Option<String>,
}

/// Fits both models and ranks the successful ones by raw-space RMS,
/// failures last. Transformed residuals live in different spaces and are
/// reported but not used for ranking.
pub fn compare_fits(series: &CalibrationSeries) -> Vec<FitOutcome> {
    let mut outcomes: Vec<FitOutcome> = [
        (ScalabilityKind::PowerLaw, fit_power_law(series)),
        (ScalabilityKind::Logarithmic, fit_log_model(series)),
    ]
    .into_iter()
    .map(|(kind, result)| match result {
        Ok(report) => FitOutcome {
            kind,
            report: Some(report),
            error: None,
        },
        Err(e) => FitOutcome {
            kind,
            report: None,
            error: Some(e.to_string()),
        },
    })
    .collect();
    outcomes.sort_by(|a, b| {
        let key = |o: &FitOutcome| o.report.map_or(f64::INFINITY, |r| r.raw_rms);
        key(a).total_cmp(&key(b))
    });
    outcomes
}
