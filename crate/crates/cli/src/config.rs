//! Run configuration: built-in defaults, then an optional preset, then an
//! optional file (TOML, or a JSON manifest from an earlier run), then
//! `--set` overrides. Unknown keys anywhere are rejected.

use std::path::Path;

use serde::{Deserialize, Serialize};
use serde_json::{Map, Value};

use eftqc::models::{ErrorBudgetMode, ScalabilityKind};
use eftqc::reach::DistanceMode;
use eftqc::rfe::{EtaResample, RfeExperiment};

use crate::error::CliError;

pub const PRESETS: [(&str, &str); 3] = [
    ("paper-fig-scalability", include_str!("../presets/paper-fig-scalability.toml")),
    ("paper-fig-rfe", include_str!("../presets/paper-fig-rfe.toml")),
    ("paper-appendix-a", include_str!("../presets/paper-appendix-a.toml")),
];

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Config {
    pub scalability: ScalabilityConfig,
    pub surface_code: SurfaceCodeConfig,
    pub algorithm: AlgorithmConfig,
    pub reach: ReachConfig,
    pub contour: ContourConfig,
    pub regimes: RegimesConfig,
    pub rfe: RfeConfig,
    pub calibrate: CalibrateConfig,
    pub fit: FitConfig,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ScalabilityConfig {
    pub kind: ScalabilityKind,
    pub p0: f64,
    /// `s` or `sigma`; `inf` for infinite scalability.
    #[serde(with = "eftqc::serde_float")]
    pub scale: f64,
}

impl Default for ScalabilityConfig {
    fn default() -> Self {
        Self {
            kind: ScalabilityKind::PowerLaw,
            p0: 1e-4,
            scale: 3.5,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SurfaceCodeConfig {
    #[serde(rename = "A")]
    pub a: f64,
    pub p_th: f64,
}

impl Default for SurfaceCodeConfig {
    fn default() -> Self {
        Self { a: 0.1, p_th: 0.01 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct AlgorithmConfig {
    pub alpha: f64,
    pub beta: f64,
    #[serde(rename = "p_C")]
    pub p_c: f64,
    pub error_budget_mode: ErrorBudgetMode,
    /// Divides `alpha`; models shorter circuits.
    pub burden_reduction: f64,
}

impl Default for AlgorithmConfig {
    fn default() -> Self {
        Self {
            alpha: 4.12e9,
            beta: 0.515,
            p_c: 0.1,
            error_budget_mode: ErrorBudgetMode::UnionBound,
            burden_reduction: 1.0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MethodChoice {
    /// Every method applicable to the scalability kind.
    #[default]
    All,
    ClosedForm,
    LowerBound,
    NumericSearch,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ReachConfig {
    pub distance_mode: DistanceMode,
    pub method: MethodChoice,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ContourConfig {
    pub q_logical_min: u64,
    pub q_logical_max: u64,
    pub step: u64,
}

impl Default for ContourConfig {
    fn default() -> Self {
        Self {
            q_logical_min: 1,
            q_logical_max: 150,
            step: 1,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RegimesConfig {
    pub s_min: f64,
    pub s_max: f64,
    pub s_points: usize,
    /// Bounds on `p0 / p_th`.
    pub ratio_min: f64,
    pub ratio_max: f64,
    pub ratio_points: usize,
}

impl Default for RegimesConfig {
    fn default() -> Self {
        // 0.25 steps in s and 0.02 steps in the ratio
        Self {
            s_min: 0.25,
            s_max: 10.0,
            s_points: 40,
            ratio_min: 0.02,
            ratio_max: 1.0,
            ratio_points: 50,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum NoiseKind {
    #[default]
    Ideal,
    Gaussian,
    ExpDecay,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct NoiseConfig {
    pub kind: NoiseKind,
    pub sigma: f64,
    pub lambda: f64,
    pub eta_resample: EtaResample,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RfeConfig {
    pub theta: f64,
    #[serde(rename = "K")]
    pub depths: u32,
    #[serde(rename = "J")]
    pub grid_size: u32,
    #[serde(rename = "M")]
    pub shots: u64,
    pub seed: u64,
    /// Monte-Carlo trials for the failure-rate estimate; 0 skips it.
    pub trials: u64,
    pub noise: NoiseConfig,
}

impl Default for RfeConfig {
    fn default() -> Self {
        Self {
            theta: RfeExperiment::on_grid_theta(32, 7),
            depths: 32,
            grid_size: 32,
            shots: 2000,
            seed: 0,
            trials: 200,
            noise: NoiseConfig::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CalibrateConfig {
    pub delta: f64,
    pub trials_per_probe: u64,
    pub ceiling: u64,
    pub max_retries: u32,
}

impl Default for CalibrateConfig {
    fn default() -> Self {
        Self {
            delta: 0.1,
            trials_per_probe: 200,
            ceiling: 100_000_000,
            max_retries: 4,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct FitConfig {
    /// Calibration CSV. When empty, data is generated from `[scalability]`.
    pub input: String,
    pub synthetic_sizes: Vec<u64>,
    /// Relative half-width of uniform multiplicative noise on synthetic data.
    pub synthetic_noise: f64,
    pub seed: u64,
}

/// Sources layered on top of the defaults, in order.
#[derive(Debug, Default)]
pub struct Layers<'a> {
    pub preset: Option<&'a str>,
    pub file: Option<&'a Path>,
    pub overrides: Vec<(String, String)>,
}

pub fn resolve(layers: &Layers) -> Result<Config, CliError> {
    let mut tree = serde_json::to_value(Config::default()).expect("defaults serialize");
    if let Some(name) = layers.preset {
        let text = PRESETS
            .iter()
            .find(|(n, _)| *n == name)
            .map(|(_, t)| *t)
            .ok_or_else(|| {
                let names: Vec<&str> = PRESETS.iter().map(|(n, _)| *n).collect();
                CliError::Config(format!("unknown preset `{name}`; available: {}", names.join(", ")))
            })?;
        merge(&mut tree, parse_toml(text, &format!("preset {name}"))?);
    }
    if let Some(path) = layers.file {
        merge(&mut tree, read_config_file(path)?);
    }
    for (key, raw) in &layers.overrides {
        set_path(&mut tree, key, parse_scalar(raw))?;
    }
    serde_json::from_value(tree).map_err(|e| CliError::Config(format!("invalid configuration: {e}")))
}

/// Splits `key=value`.
pub fn parse_assignment(s: &str) -> Result<(String, String), CliError> {
    match s.split_once('=') {
        Some((k, v)) if !k.trim().is_empty() => Ok((k.trim().to_string(), v.trim().to_string())),
        _ => Err(CliError::Config(format!("override `{s}` is not of the form key=value"))),
    }
}

fn read_config_file(path: &Path) -> Result<Value, CliError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::Config(format!("cannot read config {}: {e}", path.display())))?;
    let is_json = path.extension().is_some_and(|e| e == "json");
    if !is_json {
        return parse_toml(&text, &path.display().to_string());
    }
    let value: Value = serde_json::from_str(&text)
        .map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
    // A manifest carries the resolved config under `config`.
    match value {
        Value::Object(mut map) if map.contains_key("config") && map.contains_key("command") => {
            Ok(map.remove("config").unwrap_or(Value::Null))
        }
        other => Ok(other),
    }
}

fn parse_toml(text: &str, origin: &str) -> Result<Value, CliError> {
    let table: toml::Table =
        toml::from_str(text).map_err(|e| CliError::Config(format!("{origin}: {e}")))?;
    Ok(toml_to_json(toml::Value::Table(table)))
}

/// JSON has no non-finite numbers; they become the strings the float
/// fields accept.
fn toml_to_json(v: toml::Value) -> Value {
    match v {
        toml::Value::String(s) => Value::String(s),
        toml::Value::Integer(i) => Value::from(i),
        toml::Value::Float(f) if f.is_finite() => Value::from(f),
        toml::Value::Float(f) => Value::String(
            if f.is_nan() {
                "nan"
            } else if f > 0.0 {
                "inf"
            } else {
                "-inf"
            }
            .into(),
        ),
        toml::Value::Boolean(b) => Value::Bool(b),
        toml::Value::Datetime(d) => Value::String(d.to_string()),
        toml::Value::Array(a) => Value::Array(a.into_iter().map(toml_to_json).collect()),
        toml::Value::Table(t) => Value::Object(t.into_iter().map(|(k, v)| (k, toml_to_json(v))).collect()),
    }
}

/// Override values are read as TOML literals (numbers, booleans, arrays);
/// anything else is taken as a bare string.
fn parse_scalar(raw: &str) -> Value {
    if let Ok(u) = raw.parse::<u64>() {
        return Value::from(u);
    }
    match toml::from_str::<toml::Table>(&format!("v = {raw}")) {
        Ok(mut t) => toml_to_json(t.remove("v").expect("key present")),
        Err(_) => Value::String(raw.to_string()),
    }
}

fn merge(base: &mut Value, top: Value) {
    match (base, top) {
        (Value::Object(b), Value::Object(t)) => {
            for (k, v) in t {
                match b.get_mut(&k) {
                    Some(slot) => merge(slot, v),
                    None => {
                        b.insert(k, v);
                    }
                }
            }
        }
        (slot, top) => *slot = top,
    }
}

fn set_path(tree: &mut Value, key: &str, value: Value) -> Result<(), CliError> {
    let parts: Vec<&str> = key.split('.').collect();
    if parts.iter().any(|p| p.is_empty()) {
        return Err(CliError::Config(format!("malformed key `{key}`")));
    }
    let mut node = tree;
    for part in &parts[..parts.len() - 1] {
        let map = node
            .as_object_mut()
            .ok_or_else(|| CliError::Config(format!("`{key}`: `{part}` is not a section")))?;
        if !map.contains_key(*part) {
            return Err(CliError::Config(format!("unknown key `{key}`")));
        }
        node = map.get_mut(*part).expect("checked");
    }
    let last = parts[parts.len() - 1];
    let map: &mut Map<String, Value> = node
        .as_object_mut()
        .ok_or_else(|| CliError::Config(format!("`{key}` does not name a field")))?;
    if !map.contains_key(last) {
        return Err(CliError::Config(format!("unknown key `{key}`")));
    }
    map.insert(last.to_string(), value);
    Ok(())
}
