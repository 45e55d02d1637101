//! `eftqc`: reach estimates, regime maps, calibration fits and RFE
//! simulations written as JSON and CSV files.
//!
//! Every run writes `manifest.json` (the fully resolved configuration) and
//! `result.json` to `--out`. Feeding the manifest back through `--config`
//! reproduces the run byte for byte. Failures print a JSON object on stderr
//! and exit with 2 (config), 3 (input), 4 (domain), 5 (non-convergence) or
//! 6 (io).

mod commands;
mod config;
mod error;

use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use serde_json::json;

use crate::config::{parse_assignment, Config, Layers};
use crate::error::CliError;

#[derive(Parser, Debug)]
#[command(name = "eftqc", version, about = "Scalability-limited fault-tolerance resource estimates and RFE simulation")]
struct Cli {
    #[command(subcommand)]
    command: Command,

    /// TOML config file, or a manifest.json from an earlier run.
    #[arg(long, global = true)]
    config: Option<PathBuf>,

    /// Built-in parameter set applied before --config.
    #[arg(long, global = true, value_name = "NAME")]
    preset: Option<String>,

    /// Override a single key, e.g. `--set scalability.scale=4`. Repeatable.
    #[arg(long = "set", global = true, value_name = "KEY=VALUE")]
    overrides: Vec<String>,

    #[arg(long, global = true, default_value = "eftqc-out")]
    out: PathBuf,

    /// Seed for every random stream (rfe.seed and fit.seed).
    #[arg(long, global = true)]
    seed: Option<u64>,

    /// Calibration CSV for `fit` (fit.input).
    #[arg(long, global = true)]
    input: Option<PathBuf>,

    /// continuous or discrete_odd (reach.distance_mode).
    #[arg(long, global = true)]
    distance_mode: Option<String>,

    /// union_bound or log_refined (algorithm.error_budget_mode).
    #[arg(long, global = true)]
    error_budget_mode: Option<String>,
}

#[derive(Subcommand, Debug, Clone, Copy, PartialEq, Eq)]
enum Command {
    /// Fit power-law and logarithmic profiles to calibration data.
    Fit,
    /// Maximal logical qubit count by every applicable method.
    Reach,
    /// Required physical qubits across a range of logical qubit counts.
    Contour,
    /// Regime map over scalability and base error ratio.
    Regimes,
    /// One RFE run plus a Monte-Carlo failure estimate.
    RfeSim,
    /// Smallest shot count meeting a failure probability.
    RfeCalibrate,
    /// Minimal distillation footprints.
    Msd,
}

impl Command {
    fn name(self) -> &'static str {
        match self {
            Command::Fit => "fit",
            Command::Reach => "reach",
            Command::Contour => "contour",
            Command::Regimes => "regimes",
            Command::RfeSim => "rfe-sim",
            Command::RfeCalibrate => "rfe-calibrate",
            Command::Msd => "msd",
        }
    }
}

fn resolve(cli: &Cli) -> Result<Config, CliError> {
    let mut overrides = Vec::new();
    for s in &cli.overrides {
        overrides.push(parse_assignment(s)?);
    }
    // Dedicated flags win over --set.
    let mut push = |k: &str, v: String| overrides.push((k.to_string(), v));
    if let Some(m) = &cli.distance_mode {
        push("reach.distance_mode", format!("\"{m}\""));
    }
    if let Some(m) = &cli.error_budget_mode {
        push("algorithm.error_budget_mode", format!("\"{m}\""));
    }
    if let Some(seed) = cli.seed {
        push("rfe.seed", seed.to_string());
        push("fit.seed", seed.to_string());
    }
    if let Some(path) = &cli.input {
        let quoted = serde_json::to_string(&path.to_string_lossy()).expect("string");
        push("fit.input", quoted);
    }
    config::resolve(&Layers {
        preset: cli.preset.as_deref(),
        file: cli.config.as_deref(),
        overrides,
    })
}

fn write_atomic(dir: &Path, name: &str, contents: &[u8]) -> Result<(), CliError> {
    let mut tmp = tempfile::NamedTempFile::new_in(dir)?;
    tmp.write_all(contents)?;
    tmp.as_file().sync_all()?;
    tmp.persist(dir.join(name)).map_err(|e| CliError::Io(e.to_string()))?;
    Ok(())
}

fn pretty(v: &serde_json::Value) -> Vec<u8> {
    let mut bytes = serde_json::to_vec_pretty(v).expect("serializable");
    bytes.push(b'\n');
    bytes
}

fn run(cli: &Cli) -> Result<(), CliError> {
    let config = resolve(cli)?;
    let output = match cli.command {
        Command::Fit => commands::run_fit(&config)?,
        Command::Reach => commands::run_reach(&config)?,
        Command::Contour => commands::run_contour(&config)?,
        Command::Regimes => commands::run_regimes(&config)?,
        Command::RfeSim => commands::run_rfe_sim(&config)?,
        Command::RfeCalibrate => commands::run_rfe_calibrate(&config)?,
        Command::Msd => commands::run_msd(),
    };

    let manifest = json!({
        "tool": "eftqc",
        "version": env!("CARGO_PKG_VERSION"),
        "command": cli.command.name(),
        "config": serde_json::to_value(&config).expect("serializable"),
    });
    std::fs::create_dir_all(&cli.out)
        .map_err(|e| CliError::Io(format!("cannot create {}: {e}", cli.out.display())))?;
    let result = pretty(&output.result);
    write_atomic(&cli.out, "manifest.json", &pretty(&manifest))?;
    write_atomic(&cli.out, "result.json", &result)?;
    for (name, body) in &output.tables {
        write_atomic(&cli.out, name, body.as_bytes())?;
    }
    std::io::stdout().write_all(&result)?;
    Ok(())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) if !e.use_stderr() => {
            // --help and --version
            let _ = e.print();
            return ExitCode::SUCCESS;
        }
        Err(e) => {
            let err = CliError::Config(e.to_string().trim_end().to_string());
            eprintln!("{}", err.to_json());
            return ExitCode::from(err.exit_code() as u8);
        }
    };
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("{}", err.to_json());
            ExitCode::from(err.exit_code() as u8)
        }
    }
}
