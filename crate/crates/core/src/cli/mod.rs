//! Command-line experiments: `figure2` curves, planner tables, constants, Monte Carlo runs and
//! verification suites, written as CSV.

mod config;
mod experiments;
mod report;
mod suites;

use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand};
use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};

pub use config::{default_n_grid, ExperimentConfig, MetricName, Unit};
pub use experiments::{
    figure2_metrics, metric_label, plan_for, run_constants, run_figure2, run_montecarlo, run_plan,
    second_order_curve,
};
pub use report::{fmt_num, fmt_opt, Check, Table, VerificationReport};
pub use suites::{
    class_law_gap, concentration_checks, exact_oracle_checks, moment_checks, random_channel,
    run_verification, sandwich_checks, SUITES,
};

/// Seed of the `index`-th task derived from a master seed.
pub fn task_seed(master: u64, index: u64) -> u64 {
    let mut rng = ChaCha8Rng::seed_from_u64(master);
    rng.set_stream(index);
    rng.next_u64()
}

#[derive(Debug, Parser)]
#[command(
    name = "covert",
    version,
    about = "Finite-blocklength covert communication experiments"
)]
pub struct Cli {
    #[command(subcommand)]
    pub verb: Verb,
    /// Flat key = value experiment file.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Output CSV path; stdout when absent.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    #[arg(long, global = true, value_parser = ["nats", "bits"])]
    pub unit: Option<String>,
}

#[derive(Debug, Subcommand)]
pub enum Verb {
    /// log M/√n curves and first-order constants for the three metrics.
    Figure2,
    /// Run a verification suite: exact-oracles, concentration, sandwich or moments.
    Verify { suite: String },
    /// Monte Carlo reliability of generated PPM codes.
    Montecarlo,
    /// Planner and converse table for the configured metric.
    Plan,
    /// Channel and detector constants.
    Constants,
}

fn load_config(cli: &Cli) -> Result<ExperimentConfig> {
    let mut cfg = match &cli.config {
        Some(p) => {
            let text = std::fs::read_to_string(p)
                .map_err(|e| Error::ConfigError(format!("{}: {e}", p.display())))?;
            ExperimentConfig::parse(&text)?
        }
        None => ExperimentConfig::default(),
    };
    if let Some(s) = cli.seed {
        cfg.seed = s;
    }
    if let Some(u) = &cli.unit {
        cfg.unit = u.parse()?;
    }
    if let Some(o) = &cli.out {
        cfg.out = Some(o.display().to_string());
    }
    Ok(cfg)
}

fn emit(text: &str, out: Option<&Path>, stdout: &mut dyn Write) -> Result<()> {
    let io = |e: std::io::Error| Error::ConfigError(format!("write: {e}"));
    match out {
        Some(p) => std::fs::write(p, text).map_err(io),
        None => stdout.write_all(text.as_bytes()).map_err(io),
    }
}

/// Runs one verb and returns the process exit code.
pub fn run(cli: &Cli, stdout: &mut dyn Write) -> Result<i32> {
    let cfg = load_config(cli)?;
    let out = cfg.out.as_deref().map(Path::new);
    let table = match &cli.verb {
        Verb::Figure2 => run_figure2(&cfg)?,
        Verb::Plan => run_plan(&cfg)?,
        Verb::Constants => run_constants(&cfg)?,
        Verb::Montecarlo => run_montecarlo(&cfg)?,
        Verb::Verify { suite } => {
            let report = run_verification(suite, cfg.seed)?;
            emit(&report.table().to_csv()?, out, stdout)?;
            if let Some(p) = out {
                let json = serde_json::to_string_pretty(&report)
                    .map_err(|e| Error::ConfigError(format!("json: {e}")))?;
                emit(&(json + "\n"), Some(&p.with_extension("json")), stdout)?;
            }
            return Ok(if report.pass() { 0 } else { 1 });
        }
    };
    emit(&table.to_csv()?, out, stdout)?;
    Ok(0)
}
