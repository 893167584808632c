//! Command-line front end: parameter sweeps, phase-space fields and
//! self-validation, written as deterministic CSV or JSON files.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod commands;
pub mod config;
pub mod error;
pub mod output;
pub mod validate;

use std::path::PathBuf;

use ptwigner_core::spectrum::{DEFAULT_TOL_REAL, PAIR_TOL, RESIDUAL_BOUND};
use ptwigner_core::wigner::{CirculationConfig, JpConfig, IMAG_RESIDUE_LIMIT};
use serde_json::{json, Value};

pub use config::{Cli, Command, EpsRange, Format, RunConfig};
pub use error::CliError;
pub use output::{Cell, Table};

use commands::Produced;

pub const VERSION: &str = env!("CARGO_PKG_VERSION");

#[derive(Debug, Clone, PartialEq)]
pub struct RunOutcome {
    pub output: PathBuf,
    pub rows: usize,
}

fn tolerances() -> Value {
    let jp = JpConfig::default();
    let circ = CirculationConfig::default();
    json!({
        "real_classification": DEFAULT_TOL_REAL,
        "pair_matching": PAIR_TOL,
        "eigen_residual": RESIDUAL_BOUND,
        "wigner_imag_residue": IMAG_RESIDUE_LIMIT,
        "jp_abs_tol": jp.abs_tol,
        "circulation_tol": circ.tol,
    })
}

fn produce(config: &RunConfig) -> Result<(Produced, usize), CliError> {
    let n = config.n_max;
    match &config.command {
        Command::SpectrumSweep { eps } => Ok((commands::spectrum_sweep(eps, n)?, 0)),
        Command::EpFind { branches, bracket, tol } => Ok((commands::ep_find(*branches, *bracket, *tol, n)?, 0)),
        Command::WignerGrid { eps, state_index, grid } => Ok((commands::wigner_grid(*eps, *state_index, grid, n)?, 0)),
        Command::FlowField { eps, state_index, grid } => Ok((commands::flow(*eps, *state_index, grid, n)?, 0)),
        Command::CirculationSweep { eps, state_index, include_dwdt, r_init } => {
            Ok((commands::circulation_sweep(eps, *state_index, *include_dwdt, *r_init, n)?, 0))
        }
        Command::Validate => {
            let (table, failed) = validate::validate(n)?;
            Ok((Produced { table, failures: Vec::new() }, failed))
        }
    }
}

fn execute(config: &RunConfig) -> Result<RunOutcome, CliError> {
    config.validate()?;
    let (Produced { mut table, failures }, failed_checks) = produce(config)?;
    let echo = serde_json::to_value(config).expect("config serializes");
    table.set_meta("config", echo);
    table.set_meta("version", Value::from(VERSION));
    table.set_meta("tolerances", tolerances());
    table.set_meta("status", Value::from(if failures.is_empty() { "complete" } else { "partial" }));
    table.set_meta("failures", json!(failures));
    output::write_atomic(&config.output, &table.to_bytes(config.format))?;
    if !failures.is_empty() {
        return Err(CliError::Numerical(format!(
            "{} point(s) did not converge; partial output written to {}: {}",
            failures.len(),
            config.output.display(),
            failures.join("; ")
        )));
    }
    if failed_checks > 0 {
        return Err(CliError::ChecksFailed(failed_checks));
    }
    Ok(RunOutcome { output: config.output.clone(), rows: table.rows.len() })
}

/// Runs one command and writes its output file.
pub fn run(config: &RunConfig) -> Result<RunOutcome, CliError> {
    match config.workers {
        Some(workers) => rayon::ThreadPoolBuilder::new()
            .num_threads(workers)
            .build()
            .map_err(|e| CliError::Config(format!("cannot start {workers} workers: {e}")))?
            .install(|| execute(config)),
        None => execute(config),
    }
}
