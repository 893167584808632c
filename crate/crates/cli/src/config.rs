use std::path::{Path, PathBuf};
use std::str::FromStr;

use clap::{Args, Parser, Subcommand, ValueEnum};
use ptwigner_core::hamiltonian::{DEFAULT_BASIS, MAX_BASIS, MIN_BASIS};
use ptwigner_core::wigner::PhaseGrid;
use serde::Serialize;

use crate::error::CliError;

pub const OUT_DIR_ENV: &str = "PTWIGNER_OUT_DIR";
pub const WORKERS_ENV: &str = "PTWIGNER_WORKERS";

/// `start:stop:step`, or a single value.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EpsRange {
    pub start: f64,
    pub stop: f64,
    pub step: f64,
    #[serde(skip)]
    decimals: Option<u32>,
}

fn decimals_of(text: &str) -> Option<u32> {
    let t = text.trim();
    if t.contains(['e', 'E']) {
        return None;
    }
    Some(t.split_once('.').map_or(0, |(_, frac)| frac.len() as u32))
}

impl EpsRange {
    pub fn single(value: f64) -> Self {
        Self { start: value, stop: value, step: 1.0, decimals: None }
    }

    /// Points `start + k·step` up to `stop`, including `stop` when it lies
    /// within half a step of the last point. Points are rounded to the
    /// number of decimals written in the range text.
    pub fn values(&self) -> Vec<f64> {
        let count = ((self.stop - self.start) / self.step + 0.5).floor() as usize + 1;
        (0..count)
            .map(|k| {
                let v = self.start + k as f64 * self.step;
                match self.decimals {
                    Some(d) if d <= 15 => {
                        let scale = 10f64.powi(d as i32);
                        (v * scale).round() / scale
                    }
                    _ => v,
                }
            })
            .collect()
    }
}

impl FromStr for EpsRange {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let parts: Vec<&str> = s.split(':').collect();
        let num = |t: &str| t.trim().parse::<f64>().map_err(|_| format!("'{t}' is not a number"));
        let range = match parts.as_slice() {
            [v] => Self { decimals: decimals_of(v), ..Self::single(num(v)?) },
            [a, b, c] => {
                let decimals = match (decimals_of(a), decimals_of(c)) {
                    (Some(x), Some(y)) => Some(x.max(y)),
                    _ => None,
                };
                Self { start: num(a)?, stop: num(b)?, step: num(c)?, decimals }
            }
            _ => return Err(format!("'{s}' is neither a value nor start:stop:step")),
        };
        if ![range.start, range.stop, range.step].iter().all(|v| v.is_finite()) {
            return Err(format!("'{s}' has non-finite entries"));
        }
        if !(range.step > 0.0) {
            return Err(format!("step in '{s}' must be positive"));
        }
        if range.stop < range.start {
            return Err(format!("range '{s}' is empty"));
        }
        if !(range.start > 0.0) {
            return Err(format!("epsilon values in '{s}' must be positive"));
        }
        Ok(range)
    }
}

fn parse_pair<T: FromStr>(s: &str) -> Result<(T, T), String> {
    let (a, b) = s.split_once(',').ok_or_else(|| format!("'{s}' is not a comma-separated pair"))?;
    let p = |t: &str| t.trim().parse::<T>().map_err(|_| format!("'{t}' is not a valid entry"));
    Ok((p(a)?, p(b)?))
}

fn parse_f64_pair(s: &str) -> Result<(f64, f64), String> {
    parse_pair(s)
}

fn parse_usize_pair(s: &str) -> Result<(usize, usize), String> {
    parse_pair(s)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Csv,
    Json,
}

impl Format {
    pub fn extension(&self) -> &'static str {
        match self {
            Format::Csv => "csv",
            Format::Json => "json",
        }
    }
}

#[derive(Debug, Parser)]
#[command(name = "ptwigner", version, about = "Spectra, Wigner functions and Wigner flow of the -(ix)^eps oscillators")]
pub struct Cli {
    #[command(subcommand)]
    pub command: CommandArgs,
}

#[derive(Debug, Args)]
pub struct CommonArgs {
    /// Output file; relative paths resolve against $PTWIGNER_OUT_DIR when set
    #[arg(long, short)]
    pub out: Option<PathBuf>,
    #[arg(long, value_enum, default_value = "csv")]
    pub format: Format,
    /// Fock basis size
    #[arg(long, default_value_t = DEFAULT_BASIS)]
    pub n_max: usize,
    /// Worker threads (overrides $PTWIGNER_WORKERS)
    #[arg(long)]
    pub workers: Option<usize>,
}

#[derive(Debug, Args)]
pub struct GridArgs {
    #[arg(long, default_value = "-5,5", value_parser = parse_f64_pair, allow_hyphen_values = true)]
    pub x_bounds: (f64, f64),
    #[arg(long, default_value = "-5,5", value_parser = parse_f64_pair, allow_hyphen_values = true)]
    pub p_bounds: (f64, f64),
    /// Node counts along x and p (odd)
    #[arg(long, default_value = "201,201", value_parser = parse_usize_pair)]
    pub nodes: (usize, usize),
}

#[derive(Debug, Subcommand)]
pub enum CommandArgs {
    /// Eigenvalues, classification and branch ids along an epsilon range
    SpectrumSweep {
        #[arg(long, default_value = "1.0:3.0:0.05")]
        eps: EpsRange,
        #[command(flatten)]
        common: CommonArgs,
    },
    /// Bisection for the exceptional point of two levels
    EpFind {
        /// Level indices in the sorted spectrum
        #[arg(long, default_value = "1,2", value_parser = parse_usize_pair)]
        branches: (usize, usize),
        #[arg(long, default_value = "1.40,1.45", value_parser = parse_f64_pair)]
        bracket: (f64, f64),
        #[arg(long, default_value_t = 1e-7)]
        tol: f64,
        #[command(flatten)]
        common: CommonArgs,
    },
    /// Wigner function of one eigenstate on a grid
    WignerGrid {
        #[arg(long)]
        eps: f64,
        #[arg(long, default_value_t = 1)]
        state: usize,
        #[command(flatten)]
        grid: GridArgs,
        #[command(flatten)]
        common: CommonArgs,
    },
    /// Wigner flow and continuity residual of one eigenstate on a grid
    FlowField {
        #[arg(long)]
        eps: f64,
        #[arg(long, default_value_t = 1)]
        state: usize,
        #[command(flatten)]
        grid: GridArgs,
        #[command(flatten)]
        common: CommonArgs,
    },
    /// Flow circulation of one eigenstate along an epsilon range
    CirculationSweep {
        #[arg(long, default_value = "1.30:1.50:0.01")]
        eps: EpsRange,
        #[arg(long, default_value_t = 1)]
        state: usize,
        /// Subtract the time-derivative term 2 Im(E) W
        #[arg(long, default_value_t = false, action = clap::ArgAction::Set)]
        include_dwdt: bool,
        #[arg(long, default_value_t = 5.0)]
        r_init: f64,
        #[command(flatten)]
        common: CommonArgs,
    },
    /// Run every oracle cross-check and report pass/fail per check
    Validate {
        #[command(flatten)]
        common: CommonArgs,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "command", rename_all = "kebab-case")]
pub enum Command {
    SpectrumSweep { eps: EpsRange },
    EpFind { branches: (usize, usize), bracket: (f64, f64), tol: f64 },
    WignerGrid { eps: f64, state_index: usize, grid: PhaseGrid },
    FlowField { eps: f64, state_index: usize, grid: PhaseGrid },
    CirculationSweep { eps: EpsRange, state_index: usize, include_dwdt: bool, r_init: f64 },
    Validate,
}

impl Command {
    pub fn name(&self) -> &'static str {
        match self {
            Command::SpectrumSweep { .. } => "spectrum-sweep",
            Command::EpFind { .. } => "ep-find",
            Command::WignerGrid { .. } => "wigner-grid",
            Command::FlowField { .. } => "flow-field",
            Command::CirculationSweep { .. } => "circulation-sweep",
            Command::Validate => "validate",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunConfig {
    #[serde(flatten)]
    pub command: Command,
    pub n_max: usize,
    pub format: Format,
    pub output: PathBuf,
    /// Not echoed: results do not depend on it.
    #[serde(skip)]
    pub workers: Option<usize>,
}

impl RunConfig {
    pub fn new(command: Command, n_max: usize, format: Format, output: PathBuf) -> Self {
        Self { command, n_max, format, output, workers: None }
    }

    /// Builds and validates a configuration from parsed arguments and the
    /// environment overrides.
    pub fn from_cli(cli: Cli) -> Result<Self, CliError> {
        let env = |key: &str| std::env::var(key).ok().filter(|v| !v.is_empty());
        Self::from_cli_with_env(cli, env(OUT_DIR_ENV).as_deref(), env(WORKERS_ENV).as_deref())
    }

    pub fn from_cli_with_env(cli: Cli, out_dir: Option<&str>, workers_env: Option<&str>) -> Result<Self, CliError> {
        let grid_of = |g: GridArgs| {
            PhaseGrid::new(g.x_bounds.0, g.x_bounds.1, g.p_bounds.0, g.p_bounds.1, g.nodes.0, g.nodes.1)
                .map_err(|e| CliError::Config(e.to_string()))
        };
        let (command, common) = match cli.command {
            CommandArgs::SpectrumSweep { eps, common } => (Command::SpectrumSweep { eps }, common),
            CommandArgs::EpFind { branches, bracket, tol, common } => {
                (Command::EpFind { branches, bracket, tol }, common)
            }
            CommandArgs::WignerGrid { eps, state, grid, common } => {
                (Command::WignerGrid { eps, state_index: state, grid: grid_of(grid)? }, common)
            }
            CommandArgs::FlowField { eps, state, grid, common } => {
                (Command::FlowField { eps, state_index: state, grid: grid_of(grid)? }, common)
            }
            CommandArgs::CirculationSweep { eps, state, include_dwdt, r_init, common } => {
                (Command::CirculationSweep { eps, state_index: state, include_dwdt, r_init }, common)
            }
            CommandArgs::Validate { common } => (Command::Validate, common),
        };
        let file =
            common.out.unwrap_or_else(|| PathBuf::from(format!("{}.{}", command.name(), common.format.extension())));
        let output = match out_dir {
            Some(dir) if file.is_relative() => Path::new(dir).join(file),
            _ => file,
        };
        let workers = match (common.workers, workers_env) {
            (Some(w), _) => Some(w),
            (None, Some(text)) => Some(
                text.trim()
                    .parse::<usize>()
                    .map_err(|_| CliError::Config(format!("{WORKERS_ENV}='{text}' is not a worker count")))?,
            ),
            (None, None) => None,
        };
        let config = Self { command, n_max: common.n_max, format: common.format, output, workers };
        config.validate()?;
        Ok(config)
    }

    pub fn validate(&self) -> Result<(), CliError> {
        let bad = |msg: String| Err(CliError::Config(msg));
        if !(MIN_BASIS..=MAX_BASIS).contains(&self.n_max) {
            return bad(format!("n_max {} outside [{MIN_BASIS}, {MAX_BASIS}]", self.n_max));
        }
        if self.workers == Some(0) {
            return bad("worker count must be positive".into());
        }
        let check_state = |s: usize| {
            if s < self.n_max {
                Ok(())
            } else {
                bad(format!("state {s} outside basis of size {}", self.n_max))
            }
        };
        let check_eps =
            |e: f64| if e > 0.0 && e.is_finite() { Ok(()) } else { bad(format!("epsilon {e} must be positive")) };
        match &self.command {
            Command::SpectrumSweep { .. } | Command::Validate => Ok(()),
            Command::EpFind { branches, bracket, tol } => {
                check_state(branches.0.max(branches.1))?;
                if branches.0 == branches.1 {
                    return bad("the two branches must differ".into());
                }
                if !(bracket.0 > 0.0 && bracket.1 > bracket.0) {
                    return bad(format!("bracket {bracket:?} must satisfy 0 < lo < hi"));
                }
                if !(*tol >= 1e-7) {
                    return bad(format!("tolerance {tol} below 1e-7"));
                }
                Ok(())
            }
            Command::WignerGrid { eps, state_index, .. } | Command::FlowField { eps, state_index, .. } => {
                check_eps(*eps)?;
                check_state(*state_index)
            }
            Command::CirculationSweep { state_index, r_init, .. } => {
                check_state(*state_index)?;
                if !(*r_init >= 5.0) {
                    return bad(format!("r_init {r_init} below 5"));
                }
                Ok(())
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn range_includes_stop_within_half_step() {
        let r: EpsRange = "1.0:3.0:0.05".parse().unwrap();
        let v = r.values();
        assert_eq!(v.len(), 41);
        assert_eq!(v[3], 1.15);
        assert_eq!(*v.last().unwrap(), 3.0);
        let r: EpsRange = "1.0:1.12:0.05".parse().unwrap();
        assert_eq!(r.values(), vec![1.0, 1.05, 1.1]);
        let r: EpsRange = "1.0:1.13:0.05".parse().unwrap();
        assert_eq!(r.values(), vec![1.0, 1.05, 1.1, 1.15]);
    }

    #[test]
    fn single_value_range() {
        let r: EpsRange = "2".parse().unwrap();
        assert_eq!(r.values(), vec![2.0]);
    }

    #[test]
    fn malformed_ranges() {
        for text in ["1:2", "1:2:0", "1:2:-0.1", "2:1:0.1", "a:2:0.1", "0:1:0.5", "1:inf:0.1"] {
            assert!(text.parse::<EpsRange>().is_err(), "{text}");
        }
    }
}
