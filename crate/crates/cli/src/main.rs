//! `isac`: ROC curves, Monte-Carlo validation reports, PD/rate frontiers
//! and minimum-power allocation tables as CSV/JSON.

mod commands;
mod output;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use isac_core::IsacError;

#[derive(Debug)]
pub enum CliError {
    Usage(String),
    Io(String),
    Core(IsacError),
}

impl From<IsacError> for CliError {
    fn from(e: IsacError) -> Self {
        CliError::Core(e)
    }
}

impl CliError {
    fn exit_code(&self) -> u8 {
        match self {
            CliError::Usage(_) | CliError::Io(_) => 2,
            CliError::Core(IsacError::Config(_) | IsacError::InvalidTargets(_) | IsacError::Domain { .. }) => 2,
            CliError::Core(IsacError::Numeric { .. } | IsacError::Singular { .. }) => 3,
        }
    }
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Usage(s) => write!(f, "usage error: {s}"),
            CliError::Io(s) => write!(f, "i/o error: {s}"),
            CliError::Core(e) => write!(f, "{e}"),
        }
    }
}

/// What a successful run concluded.
pub enum Outcome {
    Ok,
    /// Infeasible allocation, or a validation with flagged points.
    Failed,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Preset {
    /// Pure path-loss link budget.
    Literal,
    /// Link offsets that put the T = 20 benchmark targets in the tradeoff region.
    Calibrated,
}

#[derive(Debug, Args)]
pub struct Common {
    /// Scenario file (flat TOML keys); missing keys take defaults.
    #[arg(long, global = true, conflicts_with = "preset")]
    pub config: Option<PathBuf>,
    #[arg(long, global = true, value_enum)]
    pub preset: Option<Preset>,
    /// Overrides `t_symbols` from the scenario.
    #[arg(long, global = true)]
    pub t_symbols: Option<u32>,
    /// Run without the thread pool.
    #[arg(long, global = true)]
    pub sequential: bool,
}

#[derive(Debug, Parser)]
#[command(name = "isac", version, about = "Detection, rate and power allocation for a single ISAC link")]
pub struct Cli {
    #[command(flatten)]
    pub common: Common,
    #[command(subcommand)]
    pub cmd: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Closed-form ROC curves.
    Roc(commands::RocArgs),
    /// Monte-Carlo check of one detector's closed forms.
    Validate(commands::ValidateArgs),
    /// PD and rate along a sweep of the power split.
    Tradeoff(commands::TradeoffArgs),
    /// Minimum transmit power per case.
    Allocate(commands::AllocateArgs),
    /// Print the resolved scenario as TOML.
    Config(commands::ConfigArgs),
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => e.exit(),
    };
    match commands::run(&cli) {
        Ok(Outcome::Ok) => ExitCode::SUCCESS,
        Ok(Outcome::Failed) => ExitCode::from(1),
        Err(e) => {
            eprintln!("isac: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
