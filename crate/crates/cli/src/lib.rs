//! Command-line workflows around `mlq-core`: sample datasets, reconstruct
//! states, run Monte Carlo sweeps and verify extremal conditions.

pub mod commands;
pub mod files;
pub mod report;

use std::ffi::OsString;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};

pub const EXIT_OK: i32 = 0;
pub const EXIT_FAILURE: i32 = 1;
pub const EXIT_USAGE: i32 = 2;
pub const EXIT_IO: i32 = 3;
pub const EXIT_NO_CONVERGENCE: i32 = 4;

/// Environment variable that overrides `--seed`.
pub const SEED_ENV: &str = "MLQ_SEED";

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("usage: {0}")]
    Usage(String),
    #[error("i/o: {0}")]
    Io(String),
    #[error("schema: {0}")]
    Schema(String),
    #[error(transparent)]
    Core(#[from] mlq_core::Error),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => EXIT_USAGE,
            CliError::Io(_) | CliError::Schema(_) => EXIT_IO,
            CliError::Core(_) => EXIT_FAILURE,
        }
    }
}

#[derive(Debug, Parser)]
#[command(
    name = "mlq",
    version,
    about = "Maximum-likelihood quantum state reconstruction"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Sample a dataset from a true state and a measurement plan.
    Generate(GenerateArgs),
    /// Reconstruct a state from a dataset.
    Estimate(EstimateArgs),
    /// Monte Carlo comparison of estimators over a list of sample sizes.
    Sweep(SweepArgs),
    /// Evaluate the extremal conditions of a state against a dataset.
    Verify(VerifyArgs),
}

#[derive(Debug, Clone, Args)]
#[group(id = "truth", required = true, multiple = false)]
pub struct TruthArgs {
    /// Qubit Bloch vector `x,y,z`.
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    pub bloch: Option<Vec<f64>>,
    /// State file.
    #[arg(long)]
    pub state: Option<PathBuf>,
}

#[derive(Debug, Clone, Args)]
pub struct PlanArgs {
    /// `pauli6`, `overcomplete8` or `mub-<d>` for prime d.
    #[arg(long, conflicts_with = "basis")]
    pub preset: Option<String>,
    /// Comma-separated single bases: `x`, `y`, `z`, `computational`.
    #[arg(long, value_delimiter = ',')]
    pub basis: Option<Vec<String>>,
    /// Measure every effect as its own yes/no setting.
    #[arg(long)]
    pub bare: bool,
    /// With `--bare`, record the "no" outcome as well.
    #[arg(long, requires = "bare")]
    pub include_complement: bool,
}

#[derive(Debug, Args)]
pub struct GenerateArgs {
    #[command(flatten)]
    pub truth: TruthArgs,
    #[command(flatten)]
    pub plan: PlanArgs,
    /// Shots per setting; a single value applies to every setting.
    #[arg(long, value_delimiter = ',', required = true)]
    pub shots: Vec<u64>,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Write the rounded Born counts instead of sampling.
    #[arg(long)]
    pub exact: bool,
    /// Output file; stdout when omitted.
    #[arg(short, long)]
    pub output: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum Method {
    Ml,
    Ls,
    Linear,
}

#[derive(Debug, Args)]
pub struct EstimateArgs {
    #[arg(long)]
    pub data: PathBuf,
    #[arg(long, value_enum, default_value = "ml")]
    pub method: Method,
    #[arg(long, default_value_t = 1e-8)]
    pub tol: f64,
    #[arg(long, default_value_t = 10_000)]
    pub max_iter: usize,
    #[arg(long, default_value_t = 1.0)]
    pub dilution: f64,
    /// State file; stdout when omitted.
    #[arg(short, long)]
    pub output: Option<PathBuf>,
    /// Also write the report to this file.
    #[arg(long)]
    pub report: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct SweepArgs {
    #[command(flatten)]
    pub truth: TruthArgs,
    #[command(flatten)]
    pub plan: PlanArgs,
    /// Total shot budgets, split evenly across settings.
    #[arg(long, value_delimiter = ',', required = true)]
    pub n_list: Vec<u64>,
    #[arg(long, default_value_t = 100)]
    pub trials: usize,
    /// Comma-separated subset of `ml`, `ls`, `linear`.
    #[arg(long, value_delimiter = ',', default_value = "ml,ls,linear")]
    pub estimators: Vec<String>,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long)]
    pub exact: bool,
    #[arg(long, default_value_t = 1e-8)]
    pub tol: f64,
    #[arg(long, default_value_t = 10_000)]
    pub max_iter: usize,
    /// CSV file; stdout when omitted.
    #[arg(short, long)]
    pub output: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct VerifyArgs {
    #[arg(long)]
    pub state: PathBuf,
    #[arg(long)]
    pub data: PathBuf,
    #[arg(long)]
    pub report: Option<PathBuf>,
}

/// Parses `args` (program name first), runs the command and returns the
/// process exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
            let _ = e.print();
            return code;
        }
    };
    let seed_override = match std::env::var(SEED_ENV) {
        Ok(v) => match v.trim().parse::<u64>() {
            Ok(seed) => Some(seed),
            Err(_) => {
                eprintln!("error: {SEED_ENV}={v:?} is not an unsigned integer");
                return EXIT_USAGE;
            }
        },
        Err(_) => None,
    };
    let outcome = match cli.command {
        Command::Generate(a) => commands::generate(a, seed_override),
        Command::Estimate(a) => commands::estimate(a),
        Command::Sweep(a) => commands::sweep(a, seed_override),
        Command::Verify(a) => commands::verify(a),
    };
    match outcome {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}
