//! `estimand-lab`: simulate trials with intercurrent events, compute oracle
//! estimand values and compare estimators against them.
//!
//! Exit codes: 0 success, 2 user-input error, 3 I/O error, 4 estimand
//! undefined, 5 estimation instability.

mod commands;
mod output;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use estimand_lab::Error;

pub const THREADS_ENV: &str = "ESTIMAND_LAB_THREADS";

#[derive(Parser, Debug)]
#[command(name = "estimand-lab", version, about = "Potential-outcome laboratory for clinical-trial estimands")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Debug, Clone)]
struct Scenario {
    /// Scenario file in `key = value` form.
    #[arg(long, value_name = "PATH")]
    config: PathBuf,
    /// Overrides the seed in the scenario file.
    #[arg(long, value_name = "U64")]
    seed: Option<u64>,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Simulate one trial and write observed.csv (and latent.csv with --emit-latent).
    Simulate {
        #[command(flatten)]
        scenario: Scenario,
        #[arg(long, value_name = "DIR")]
        out: PathBuf,
        /// Also write the oracle-only latent potential-outcome table.
        #[arg(long)]
        emit_latent: bool,
    },
    /// Print the oracle value of every estimand in a spec file.
    Truth {
        #[command(flatten)]
        scenario: Scenario,
        /// Estimand specification file.
        #[arg(long, value_name = "PATH")]
        spec: PathBuf,
    },
    /// Estimate every estimand over replications and summarize against the oracle.
    Estimate {
        #[command(flatten)]
        scenario: Scenario,
        /// Estimand specification file.
        #[arg(long, value_name = "PATH")]
        spec: PathBuf,
        /// Monte Carlo replications.
        #[arg(long, value_name = "N", default_value_t = 1)]
        reps: usize,
        /// Bootstrap resamples per estimate; 0 uses model-based intervals.
        #[arg(long, value_name = "N", default_value_t = 0)]
        boot: usize,
        /// Directory for results.csv; standard output when omitted.
        #[arg(long, value_name = "DIR")]
        out: Option<PathBuf>,
    },
    /// Compare estimates on ITTS, FAS and PPS against the full-population oracle.
    Compare {
        #[command(flatten)]
        scenario: Scenario,
        /// Estimand specification file.
        #[arg(long, value_name = "PATH")]
        spec: PathBuf,
        /// Monte Carlo replications.
        #[arg(long, value_name = "N", default_value_t = 1)]
        reps: usize,
        /// Directory for compare.csv; standard output when omitted.
        #[arg(long, value_name = "DIR")]
        out: Option<PathBuf>,
    },
    /// Parse a spec file and print its canonical form.
    Check {
        /// Estimand specification file.
        #[arg(long, value_name = "PATH")]
        spec: PathBuf,
    },
}

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error("{context}: {source}")]
    Io { context: String, source: std::io::Error },
    #[error("{0}")]
    Undefined(String),
    #[error("{0}")]
    Unstable(String),
}

impl CliError {
    fn exit_code(&self) -> u8 {
        match self {
            CliError::Usage(_) => 2,
            CliError::Io { .. } => 3,
            CliError::Undefined(_) => 4,
            CliError::Unstable(_) => 5,
        }
    }

    pub fn with_context(self, context: &str) -> Self {
        match self {
            CliError::Usage(m) => CliError::Usage(format!("{context}: {m}")),
            CliError::Undefined(m) => CliError::Undefined(format!("{context}: {m}")),
            CliError::Unstable(m) => CliError::Unstable(format!("{context}: {m}")),
            io @ CliError::Io { .. } => io,
        }
    }

    pub fn io(context: impl Into<String>) -> impl FnOnce(std::io::Error) -> CliError {
        let context = context.into();
        move |source| CliError::Io { context, source }
    }
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        match e {
            Error::Config(_) | Error::Parse(_) | Error::Plan(_) | Error::InvalidArgument(_) => {
                CliError::Usage(e.to_string())
            }
            Error::EstimandUndefined(_) => CliError::Undefined(e.to_string()),
            _ => CliError::Unstable(e.to_string()),
        }
    }
}

impl From<csv::Error> for CliError {
    fn from(e: csv::Error) -> Self {
        CliError::Io { context: "writing CSV".into(), source: e.into() }
    }
}

fn configure_threads() -> Result<(), CliError> {
    let Ok(v) = std::env::var(THREADS_ENV) else {
        return Ok(());
    };
    let n: usize = v
        .trim()
        .parse()
        .ok()
        .filter(|n| *n > 0)
        .ok_or_else(|| CliError::Usage(format!("{THREADS_ENV} must be a positive integer, got `{v}`")))?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build_global()
        .map_err(|e| CliError::Usage(format!("cannot size the worker pool: {e}")))
}

fn run(cli: Cli) -> Result<(), CliError> {
    configure_threads()?;
    match cli.command {
        Command::Simulate { scenario, out, emit_latent } => {
            commands::simulate(&scenario.config, scenario.seed, &out, emit_latent)
        }
        Command::Truth { scenario, spec } => commands::truth(&scenario.config, scenario.seed, &spec),
        Command::Estimate { scenario, spec, reps, boot, out } => {
            commands::estimate(&scenario.config, scenario.seed, &spec, reps, boot, out.as_deref())
        }
        Command::Compare { scenario, spec, reps, out } => {
            commands::compare(&scenario.config, scenario.seed, &spec, reps, out.as_deref())
        }
        Command::Check { spec } => commands::check(&spec),
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("error")).init();
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 2 } else { 0 });
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
