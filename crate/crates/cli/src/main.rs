//! `judba-sim`: command-line front end for the solver and experiment harness.
//!
//! Subcommands:
//! - `solve`: one scenario through the proposed scheme and both benchmarks
//! - `sweep`: experiment sweep over M, F, or lambda, CSV out
//! - `verify`: cross-check the solver and cost model against the brute
//!   force oracles
//!
//! Exit codes: 0 success, 1 usage or config error, 2 solver failure,
//! 3 verification breach. `JUDBA_THREADS` caps the worker pool (0 = auto).

mod commands;
mod io;

use std::process::ExitCode;

use clap::error::ErrorKind;
use clap::{Parser, Subcommand};

pub(crate) const EXIT_USAGE: u8 = 1;
pub(crate) const EXIT_SOLVER: u8 = 2;
pub(crate) const EXIT_BREACH: u8 = 3;

#[derive(Parser)]
#[command(
    name = "judba-sim",
    version,
    about = "Joint uploading-decision and bandwidth-allocation simulator"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Solve one random scenario and compare the three schemes.
    Solve {
        /// Config file (key = value lines); defaults apply when omitted.
        #[arg(long)]
        config: Option<std::path::PathBuf>,
        /// Scenario seed; overrides the config's rng_seed.
        #[arg(long)]
        seed: Option<u64>,
        /// CSV output path; stdout summary only when omitted.
        #[arg(long)]
        out: Option<std::path::PathBuf>,
    },
    /// Sweep an axis over a list of values, averaging across seeds.
    Sweep {
        #[arg(long)]
        config: Option<std::path::PathBuf>,
        /// Sweep axis: M, F, or lambda.
        #[arg(long)]
        axis: String,
        /// Comma-separated axis values (F in Hz).
        #[arg(long)]
        values: String,
        /// Number of seeds per axis value.
        #[arg(long, default_value_t = 100)]
        seeds: u64,
        /// First seed of the range; the sweep uses seed..seed+seeds.
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// CSV output path; written to stdout when omitted.
        #[arg(long)]
        out: Option<std::path::PathBuf>,
    },
    /// Run the oracle cross-checks over random instances.
    Verify {
        #[arg(long)]
        config: Option<std::path::PathBuf>,
        /// Number of random instances per check.
        #[arg(long, default_value_t = 100)]
        trials: u64,
        /// Base seed for instance generation.
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
}

/// Failure carrying the process exit code.
pub(crate) struct Failure {
    pub code: u8,
    pub message: String,
}

impl Failure {
    pub fn usage(message: impl Into<String>) -> Self {
        Self {
            code: EXIT_USAGE,
            message: message.into(),
        }
    }

    pub fn solver(message: impl Into<String>) -> Self {
        Self {
            code: EXIT_SOLVER,
            message: message.into(),
        }
    }

    pub fn breach(message: impl Into<String>) -> Self {
        Self {
            code: EXIT_BREACH,
            message: message.into(),
        }
    }
}

/// Maps library errors: config/parse problems are usage errors, everything
/// else is a solver failure.
impl From<judba_core::Error> for Failure {
    fn from(err: judba_core::Error) -> Self {
        match err {
            judba_core::Error::ConfigInvalid { .. } | judba_core::Error::Parse(_) => {
                Failure::usage(err.to_string())
            }
            other => Failure::solver(other.to_string()),
        }
    }
}

fn init_thread_pool() -> Result<(), Failure> {
    let Some(raw) = std::env::var_os("JUDBA_THREADS") else {
        return Ok(());
    };
    let threads: usize = raw
        .to_str()
        .and_then(|s| s.parse().ok())
        .ok_or_else(|| Failure::usage(format!("JUDBA_THREADS must be an integer, got {raw:?}")))?;
    if threads == 0 {
        return Ok(()); // auto
    }
    rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build_global()
        .map_err(|e| Failure::usage(format!("failed to build thread pool: {e}")))
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(err) => {
            // Help and version are not failures; everything else is usage.
            return match err.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => {
                    print!("{err}");
                    ExitCode::SUCCESS
                }
                _ => {
                    eprint!("{err}");
                    ExitCode::from(EXIT_USAGE)
                }
            };
        }
    };
    if let Err(failure) = init_thread_pool() {
        eprintln!("error: {}", failure.message);
        return ExitCode::from(failure.code);
    }
    let result = match cli.command {
        Command::Solve { config, seed, out } => {
            commands::solve(config.as_deref(), seed, out.as_deref())
        }
        Command::Sweep {
            config,
            axis,
            values,
            seeds,
            seed,
            out,
        } => commands::sweep(
            config.as_deref(),
            &axis,
            &values,
            seeds,
            seed,
            out.as_deref(),
        ),
        Command::Verify {
            config,
            trials,
            seed,
        } => commands::verify(config.as_deref(), trials, seed),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(failure) => {
            eprintln!("error: {}", failure.message);
            ExitCode::from(failure.code)
        }
    }
}
