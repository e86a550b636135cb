//! Command-line front end for palmfact.
//!
//! Exit codes: 0 success, 1 output could not be written, 2 configuration or
//! input error (including flag errors), 3 numerical abort or failed
//! experiment trials. Diagnostics go to stderr; stdout only carries data.

use std::path::PathBuf;

use clap::{Parser, Subcommand};

pub mod commands;
pub mod error;
pub mod manifest;
pub mod opdir;
pub mod output;

pub use error::{CliError, Result, EXIT_CONFIG, EXIT_IO, EXIT_NUMERICAL, EXIT_OK};
pub use manifest::RunManifest;

#[derive(Debug, Parser)]
#[command(
    name = "palmfact",
    version,
    about = "Multi-layer sparse matrix factorization"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Factorize a matrix file with a split schedule.
    Factorize {
        #[arg(long)]
        input: PathBuf,
        #[arg(long)]
        schedule: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// Factorize the Hadamard matrix of size N into log2(N) butterfly factors.
    HadamardDemo {
        #[arg(long)]
        n: usize,
        #[arg(long)]
        out: PathBuf,
    },
    /// Run the synthetic dictionary-learning sweep.
    Experiment {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        trials: u64,
        #[arg(long)]
        seed: u64,
        #[arg(long)]
        out: PathBuf,
    },
    /// Apply a stored operator to a vector file.
    Apply {
        #[arg(long)]
        op: PathBuf,
        #[arg(long)]
        vec: PathBuf,
        /// Write the result here instead of stdout.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Re-run the command recorded in a manifest into a new directory.
    Rerun {
        #[arg(long)]
        manifest: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
}

/// Runs a parsed command and returns its exit code.
pub fn run(cli: Cli) -> Result<i32> {
    match cli.command {
        Command::Factorize {
            input,
            schedule,
            out,
        } => commands::factorize(&input, &schedule, &out),
        Command::HadamardDemo { n, out } => commands::hadamard_demo(n, &out),
        Command::Experiment {
            config,
            trials,
            seed,
            out,
        } => commands::experiment(&config, trials, seed, &out),
        Command::Apply { op, vec, out } => commands::apply(&op, &vec, out.as_deref()),
        Command::Rerun { manifest, out } => commands::rerun(&manifest, &out),
    }
}
