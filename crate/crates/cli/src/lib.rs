//! Command-line front end: reliability reports, theorem verification and
//! simulation runs.

use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};

mod reliability;
mod simulate;
pub mod svg;
mod verify;

pub const EXIT_OK: u8 = 0;
pub const EXIT_CHECK_FAILED: u8 = 1;
pub const EXIT_INPUT: u8 = 2;
pub const EXIT_INADMISSIBLE: u8 = 3;

/// Environment variable capping worker threads.
pub const THREADS_ENV: &str = "FARS_THREADS";

#[derive(Debug, Parser)]
#[command(name = "fars", version, about = "Reliability of factor score predictors")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Reliabilities and determinacy for one model.
    Reliability(ReliabilityArgs),
    /// Check the equality and ordering results on fixtures, a model file or random models.
    Verify(VerifyArgs),
    /// Run a simulation preset or a JSON condition file.
    Simulate(SimulateArgs),
}

#[derive(Debug, Args)]
pub struct ReliabilityArgs {
    /// JSON model, a directory with lambda.csv and phi.csv, or lambda.csv itself.
    #[arg(long)]
    pub model: PathBuf,
    /// Directory for reliability.csv and reliability.json.
    #[arg(long, default_value = ".")]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct VerifyArgs {
    /// Verify this model instead of the built-in fixtures.
    #[arg(long)]
    pub model: Option<PathBuf>,
    /// Number of random models; defaults to 1000 without --model and 0 with it.
    #[arg(long)]
    pub fuzz: Option<usize>,
    #[arg(long, default_value_t = 1)]
    pub seed: u64,
}

#[derive(Debug, Args)]
pub struct SimulateArgs {
    /// study1, study2-desk, study3-desk, study2-full or study3-full.
    #[arg(long, conflicts_with = "config", required_unless_present = "config")]
    pub preset: Option<String>,
    /// JSON file with `conditions` and optional `options`.
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Override the replication count of sampled conditions.
    #[arg(long)]
    pub reps: Option<usize>,
    /// Write one chart per (p/q, sl, r) panel.
    #[arg(long)]
    pub svg: bool,
    /// Also write every replication to replications.json.
    #[arg(long)]
    pub archive: bool,
    #[arg(long, default_value = ".")]
    pub out: PathBuf,
}

/// Runs a parsed command and returns the process exit code.
pub fn run(cli: Cli) -> u8 {
    match cli.command {
        Command::Reliability(a) => reliability::run(&a),
        Command::Verify(a) => verify::run(&a),
        Command::Simulate(a) => simulate::run(&a),
    }
}

/// Runs on a dedicated pool of `threads` workers, or on the default pool.
pub fn run_with_threads(cli: Cli, threads: Option<usize>) -> u8 {
    let Some(n) = threads else {
        return run(cli);
    };
    match rayon::ThreadPoolBuilder::new().num_threads(n).build() {
        Ok(pool) => pool.install(|| run(cli)),
        Err(e) => {
            eprintln!("error: cannot start {n} worker threads: {e}");
            EXIT_INPUT
        }
    }
}

/// Worker count requested through `FARS_THREADS`, if any.
pub fn requested_threads() -> Option<usize> {
    std::env::var(THREADS_ENV).ok()?.trim().parse().ok().filter(|&n| n > 0)
}
