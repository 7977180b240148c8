use std::process::ExitCode;

use clap::Parser;
use fars_cli::{requested_threads, run_with_threads, Cli};

fn main() -> ExitCode {
    ExitCode::from(run_with_threads(Cli::parse(), requested_threads()))
}
