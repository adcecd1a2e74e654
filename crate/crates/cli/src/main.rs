//! `hhamt`: benchmarks, footprint reports and dominator analysis.

mod args;
mod commands;

use std::process::ExitCode;

use clap::Parser;

fn main() -> ExitCode {
    let cli = args::Cli::parse();
    env_logger::Builder::new()
        .filter_level(cli.verbosity())
        .format_timestamp(None)
        .init();
    match commands::run(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
