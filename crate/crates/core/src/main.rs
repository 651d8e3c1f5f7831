use std::process::ExitCode;

use clap::Parser;

fn main() -> ExitCode {
    match dispatchkit::cli::run(dispatchkit::cli::Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
