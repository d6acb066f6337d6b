//! Command-line front end: parses flags, runs one library operation and emits a JSON or CSV
//! artifact with the parameters echoed back.
//!
//! Exit codes: 0 pass, 1 a checked identity fails, 2 bad parameters or usage.

pub mod args;
mod commands;
pub mod selftest;

use std::ffi::OsString;

pub use commands::{run_command, CliError, Outcome};

/// Runs the CLI on `argv` (program name first) and returns the process exit code.
pub fn run<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    use clap::Parser;
    let cli = match args::Cli::try_parse_from(argv) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return e.exit_code();
        }
    };
    match run_command(&cli) {
        Ok(Outcome::Pass) => 0,
        Ok(Outcome::Fail) => 1,
        Err(e) => {
            eprintln!("error: {e}");
            2
        }
    }
}
