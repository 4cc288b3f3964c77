//! Command-line front end: parsing, input loading and the artifacts each
//! subcommand writes.

pub mod args;
pub mod artifacts;
pub mod commands;
pub mod input;

use clap::Parser;

pub use args::Cli;
pub use commands::Failure;

/// Parses `argv`, runs the command and returns the process exit code:
/// 0 on success, 1 for invalid input, 2 for a numerical failure.
pub fn main_with<I, S>(argv: I) -> i32
where
    I: IntoIterator<Item = S>,
    S: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 1 } else { 0 };
        }
    };
    match commands::run(cli) {
        Ok(()) => 0,
        Err(Failure::Core(e)) if e.is_numerical() => {
            eprintln!("numerical failure: {e}");
            2
        }
        Err(Failure::Core(e)) => {
            eprintln!("error: {e}");
            1
        }
        Err(Failure::Invariant(msg)) => {
            eprintln!("numerical failure: {msg}");
            2
        }
    }
}
