//! Command-line driver: config handling, stage caching and the command suite
//! behind the `auscult` binary.

pub mod args;
pub mod cache;
pub mod commands;
pub mod config;
pub mod error;

use clap::Parser;
use std::ffi::OsString;

pub use error::{CliError, CliResult};

/// Parse `argv`, run the command and return the process exit code:
/// 0 on success, 1 on a usage or config error, 2 on a data error.
pub fn run<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match args::Cli::try_parse_from(argv) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 1 } else { 0 };
        }
    };
    let level = match (cli.global.quiet, cli.global.verbose) {
        (true, _) => log::LevelFilter::Warn,
        (false, 0) => log::LevelFilter::Info,
        (false, 1) => log::LevelFilter::Debug,
        _ => log::LevelFilter::Trace,
    };
    let _ = env_logger::Builder::new().filter_level(level).parse_env("AUSCULT_LOG").try_init();
    match commands::execute(&cli) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}
