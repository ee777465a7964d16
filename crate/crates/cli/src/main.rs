//! `shelfgaze`: command-line frontend.
//!
//! Results go to stdout as JSON or CSV, diagnostics to stderr.
//! Exit codes: 0 success, 1 input/usage error, 2 domain error.

mod args;
mod commands;

use std::process::ExitCode;

use clap::Parser;

fn main() -> ExitCode {
    let cli = match args::Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() {
                ExitCode::from(1)
            } else {
                ExitCode::SUCCESS
            };
        }
    };
    let mut out = std::io::stdout().lock();
    match commands::run(cli, &mut out) {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) if is_broken_pipe(&err.inner) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("error: {:#}", err.inner);
            ExitCode::from(err.kind.code())
        }
    }
}

/// A closed stdout (e.g. piping into `head`) is not an error worth reporting.
fn is_broken_pipe(err: &anyhow::Error) -> bool {
    let is_pipe = |io: &std::io::Error| io.kind() == std::io::ErrorKind::BrokenPipe;
    err.chain().any(|e| {
        e.downcast_ref::<std::io::Error>().is_some_and(is_pipe)
            || e.downcast_ref::<csv::Error>().is_some_and(|c| match c.kind() {
                csv::ErrorKind::Io(io) => is_pipe(io),
                _ => false,
            })
    })
}
