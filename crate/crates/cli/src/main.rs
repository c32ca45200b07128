//! `ctpkit` command-line front end.
//!
//! Exit codes: 0 success, 1 domain error (unreadable or invalid input,
//! failed validation), 2 usage error.

mod args;
mod commands;
mod output;

use std::process::ExitCode;

use clap::Parser;

use args::{Cli, Command};

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            // --help and --version land here too, with exit code 0
            let _ = e.print();
            return ExitCode::from(e.exit_code() as u8);
        }
    };
    let result = match &cli.command {
        Command::Evaluate(a) => commands::evaluate(a, cli.format),
        Command::Simulate(a) => commands::simulate(a, cli.format),
        Command::Sweep(a) => commands::sweep(a, cli.format),
        Command::Report(a) => commands::report(a, cli.format),
        Command::Validate(a) => commands::validate(a, cli.format),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
    }
}
