//! `ctxlab` command-line front end.
//!
//! Exit status: 0 on success, 2 when `--assert` finds a row outside its
//! bound, 3 on any configuration or runtime error.

mod args;
mod commands;
mod games;
mod report;

use std::process::ExitCode;

use clap::Parser;

use args::{Cli, Command, Output};
use report::Report;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Config(String),
    #[error("{0}")]
    Io(String),
    #[error("{0}")]
    Run(String),
}

const BOUND_VIOLATION: u8 = 2;
const CONFIG_ERROR: u8 = 3;

fn emit(report: &Report, output: &Output) -> Result<(), CliError> {
    match &output.out {
        Some(path) => {
            report.write(path)?;
            print!("{}", report.to_table());
        }
        None => print!("{}", report.to_json()),
    }
    Ok(())
}

/// Returns whether the run passed its `--assert` check.
fn run(cli: Cli) -> Result<bool, CliError> {
    let (report, output, check) = match &cli.command {
        Command::Values(a) => (commands::values(a)?, &a.output, false),
        Command::Poq(a) => (commands::poq(a)?, &a.run.output, a.run.check),
        Command::Compile(a) => (commands::compile(a)?, &a.run.output, a.run.check),
    };
    emit(&report, output)?;
    Ok(!check || report.all_within_bounds())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { CONFIG_ERROR } else { 0 });
        }
    };
    match run(cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => {
            eprintln!("bound violated");
            ExitCode::from(BOUND_VIOLATION)
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(CONFIG_ERROR)
        }
    }
}
