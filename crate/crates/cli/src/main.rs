//! `caltol`: tolerance intervals, calibration and coverage studies from the
//! command line. Exit status is 0 on success, 2 when a benchmark needs more
//! observations than supplied, and 1 on any other error.

mod args;
mod data;
mod error;
mod run;

use std::io::Write;
use std::process::ExitCode;

use clap::Parser;

use args::{Cli, Command, Format, OutputArgs};
use error::CliError;

/// Sizes the global thread pool from `CALTOL_THREADS`, if set.
fn configure_threads() -> Result<Option<usize>, CliError> {
    let Ok(raw) = std::env::var("CALTOL_THREADS") else {
        return Ok(None);
    };
    let n: usize = match raw.trim().parse() {
        Ok(n) if n > 0 => n,
        _ => return Err(CliError::Usage(format!("CALTOL_THREADS must be a positive integer, got '{raw}'"))),
    };
    rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build_global()
        .map_err(|e| CliError::Usage(format!("cannot size the thread pool: {e}")))?;
    Ok(Some(n))
}

fn output_args(c: &Command) -> &OutputArgs {
    match c {
        Command::Interval(a) => &a.output,
        Command::Calibrate(a) => &a.output,
        Command::Simulate(a) => &a.study.output,
        Command::Sweep(a) => &a.study.output,
        Command::Regimes(a) => &a.output,
        Command::MinN(a) => &a.output,
    }
}

fn execute(cli: &Cli) -> Result<(), CliError> {
    let threads = configure_threads()?;
    let report = run::run(&cli.command, threads)?;
    let out = output_args(&cli.command);
    let text = match out.format {
        Format::Table => report.table.clone(),
        Format::Csv => report.csv.clone(),
        Format::Json => {
            let mut s = serde_json::to_string_pretty(&report.json()).expect("report serializes");
            s.push('\n');
            s
        }
    };
    match &out.out {
        Some(path) => std::fs::write(path, text)?,
        None => std::io::stdout().write_all(text.as_bytes())?,
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            // Help and version requests are not errors.
            return if e.use_stderr() { ExitCode::from(1) } else { ExitCode::SUCCESS };
        }
    };
    match execute(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
