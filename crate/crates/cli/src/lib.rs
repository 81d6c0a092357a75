//! Command-line front end for [`epi_core`].
//!
//! [`run`] parses arguments, dispatches to a command, and writes the report
//! to stdout or the `--output` file. Usage errors exit with 2, domain and
//! i/o errors with 1 after printing `{"error":{"kind":…,"message":…}}` to
//! stderr, and a failing `verify` exits with 1.

use std::ffi::OsString;
use std::io::Write;
use std::path::Path;

use clap::Parser;
use serde::Serialize;

pub mod acceptance;
pub mod args;
pub mod commands;
pub mod report;

pub use args::{Cli, Command, Format};
pub use commands::{execute, CliError, Rendered};

#[derive(Serialize)]
struct ErrorBody<'a> {
    kind: &'a str,
    message: String,
}

#[derive(Serialize)]
struct ErrorRecord<'a> {
    error: ErrorBody<'a>,
}

pub fn error_record(e: &CliError) -> Vec<u8> {
    report::to_json(&ErrorRecord { error: ErrorBody { kind: e.kind(), message: e.to_string() } })
}

fn output_path(cli: &Cli) -> Option<&Path> {
    let p = match &cli.command {
        Command::Probabilities(a) => &a.out.output,
        Command::Solve(a) => &a.out.output,
        Command::Metric(a) => &a.out.output,
        Command::Simulate(a) => &a.out.output,
        Command::Estimate(a) => &a.out.output,
        Command::Verify(a) => &a.output,
    };
    p.as_deref()
}

/// Run the program on `argv` (including the program name) and return the
/// exit code.
pub fn run<I, T>(argv: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            let text = e.render().to_string();
            let _ = if e.use_stderr() { stderr.write_all(text.as_bytes()) } else { stdout.write_all(text.as_bytes()) };
            return e.exit_code();
        }
    };
    let result = execute(&cli).and_then(|r| {
        match output_path(&cli) {
            Some(path) => std::fs::write(path, &r.bytes)?,
            None => stdout.write_all(&r.bytes)?,
        }
        Ok(r.success)
    });
    match result {
        Ok(true) => 0,
        Ok(false) => 1,
        Err(e) => {
            let _ = stderr.write_all(&error_record(&e));
            1
        }
    }
}
