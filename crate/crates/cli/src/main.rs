mod args;
mod checks;
mod commands;
mod error;
mod report;
mod spec_file;

use std::io::Write;
use std::process::ExitCode;
use std::time::Instant;

use clap::Parser;
use serde_json::json;

use args::Cli;
use commands::Context;
use error::{CliError, CliResult};
use report::{InputDigest, Outcome, RunReport};

/// Exit status of a check suite with a failed assertion.
const CHECK_FAILED: u8 = 3;

fn fail(err: &CliError) -> ExitCode {
    let body = json!({ "error": { "kind": err.kind(), "message": err.to_string() } });
    eprintln!("{body}");
    ExitCode::from(err.exit_code() as u8)
}

fn emit(text: &str, cli: &Cli) -> CliResult<()> {
    match &cli.common.output {
        Some(path) => std::fs::write(path, text).map_err(|source| CliError::Write {
            path: path.clone(),
            source,
        }),
        None => {
            let mut out = std::io::stdout().lock();
            out.write_all(text.as_bytes())
                .and_then(|_| out.flush())
                .map_err(|source| CliError::Write {
                    path: "<stdout>".into(),
                    source,
                })
        }
    }
}

fn execute(cli: &Cli) -> CliResult<bool> {
    let started = Instant::now();
    cli.validate()?;
    let mut digest = InputDigest::default();
    digest.add("argv", cli.canonical().as_bytes());
    let mut ctx = Context { common: &cli.common, digest };
    let outcome = commands::run(cli, &mut ctx)?;
    let inputs_digest = ctx.digest.finish();
    let report = |results, error_estimate, passed| RunReport {
        verb: cli.verb_name(),
        version: env!("CARGO_PKG_VERSION"),
        inputs_digest: inputs_digest.clone(),
        results,
        error_estimate,
        passed,
        wall_time_s: started.elapsed().as_secs_f64(),
    };
    match outcome {
        Outcome::Json {
            results,
            error_estimate,
            passed,
        } => {
            emit(&report(results, error_estimate, passed).to_json(), cli)?;
            Ok(passed.unwrap_or(true))
        }
        Outcome::Csv {
            table,
            summary,
            error_estimate,
        } => {
            emit(&table, cli)?;
            // With the table in a file, stdout carries the report.
            if cli.common.output.is_some() {
                print!("{}", report(summary, error_estimate, None).to_json());
            }
            Ok(true)
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) if e.use_stderr() => return fail(&CliError::Usage(e.to_string().trim_end().to_owned())),
        Err(e) => e.exit(),
    };
    match execute(&cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(CHECK_FAILED),
        Err(e) => fail(&e),
    }
}
