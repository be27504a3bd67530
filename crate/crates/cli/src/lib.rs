//! Scenario-driven front end: load a scenario file, run one of the
//! `verify`, `sample`, `balance` or `fdcheck` commands, print a summary and
//! optionally write a JSON report (or CSV for `sample`).

pub mod commands;
pub mod csv;
pub mod scenario;

use std::path::{Path, PathBuf};

pub use commands::{Command, Outcome, SCHEMA_VERSION};
pub use scenario::{Overrides, Prepared, Scenario, ScenarioError};

pub const EXIT_PASS: i32 = 0;
pub const EXIT_FAIL: i32 = 1;
pub const EXIT_CONFIG: i32 = 2;

#[derive(Debug, Clone)]
pub struct Invocation {
    pub command: Command,
    pub scenario: PathBuf,
    pub out: Option<PathBuf>,
    pub overrides: Overrides,
}

fn write_file(path: &Path, contents: &str) -> Result<(), String> {
    std::fs::write(path, contents).map_err(|e| format!("cannot write {}: {e}", path.display()))
}

/// Runs one invocation, writing the summary to `stdout` and errors to
/// `stderr`; returns the process exit code.
///
/// `sample` writes its CSV to `--out`, or to `stdout` in place of the
/// summary; the other commands write their JSON report to `--out` if given.
pub fn run(inv: &Invocation, stdout: &mut dyn std::io::Write, stderr: &mut dyn std::io::Write) -> i32 {
    match execute(inv, stdout) {
        Ok(true) => EXIT_PASS,
        Ok(false) => EXIT_FAIL,
        Err(e) => {
            let _ = writeln!(stderr, "error: {e}");
            EXIT_CONFIG
        }
    }
}

fn execute(inv: &Invocation, stdout: &mut dyn std::io::Write) -> Result<bool, String> {
    let prepared = Scenario::load(&inv.scenario)
        .and_then(|s| s.prepare(&inv.overrides))
        .map_err(|e| format!("{}: {e}", inv.scenario.display()))?;
    let run = |r: Result<Outcome, ScenarioError>| r.map_err(|e| e.to_string());
    let outcome = match inv.command {
        Command::Verify => run(commands::verify(&prepared))?,
        Command::Balance => run(commands::balance(&prepared))?,
        Command::Fdcheck => run(commands::fdcheck(&prepared))?,
        Command::Sample => {
            let (csv, outcome) = commands::sample(&prepared).map_err(|e| e.to_string())?;
            match &inv.out {
                Some(path) => write_file(path, &csv)?,
                None => {
                    let _ = stdout.write_all(csv.as_bytes());
                    return Ok(true);
                }
            }
            let _ = stdout.write_all(outcome.text.as_bytes());
            return Ok(true);
        }
    };
    let _ = stdout.write_all(outcome.text.as_bytes());
    if let Some(path) = &inv.out {
        let json = serde_json::to_string_pretty(&outcome.report).expect("report serializes");
        write_file(path, &(json + "\n"))?;
    }
    Ok(outcome.passed)
}
