use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use ghe_cli::{run, Command, Invocation, Overrides};

/// Verify linear superposition of implicit shock-wave solutions of the
/// general heavenly equation on a scenario's point cloud.
///
/// Exit status: 0 when every check passes, 1 when a residual check fails,
/// 2 on a configuration or I/O error.
#[derive(Parser)]
#[command(name = "ghe", version)]
struct Cli {
    #[command(subcommand)]
    command: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Check the seeds, the balance conditions and the superposed field.
    Verify(Common),
    /// Dump per-point fields, partials and residuals as CSV.
    Sample(Common),
    /// Report the pairwise, n-term and reduced balance conditions.
    Balance(Common),
    /// Compare closed-form partials with finite differences.
    Fdcheck(Common),
}

#[derive(Args)]
struct Common {
    /// Scenario file (JSON).
    scenario: PathBuf,
    /// Output path: CSV for `sample`, JSON report otherwise.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Number of sampled points (box sampling only).
    #[arg(long)]
    points: Option<usize>,
    /// Sampling seed (box sampling only).
    #[arg(long)]
    seed: Option<u64>,
    /// Residual tolerance for superposition and balance checks, and the
    /// finite-difference tolerance for `fdcheck`.
    #[arg(long)]
    tol: Option<f64>,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let (command, c) = match cli.command {
        Cmd::Verify(c) => (Command::Verify, c),
        Cmd::Sample(c) => (Command::Sample, c),
        Cmd::Balance(c) => (Command::Balance, c),
        Cmd::Fdcheck(c) => (Command::Fdcheck, c),
    };
    let inv = Invocation {
        command,
        scenario: c.scenario,
        out: c.out,
        overrides: Overrides {
            points: c.points,
            seed: c.seed,
            tol: c.tol,
        },
    };
    let code = run(&inv, &mut std::io::stdout().lock(), &mut std::io::stderr().lock());
    ExitCode::from(code as u8)
}
