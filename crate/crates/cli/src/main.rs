//! `galerkin`: solve, certify, continue and verify from the command line.
//!
//! Exit codes: 0 success, 1 failure, 2 solutions merged, 3 no bifurcation in
//! range, 64 usage error.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

mod commands;
mod config;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use serde::Serialize;
use torus_galerkin::LaplacianVariant;

use commands::{EXIT_FAILURE, EXIT_OK, EXIT_USAGE};
use config::UsageError;

#[derive(Parser)]
#[command(
    name = "galerkin",
    version,
    about = "Spectral Galerkin solver for the regularized Burgers system on the torus"
)]
struct Cli {
    /// JSON file of config keys; flags given on the command line take precedence.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Construct the two solutions at one lambda.
    Solve(SolveFlags),
    /// Certify the inverse bounds of the rotation blocks over a grid.
    Bounds(BoundsFlags),
    /// Follow the symmetric branch, locate the pitchfork and continue both new branches.
    Bifurcate(BifurcateFlags),
    /// Run the seeded property suite.
    Verify(VerifyFlags),
}

// Field names match the config keys; unset flags are left out of the overlay.

#[derive(Args, Serialize)]
struct SolveFlags {
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    n: Option<usize>,
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    m: Option<f64>,
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    lambda: Option<f64>,
    /// split or euclidean
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    variant: Option<LaplacianVariant>,
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    max_iter: Option<usize>,
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    tol: Option<f64>,
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    newton_tol: Option<f64>,
    /// Output directory for u1.json, u2.json, trace.json and apriori.json.
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    out: Option<PathBuf>,
}

#[derive(Args, Serialize)]
struct BoundsFlags {
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    m: Option<f64>,
    /// Comma-separated block indices.
    #[arg(long, value_delimiter = ',')]
    #[serde(skip_serializing_if = "Option::is_none")]
    l: Option<Vec<usize>>,
    /// Comma-separated forcing amplitudes, all > 1.
    #[arg(long, value_delimiter = ',')]
    #[serde(skip_serializing_if = "Option::is_none")]
    lambdas: Option<Vec<f64>>,
    /// Comma-separated truncation radii.
    #[arg(long, value_delimiter = ',')]
    #[serde(skip_serializing_if = "Option::is_none")]
    n: Option<Vec<usize>>,
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    slope_tolerance: Option<f64>,
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    n_tolerance: Option<f64>,
    /// Report path.
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    out: Option<PathBuf>,
}

#[derive(Args, Serialize)]
struct BifurcateFlags {
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    n: Option<usize>,
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    m: Option<f64>,
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    variant: Option<LaplacianVariant>,
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    lambda_max: Option<f64>,
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    initial_step: Option<f64>,
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    max_step: Option<f64>,
    /// Diagram CSV path.
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    out: Option<PathBuf>,
    /// Also draw the diagram as SVG.
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    svg: Option<PathBuf>,
    /// Run manifest path (default: next to the CSV).
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    manifest: Option<PathBuf>,
}

#[derive(Args, Serialize)]
struct VerifyFlags {
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    seed: Option<u64>,
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    samples: Option<usize>,
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    n: Option<usize>,
    /// Write the report as JSON.
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    out: Option<PathBuf>,
}

fn run(cli: Cli) -> anyhow::Result<u8> {
    let file = cli.config.as_deref();
    match cli.command {
        Command::Solve(f) => commands::solve(&config::load(file, &f)?),
        Command::Bounds(f) => commands::bounds(&config::load(file, &f)?),
        Command::Bifurcate(f) => commands::bifurcate(&config::load(file, &f)?),
        Command::Verify(f) => commands::verify(&config::load(file, &f)?),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { EXIT_USAGE } else { EXIT_OK });
        }
    };
    match run(cli) {
        Ok(code) => ExitCode::from(code),
        Err(e) if e.is::<UsageError>() => {
            eprintln!("usage error: {e}");
            ExitCode::from(EXIT_USAGE)
        }
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(EXIT_FAILURE)
        }
    }
}
