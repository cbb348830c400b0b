//! `rgdist`: reproducible experiment driver for rank-1 random graph distance
//! simulations.
//!
//! Exit codes: 0 success, 2 validation error, 3 numeric/statistical failure.

mod commands;
mod manifest;
mod svg;

use std::fmt;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use manifest::Manifest;

#[derive(Debug)]
pub enum CliError {
    /// Malformed manifest, invalid configuration or unwritable output.
    Validation(String),
    /// Numeric failure or a statistical check that came back negative.
    Numeric(String),
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Validation(m) => write!(f, "validation error: {m}"),
            CliError::Numeric(m) => write!(f, "numeric/statistical failure: {m}"),
        }
    }
}

#[derive(Parser)]
#[command(
    name = "rgdist",
    about = "Generate rank-1 random graphs and verify their distance asymptotics",
    version
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Common {
    /// Flat JSON manifest describing the experiment.
    #[arg(long)]
    manifest: PathBuf,
    /// Worker threads (0 = rayon default). Outputs do not depend on this.
    #[arg(long, default_value_t = 0)]
    threads: usize,
    /// Output directory (overrides the manifest).
    #[arg(long)]
    out: Option<PathBuf>,
    /// Also render survival curves as plain polyline SVG files.
    #[arg(long)]
    svg: bool,
    /// Emit unconditional survival curves (default: conditional on a finite
    /// distance, or whatever the manifest sets).
    #[arg(long)]
    unconditional: bool,
}

#[derive(Subcommand)]
enum Command {
    /// Write edge-list CSVs, one per (N, replicate).
    Gen(Common),
    /// Sample hopcounts and write empirical survival curves.
    Hopcount(Common),
    /// Run the size ladder and check curves align after 2k-hop shifts.
    Figure1(Common),
    /// Estimate the martingale limit and write model survival curves.
    Bp(Common),
    /// Check convergence conditions across the N grid.
    Conditions(Common),
    /// Couple the Poissonian graph against the manifest kernel.
    Couple(Common),
}

fn run(
    common: &Common,
    f: impl FnOnce(&manifest::Experiment) -> Result<(), CliError>,
) -> Result<(), CliError> {
    let (mut manifest, hash) = Manifest::load(&common.manifest)?;
    let threads = if common.threads > 0 {
        common.threads
    } else {
        manifest.threads
    };
    if threads > 0 {
        // ignore failure: a global pool may already exist
        let _ = rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build_global();
    }
    if common.unconditional {
        manifest.conditional = false;
    }
    let exp = manifest.resolve(hash, common.out.clone(), common.svg)?;
    f(&exp)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::Gen(c) => run(c, commands::cmd_gen),
        Command::Hopcount(c) => run(c, commands::cmd_hopcount),
        Command::Figure1(c) => run(c, commands::cmd_figure1),
        Command::Bp(c) => run(c, commands::cmd_bp),
        Command::Conditions(c) => run(c, commands::cmd_conditions),
        Command::Couple(c) => run(c, commands::cmd_couple),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("rgdist: {e}");
            match e {
                CliError::Validation(_) => ExitCode::from(2),
                CliError::Numeric(_) => ExitCode::from(3),
            }
        }
    }
}
