use std::path::PathBuf;
use std::process::ExitCode;

use clap::Parser;
use polyharmonic_cli::{run, CliError, ExperimentConfig, Overrides};

const AFTER_HELP: &str = "\
Commands (config key `command`):
  solve, classify, charges, verify-example, check-estimates, property-suite

Artifacts in the output directory:
  report.json    versioned by `schema_version`
  solution.csv   (solve) columns: r, u, neg_laplacian_u, barrier_u
                 r is the node radius, u the solution, neg_laplacian_u = -Δu,
                 barrier_u the supersolution; floats round-trip exactly

Exit codes:
  0 success, 2 config error, 3 hypothesis failure, 4 solver divergence,
  5 numerical failure";

/// Runs one radial polyharmonic experiment described by a config file.
#[derive(Debug, Parser)]
#[command(name = "polyharm", version, after_help = AFTER_HELP)]
struct Args {
    /// Experiment config (`key = value` lines).
    #[arg(long, value_name = "PATH")]
    config: PathBuf,
    /// Output directory; overrides `output.dir`.
    #[arg(long, value_name = "DIR")]
    out: Option<PathBuf>,
    /// Seed for randomized commands; overrides `property.seed`.
    #[arg(long, value_name = "N")]
    seed: Option<u64>,
    /// Grid size; overrides `grid.n`.
    #[arg(long, value_name = "N")]
    grid_n: Option<usize>,
    /// Iteration tolerance; overrides `tolerance.tol`.
    #[arg(long, value_name = "X")]
    tol: Option<f64>,
}

fn main() -> ExitCode {
    let args = Args::parse();
    let overrides = Overrides { out: args.out, seed: args.seed, grid_n: args.grid_n, tol: args.tol };
    let result = ExperimentConfig::load(&args.config).and_then(|mut cfg| {
        cfg.apply(&overrides)?;
        run(&cfg)
    });
    match result {
        Ok(outcome) => {
            for f in &outcome.files {
                println!("{}", f.display());
            }
            ExitCode::from(outcome.exit_code as u8)
        }
        Err(e) => {
            eprintln!("polyharm: {e}");
            ExitCode::from(CliError::exit_code(&e) as u8)
        }
    }
}
