use anisovem::io::{run, CliConfig};
use clap::Parser;
use std::path::PathBuf;
use std::process::ExitCode;

/// Adaptive anisotropic virtual element solver for the Poisson problem
/// on polygonal meshes of the unit square.
#[derive(Parser, Debug)]
#[command(name = "anisovem", version, about)]
struct Args {
    /// Test case: 1, 2, 3 or patch.
    #[arg(long, default_value = "1")]
    case: String,

    /// Virtual element order (1 or 2).
    #[arg(long, default_value_t = 1)]
    order: usize,

    /// Estimator driving the refinement: theory, heur or iso.
    #[arg(long, default_value = "heur")]
    estimator: String,

    /// Dörfler marking fraction in (0,1).
    #[arg(long, default_value_t = 0.5)]
    theta: f64,

    /// Stop when the measured error drops below this value.
    #[arg(long, default_value_t = 1e-2)]
    tol: f64,

    /// Iteration cap of the adaptive loop.
    #[arg(long, default_value_t = 30)]
    max_iters: usize,

    /// Cap on the number of unknowns; the run stops before exceeding it.
    #[arg(long, default_value_t = 200_000)]
    max_dofs: usize,

    /// Cells per side of the initial structured grid.
    #[arg(long, default_value_t = 4)]
    grid_n: usize,

    /// Output directory for run.csv, indicator dumps and VTK files.
    #[arg(long, default_value = "out")]
    out: PathBuf,

    /// Seed recorded with the outputs (the pipeline itself is
    /// deterministic).
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

fn main() -> ExitCode {
    let args = Args::parse();
    if args.order != 1 && args.order != 2 {
        eprintln!("error: --order must be 1 or 2");
        return ExitCode::FAILURE;
    }
    if !(args.theta > 0.0 && args.theta < 1.0) {
        eprintln!("error: --theta must lie strictly between 0 and 1");
        return ExitCode::FAILURE;
    }
    if !(args.tol > 0.0) {
        eprintln!("error: --tol must be positive");
        return ExitCode::FAILURE;
    }
    if args.grid_n == 0 {
        eprintln!("error: --grid-n must be at least 1");
        return ExitCode::FAILURE;
    }
    let config = CliConfig {
        case: args.case,
        order: args.order,
        estimator: args.estimator,
        theta: args.theta,
        tol: args.tol,
        max_iters: args.max_iters,
        max_dofs: args.max_dofs,
        grid_n: args.grid_n,
        out_dir: args.out,
        seed: args.seed,
    };
    match run(&config) {
        Ok(summary) => {
            println!(
                "done: {} iterations, {} dofs, {} cells, err {:.6e}, estimator {:.6e}",
                summary.iterations,
                summary.final_dofs,
                summary.final_cells,
                summary.final_error,
                summary.final_estimate
            );
            if let Some(m) = summary.rate {
                println!("fitted rate m = {m:.4}");
            }
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}
