//! `qgband`: band structure, gaps and degenerate band edges of periodic quantum graphs.

mod cache;
mod commands;
mod error;
mod input;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use crate::error::CliError;

#[derive(Debug, Parser)]
#[command(name = "qgband", version, about)]
struct Cli {
    #[command(subcommand)]
    command: Command,

    /// Graph configuration file (JSON).
    #[arg(long, global = true, value_name = "PATH", conflicts_with = "preset")]
    config: Option<PathBuf>,

    /// Built-in configuration: gamma1-equilateral, gamma2-equilateral or fig5-polygon.
    #[arg(long, global = true, value_name = "NAME")]
    preset: Option<String>,

    /// Worker threads (defaults to all cores).
    #[arg(long, global = true, value_name = "N")]
    jobs: Option<usize>,

    /// Directory for output files.
    #[arg(long, global = true, value_name = "DIR")]
    out: Option<PathBuf>,

    /// Vertex carrying the Floquet phases.
    #[arg(long, global = true, default_value = "B", value_name = "ID")]
    vertex: String,
}

#[derive(Debug, Args)]
struct GridArgs {
    /// Quasimomentum grid sizes.
    #[arg(long, num_args = 3, value_names = ["N1", "N2", "N3"])]
    grid: Option<Vec<usize>>,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Check a configuration and print its summary.
    Validate,
    /// Eigenvalues of the compact graph.
    Spectrum {
        /// Eigenvalues in `[LO, HI)`; without it the lowest `--bands` are listed.
        #[arg(long, num_args = 2, value_names = ["LO", "HI"], allow_negative_numbers = true)]
        range: Option<Vec<f64>>,
        #[arg(long, default_value_t = 6)]
        bands: usize,
        /// Impose a Dirichlet condition at this vertex first.
        #[arg(long, value_name = "ID")]
        dirichlet_at: Option<String>,
    },
    /// Band functions on a quasimomentum grid.
    Sweep {
        #[command(flatten)]
        grid: GridArgs,
        #[arg(long, default_value_t = 2)]
        bands: usize,
        /// Recompute even when a cached table exists.
        #[arg(long)]
        no_cache: bool,
    },
    /// Check the first spectral gap against the rank-one bounds.
    Gap {
        #[command(flatten)]
        grid: GridArgs,
        /// Vertex opposite the Floquet vertex.
        #[arg(long, default_value = "A", value_name = "ID")]
        a_vertex: String,
        #[arg(long)]
        no_cache: bool,
    },
    /// Locate the set where the first band reaches its maximum.
    Curve {
        #[arg(long, default_value_t = 100)]
        on_curve: usize,
        #[arg(long, default_value_t = 100)]
        off_curve: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Classify the closure set of a quadrangle with the given side lengths.
    Polygon {
        /// Side lengths `a1 a2 a3 a4`.
        #[arg(num_args = 4, value_names = ["A1", "A2", "A3", "A4"])]
        sides: Option<Vec<f64>>,
        /// Samples per arc.
        #[arg(long, default_value_t = 400)]
        samples: usize,
    },
    /// Perturb the configuration and re-verify the gap and the degenerate edge.
    Perturb {
        #[arg(long, default_value_t = 1)]
        seed: u64,
        #[command(flatten)]
        grid: GridArgs,
        #[arg(long, default_value = "A", value_name = "ID")]
        a_vertex: String,
        /// Relative edge length jitter.
        #[arg(long, default_value_t = 0.02)]
        length_jitter: f64,
        /// Absolute coupling jitter.
        #[arg(long, default_value_t = 0.1)]
        gamma_jitter: f64,
        /// Bound on the piecewise-constant potential.
        #[arg(long, default_value_t = 0.1)]
        potential_amplitude: f64,
    },
    /// Compare the secular eigenvalues with a finite-difference discretization.
    Oracle {
        /// Grid points per unit length.
        #[arg(long, default_value_t = 400)]
        points: usize,
        #[arg(long, default_value_t = 6)]
        bands: usize,
        #[arg(long, value_name = "ID")]
        dirichlet_at: Option<String>,
    },
}

fn run(cli: Cli) -> Result<(), CliError> {
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(cli.jobs.unwrap_or(0))
        .build()
        .map_err(|e| CliError::Config(format!("--jobs: {e}")))?;
    let output = pool.install(|| commands::dispatch(&cli))?;
    output.emit(cli.out.as_deref())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
