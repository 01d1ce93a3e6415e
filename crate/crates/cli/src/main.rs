//! `ph`: sampling, persistence diagrams, persistent Betti numbers, bound
//! evaluation and limit experiments, each driven by a TOML config.
//!
//! Exit codes: 0 success, 1 runtime failure, 2 config error, 3 complex
//! budget exceeded, 4 statistical check flagged (see `flags_fatal`).

mod commands;
mod config;
mod error;
mod output;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use dephom::ComplexKind;

#[derive(Parser)]
#[command(
    name = "ph",
    version,
    about = "Persistent homology of samples from dependent point processes"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Draw one sample and write it as `cloud.csv` plus `hidden.csv`.
    Sample(SampleArgs),
    /// Persistence diagram of a point cloud as `dim,birth,death` CSV.
    Diagram(DiagramArgs),
    /// Persistent Betti numbers for a list of rectangles.
    Betti(BettiArgs),
    /// Evaluate a concentration bound over a grid of t values.
    Bounds(BoundsArgs),
    /// Run a Monte Carlo experiment suite.
    Experiment(ExperimentArgs),
}

#[derive(Args)]
pub struct SampleArgs {
    /// TOML file with `n`, `seed` and a `[process]` table.
    #[arg(long)]
    pub config: PathBuf,
    /// Output directory.
    #[arg(long)]
    pub out: PathBuf,
    /// Override the sample size.
    #[arg(long)]
    pub n: Option<usize>,
    /// Override the seed.
    #[arg(long)]
    pub seed: Option<u64>,
}

#[derive(Args)]
pub struct DiagramArgs {
    /// TOML file with a point source and a `[complex]` table; flags below
    /// override its fields.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Output directory for `diagram.csv` and `manifest.json`.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Point cloud CSV: one point per row, optional header.
    #[arg(long)]
    pub input: Option<PathBuf>,
    /// Complex kind: `rips` or `cech`.
    #[arg(long)]
    pub kind: Option<ComplexKind>,
    /// Largest simplex dimension; diagrams cover degrees below it.
    #[arg(long)]
    pub max_dim: Option<usize>,
    /// Largest filtration value (diameter for Rips, radius for Čech).
    #[arg(long)]
    pub max_radius: Option<f64>,
    /// `euclidean` (default) or `chebyshev` (Rips only).
    #[arg(long)]
    pub metric: Option<String>,
    /// Map input coordinates outside [0,1] into the cube by min-max scaling.
    #[arg(long)]
    pub allow_outside_cube: bool,
    /// Write the diagram CSV to this file.
    #[arg(long)]
    pub output: Option<PathBuf>,
}

#[derive(Args)]
pub struct BettiArgs {
    /// TOML file with a point source, `[complex]` and `[[queries]]`.
    #[arg(long)]
    pub config: PathBuf,
    /// Output directory for `betti.csv` and `manifest.json`.
    #[arg(long)]
    pub out: PathBuf,
    /// Override the config's point cloud CSV.
    #[arg(long)]
    pub input: Option<PathBuf>,
}

#[derive(Args)]
pub struct BoundsArgs {
    /// TOML file with `kind`, `t_grid` and the bound's parameters.
    #[arg(long)]
    pub config: PathBuf,
    /// Output directory for `bounds.csv` and `manifest.json`.
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Args)]
pub struct ExperimentArgs {
    /// TOML experiment file (`suite`, `[process]`, `[complex]`, ...).
    #[arg(long)]
    pub config: PathBuf,
    /// Output directory.
    #[arg(long)]
    pub out: PathBuf,
    /// Print the resolved plan as JSON and write nothing.
    #[arg(long)]
    pub dry_run: bool,
    /// Worker threads (0: all cores). Overrides the config; results do not
    /// depend on it.
    #[arg(long)]
    pub workers: Option<usize>,
    /// Exit with 0 even when a statistical check flags or fails.
    #[arg(long)]
    pub flags_nonfatal: bool,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Sample(args) => commands::sample::run(&args),
        Command::Diagram(args) => commands::persistence::diagram(&args),
        Command::Betti(args) => commands::persistence::betti(&args),
        Command::Bounds(args) => commands::bounds::run(&args),
        Command::Experiment(args) => commands::experiment::run(&args),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("ph: {e}");
            e.exit_code()
        }
    }
}
