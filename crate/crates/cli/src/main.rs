//! `sardrt` command-line driver.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

mod commands;
mod manifest;
mod sweep;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use sardrt::Execution;

#[derive(Debug, Parser)]
#[command(name = "sardrt", version, about = "Ray-traced SAR simulation and surface parameter learning")]
struct Cli {
    /// Run every stage on the calling thread; results are bitwise reproducible.
    #[arg(long, global = true)]
    single_thread: bool,

    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Render one image per configured view.
    Simulate(SimulateArgs),
    /// Fit per-vertex surface parameters to reference images.
    Learn(LearnArgs),
    /// Compare back-propagated gradients with finite differences.
    Gradcheck(GradcheckArgs),
    /// Tabulate backscatter against incidence angle for one parameter set.
    Sweep(sweep::SweepArgs),
}

#[derive(Debug, Args)]
pub struct SimulateArgs {
    #[arg(long)]
    pub config: PathBuf,
    /// Output directory; defaults to `outputs` from the config.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Overrides `radar.seed`.
    #[arg(long)]
    pub seed: Option<u64>,
}

#[derive(Debug, Args)]
pub struct LearnArgs {
    #[arg(long)]
    pub config: PathBuf,
    /// One reference raster per entry of `radar.views_deg`, in order.
    #[arg(long, num_args = 1.., required = true)]
    pub refs: Vec<PathBuf>,
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Overrides `radar.seed`.
    #[arg(long)]
    pub seed: Option<u64>,
    /// Overrides `optim.iters`.
    #[arg(long)]
    pub iters: Option<usize>,
}

#[derive(Debug, Args)]
pub struct GradcheckArgs {
    #[arg(long)]
    pub config: PathBuf,
    #[arg(long, default_value_t = 20)]
    pub probes: usize,
    /// Probe selection seed; defaults to `optim.seed`.
    #[arg(long)]
    pub seed: Option<u64>,
    /// Which configured view to check.
    #[arg(long, default_value_t = 0)]
    pub view: usize,
    /// Also write the probe table as `gradcheck.csv` here.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Largest acceptable relative error.
    #[arg(long, default_value_t = 1e-3)]
    pub tol: f64,
    #[arg(long, hide = true)]
    pub corrupt_adjoint: bool,
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    let exec = if cli.single_thread {
        Execution::Sequential
    } else {
        Execution::Parallel
    };
    let result = match cli.command {
        Command::Simulate(a) => commands::simulate(&a, exec),
        Command::Learn(a) => commands::learn(&a, exec),
        Command::Gradcheck(a) => commands::gradcheck(&a, exec),
        Command::Sweep(a) => sweep::run(&a),
    };
    match result {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
