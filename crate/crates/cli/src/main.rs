//! `ecrscreen`: rank-based sure screening for CSV data, simulation grids and
//! bootstrap rank intervals.

mod commands;
mod dataset;
mod error;
mod settings;

use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};

use crate::error::CliResult;

#[derive(Parser, Debug)]
#[command(name = "ecrscreen", version, about = "Doubly robust sure screening", long_about = None)]
#[command(
    after_help = "Options may also come from a TOML settings file (--config) or from \
ECRSCREEN_<OPTION> environment variables, e.g. ECRSCREEN_METHOD=rrcs or ECRSCREEN_TOP_M=10. \
Flags win over the settings file, which wins over the environment."
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Score and select covariates of a CSV dataset.
    Screen(ScreenArgs),
    /// Run a Monte Carlo grid described by a run-config file.
    Simulate(SimulateArgs),
    /// Bootstrap rank intervals and influential covariates.
    Bootstrap(BootstrapArgs),
}

#[derive(Args, Debug, Clone)]
pub struct DataArgs {
    /// Input CSV file.
    #[arg(long)]
    pub input: PathBuf,
    /// Response column: header name or 0-based position [default: 0].
    #[arg(long)]
    pub response: Option<String>,
    /// Field delimiter [default: ,].
    #[arg(long)]
    pub delimiter: Option<char>,
    /// The file has no header row.
    #[arg(long)]
    pub no_header: bool,
    /// Keep only this many covariates with the largest sample variance.
    #[arg(long)]
    pub variance_keep: Option<usize>,
}

#[derive(Args, Debug, Clone)]
pub struct MethodArgs {
    /// Screening statistic: cch, cck, sis or rrcs [default: cch].
    #[arg(long)]
    pub method: Option<ecr_screen::Method>,
    /// Subset size for cch/cck [default: 2].
    #[arg(long)]
    pub k: Option<usize>,
    /// Neighbourhood radius for cch/cck [default: 2].
    #[arg(long)]
    pub kn: Option<usize>,
    /// Eigenvalue floor for covariate blocks [default: 1e-8].
    #[arg(long)]
    pub ridge: Option<f64>,
}

#[derive(Args, Debug, Clone)]
pub struct RunArgs {
    /// Seed for every random draw [default: 0].
    #[arg(long)]
    pub seed: Option<u64>,
    /// Worker threads [default: available parallelism].
    #[arg(long)]
    pub workers: Option<usize>,
    /// Output file [default: standard output].
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// TOML settings file.
    #[arg(long)]
    pub config: Option<PathBuf>,
}

#[derive(Args, Debug)]
pub struct ScreenArgs {
    #[command(flatten)]
    pub data: DataArgs,
    #[command(flatten)]
    pub method: MethodArgs,
    /// Keep the m highest scores [default: n / ln n].
    #[arg(long)]
    pub top_m: Option<usize>,
    /// Keep scores strictly above this value.
    #[arg(long)]
    pub threshold: Option<f64>,
    /// Iterative screening keeping this fraction per round.
    #[arg(long)]
    pub delta: Option<f64>,
    /// Iterative screening stops once fewer covariates remain [default: min(n, p)].
    #[arg(long)]
    pub stop_below: Option<usize>,
    #[command(flatten)]
    pub run: RunArgs,
}

#[derive(Args, Debug)]
pub struct SimulateArgs {
    /// Run-config file describing the grid.
    #[arg(long)]
    pub config: PathBuf,
    /// Output CSV.
    #[arg(long)]
    pub out: PathBuf,
    /// Worker threads [default: available parallelism].
    #[arg(long)]
    pub workers: Option<usize>,
    /// Replace the base seed of every cell.
    #[arg(long)]
    pub seed: Option<u64>,
}

#[derive(Args, Debug)]
pub struct BootstrapArgs {
    #[command(flatten)]
    pub data: DataArgs,
    #[command(flatten)]
    pub method: MethodArgs,
    /// Number of bootstrap resamples B [default: 200].
    #[arg(long, short = 'B', visible_alias = "b")]
    pub replicates: Option<usize>,
    /// Two-sided interval level [default: 0.05].
    #[arg(long)]
    pub alpha: Option<f64>,
    /// Covariates whose upper rank bound is at most this are influential [default: 20].
    #[arg(long)]
    pub top_k: Option<usize>,
    /// Long-form per-replicate ranks (replicate,covariate,rank).
    #[arg(long)]
    pub ranks_out: Option<PathBuf>,
    #[command(flatten)]
    pub run: RunArgs,
}

fn run(cli: Cli) -> CliResult<()> {
    match cli.command {
        Command::Screen(a) => commands::screen(a),
        Command::Simulate(a) => commands::simulate(a),
        Command::Bootstrap(a) => commands::bootstrap(a),
    }
}

fn main() {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    if let Err(e) = run(cli) {
        eprintln!("ecrscreen: {e}");
        std::process::exit(e.exit_code());
    }
}
