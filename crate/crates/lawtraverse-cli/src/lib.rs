//! `lawtraverse` command line: run ingestion, law fitting, schedule
//! derivation, trajectory simulation, frontier computation, and FLOPs/carbon
//! accounting behind one binary.
//!
//! Contract: standard output carries exactly one JSON payload on success,
//! with floats printed at 17 significant digits so identical inputs give
//! byte-identical output. Diagnostics go to standard error. Exit codes:
//! 0 success, 1 domain error (well-formed request the math cannot honor),
//! 2 usage error (bad flags, unreadable or unparseable input).
//!
//! Defaults for tuning knobs can be packed into a JSON file named by the
//! `LAWTRAVERSE_CONFIG` environment variable; explicit flags beat the file,
//! the file beats the built-ins.

pub mod commands;
pub mod config;
pub mod svg;

use std::ffi::OsString;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};

/// How a failed command maps onto the exit-code contract.
#[derive(Debug)]
pub enum CliError {
    /// Bad invocation or unparseable input: exit 2.
    Usage(String),
    /// Well-formed request the math cannot honor: exit 1.
    Domain(String),
}

#[derive(Parser)]
#[command(
    name = "lawtraverse",
    version,
    about = "Fit saturating scaling laws, derive shape schedules, and cost training runs"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Fit saturating power laws to run series and merge them into a family
    Fit(FitArgs),
    /// Partition an error range by steepest descent; emit greedy or baseline schedules
    Schedule(ScheduleArgs),
    /// Simulate a composed run under a schedule, with CSV/SVG export
    Simulate(SimulateArgs),
    /// Compute-optimal error frontier, static and scheduled
    Frontier(FrontierArgs),
    /// Forward and training-step FLOPs for a transformer shape string
    Flops(FlopsArgs),
    /// Energy and carbon footprint of a hardware run
    Carbon(CarbonArgs),
}

#[derive(Args)]
pub struct FitArgs {
    /// Run series files: .csv with the exact header `compute,error` (shape
    /// label taken from the file stem) or .json series objects
    #[arg(required = true, value_name = "FILE")]
    pub files: Vec<PathBuf>,
    /// Huber loss quadratic-to-linear crossover
    #[arg(long)]
    pub delta: Option<f64>,
    /// Log-equidistant compute bins for resampling
    #[arg(long)]
    pub bins: Option<usize>,
    /// Residual space: linear | log
    #[arg(long)]
    pub space: Option<String>,
    /// Also write the merged family JSON to this file
    #[arg(long, value_name = "FILE")]
    pub out: Option<PathBuf>,
    /// Shape parameter name recorded in the family (for example "patch")
    #[arg(long)]
    pub shape_parameter: Option<String>,
}

#[derive(Args)]
pub struct ScheduleArgs {
    /// Law family JSON
    #[arg(value_name = "FAMILY")]
    pub family: PathBuf,
    /// Top of the error range (default: the family's highest start error)
    #[arg(long)]
    pub e_start: Option<f64>,
    /// Bottom of the error range (default: just above the lowest asymptote)
    #[arg(long)]
    pub e_end: Option<f64>,
    /// Partition grid points
    #[arg(long)]
    pub grid: Option<usize>,
    /// Emit a budget baseline instead of the greedy schedule: linear | log
    #[arg(long)]
    pub baseline: Option<String>,
    /// Total compute budget (required with --baseline)
    #[arg(long)]
    pub budget: Option<f64>,
    /// Per-shape compute per training step, as "label=flops,label=flops";
    /// deploys the schedule as step indices
    #[arg(long, value_name = "MAP")]
    pub steps_with: Option<String>,
    /// Smallest fraction of the budget a baseline leg may receive
    #[arg(long)]
    pub min_fraction: Option<f64>,
}

#[derive(Args)]
pub struct SimulateArgs {
    /// Law family JSON
    #[arg(value_name = "FAMILY")]
    pub family: PathBuf,
    /// Schedule JSON
    #[arg(value_name = "SCHEDULE")]
    pub schedule: PathBuf,
    /// Starting error (default: the initial shape's start error)
    #[arg(long)]
    pub e_start: Option<f64>,
    /// Trajectory sample count
    #[arg(long)]
    pub samples: Option<usize>,
    /// Stop when the composed error first reaches this level
    #[arg(long, conflicts_with = "total_compute")]
    pub target_error: Option<f64>,
    /// Stop when cumulative compute reaches this budget
    #[arg(long)]
    pub total_compute: Option<f64>,
    /// Write the trajectory as CSV to this file
    #[arg(long, value_name = "FILE")]
    pub csv: Option<PathBuf>,
    /// Write a log-log SVG plot to this file
    #[arg(long, value_name = "FILE")]
    pub svg: Option<PathBuf>,
}

#[derive(Args)]
pub struct FrontierArgs {
    /// Law family JSON files (one frontier across all of them)
    #[arg(required = true, value_name = "FAMILY")]
    pub families: Vec<PathBuf>,
    /// Smallest compute on the grid (default: 1e-4 x the largest)
    #[arg(long)]
    pub grid_min: Option<f64>,
    /// Largest compute on the grid (default: enough to saturate every law)
    #[arg(long)]
    pub grid_max: Option<f64>,
    /// Number of log-spaced grid points
    #[arg(long)]
    pub points: Option<usize>,
    /// Write the static frontier as CSV to this file
    #[arg(long, value_name = "FILE")]
    pub csv: Option<PathBuf>,
    /// Write a log-log SVG plot to this file
    #[arg(long, value_name = "FILE")]
    pub svg: Option<PathBuf>,
}

#[derive(Args)]
pub struct FlopsArgs {
    /// Shape string: "vit:d=768,L=12,p=8,img=120x120x3" or "lm:d=768,L=12,n=1024"
    pub shape: String,
    /// Batch size; adds training-step FLOPs (3 x forward x batch)
    #[arg(long)]
    pub batch: Option<u64>,
    /// Teacher shape string; adds distillation-step FLOPs
    #[arg(long, value_name = "SHAPE")]
    pub teacher: Option<String>,
    /// Also count the patch/token embedding
    #[arg(long)]
    pub include_embedding: bool,
}

#[derive(Args)]
pub struct CarbonArgs {
    /// Accelerator hours consumed
    #[arg(long)]
    pub gpu_hours: f64,
    /// Average draw per accelerator in watts
    #[arg(long)]
    pub watts: f64,
    /// Power usage effectiveness (default 1.1)
    #[arg(long)]
    pub pue: Option<f64>,
    /// Grid carbon intensity in tCO2eq per MWh (default 0.385)
    #[arg(long)]
    pub intensity: Option<f64>,
}

/// Parse arguments, run the requested command, print its payload, and return
/// the process exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(err) => {
            let code = err.exit_code();
            let _ = err.print();
            return code;
        }
    };
    let defaults = match config::Defaults::from_env() {
        Ok(defaults) => defaults,
        Err(message) => {
            eprintln!("lawtraverse: {message}");
            return 2;
        }
    };
    let result = match &cli.command {
        Command::Fit(args) => commands::cmd_fit(args, &defaults),
        Command::Schedule(args) => commands::cmd_schedule(args, &defaults),
        Command::Simulate(args) => commands::cmd_simulate(args, &defaults),
        Command::Frontier(args) => commands::cmd_frontier(args, &defaults),
        Command::Flops(args) => commands::cmd_flops(args),
        Command::Carbon(args) => commands::cmd_carbon(args, &defaults),
    };
    match result {
        Ok(payload) => {
            println!("{payload}");
            0
        }
        Err(CliError::Domain(message)) => {
            eprintln!("lawtraverse: {message}");
            1
        }
        Err(CliError::Usage(message)) => {
            eprintln!("lawtraverse: {message}");
            2
        }
    }
}
