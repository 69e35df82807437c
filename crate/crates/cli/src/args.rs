use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};
use serde::Serialize;

#[derive(Debug, Parser)]
#[command(
    name = "pantograph",
    version,
    about = "Pantograph delay equations: series, integration, stability maps, thresholds, Mackey-Glass analogue"
)]
pub struct Cli {
    /// Flat `key=value` file supplying defaults for the subcommand's flags.
    #[arg(long, global = true, value_name = "FILE")]
    pub config: Option<PathBuf>,

    /// Worker threads for sweeps and threshold searches (default: all cores).
    #[arg(long, global = true)]
    pub jobs: Option<usize>,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Evaluate the power-series solution at one or more times.
    Series(SeriesArgs),
    /// Integrate the linear equation and write the trajectory.
    Simulate(SimulateArgs),
    /// Analytic stability verdict for one parameter point.
    Classify(ClassifyArgs),
    /// Analytic and empirical verdicts over an (a, b) grid.
    Sweep(SweepArgs),
    /// Estimate the threshold b*(a) by bisection.
    Bstar(BstarArgs),
    /// Least-squares quadratic through an `a,b_star` table.
    Fit(FitArgs),
    /// Simulate the Mackey-Glass analogue.
    Mg(MgArgs),
    /// Bifurcation values of the Mackey-Glass analogue.
    MgBifurcation(MgBifurcationArgs),
    /// Write the threshold table in use (bundled or from PANTOGRAPH_TABLE1).
    Table1(Table1Args),
}

impl Command {
    pub fn name(&self) -> &'static str {
        match self {
            Command::Series(_) => "series",
            Command::Simulate(_) => "simulate",
            Command::Classify(_) => "classify",
            Command::Sweep(_) => "sweep",
            Command::Bstar(_) => "bstar",
            Command::Fit(_) => "fit",
            Command::Mg(_) => "mg",
            Command::MgBifurcation(_) => "mg-bifurcation",
            Command::Table1(_) => "table1",
        }
    }
}

pub const SUBCOMMANDS: &[&str] = &[
    "series",
    "simulate",
    "classify",
    "sweep",
    "bstar",
    "fit",
    "mg",
    "mg-bifurcation",
    "table1",
];

#[derive(Debug, Args, Serialize)]
#[command(allow_negative_numbers = true, args_override_self = true)]
pub struct SeriesArgs {
    #[arg(long)]
    pub a: f64,
    #[arg(long)]
    pub b: f64,
    #[arg(long)]
    pub q: f64,
    #[arg(long, default_value_t = 1.0)]
    pub x0: f64,
    /// Evaluation times, comma separated.
    #[arg(long, value_delimiter = ',', required = true)]
    pub t: Vec<f64>,
    #[arg(long, default_value_t = 1e-12)]
    pub tolerance: f64,
    #[arg(long, default_value_t = 500)]
    pub max_terms: usize,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args, Serialize)]
#[command(allow_negative_numbers = true, args_override_self = true)]
pub struct SimulateArgs {
    #[arg(long)]
    pub a: f64,
    #[arg(long)]
    pub b: f64,
    #[arg(long)]
    pub q: f64,
    #[arg(long, default_value_t = 1.0)]
    pub x0: f64,
    #[arg(long, default_value_t = 1e-3)]
    pub h: f64,
    #[arg(long = "T", default_value_t = 50.0)]
    #[serde(rename = "T")]
    pub horizon: f64,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args, Serialize)]
#[command(allow_negative_numbers = true, args_override_self = true)]
pub struct ClassifyArgs {
    #[arg(long)]
    pub a: f64,
    #[arg(long)]
    pub b: f64,
    #[arg(long)]
    pub q: f64,
    /// Also integrate and report the empirical class.
    #[arg(long)]
    pub probe: bool,
    #[arg(long, default_value_t = 1e-3)]
    pub h: f64,
    #[arg(long = "T", default_value_t = 50.0)]
    #[serde(rename = "T")]
    pub horizon: f64,
}

#[derive(Debug, Args, Serialize)]
#[command(allow_negative_numbers = true, args_override_self = true)]
pub struct SweepArgs {
    #[arg(long)]
    pub a_min: f64,
    #[arg(long)]
    pub a_max: f64,
    #[arg(long)]
    pub b_min: f64,
    #[arg(long)]
    pub b_max: f64,
    /// Delay factors, comma separated.
    #[arg(long, value_delimiter = ',', num_args = 0..)]
    pub q_list: Vec<f64>,
    /// Grid points per axis.
    #[arg(long, default_value_t = 21)]
    pub resolution: usize,
    #[arg(long, default_value_t = 1e-2)]
    pub h: f64,
    #[arg(long = "T", default_value_t = 50.0)]
    #[serde(rename = "T")]
    pub horizon: f64,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args, Serialize)]
#[command(allow_negative_numbers = true, args_override_self = true)]
pub struct BstarArgs {
    /// Values of a, comma separated.
    #[arg(
        long,
        value_delimiter = ',',
        allow_hyphen_values = true,
        required_unless_present = "a_min"
    )]
    pub a: Vec<f64>,
    /// Evenly spaced a values from a-min to a-max (with --points).
    #[arg(long, requires = "a_max")]
    pub a_min: Option<f64>,
    #[arg(long, requires = "a_min")]
    pub a_max: Option<f64>,
    #[arg(long, default_value_t = 11)]
    pub points: usize,
    #[arg(long, default_value_t = 0.05)]
    pub tolerance: f64,
    #[arg(long, value_delimiter = ',', default_value = "0.9")]
    pub q_probes: Vec<f64>,
    #[arg(long, default_value_t = 1e-2)]
    pub h: f64,
    #[arg(long = "T", default_value_t = 250.0)]
    #[serde(rename = "T")]
    pub horizon: f64,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args, Serialize)]
#[command(allow_negative_numbers = true, args_override_self = true)]
pub struct FitArgs {
    /// CSV with header `a,b_star`.
    #[arg(long = "in")]
    #[serde(rename = "in")]
    pub input: PathBuf,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args, Serialize)]
#[command(allow_negative_numbers = true, args_override_self = true)]
pub struct MgArgs {
    #[arg(long)]
    pub alpha: f64,
    #[arg(long, default_value_t = 1.0)]
    pub beta: f64,
    #[arg(long, default_value_t = 10.0)]
    pub c: f64,
    #[arg(long)]
    pub q: f64,
    #[arg(long, default_value_t = 0.2)]
    pub x0: f64,
    #[arg(long, default_value_t = 1e-3)]
    pub h: f64,
    #[arg(long = "T", default_value_t = 300.0)]
    #[serde(rename = "T")]
    pub horizon: f64,
    /// Trajectory CSV (`t,x`).
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Delay-coordinate CSV (`t,x,x_delayed`).
    #[arg(long)]
    pub attractor: Option<PathBuf>,
}

#[derive(Debug, Args, Serialize)]
#[command(allow_negative_numbers = true, args_override_self = true)]
pub struct MgBifurcationArgs {
    #[arg(long, default_value_t = 1.0)]
    pub beta: f64,
    #[arg(long, default_value_t = 10.0)]
    pub c: f64,
    /// Threshold b* at a = -beta; looked up in the threshold table if omitted.
    #[arg(long)]
    pub b_star: Option<f64>,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args, Serialize)]
#[command(args_override_self = true)]
pub struct Table1Args {
    #[arg(long)]
    pub out: Option<PathBuf>,
}
