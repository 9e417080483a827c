use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use egr_core::{Method, Starred};

#[derive(Debug, Parser)]
#[command(
    name = "egr",
    version,
    about = "Reservoir-enhanced discrete gradient experiments",
    after_help = "Reservoir convention: dz/dt = +y*D(x, y), so K = H + z is constant along exact solutions."
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Integrate one system with one integrator and write the trajectory as CSV.
    Run(RunArgs),
    /// Run several integrators on the same system and grid.
    Compare(CompareArgs),
    /// Fit the observed order of accuracy over a list of step sizes.
    Convergence(ConvergenceArgs),
    /// Emit the dataset behind one of the standard figures (3.1, 3.2, 4.1-4.4).
    Figure(FigureArgs),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum SystemName {
    #[value(name = "damped-ho")]
    DampedHo,
    Vdp,
    Duffing,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum OnOff {
    On,
    Off,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum StarredArg {
    Midpoint,
    Left,
}

impl From<StarredArg> for Starred {
    fn from(s: StarredArg) -> Self {
        match s {
            StarredArg::Midpoint => Starred::Midpoint,
            StarredArg::Left => Starred::LeftEndpoint,
        }
    }
}

pub fn parse_method(s: &str) -> Result<Method, String> {
    s.parse::<Method>().map_err(|e| e.to_string())
}

#[derive(Clone, Debug, Args)]
pub struct SystemArgs {
    #[arg(long, value_enum, default_value = "damped-ho")]
    pub system: SystemName,
    /// System parameter, `b=...` (damped-ho, duffing) or `a=...` (vdp). Repeatable.
    #[arg(long = "param", value_name = "KEY=VALUE")]
    pub params: Vec<String>,
    /// Initial position; defaults to the standard initial condition of the system.
    #[arg(long, allow_hyphen_values = true)]
    pub x0: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    pub y0: Option<f64>,
}

#[derive(Clone, Debug, Args)]
pub struct SolverArgs {
    /// Fixed-point tolerance (sup-norm of the last update).
    #[arg(long, default_value_t = 1e-15)]
    pub tol: f64,
    #[arg(long, default_value_t = 50)]
    pub max_iter: u32,
    /// Where the damping term is evaluated inside a step.
    #[arg(long, value_enum, default_value = "midpoint")]
    pub starred: StarredArg,
    #[arg(long, value_enum, default_value = "on")]
    pub reservoir: OnOff,
    /// Refuse system/integrator combinations the method is not meant for.
    #[arg(long)]
    pub strict: bool,
}

#[derive(Clone, Debug, Args)]
pub struct GridArgs {
    #[arg(long, default_value_t = 1e-3)]
    pub h: f64,
    #[arg(long = "T", default_value_t = 100.0)]
    pub t_end: f64,
    /// `none`, `exact` (damped-ho only) or `rk4:H_REF:STRIDE`.
    #[arg(long, default_value = "none")]
    pub reference: String,
    /// Output CSV path; standard output when omitted.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Directory for cached RK4 reference trajectories.
    #[arg(long)]
    pub cache_dir: Option<PathBuf>,
}

#[derive(Clone, Debug, Args)]
pub struct RunArgs {
    #[command(flatten)]
    pub system: SystemArgs,
    #[arg(long, value_parser = parse_method, default_value = "en-gr")]
    pub integrator: Method,
    #[command(flatten)]
    pub solver: SolverArgs,
    #[command(flatten)]
    pub grid: GridArgs,
}

#[derive(Clone, Debug, Args)]
pub struct CompareArgs {
    #[command(flatten)]
    pub system: SystemArgs,
    #[arg(long, value_parser = parse_method, value_delimiter = ',', default_value = "en-gr,imr,sv")]
    pub integrators: Vec<Method>,
    #[command(flatten)]
    pub solver: SolverArgs,
    #[command(flatten)]
    pub grid: GridArgs,
}

#[derive(Clone, Debug, Args)]
pub struct ConvergenceArgs {
    #[command(flatten)]
    pub system: SystemArgs,
    #[arg(long, value_parser = parse_method, default_value = "en-gr")]
    pub integrator: Method,
    #[command(flatten)]
    pub solver: SolverArgs,
    /// Step sizes, largest first.
    #[arg(long, value_delimiter = ',', default_value = "1e-2,5e-3,2.5e-3")]
    pub hs: Vec<f64>,
    #[arg(long = "T", default_value_t = 10.0)]
    pub t_end: f64,
}

#[derive(Clone, Debug, Args)]
pub struct FigureArgs {
    /// One of 3.1, 3.2, 4.1, 4.2, 4.3, 4.4.
    pub id: String,
    #[arg(long, default_value_t = 1e-3)]
    pub h: f64,
    #[arg(long = "T", default_value_t = 100.0)]
    pub t_end: f64,
    /// Reference for figures that need one (`rk4:H_REF:STRIDE`).
    #[arg(long, default_value = "rk4:1e-6:1000")]
    pub reference: String,
    #[arg(long, default_value_t = 1e-15)]
    pub tol: f64,
    #[arg(long, default_value_t = 50)]
    pub max_iter: u32,
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long, default_value = ".egr-cache")]
    pub cache_dir: PathBuf,
}
