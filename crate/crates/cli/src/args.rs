use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use painleve::{Direction, Equation, SearchKind};
use serde::Serialize;

#[derive(Debug, Parser)]
#[command(name = "painleve", version, about = "Trajectories, separatrix eigenvalues and asymptotic constants of Painleve I and II")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Integrate one initial value problem and write its real-axis samples.
    Trajectory(TrajectoryArgs),
    /// Locate the first n critical initial conditions.
    Eigen(EigenArgs),
    /// Print the closed-form constants, optionally against an eigen table.
    Constants(ConstantsArgs),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum EqArg {
    P1,
    P2,
    Toy,
}

impl From<EqArg> for Equation {
    fn from(e: EqArg) -> Self {
        match e {
            EqArg::P1 => Equation::PainleveI,
            EqArg::P2 => Equation::PainleveII,
            EqArg::Toy => Equation::ToyModel,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum ModeArg {
    /// Hold y(0), vary y'(0).
    Slope,
    /// Hold y'(0), vary y(0).
    Value,
}

impl From<ModeArg> for SearchKind {
    fn from(m: ModeArg) -> Self {
        match m {
            ModeArg::Slope => SearchKind::SlopeEigen,
            ModeArg::Value => SearchKind::ValueEigen,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum DirArg {
    Neg,
    Pos,
}

impl From<DirArg> for Direction {
    fn from(d: DirArg) -> Self {
        match d {
            DirArg::Neg => Direction::NegativeT,
            DirArg::Pos => Direction::PositiveT,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Csv,
    Json,
}

#[derive(Debug, Args)]
pub struct TrajectoryArgs {
    #[arg(long, value_enum)]
    pub eq: EqArg,
    /// y(0); the toy model's only datum.
    #[arg(long, default_value_t = 0.0, allow_negative_numbers = true)]
    pub y0: f64,
    /// y'(0); ignored for the toy model.
    #[arg(long, default_value_t = 0.0, allow_negative_numbers = true)]
    pub slope: f64,
    /// Defaults to neg for P-I and P-II, pos for the toy model.
    #[arg(long, value_enum)]
    pub direction: Option<DirArg>,
    /// Final t; defaults to -60 (neg), +30 (P-II pos) or +50 (toy).
    #[arg(long, allow_negative_numbers = true)]
    pub horizon: Option<f64>,
    /// Relative tolerance of the integrator.
    #[arg(long, default_value_t = 1e-10)]
    pub tol: f64,
    #[arg(long, value_enum, default_value_t = Format::Csv)]
    pub format: Format,
    /// Output file; stdout when absent.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct EigenArgs {
    #[arg(long, value_enum)]
    pub eq: EqArg,
    /// Required for P-I and P-II; ignored for the toy model.
    #[arg(long, value_enum)]
    pub mode: Option<ModeArg>,
    /// Number of eigenvalues.
    #[arg(long, default_value_t = 5)]
    pub n: usize,
    /// Final bracket width.
    #[arg(long, default_value_t = painleve::eigensolver::DEFAULT_TOL)]
    pub tol: f64,
    /// Fixed y(0) in slope mode.
    #[arg(long, allow_negative_numbers = true)]
    pub y0: Option<f64>,
    /// Fixed y'(0) in value mode.
    #[arg(long, allow_negative_numbers = true)]
    pub slope: Option<f64>,
    /// Overrides the canonical direction of the search.
    #[arg(long, value_enum)]
    pub direction: Option<DirArg>,
    #[arg(long, allow_negative_numbers = true)]
    pub horizon: Option<f64>,
    #[arg(long, value_enum, default_value_t = Format::Json)]
    pub format: Format,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct ConstantsArgs {
    /// Eigen table (JSON, as written by `painleve eigen`) to extrapolate.
    #[arg(long)]
    pub table: Option<PathBuf>,
    /// Richardson order; defaults to 5 for P-I slope tables, 4 otherwise.
    #[arg(long)]
    pub order: Option<usize>,
    #[arg(long, value_enum, default_value_t = Format::Csv)]
    pub format: Format,
    #[arg(long)]
    pub out: Option<PathBuf>,
}
