//! Nonlinear eigenvalues of the first and second Painlevé transcendents.
//!
//! Initial value problems for `y'' = 6y² + t` (P-I), `y'' = 2y³ + ty`
//! (P-II) and the toy model `y' = cos(πty)` are integrated along the real
//! axis, detouring through the complex plane around movable poles. The
//! critical initial data separating two stable families of solutions are
//! located by bisection on the terminal behaviour, and their large-`n`
//! growth is compared with closed-form WKB constants.
//!
//! Everything is generic over the scalar type through [`Real`] (`f32` or
//! `f64`); the `*64` aliases fix it to `f64`.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod asymptotics;
pub mod classifier;
pub mod dynamics;
pub mod eigensolver;
pub mod error;
pub mod integrator;
pub mod scalar;

pub use asymptotics::{
    closed_form_constants, extract_constant, gamma_fn, hermitian_quartic_energy, richardson, wkb_energy,
    ConstantEstimate, RichardsonResult, WkbConstants, WkbSpec,
};
pub use classifier::{classify, count_toy_maxima, ClassTag, ClassifierConfig, SolutionClass};
pub use dynamics::{fluctuation_integral, Branch, EnergyValue, Equation, InitialData, State};
pub use eigensolver::{
    bisect, eigen_table, scan_brackets, toy_eigen_table, Bracket, Discriminant, EigenProblem, EigenTable,
    EigenvalueRecord, SearchKind, SearchMode,
};
pub use error::{Error, Result};
pub use integrator::{integrate, Direction, IntegrationConfig, PoleEvent, Termination, Trajectory};
pub use scalar::Real;

pub type InitialData64 = InitialData<f64>;
pub type State64 = State<f64>;
pub type Trajectory64 = Trajectory<f64>;
pub type IntegrationConfig64 = IntegrationConfig<f64>;
pub type SolutionClass64 = SolutionClass<f64>;
pub type EigenProblem64 = EigenProblem<f64>;
pub type EigenvalueRecord64 = EigenvalueRecord<f64>;
pub type EigenTable64 = EigenTable<f64>;
pub type RichardsonResult64 = RichardsonResult<f64>;
pub type WkbConstants64 = WkbConstants<f64>;
