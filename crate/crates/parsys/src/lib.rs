//! Numerical laboratory for weakly coupled parabolic systems
//!
//! The crate builds the evolution operator `G(t,s)` of the nonautonomous
//! Cauchy problem `D_t u = A(t)u` for systems of second-order operators that
//! are coupled only through a zero-order potential matrix `C(t,x)`, with
//! diffusion and drift coefficients that may be unbounded in space and differ
//! from equation to equation.  On top of the solver it provides executable
//! verifications of the quantitative theory: the comparison principle against
//! the auxiliary operator with `|c_kh|` off-diagonal entries, sup-norm and
//! derivative-decay estimates, resolvent construction by Laplace quadrature
//! and by direct elliptic solve, Schauder-type regularity experiments, and
//! systems of signed invariant measures for the autonomous shared-diffusion
//! case.
//!
//! Everything runs on uniform tensor grids over truncated boxes with
//! homogeneous Neumann boundary conditions; whole-space statements are
//! approached through expanding-domain studies with explicit truncation
//! audits.
//!
//! The hot loops are data parallel and run on rayon when the `parallel`
//! feature (default) is enabled; a sequential fallback is kept for
//! benchmarking and debugging, switchable at runtime via [`exec`].

pub mod coeff;
pub mod config;
pub mod data;
pub mod estimates;
pub mod evolve;
pub mod exec;
pub mod grid;
pub mod hypotheses;
pub mod linalg;
pub mod measures;
pub mod operator;
pub mod preset;
pub mod report;
pub mod resolvent;
pub mod suite;
pub mod tolerances;

pub use coeff::{CoefficientExpr, TimeFactor};
pub use estimates::DecayFit;
pub use evolve::{EvolutionResult, SolverConfig};
pub use grid::{BoxDomain, GridFunction, UniformGrid};
pub use measures::{CouplingAnalysis, MeasureVector};
pub use operator::{AuxiliaryFamily, OperatorFamily};
pub use preset::Preset;
pub use report::{Verdict, VerificationReport};

use thiserror::Error;

/// Unified error type for the laboratory.
#[derive(Debug, Error)]
pub enum Error {
    #[error("grid too coarse: {0}")]
    GridTooCoarse(String),
    #[error("inner grid is not nested in the outer grid: {0}")]
    NotNested(String),
    #[error(
        "linear solve failed: residual {residual:.3e} after {iters} iterations (tol {tol:.3e})"
    )]
    LinearSolveFailed {
        residual: f64,
        iters: usize,
        tol: f64,
    },
    #[error("ellipticity violated: min eigenvalue {min_eig:.3e} of Q^{comp} at t={t}, x={x:?}")]
    EllipticityViolated {
        comp: usize,
        t: f64,
        x: Vec<f64>,
        min_eig: f64,
    },
    #[error("row sums of C^P grow monotonically toward the domain boundary (row {row}, values {values:?})")]
    UnboundedAbove { row: usize, values: Vec<f64> },
    #[error("symbolic hypothesis check requested for a tabulated coefficient ({0})")]
    OutOfClass(String),
    #[error("lambda = {lambda} too small: must exceed M = {m_bound} by at least {margin}")]
    LambdaTooSmall {
        lambda: f64,
        m_bound: f64,
        margin: f64,
    },
    #[error("decay fit window spans {decades:.2} decades with {points} points; need >= 1 decade and >= 8 points")]
    InsufficientDecade { decades: f64, points: usize },
    #[error("invariant density not trustworthy on the truncated domain: outer-10% mass {outer_mass:.3e} exceeds {limit:.1e}")]
    NonIntegrable { outer_mass: f64, limit: f64 },
    #[error("stationary nullspace degenerate: singular values {sigma_min:.3e}, {sigma_next:.3e}")]
    DegenerateNullspace { sigma_min: f64, sigma_next: f64 },
    #[error("unknown preset `{0}`")]
    UnknownPreset(String),
    #[error("preset `{name}` failed self-validation: {reason}")]
    SelfValidationFailed { name: String, reason: String },
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
