//! Central tolerance constants for the verification suite, each with its
//! origin. The acceptance tests pin these values; nothing is calibrated at
//! run time.

/// Machine-level comparisons (dense eigenvalues, kernel vectors, exact
/// identities).
pub const EXACT: f64 = 1e-10;

/// Floating tolerance for algebraic identities checked pointwise (tilde
/// row sums, measure-weight ratios).
pub const IDENTITY: f64 = 1e-12;

/// Comparison principle: pointwise slack factor on h^2 + dt.
pub const CMP_FACTOR: f64 = 10.0;

/// Sup bound: relative slack on the ratio measured / e^{M (t-s)} ||f||.
pub const SUP_REL: f64 = 1e-3;

/// One-sided slack on fitted log-log decay slopes.
pub const SLOPE_TOL: f64 = 0.15;

/// Evolution-law composition residual: factor on dt * (t - s).
pub const SCHEME_FACTOR: f64 = 10.0;

/// Variation-of-constants reconstruction vs the coupled solve.
pub const DUHAMEL: f64 = 5e-3;

/// Resolvent identity residual, relative to ||f||.
pub const RESOLVENT_IDENTITY: f64 = 1e-4;

/// Cross-method resolvent agreement on the inner half-box.
pub const RESOLVENT_AGREE: f64 = 5e-3;

/// Relative slack on the resolvent norm bound (lambda - M)^{-1}.
pub const RESOLVENT_NORM_REL: f64 = 1e-3;

/// Default margin required above M for the Laplace quadrature.
pub const LAMBDA_MARGIN: f64 = 0.5;

/// Laplace-transform truncation: tail mass relative to ||f||.
pub const QUADRATURE_TAIL: f64 = 1e-8;

/// Schauder ratio stability under one grid refinement.
pub const SCHAUDER_STABILITY: f64 = 0.20;

/// Manufactured-solution recovery in the C^2 norm.
pub const MANUFACTURED_C2: f64 = 1e-3;

/// Invariance functional equality, relative to ||f||_inf.
pub const INVARIANCE: f64 = 5e-3;

/// Asymptotics: required residual reduction factor at the horizon.
pub const ASYMPTOTIC_FACTOR: f64 = 0.05;

/// Gradient decay: required reduction of the weighted gradient energy.
pub const GRADIENT_DECAY_FACTOR: f64 = 0.05;

/// Relative slack on the L^p bound 2^{(p-1)/p}.
pub const LP_REL: f64 = 1e-3;

/// Fixed points of the semigroups: ||T(t) eta - eta||.
pub const FIXED_POINT: f64 = 1e-4;

/// Stationary density vs the 1-d closed form, L^1 distance.
pub const DENSITY_L1: f64 = 1e-4;

/// Mass allowed on the outer 10% of the truncated domain before a section-5
/// run is trusted.
pub const OUTER_MASS: f64 = 1e-6;

/// Mass-normalization defect of densities.
pub const MASS_DEFECT: f64 = 1e-10;

/// Improvement factor demanded when dt is halved in the evolution-law and
/// resolvent-identity refinement checks.
pub const REFINEMENT_GAIN: f64 = 1.7;

/// Improvement factor for the stationary-density h-refinement check.
pub const DENSITY_REFINEMENT_GAIN: f64 = 3.0;
