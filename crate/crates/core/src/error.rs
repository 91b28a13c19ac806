//! Error type shared by the numeric and geometric kernels.

use thiserror::Error;

/// Errors surfaced by the construction and verification kernels.
#[derive(Debug, Error)]
pub enum CoreError {
    /// Quadrature failed to reach the requested tolerance within the
    /// evaluation budget; carries the best estimate and its error bound.
    #[error("quadrature budget exceeded: best estimate {best} (error ~ {error_estimate}) after {evaluations} evaluations")]
    QuadratureBudget {
        best: f64,
        error_estimate: f64,
        evaluations: usize,
    },

    /// Root finder was given an interval without a sign change.
    #[error("no sign change on bracket [{lo}, {hi}]")]
    NoBracket { lo: f64, hi: f64 },

    /// ODE step size underflowed; the field is effectively stiff here.
    #[error("ODE step underflow at t = {t} (h = {h})")]
    Stiffness { t: f64, h: f64 },

    /// An argument fell outside the operation's domain.
    #[error("domain error: {0}")]
    Domain(String),

    /// Requested junction displacement is at or beyond the 2 f(b/2) bound.
    #[error("displacement {c} is unattainable on an interval of length {b} (bound {bound})")]
    UnattainableDisplacement { b: f64, c: f64, bound: f64 },

    /// Fat-Cantor gap schedule removes measure ≥ 1 or does not fit.
    #[error("invalid gap schedule: {0}")]
    InvalidSchedule(String),

    /// A materialization request exceeded the configured budget.
    #[error("materialization budget exceeded: {requested} items > budget {budget}")]
    Budget { requested: u128, budget: u128 },

    /// A monotone family inversion failed; indicates an internal bug.
    #[error("internal consistency error: {0}")]
    Inconsistency(String),
}
