//! Error type shared by all modules.

use thiserror::Error;

/// Everything that can go wrong in the toolkit.
///
/// Sweeps never abort on a per-point failure; they record the point's error
/// and continue, so the variants are cheap to clone.
#[derive(Debug, Clone, Error)]
pub enum CoreError {
    /// Exponents violate the standing hypotheses. One message per violated
    /// hypothesis.
    #[error("inadmissible parameters: {}", .0.join("; "))]
    Inadmissible(Vec<String>),

    /// A caller-supplied argument (mesh, tolerance, bracket, grid) is unusable.
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    /// The shooting trajectory never crossed zero before the radius guard.
    #[error("no zero crossing of the shooting profile before rho = {rho_max}")]
    NoZeroCrossing { rho_max: f64 },

    /// The ODE integrator could not proceed (step underflow or step budget).
    #[error("integrator failed: {0}")]
    StepFailure(String),

    /// A threshold bisection was handed a bracket whose endpoints do not
    /// disagree on the indicator.
    #[error("bracket [{lo}, {hi}] does not straddle the transition")]
    NonStraddlingBracket { lo: f64, hi: f64 },

    /// A quadrature or quotient was asked for on an unusable profile.
    #[error("profile rejected: {0}")]
    BadProfile(String),

    /// A solver exhausted its budget without an acceptable iterate,
    /// in a context where no partial result is meaningful.
    #[error("solver failed to converge: {0}")]
    NonConvergence(String),

    /// Too many inner solves failed for an outer optimization to be trusted.
    #[error("partition scan aborted: {failed} of {total} inner solves failed")]
    TooManyFailures { failed: usize, total: usize },

    /// A computation produced a non-finite value.
    #[error("non-finite value in {0}")]
    NonFinite(String),
}

/// Crate-wide result alias.
pub type Result<T> = std::result::Result<T, CoreError>;
