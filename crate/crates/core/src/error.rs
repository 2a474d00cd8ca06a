use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum CamleError {
    #[error("domain error: {0}")]
    Domain(String),

    #[error("invalid input: {0}")]
    InvalidInput(String),

    /// Too few normal-labeled points, zero variance, or constant data.
    #[error("degenerate input: {0}")]
    Degenerate(String),

    #[error("singular derivative: {0}")]
    Singular(String),

    /// Omega violates `omega < n - s_b`.
    #[error("invalid density surplus gradient {omega} (must be below {bound})")]
    InvalidOmega { omega: f64, bound: f64 },

    /// No positive real variance candidate for this location.
    #[error("no admissible variance for mu = {mu}")]
    NoVarianceSolution { mu: f64 },

    /// The constraint residual function has no root on its real domain.
    /// `best_mu` is the location closest to feasibility, if any location was admissible.
    #[error("no constrained solution (closest feasible mu: {best_mu:?})")]
    NoConstrainedSolution { best_mu: Option<f64> },
}

pub type Result<T> = std::result::Result<T, CamleError>;
