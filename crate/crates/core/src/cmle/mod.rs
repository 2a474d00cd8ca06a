//! Constrained maximum-likelihood fit of the Gaussian component and anomaly weight.

pub mod omega;
pub mod solve;
pub mod stats;
pub mod uniform;
pub mod variance;

pub use omega::{mass_gradient_mu, mass_gradient_sigma, omega_mu, omega_sigma, p_constrained};
pub use solve::{constrained_mle, h_mu, solve_mu, ConstrainedProblem, LocationEvaluation};
pub use stats::{standard_mle, SufficientStats};
pub use uniform::{uniform_constraint_check, UniformDiagnostic};
pub use variance::{sigma2_constrained, variance_fixed_point_rhs, LambertCoefficients};
