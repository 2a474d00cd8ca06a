//! Density surplus gradient and the constrained mixing weight.

use crate::cmle::stats::SufficientStats;
use crate::error::{CamleError, Result};
use crate::mixture::{Afr, GaussianParams};
use crate::scalar::Scalar;

struct EdgeTerms<T> {
    /// `exp(-(a - mu)^2 / (2 sigma^2))`
    e_a: T,
    e_b: T,
    /// `a - mu`
    c_a: T,
    c_b: T,
}

fn edge_terms<T: Scalar>(params: &GaussianParams<T>, afr: &Afr<T>) -> EdgeTerms<T> {
    let two_s2 = T::lit(2.0) * params.sigma2;
    let c_a = afr.a() - params.mu;
    let c_b = afr.b() - params.mu;
    EdgeTerms { e_a: (-c_a * c_a / two_s2).exp(), e_b: (-c_b * c_b / two_s2).exp(), c_a, c_b }
}

/// `d I / d mu`, with `I` the Gaussian mass inside the AFR.
pub fn mass_gradient_mu<T: Scalar>(params: &GaussianParams<T>, afr: &Afr<T>) -> T {
    let e = edge_terms(params, afr);
    (e.e_a - e.e_b) / ((T::lit(2.0) * T::PI()).sqrt() * params.sigma())
}

/// `d I / d sigma`.
pub fn mass_gradient_sigma<T: Scalar>(params: &GaussianParams<T>, afr: &Afr<T>) -> T {
    let e = edge_terms(params, afr);
    (e.c_a * e.e_a - e.c_b * e.e_b) / ((T::lit(2.0) * T::PI()).sqrt() * params.sigma2)
}

/// Density surplus gradient through the location parameter:
/// `(d ell / d mu) * I / (d I / d mu)`.
pub fn omega_mu<T: Scalar>(params: &GaussianParams<T>, stats: &SufficientStats<T>, afr: &Afr<T>) -> Result<T> {
    let d_mass = mass_gradient_mu(params, afr);
    if !(d_mass.abs() >= T::tiny()) {
        return Err(CamleError::Singular(format!(
            "dI/dmu = {d_mass} at mu = {} (AFR center {})",
            params.mu,
            afr.center()
        )));
    }
    let d_ell = T::count(stats.n_normal()) * (stats.x_bar - params.mu) / params.sigma2;
    Ok(d_ell * params.mass_inside(afr) / d_mass)
}

/// Density surplus gradient through the scale parameter `sigma`.
pub fn omega_sigma<T: Scalar>(params: &GaussianParams<T>, stats: &SufficientStats<T>, afr: &Afr<T>) -> Result<T> {
    let d_mass = mass_gradient_sigma(params, afr);
    if !(d_mass.abs() >= T::tiny()) {
        return Err(CamleError::Singular(format!("dI/dsigma = {d_mass} at sigma2 = {}", params.sigma2)));
    }
    let d = stats.x_bar - params.mu;
    let d_ell = T::count(stats.n_normal()) * (stats.var + d * d - params.sigma2) / (params.sigma2 * params.sigma());
    Ok(d_ell * params.mass_inside(afr) / d_mass)
}

/// Constrained mixing weight `s_b / (n - omega)`; requires `omega < n - s_b`.
pub fn p_constrained<T: Scalar>(s_b: usize, n: usize, omega: T) -> Result<T> {
    let bound = T::count(n) - T::count(s_b);
    if !(omega < bound) || s_b > n {
        return Err(CamleError::InvalidOmega { omega: omega.as_f64(), bound: bound.as_f64() });
    }
    Ok(T::count(s_b) / (T::count(n) - omega))
}
