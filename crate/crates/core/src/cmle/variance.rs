//! Constrained variance for a fixed location, through the r-Lambert function.
//!
//! With `z = 1 / sigma^2`, equality of the two density surplus gradients reduces
//! to `1 - alpha z = e^{m z} (1 - beta z)`. Substituting `z = 1/beta + y/m` turns
//! this into `y e^y + r y = gamma`, so every real r-Lambert branch `y` yields a
//! candidate `sigma^2 = beta m / (m + beta y)`. The branch `y = -m/beta` is the
//! trivial `z = 0` solution and is discarded.

use serde::Serialize;

use crate::cmle::stats::SufficientStats;
use crate::error::{CamleError, Result};
use crate::mixture::Afr;
use crate::scalar::Scalar;
use crate::specfn::r_lambert;

/// Coefficients of the r-Lambert equation for a given location.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LambertCoefficients<T> {
    /// `((a - mu)^2 - (b - mu)^2) / 2`
    pub m: T,
    /// `x2_bar - mu x_bar + (mu - x_bar) a`
    pub alpha_coef: T,
    /// `x2_bar - mu x_bar + (mu - x_bar) b`
    pub beta_coef: T,
    /// Right-hand side `m (alpha - beta) / beta^2 e^{-m/beta}`.
    pub gamma: T,
    /// r-Lambert parameter `-(alpha / beta) e^{-m/beta}`.
    pub r: T,
}

impl<T: Scalar> LambertCoefficients<T> {
    pub fn new(mu: T, stats: &SufficientStats<T>, afr: &Afr<T>) -> Result<Self> {
        // m = (b - a)(mu - center), alpha/beta in centered form
        let m = afr.width() * (mu - afr.center());
        let shift = mu - stats.x_bar;
        let alpha_coef = stats.var + shift * (afr.a() - stats.x_bar);
        let beta_coef = stats.var + shift * (afr.b() - stats.x_bar);
        if m == T::zero() {
            return Err(CamleError::Singular(format!("mu = {mu} coincides with the AFR center")));
        }
        if beta_coef == T::zero() {
            return Err(CamleError::Singular(format!("beta vanishes at mu = {mu}")));
        }
        let k = (-m / beta_coef).exp();
        let r = -(alpha_coef / beta_coef) * k;
        // alpha - beta = (mu - x_bar)(a - b)
        let gamma = m * (shift * (afr.a() - afr.b())) / (beta_coef * beta_coef) * k;
        Ok(Self { m, alpha_coef, beta_coef, gamma, r })
    }
}

/// Right-hand side of the variance fixed point
/// `sigma^2 = x2_bar - mu x_bar + (mu - x_bar) E(sigma^2)` with
/// `E = (a e_a - b e_b) / (e_a - e_b) = b - (a - b) / expm1(m / sigma^2)`.
pub fn variance_fixed_point_rhs<T: Scalar>(mu: T, sigma2: T, stats: &SufficientStats<T>, afr: &Afr<T>) -> T {
    let m = afr.width() * (mu - afr.center());
    let e = afr.b() - (afr.a() - afr.b()) / (m / sigma2).exp_m1();
    stats.var + (mu - stats.x_bar) * (e - stats.x_bar)
}

/// All admissible (finite, positive) constrained variances at location `mu`.
pub fn sigma2_constrained<T: Scalar>(mu: T, stats: &SufficientStats<T>, afr: &Afr<T>) -> Result<Vec<T>> {
    let coef = LambertCoefficients::new(mu, stats, afr)?;
    if !(coef.r.is_finite() && coef.gamma.is_finite()) {
        return Err(CamleError::NoVarianceSolution { mu: mu.as_f64() });
    }
    let trivial = T::lit(1e-9) * coef.m.abs();
    let out: Vec<T> = r_lambert(coef.r, coef.gamma)
        .iter()
        .filter_map(|&y| {
            let denom = coef.m + coef.beta_coef * y;
            if denom.abs() <= trivial {
                return None;
            }
            let s2 = polish(coef.beta_coef * coef.m / denom, &coef);
            (s2.is_finite() && s2 > T::zero()).then_some(s2)
        })
        .collect();
    if out.is_empty() {
        Err(CamleError::NoVarianceSolution { mu: mu.as_f64() })
    } else {
        Ok(out)
    }
}

/// A few Newton steps on `F(z) = 1 - alpha z - e^{m z}(1 - beta z)` to recover
/// digits lost in `m + beta y` when the branch value nearly cancels `m`.
fn polish<T: Scalar>(sigma2: T, coef: &LambertCoefficients<T>) -> T {
    if !(sigma2.is_finite() && sigma2 > T::zero()) {
        return sigma2;
    }
    let (m, al, be) = (coef.m, coef.alpha_coef, coef.beta_coef);
    let f = |z: T| {
        let e = (m * z).exp();
        let v = T::one() - al * z - e * (T::one() - be * z);
        let d = -al - e * (m * (T::one() - be * z) - be);
        (v, d)
    };
    let mut z = sigma2.recip();
    let (mut fz, _) = f(z);
    for _ in 0..4 {
        let (v, d) = f(z);
        if !(v.is_finite() && d.is_finite()) || d == T::zero() {
            break;
        }
        let next = z - v / d;
        if !(next > T::zero() && next.is_finite()) {
            break;
        }
        let (vn, _) = f(next);
        if !(vn.abs() < fz.abs()) {
            break;
        }
        z = next;
        fz = vn;
    }
    z.recip()
}
