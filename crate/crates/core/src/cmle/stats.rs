use serde::Serialize;

use crate::error::{CamleError, Result};
use crate::mixture::{GaussianParams, KktCase, LabelEstimate, MixtureEstimate};
use crate::scalar::Scalar;

/// Moments of the normal-labeled subsample.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SufficientStats<T> {
    pub n: usize,
    /// Number of points labeled anomalous.
    pub s_b: usize,
    /// Mean of the normal-labeled points.
    pub x_bar: T,
    /// Mean of squares of the normal-labeled points.
    pub x2_bar: T,
    /// Centered second moment, `x2_bar - x_bar^2`, computed in two passes.
    pub var: T,
}

impl<T: Scalar> SufficientStats<T> {
    pub fn from_labeled(x: &[T], b_hat: &LabelEstimate) -> Result<Self> {
        if x.len() != b_hat.len() {
            return Err(CamleError::InvalidInput(format!(
                "data has {} points but labels have {}",
                x.len(),
                b_hat.len()
            )));
        }
        let n = x.len();
        let s_b = b_hat.anomaly_count();
        if s_b >= n {
            return Err(CamleError::Degenerate("no point is labeled normal".into()));
        }
        let normal = || x.iter().zip(b_hat.as_slice()).filter(|(_, &b)| !b).map(|(&v, _)| v);
        let m = T::count(n - s_b);
        let x_bar = normal().sum::<T>() / m;
        let var = normal().map(|v| (v - x_bar) * (v - x_bar)).sum::<T>() / m;
        if !(x_bar.is_finite() && var.is_finite()) {
            return Err(CamleError::InvalidInput("non-finite data".into()));
        }
        Ok(Self { n, s_b, x_bar, x2_bar: var + x_bar * x_bar, var })
    }

    pub fn n_normal(&self) -> usize {
        self.n - self.s_b
    }

    /// Log-likelihood of `(params, p)` from the moments alone.
    pub fn log_likelihood(&self, params: &GaussianParams<T>, p: T, f_inf_density: T) -> T {
        let m = T::count(self.n_normal());
        let s = T::count(self.s_b);
        let two = T::lit(2.0);
        if (p == T::zero() && self.s_b > 0) || p >= T::one() {
            return T::neg_infinity();
        }
        let anomaly = if self.s_b == 0 { T::zero() } else { s * (p.ln() + f_inf_density.ln()) };
        let d = self.x_bar - params.mu;
        m * (T::one() - p).ln() + anomaly
            - m / two * (two * T::PI() * params.sigma2).ln()
            - m * (self.var + d * d) / (two * params.sigma2)
    }
}

/// Unconstrained maximum-likelihood fit: Gaussian moments of the normal-labeled
/// points and `p = s_b / n`. The residual is left as NaN until evaluated against
/// an interval (see [`MixtureEstimate::with_residual`]).
pub fn standard_mle<T: Scalar>(x: &[T], b_hat: &LabelEstimate) -> Result<MixtureEstimate<T>> {
    let stats = SufficientStats::from_labeled(x, b_hat)?;
    standard_mle_from_stats(&stats)
}

pub(crate) fn standard_mle_from_stats<T: Scalar>(stats: &SufficientStats<T>) -> Result<MixtureEstimate<T>> {
    if stats.n_normal() < 2 {
        return Err(CamleError::Degenerate(format!(
            "need at least 2 normal-labeled points, have {}",
            stats.n_normal()
        )));
    }
    if !(stats.var > T::zero()) {
        return Err(CamleError::Degenerate("normal-labeled points have zero variance".into()));
    }
    Ok(MixtureEstimate {
        params: GaussianParams::new(stats.x_bar, stats.var)?,
        p: T::count(stats.s_b) / T::count(stats.n),
        omega: T::zero(),
        residual: T::nan(),
        kkt_case: KktCase::Unconstrained,
        fallback: false,
    })
}
