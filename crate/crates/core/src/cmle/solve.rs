//! Constrained fit: KKT case dispatch and the search for the location `mu`.
//!
//! For a fixed `mu` the constrained variance, density surplus gradient and
//! mixing weight are all determined, which leaves the consistency constraint
//! as a scalar function `h(mu) = w^2 - residual(mu)^2`. Its roots are the
//! feasible boundary solutions; `h` is quasi-concave on its real domain (the
//! side of the AFR center that holds the sample mean), so the solver locates
//! the peak on a log-distance grid, refines it by golden-section search and
//! then bisects towards each side.

use log::warn;
use serde::Serialize;

use crate::cmle::omega::{omega_mu, omega_sigma, p_constrained};
use crate::cmle::stats::{standard_mle_from_stats, SufficientStats};
use crate::cmle::variance::sigma2_constrained;
use crate::error::{CamleError, Result};
use crate::mixture::{
    constraint_residual, default_anomaly_density, empirical_outside_fraction, wilson_interval, Afr,
    GaussianParams, KktCase, LabelEstimate, MixtureEstimate, WilsonInterval,
};
use crate::scalar::Scalar;
use crate::specfn::root::bisect;

const GRID_POINTS: usize = 320;
const GOLDEN_ITERS: usize = 64;
/// Bracket cap relative to the data scale.
const MAX_SPAN: f64 = 1e6;
/// Offset applied when the sample mean sits exactly on the AFR center.
const CENTER_NUDGE: f64 = 1e-9;

/// Everything implied by a candidate location `mu`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LocationEvaluation<T> {
    pub mu: T,
    pub sigma2: T,
    pub omega_mu: T,
    pub omega_sigma: T,
    pub p: T,
    pub residual: T,
    /// `w^2 - residual^2`
    pub h: T,
    pub log_likelihood: T,
}

/// One constrained estimation problem: labeled-normal moments, AFR and the
/// Wilson interval of the outside-AFR probability.
#[derive(Debug, Clone, Copy)]
pub struct ConstrainedProblem<T> {
    stats: SufficientStats<T>,
    afr: Afr<T>,
    interval: WilsonInterval<T>,
    f_inf_density: T,
}

impl<T: Scalar> ConstrainedProblem<T> {
    pub fn new(x: &[T], b_hat: &LabelEstimate, afr: Afr<T>, interval: WilsonInterval<T>) -> Result<Self> {
        let stats = SufficientStats::from_labeled(x, b_hat)?;
        Ok(Self::from_stats(stats, afr, interval, default_anomaly_density(x)))
    }

    pub fn from_stats(stats: SufficientStats<T>, afr: Afr<T>, interval: WilsonInterval<T>, f_inf_density: T) -> Self {
        Self { stats, afr, interval, f_inf_density }
    }

    pub fn stats(&self) -> &SufficientStats<T> {
        &self.stats
    }

    pub fn afr(&self) -> &Afr<T> {
        &self.afr
    }

    pub fn interval(&self) -> &WilsonInterval<T> {
        &self.interval
    }

    /// Unconstrained fit with its constraint residual filled in.
    pub fn unconstrained(&self) -> Result<MixtureEstimate<T>> {
        let mut est = standard_mle_from_stats(&self.stats)?;
        est.residual = constraint_residual(&est.params, est.p, &self.afr, &self.interval);
        Ok(est)
    }

    /// Sample mean, nudged off the AFR center if it coincides with it.
    pub fn effective_mean(&self) -> T {
        let c = self.afr.center();
        if self.stats.x_bar == c {
            c + T::lit(CENTER_NUDGE) * self.afr.width()
        } else {
            self.stats.x_bar
        }
    }

    /// Whether `mu` lies on the side of the AFR center where `h` is real-valued.
    pub fn in_domain(&self, mu: T) -> bool {
        let c = self.afr.center();
        (self.effective_mean() - c) * (mu - c) > T::zero()
    }

    /// Variance, gradients, weight and residual implied by `mu`. Among several
    /// variance branches the one with the smallest `|omega_mu - omega_sigma|`
    /// wins, ties going to the higher likelihood. `None` when no branch gives an
    /// admissible weight.
    pub fn evaluate(&self, mu: T) -> Option<LocationEvaluation<T>> {
        let candidates = sigma2_constrained(mu, &self.stats, &self.afr).ok()?;
        let mut best: Option<(T, LocationEvaluation<T>)> = None;
        for sigma2 in candidates {
            let Ok(params) = GaussianParams::new(mu, sigma2) else { continue };
            let (Ok(om_mu), Ok(om_sigma)) =
                (omega_mu(&params, &self.stats, &self.afr), omega_sigma(&params, &self.stats, &self.afr))
            else {
                continue;
            };
            let Ok(p) = p_constrained(self.stats.s_b, self.stats.n, om_mu) else { continue };
            let residual = constraint_residual(&params, p, &self.afr, &self.interval);
            let h = self.interval.w * self.interval.w - residual * residual;
            let eval = LocationEvaluation {
                mu,
                sigma2,
                omega_mu: om_mu,
                omega_sigma: om_sigma,
                p,
                residual,
                h,
                log_likelihood: self.stats.log_likelihood(&params, p, self.f_inf_density),
            };
            let mismatch = (om_mu - om_sigma).abs();
            let replace = match &best {
                None => true,
                Some((bm, be)) => {
                    let tie = T::lit(1e-8) * T::one().max(om_mu.abs());
                    if (mismatch - *bm).abs() <= tie {
                        eval.log_likelihood > be.log_likelihood
                    } else {
                        mismatch < *bm
                    }
                }
            };
            if replace {
                best = Some((mismatch, eval));
            }
        }
        best.map(|(_, e)| e)
    }

    /// `w^2 - residual(mu)^2`, or `-inf` where `mu` admits no solution.
    pub fn h(&self, mu: T) -> T {
        self.evaluate(mu).map(|e| e.h).unwrap_or_else(T::neg_infinity)
    }

    /// Finds the constrained location: a root of `h` on its real domain,
    /// choosing the more likely root when there are two.
    pub fn solve_mu(&self) -> Result<LocationEvaluation<T>> {
        let c = self.afr.center();
        let mean = self.effective_mean();
        let side = (mean - c).signum();
        let d_mean = (mean - c).abs();
        let scale = self.stats.var.sqrt().max(self.afr.width()).max(d_mean);
        let d_lo = (T::lit(1e-9) * self.afr.width()).min(d_mean * T::lit(1e-3));
        let d_hi = T::lit(MAX_SPAN) * scale;
        let mu_at = |ld: T| c + side * ld.exp();
        let h_at = |ld: T| {
            let v = self.h(mu_at(ld));
            if v.is_nan() {
                T::neg_infinity()
            } else {
                v
            }
        };

        // log-distance grid from the center, with the sample mean included
        let (l_lo, l_hi) = (d_lo.ln(), d_hi.ln());
        let step = (l_hi - l_lo) / T::count(GRID_POINTS - 1);
        let mut grid: Vec<T> = (0..GRID_POINTS).map(|i| l_lo + step * T::count(i)).collect();
        grid.push(d_mean.ln());
        grid.sort_by(|a, b| a.partial_cmp(b).unwrap());
        let hs: Vec<T> = grid.iter().map(|&ld| h_at(ld)).collect();

        let Some(i_max) = (0..grid.len()).filter(|&i| hs[i].is_finite()).max_by(|&i, &j| hs[i].partial_cmp(&hs[j]).unwrap())
        else {
            return Err(CamleError::NoConstrainedSolution { best_mu: None });
        };

        // golden-section refinement of the peak between the grid neighbours
        let mut a = grid[i_max.saturating_sub(1)];
        let mut b = grid[(i_max + 1).min(grid.len() - 1)];
        let inv_phi = T::lit(0.618_033_988_749_894_9);
        let mut x1 = b - inv_phi * (b - a);
        let mut x2 = a + inv_phi * (b - a);
        let (mut f1, mut f2) = (h_at(x1), h_at(x2));
        let (mut peak, mut h_peak) = (grid[i_max], hs[i_max]);
        for _ in 0..GOLDEN_ITERS {
            if f1 >= f2 {
                b = x2;
                x2 = x1;
                f2 = f1;
                x1 = b - inv_phi * (b - a);
                f1 = h_at(x1);
            } else {
                a = x1;
                x1 = x2;
                f1 = f2;
                x2 = a + inv_phi * (b - a);
                f2 = h_at(x2);
            }
            for (x, f) in [(x1, f1), (x2, f2)] {
                if f > h_peak {
                    peak = x;
                    h_peak = f;
                }
            }
        }

        if h_peak < T::zero() {
            return Err(CamleError::NoConstrainedSolution { best_mu: Some(mu_at(peak).as_f64()) });
        }
        if h_peak == T::zero() {
            return self.evaluate(mu_at(peak)).ok_or(CamleError::NoConstrainedSolution { best_mu: None });
        }

        let x_tol = |mu: T| T::lit(1e-12).max(T::lit(4.0) * T::epsilon() * mu.abs());
        let f_tol = T::lit(1e-10);
        let root_between = |l_neg: T, h_neg: T, l_pos: T| -> Option<LocationEvaluation<T>> {
            let (mu_neg, mu_pos) = (mu_at(l_neg), mu_at(l_pos));
            let mu = bisect(|m| self.h(m), mu_neg, mu_pos, h_neg, x_tol(mu_pos), f_tol);
            self.evaluate(mu)
        };

        let mut roots = Vec::with_capacity(2);
        // towards the center
        if let Some(j) = (0..grid.len()).rev().find(|&j| grid[j] < peak && hs[j] < T::zero()) {
            let pos = (j + 1..grid.len()).find(|&k| grid[k] < peak && hs[k] >= T::zero()).map_or(peak, |k| grid[k]);
            roots.extend(root_between(grid[j], hs[j], pos));
        }
        // away from the center
        if let Some(j) = (0..grid.len()).find(|&j| grid[j] > peak && hs[j] < T::zero()) {
            let pos = (0..j).rev().find(|&k| grid[k] > peak && hs[k] >= T::zero()).map_or(peak, |k| grid[k]);
            roots.extend(root_between(grid[j], hs[j], pos));
        }

        let x_bar = self.stats.x_bar;
        roots
            .into_iter()
            .reduce(|best, e| {
                let tie = T::lit(1e-12) * T::one().max(best.log_likelihood.abs());
                if (e.log_likelihood - best.log_likelihood).abs() <= tie {
                    if (e.mu - x_bar).abs() < (best.mu - x_bar).abs() {
                        e
                    } else {
                        best
                    }
                } else if e.log_likelihood > best.log_likelihood {
                    e
                } else {
                    best
                }
            })
            .ok_or(CamleError::NoConstrainedSolution { best_mu: Some(mu_at(peak).as_f64()) })
    }

    /// Fits the mixture. With `constrain = false` this is the plain MLE. With
    /// `constrain = true` the constrained problem is solved only when the
    /// unconstrained fit violates the consistency constraint; if no feasible
    /// location exists, the location closest to feasibility is returned with
    /// `fallback = true`.
    pub fn fit(&self, constrain: bool) -> Result<MixtureEstimate<T>> {
        let unconstrained = self.unconstrained()?;
        if !constrain || self.interval.admits(unconstrained.residual) {
            return Ok(unconstrained);
        }
        // without labeled anomalies p stays at its lower bound
        let kkt_case = if self.stats.s_b == 0 { KktCase::BoundaryP } else { KktCase::ConsistencyActive };
        let to_estimate = |e: LocationEvaluation<T>, fallback: bool| -> Result<MixtureEstimate<T>> {
            Ok(MixtureEstimate {
                params: GaussianParams::new(e.mu, e.sigma2)?,
                p: e.p,
                omega: e.omega_mu,
                residual: e.residual,
                kkt_case,
                fallback,
            })
        };
        match self.solve_mu() {
            Ok(e) => to_estimate(e, false),
            Err(CamleError::NoConstrainedSolution { best_mu: Some(mu) }) => {
                let e = self
                    .evaluate(T::lit(mu))
                    .ok_or(CamleError::NoConstrainedSolution { best_mu: Some(mu) })?;
                warn!("no feasible constrained solution; using closest location mu = {mu}");
                to_estimate(e, true)
            }
            Err(e) => Err(e),
        }
    }
}

/// The constraint residual function `h(mu) = w^2 - residual^2` for given labels.
/// Returns `-inf` where `mu` admits no solution.
pub fn h_mu<T: Scalar>(
    mu: T,
    x: &[T],
    b_hat: &LabelEstimate,
    afr: &Afr<T>,
    interval: &WilsonInterval<T>,
) -> Result<T> {
    let problem = ConstrainedProblem::new(x, b_hat, *afr, *interval)?;
    if !problem.in_domain(mu) {
        return Err(CamleError::Domain(format!("mu = {mu} is on the wrong side of the AFR center")));
    }
    Ok(problem.h(mu))
}

/// Constrained location for given labels.
pub fn solve_mu<T: Scalar>(x: &[T], b_hat: &LabelEstimate, afr: &Afr<T>, interval: &WilsonInterval<T>) -> Result<T> {
    ConstrainedProblem::new(x, b_hat, *afr, *interval)?.solve_mu().map(|e| e.mu)
}

/// Constrained maximum-likelihood estimate of `(mu, sigma^2, p)`.
///
/// `b_hat` must already be zero inside the AFR. The Wilson interval is built
/// from the empirical outside-AFR fraction at level `alpha`.
pub fn constrained_mle<T: Scalar>(x: &[T], b_hat: &LabelEstimate, afr: &Afr<T>, alpha: T) -> Result<MixtureEstimate<T>> {
    if x.len() != b_hat.len() {
        return Err(CamleError::InvalidInput(format!(
            "data has {} points but labels have {}",
            x.len(),
            b_hat.len()
        )));
    }
    if !b_hat.is_zeroed_inside(x, afr) {
        return Err(CamleError::InvalidInput("labels mark anomalies inside the AFR".into()));
    }
    let interval = wilson_interval(empirical_outside_fraction(x, afr)?, x.len(), alpha)?;
    ConstrainedProblem::new(x, b_hat, *afr, interval)?.fit(true)
}
