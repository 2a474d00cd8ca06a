//! CAMLE scoring: random label draws, constrained fits and density-deficit scores.

use log::warn;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::cmle::{ConstrainedProblem, SufficientStats};
use crate::error::{CamleError, Result};
use crate::mixture::{
    default_anomaly_density, empirical_outside_fraction, wilson_interval, Afr, KktCase, LabelEstimate,
    MixtureEstimate, WilsonInterval,
};
use crate::scalar::Scalar;

/// How the AFR of a dimension is obtained.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub enum AfrSpec<T> {
    Explicit(Afr<T>),
    /// Empirical quantiles `(lo, hi)` of the dimension's data.
    Quantiles(T, T),
}

impl<T: Scalar> AfrSpec<T> {
    pub fn resolve(&self, x: &[T]) -> Result<Afr<T>> {
        match *self {
            AfrSpec::Explicit(afr) => Ok(afr),
            AfrSpec::Quantiles(lo, hi) => estimate_afr(x, lo, hi),
        }
    }
}

/// Whether fits are allowed to activate the consistency constraint.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Method {
    Constrained,
    /// Always keep the standard MLE (the `mle_score` baseline).
    Unconstrained,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CamleConfig<T> {
    /// Number of random label draws averaged per dimension.
    pub n_b: usize,
    /// Significance level of the Wilson interval.
    pub alpha: T,
    /// AFR used for dimensions without an explicit spec.
    pub afr: AfrSpec<T>,
    pub seed: u64,
    /// Bernoulli rate of the initial random labels.
    pub init_anomaly_rate: T,
    /// Give every dimension the random streams of dimension 0.
    pub shared_streams: bool,
}

impl<T: Scalar> Default for CamleConfig<T> {
    fn default() -> Self {
        Self {
            n_b: 5,
            alpha: T::lit(0.05),
            afr: AfrSpec::Quantiles(T::lit(0.24), T::lit(0.75)),
            seed: 0,
            init_anomaly_rate: T::lit(0.5),
            shared_streams: false,
        }
    }
}

impl<T: Scalar> CamleConfig<T> {
    pub fn validate(&self) -> Result<()> {
        if self.n_b == 0 {
            return Err(CamleError::InvalidInput("n_b must be at least 1".into()));
        }
        if !(self.alpha > T::zero() && self.alpha < T::one()) {
            return Err(CamleError::InvalidInput(format!("alpha {} outside (0, 1)", self.alpha)));
        }
        if !(self.init_anomaly_rate >= T::zero() && self.init_anomaly_rate <= T::one()) {
            return Err(CamleError::InvalidInput(format!(
                "init_anomaly_rate {} outside [0, 1]",
                self.init_anomaly_rate
            )));
        }
        if let AfrSpec::Quantiles(lo, hi) = self.afr {
            check_quantiles(lo, hi)?;
        }
        Ok(())
    }
}

/// Per-point anomaly scores; larger is more anomalous.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ScoreVector<T> {
    scores: Vec<T>,
}

impl<T: Scalar> ScoreVector<T> {
    pub fn new(scores: Vec<T>) -> Self {
        Self { scores }
    }

    pub fn as_slice(&self) -> &[T] {
        &self.scores
    }

    pub fn len(&self) -> usize {
        self.scores.len()
    }

    pub fn is_empty(&self) -> bool {
        self.scores.is_empty()
    }

    pub fn into_vec(self) -> Vec<T> {
        self.scores
    }

    /// Index of the highest score (first one on ties).
    pub fn argmax(&self) -> Option<usize> {
        let mut best: Option<usize> = None;
        for (i, &s) in self.scores.iter().enumerate() {
            if best.is_none_or(|b| s > self.scores[b]) {
                best = Some(i);
            }
        }
        best
    }
}

/// What happened in one dimension.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DimensionReport<T> {
    pub dimension: usize,
    pub afr: Afr<T>,
    pub interval: WilsonInterval<T>,
    /// Draws whose standard MLE violated the constraint.
    pub n_constrained_draws: usize,
    /// Constrained draws that found no feasible root.
    pub n_fallback_draws: usize,
    /// One estimate per draw, in draw order.
    pub estimates: Vec<MixtureEstimate<T>>,
}

impl<T> DimensionReport<T> {
    pub fn kkt_count(&self, case: KktCase) -> usize {
        self.estimates.iter().filter(|e| e.kkt_case == case).count()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ScoreReport<T> {
    pub scores: ScoreVector<T>,
    pub dimensions: Vec<DimensionReport<T>>,
    /// Dimensions left out because they were degenerate.
    pub skipped: Vec<usize>,
}

fn check_quantiles<T: Scalar>(lo: T, hi: T) -> Result<()> {
    if !(lo >= T::zero() && hi <= T::one() && lo < hi) {
        return Err(CamleError::InvalidInput(format!("quantile pair ({lo}, {hi}) needs 0 <= lo < hi <= 1")));
    }
    Ok(())
}

/// Linear-interpolation quantile of sorted data.
pub(crate) fn quantile_sorted<T: Scalar>(sorted: &[T], q: T) -> T {
    let h = q * T::count(sorted.len() - 1);
    let i = h.floor().to_usize().unwrap_or(0).min(sorted.len() - 1);
    if i + 1 >= sorted.len() {
        return sorted[sorted.len() - 1];
    }
    sorted[i] + (h - T::count(i)) * (sorted[i + 1] - sorted[i])
}

pub(crate) fn sorted_finite<T: Scalar>(x: &[T]) -> Result<Vec<T>> {
    if x.iter().any(|v| !v.is_finite()) {
        return Err(CamleError::InvalidInput("data contains non-finite values".into()));
    }
    let mut sorted = x.to_vec();
    sorted.sort_by(|a, b| a.partial_cmp(b).unwrap());
    Ok(sorted)
}

/// AFR from the empirical `lo_q` and `hi_q` quantiles, interpolating linearly
/// between order statistics. A zero-width result is widened slightly.
pub fn estimate_afr<T: Scalar>(x: &[T], lo_q: T, hi_q: T) -> Result<Afr<T>> {
    check_quantiles(lo_q, hi_q)?;
    if x.len() < 2 {
        return Err(CamleError::InvalidInput("AFR estimation needs at least 2 points".into()));
    }
    let sorted = sorted_finite(x)?;
    let (min, max) = (sorted[0], sorted[sorted.len() - 1]);
    if min == max {
        return Err(CamleError::Degenerate("constant data".into()));
    }
    let (mut a, mut b) = (quantile_sorted(&sorted, lo_q), quantile_sorted(&sorted, hi_q));
    if a >= b {
        let pad = (T::lit(1e-9) * (max - min + T::one())).max(T::lit(4.0) * T::epsilon() * a.abs().max(T::one()));
        a = a - pad;
        b = b + pad;
    }
    Afr::new(a, b)
}

fn draw_rng(seed: u64, dimension: usize, draw: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(((dimension as u64) << 32) | draw as u64);
    rng
}

struct Dimension<'a, T> {
    x: &'a [T],
    afr: Afr<T>,
    interval: WilsonInterval<T>,
    f_inf_density: T,
}

impl<T: Scalar> Dimension<'_, T> {
    fn draw(&self, rng: &mut ChaCha8Rng, rate: f64, method: Method) -> Result<MixtureEstimate<T>> {
        let mut labels: Vec<bool> = (0..self.x.len()).map(|_| rng.random_bool(rate)).collect();
        for (l, &v) in labels.iter_mut().zip(self.x) {
            *l &= !self.afr.contains(v);
        }
        let b_hat = LabelEstimate::new(labels);
        debug_assert!(b_hat.is_zeroed_inside(self.x, &self.afr));
        let stats = SufficientStats::from_labeled(self.x, &b_hat)?;
        ConstrainedProblem::from_stats(stats, self.afr, self.interval, self.f_inf_density)
            .fit(method == Method::Constrained)
    }
}

fn score_dimension<T: Scalar>(
    x: &[T],
    afr: Afr<T>,
    config: &CamleConfig<T>,
    method: Method,
    dimension: usize,
) -> Result<(Vec<T>, DimensionReport<T>)> {
    if x.len() < 3 {
        return Err(CamleError::InvalidInput(format!("need at least 3 points, have {}", x.len())));
    }
    if x.iter().any(|v| !v.is_finite()) {
        return Err(CamleError::InvalidInput("data contains non-finite values".into()));
    }
    let interval = wilson_interval(empirical_outside_fraction(x, &afr)?, x.len(), config.alpha)?;
    let dim = Dimension { x, afr, interval, f_inf_density: default_anomaly_density(x) };
    let stream_dim = if config.shared_streams { 0 } else { dimension };
    let rate = config.init_anomaly_rate.as_f64();
    let estimates = (0..config.n_b)
        .into_par_iter()
        .map(|draw| dim.draw(&mut draw_rng(config.seed, stream_dim, draw), rate, method))
        .collect::<Result<Vec<_>>>()?;

    let mut scores = vec![T::zero(); x.len()];
    for est in &estimates {
        for (s, &v) in scores.iter_mut().zip(x) {
            *s = *s + est.score(v);
        }
    }
    let n_b = T::count(config.n_b);
    scores.iter_mut().for_each(|s| *s = *s / n_b);

    let n_constrained_draws = estimates
        .iter()
        .filter(|e| e.kkt_case != KktCase::Unconstrained)
        .count();
    let n_fallback_draws = estimates.iter().filter(|e| e.fallback).count();
    Ok((scores, DimensionReport { dimension, afr, interval, n_constrained_draws, n_fallback_draws, estimates }))
}

/// Scores a single dimension against a given AFR.
pub fn camle_score_1d<T: Scalar>(x: &[T], afr: &Afr<T>, config: &CamleConfig<T>) -> Result<ScoreVector<T>> {
    config.validate()?;
    score_dimension(x, *afr, config, Method::Constrained, 0).map(|(s, _)| ScoreVector::new(s))
}

/// Scores every column and averages. `afrs` may be empty (use `config.afr`
/// everywhere), a single spec (applied to every column) or one per column.
/// Constant or otherwise degenerate columns are skipped with a warning.
pub fn score_report<T: Scalar, C: AsRef<[T]> + Sync>(
    columns: &[C],
    afrs: &[AfrSpec<T>],
    config: &CamleConfig<T>,
    method: Method,
) -> Result<ScoreReport<T>> {
    config.validate()?;
    if columns.is_empty() {
        return Err(CamleError::InvalidInput("dataset has no columns".into()));
    }
    let n = columns[0].as_ref().len();
    if columns.iter().any(|c| c.as_ref().len() != n) {
        return Err(CamleError::InvalidInput("columns differ in length".into()));
    }
    if !(afrs.len() <= 1 || afrs.len() == columns.len()) {
        return Err(CamleError::InvalidInput(format!(
            "{} AFR specs given for {} columns",
            afrs.len(),
            columns.len()
        )));
    }
    let spec_for = |d: usize| match afrs.len() {
        0 => config.afr,
        1 => afrs[0],
        _ => afrs[d],
    };
    if let Some(AfrSpec::Quantiles(lo, hi)) = afrs.iter().find(|s| matches!(s, AfrSpec::Quantiles(..))) {
        check_quantiles(*lo, *hi)?;
    }

    let results: Vec<Result<(Vec<T>, DimensionReport<T>)>> = columns
        .par_iter()
        .enumerate()
        .map(|(d, col)| {
            let x = col.as_ref();
            let sorted = sorted_finite(x)?;
            if sorted.first() == sorted.last() {
                return Err(CamleError::Degenerate(format!("column {d} is constant")));
            }
            let afr = spec_for(d).resolve(x)?;
            score_dimension(x, afr, config, method, d)
        })
        .collect();

    let mut total = vec![T::zero(); n];
    let mut dimensions = Vec::new();
    let mut skipped = Vec::new();
    let mut last_degenerate = None;
    for (d, r) in results.into_iter().enumerate() {
        match r {
            Ok((scores, report)) => {
                for (t, s) in total.iter_mut().zip(scores) {
                    *t = *t + s;
                }
                dimensions.push(report);
            }
            Err(CamleError::Degenerate(msg)) => {
                warn!("skipping dimension {d}: {msg}");
                skipped.push(d);
                last_degenerate = Some(msg);
            }
            Err(e) => return Err(e),
        }
    }
    if dimensions.is_empty() {
        return Err(CamleError::Degenerate(format!(
            "every dimension is degenerate ({})",
            last_degenerate.unwrap_or_default()
        )));
    }
    let d = T::count(dimensions.len());
    total.iter_mut().for_each(|t| *t = *t / d);
    Ok(ScoreReport { scores: ScoreVector::new(total), dimensions, skipped })
}

/// CAMLE scores of a column-major dataset, averaged over dimensions.
pub fn camle_score<T: Scalar, C: AsRef<[T]> + Sync>(
    columns: &[C],
    afrs: &[AfrSpec<T>],
    config: &CamleConfig<T>,
) -> Result<ScoreVector<T>> {
    score_report(columns, afrs, config, Method::Constrained).map(|r| r.scores)
}

/// Same as [`camle_score`] but every draw keeps the unconstrained fit.
pub fn mle_score<T: Scalar, C: AsRef<[T]> + Sync>(
    columns: &[C],
    afrs: &[AfrSpec<T>],
    config: &CamleConfig<T>,
) -> Result<ScoreVector<T>> {
    score_report(columns, afrs, config, Method::Unconstrained).map(|r| r.scores)
}
