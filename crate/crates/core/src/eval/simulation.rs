//! Synthetic mixture data with a known ground truth, and the estimator
//! comparison run on it.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use rayon::prelude::*;
use serde::Serialize;

use crate::cmle::{constrained_mle, standard_mle};
use crate::error::{CamleError, Result};
use crate::eval::metrics::mad;
use crate::mixture::{Afr, LabelEstimate, MixtureEstimate};
use crate::scalar::Scalar;

/// AFR offsets below and above `mu`, in units of `sigma`.
const AFR_LOWER: f64 = 0.98;
const AFR_UPPER: f64 = 0.99;
/// Half-width of the anomaly support, in units of `sigma`.
const ANOMALY_REACH: f64 = 10.0;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SimulatedData<T> {
    pub x: Vec<T>,
    pub labels: Vec<bool>,
    pub afr: Afr<T>,
}

/// Draws `n` points: with probability `p` an anomaly, uniform on either
/// `[mu - 10 sigma, a]` or `[b, mu + 10 sigma]` with equal odds, otherwise
/// `N(mu, sigma^2)`. The AFR is `[mu - 0.98 sigma, mu + 0.99 sigma]`.
pub fn simulate_dataset<T: Scalar>(mu: T, sigma: T, p: T, n: usize, seed: u64) -> Result<SimulatedData<T>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    simulate_with(mu, sigma, p, n, &mut rng)
}

fn simulate_with<T: Scalar>(mu: T, sigma: T, p: T, n: usize, rng: &mut ChaCha8Rng) -> Result<SimulatedData<T>> {
    if !(mu.is_finite() && sigma > T::zero() && sigma.is_finite()) {
        return Err(CamleError::InvalidInput(format!("need finite mu and sigma > 0, got ({mu}, {sigma})")));
    }
    if !(p >= T::zero() && p <= T::one()) {
        return Err(CamleError::InvalidInput(format!("anomaly fraction {p} outside [0, 1]")));
    }
    let (m, s) = (mu.as_f64(), sigma.as_f64());
    let (a, b) = (m - AFR_LOWER * s, m + AFR_UPPER * s);
    let afr = Afr::new(T::lit(a), T::lit(b))?;
    let normal = Normal::new(m, s).map_err(|e| CamleError::InvalidInput(e.to_string()))?;
    let (lo, hi) = (m - ANOMALY_REACH * s, m + ANOMALY_REACH * s);
    let p = p.as_f64();
    let mut x = Vec::with_capacity(n);
    let mut labels = Vec::with_capacity(n);
    for _ in 0..n {
        let anomaly = rng.random_bool(p);
        let v = if !anomaly {
            normal.sample(rng)
        } else if rng.random_bool(0.5) {
            rng.random_range(lo..a)
        } else {
            rng.random_range(b..hi)
        };
        let v = T::lit(v);
        // rounding to a narrower type must not move an anomaly into the AFR
        let v = if anomaly && afr.contains(v) {
            if v < afr.center() {
                afr.a() - afr.a().abs().max(T::one()) * T::epsilon()
            } else {
                afr.b() + afr.b().abs().max(T::one()) * T::epsilon()
            }
        } else {
            v
        };
        x.push(v);
        labels.push(anomaly);
    }
    Ok(SimulatedData { x, labels, afr })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SimConfig<T> {
    pub n_param_combos: usize,
    pub datasets_per_combo: usize,
    pub samples_per_dataset: usize,
    pub guessed_labels_per_dataset: usize,
    pub mu_range: (T, T),
    pub sigma_range: (T, T),
    pub p_range: (T, T),
    pub alpha: T,
    pub seed: u64,
}

impl<T: Scalar> SimConfig<T> {
    /// 20 combos, 20 datasets each, 5 guessed label sets per dataset.
    pub fn desk(seed: u64) -> Self {
        Self {
            n_param_combos: 20,
            datasets_per_combo: 20,
            samples_per_dataset: 1000,
            guessed_labels_per_dataset: 5,
            mu_range: (T::lit(-5.0), T::lit(5.0)),
            sigma_range: (T::lit(0.1), T::lit(2.0)),
            p_range: (T::lit(0.05), T::lit(0.95)),
            alpha: T::lit(0.05),
            seed,
        }
    }

    /// 100 combos, 100 datasets each, 10 guessed label sets per dataset.
    pub fn full_scale(seed: u64) -> Self {
        Self { n_param_combos: 100, datasets_per_combo: 100, guessed_labels_per_dataset: 10, ..Self::desk(seed) }
    }

    pub fn validate(&self) -> Result<()> {
        let counts = [
            self.n_param_combos,
            self.datasets_per_combo,
            self.samples_per_dataset,
            self.guessed_labels_per_dataset,
        ];
        if counts.contains(&0) {
            return Err(CamleError::InvalidInput("simulation counts must be at least 1".into()));
        }
        for (lo, hi) in [self.mu_range, self.sigma_range, self.p_range] {
            if !(lo.is_finite() && hi.is_finite() && lo <= hi) {
                return Err(CamleError::InvalidInput(format!("invalid range ({lo}, {hi})")));
            }
        }
        if !(self.sigma_range.0 > T::zero()) || !(self.p_range.0 >= T::zero() && self.p_range.1 <= T::one()) {
            return Err(CamleError::InvalidInput("sigma must be positive and p within [0, 1]".into()));
        }
        if !(self.alpha > T::zero() && self.alpha < T::one()) {
            return Err(CamleError::InvalidInput(format!("alpha {} outside (0, 1)", self.alpha)));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ParamMads<T> {
    pub mu: T,
    pub sigma: T,
    pub p: T,
}

/// MADs of both estimators under one labeling regime.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MadTable<T> {
    pub mle: ParamMads<T>,
    pub camle: ParamMads<T>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SimulationReport<T> {
    pub guessed: MadTable<T>,
    pub true_labels: MadTable<T>,
    /// Fit cells (dataset x labeling) attempted.
    pub n_cells: usize,
    /// Cells excluded because a fit failed or fell back to an infeasible location.
    pub n_failed: usize,
    /// Combos left without a single usable cell.
    pub n_empty_combos: usize,
}

/// Estimates and truth gathered for one parameter combination.
struct Errors<T> {
    est: [[Vec<T>; 3]; 2],
    truth: [T; 3],
}

impl<T: Scalar> Errors<T> {
    fn new(truth: [T; 3]) -> Self {
        Self { est: Default::default(), truth }
    }

    fn push(&mut self, mle: &MixtureEstimate<T>, camle: &MixtureEstimate<T>) {
        for (k, e) in [mle, camle].into_iter().enumerate() {
            self.est[k][0].push(e.params.mu);
            self.est[k][1].push(e.params.sigma());
            self.est[k][2].push(e.p);
        }
    }

    fn mads(&self) -> Result<Option<[[T; 3]; 2]>> {
        if self.est[0][0].is_empty() {
            return Ok(None);
        }
        let mut out = [[T::zero(); 3]; 2];
        for (row, est) in out.iter_mut().zip(&self.est) {
            for ((cell, values), &truth) in row.iter_mut().zip(est).zip(&self.truth) {
                *cell = mad(values, &vec![truth; values.len()])?;
            }
        }
        Ok(Some(out))
    }
}

struct ComboResult<T> {
    guessed: Option<[[T; 3]; 2]>,
    true_labels: Option<[[T; 3]; 2]>,
    cells: usize,
    failed: usize,
}

fn fit_pair<T: Scalar>(x: &[T], b_hat: &LabelEstimate, afr: &Afr<T>, alpha: T) -> Option<(MixtureEstimate<T>, MixtureEstimate<T>)> {
    let mle = standard_mle(x, b_hat).ok()?;
    let camle = constrained_mle(x, b_hat, afr, alpha).ok()?;
    (!camle.fallback).then_some((mle, camle))
}

fn run_combo<T: Scalar>(config: &SimConfig<T>, combo: usize) -> Result<ComboResult<T>> {
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    rng.set_stream(combo as u64);
    let uniform = |rng: &mut ChaCha8Rng, (lo, hi): (T, T)| {
        if lo == hi {
            lo
        } else {
            T::lit(rng.random_range(lo.as_f64()..hi.as_f64()))
        }
    };
    let mu = uniform(&mut rng, config.mu_range);
    let sigma = uniform(&mut rng, config.sigma_range);
    let p = uniform(&mut rng, config.p_range);

    let mut guessed = Errors::new([mu, sigma, p]);
    let mut true_labels = Errors::new([mu, sigma, p]);
    let (mut cells, mut failed) = (0, 0);
    for _ in 0..config.datasets_per_combo {
        let data = simulate_with(mu, sigma, p, config.samples_per_dataset, &mut rng)?;
        let truth = LabelEstimate::new(data.labels.clone());
        cells += 1;
        match fit_pair(&data.x, &truth, &data.afr, config.alpha) {
            Some((m, c)) => true_labels.push(&m, &c),
            None => failed += 1,
        }
        for _ in 0..config.guessed_labels_per_dataset {
            let mut b_hat = LabelEstimate::new((0..data.x.len()).map(|_| rng.random_bool(p.as_f64())).collect());
            b_hat.zero_inside(&data.x, &data.afr);
            cells += 1;
            match fit_pair(&data.x, &b_hat, &data.afr, config.alpha) {
                Some((m, c)) => guessed.push(&m, &c),
                None => failed += 1,
            }
        }
    }
    Ok(ComboResult { guessed: guessed.mads()?, true_labels: true_labels.mads()?, cells, failed })
}

fn average<T: Scalar>(tables: &[[[T; 3]; 2]]) -> MadTable<T> {
    let mut sum = [[T::zero(); 3]; 2];
    for t in tables {
        for k in 0..2 {
            for j in 0..3 {
                sum[k][j] = sum[k][j] + t[k][j];
            }
        }
    }
    let n = if tables.is_empty() { T::nan() } else { T::count(tables.len()) };
    let row = |k: usize| ParamMads { mu: sum[k][0] / n, sigma: sum[k][1] / n, p: sum[k][2] / n };
    MadTable { mle: row(0), camle: row(1) }
}

/// Compares the standard and constrained estimators on synthetic data with
/// true labels and with guessed labels `Bernoulli(p)` (zeroed inside the AFR).
///
/// MADs are taken within each parameter combination over all its datasets
/// and label draws, then averaged across combinations. A cell where either
/// fit fails is dropped for both estimators and counted in `n_failed`.
pub fn run_simulation<T: Scalar>(config: &SimConfig<T>) -> Result<SimulationReport<T>> {
    config.validate()?;
    let combos = (0..config.n_param_combos)
        .into_par_iter()
        .map(|c| run_combo(config, c))
        .collect::<Result<Vec<_>>>()?;
    let guessed: Vec<_> = combos.iter().filter_map(|c| c.guessed).collect();
    let true_labels: Vec<_> = combos.iter().filter_map(|c| c.true_labels).collect();
    Ok(SimulationReport {
        guessed: average(&guessed),
        true_labels: average(&true_labels),
        n_cells: combos.iter().map(|c| c.cells).sum(),
        n_failed: combos.iter().map(|c| c.failed).sum(),
        n_empty_combos: combos.iter().filter(|c| c.guessed.is_none() || c.true_labels.is_none()).count(),
    })
}
