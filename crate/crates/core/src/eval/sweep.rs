//! AFR sensitivity sweep: score a labeled dataset under many quantile AFRs of
//! fixed quantile width and report the AUC of the averaged scores.

use log::warn;
use rayon::prelude::*;
use serde::Serialize;

use crate::camle::{camle_score, quantile_sorted, sorted_finite, AfrSpec, CamleConfig};
use crate::error::{CamleError, Result};
use crate::eval::metrics::auc_roc;
use crate::mixture::Afr;
use crate::scalar::Scalar;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SweepConfig<T> {
    pub n_offsets: usize,
    /// Smallest and largest quantile width `delta`.
    pub offset_range: (T, T),
    pub pairs_per_offset: usize,
    /// Quantile levels the AFR endpoints are confined to.
    pub quantile_range: (T, T),
}

impl<T: Scalar> Default for SweepConfig<T> {
    fn default() -> Self {
        Self {
            n_offsets: 11,
            offset_range: (T::lit(0.01), T::lit(0.99)),
            pairs_per_offset: 100,
            quantile_range: (T::lit(0.0001), T::lit(0.999)),
        }
    }
}

impl<T: Scalar> SweepConfig<T> {
    pub fn validate(&self) -> Result<()> {
        if self.n_offsets == 0 || self.pairs_per_offset == 0 {
            return Err(CamleError::InvalidInput("sweep counts must be at least 1".into()));
        }
        let (q_lo, q_hi) = self.quantile_range;
        let (d_lo, d_hi) = self.offset_range;
        if !(T::zero() <= q_lo && q_lo < q_hi && q_hi <= T::one()) {
            return Err(CamleError::InvalidInput(format!("invalid quantile range ({q_lo}, {q_hi})")));
        }
        if !(T::zero() < d_lo && d_lo <= d_hi && d_hi <= q_hi - q_lo) {
            return Err(CamleError::InvalidInput(format!("invalid offset range ({d_lo}, {d_hi})")));
        }
        Ok(())
    }

    /// The quantile widths, evenly spaced.
    pub fn offsets(&self) -> Vec<T> {
        linspace(self.offset_range.0, self.offset_range.1, self.n_offsets)
    }

    /// Quantile pairs `(q, q + delta)` with `q` evenly spaced so both ends stay
    /// inside `quantile_range`.
    pub fn pairs(&self, delta: T) -> Vec<(T, T)> {
        linspace(self.quantile_range.0, self.quantile_range.1 - delta, self.pairs_per_offset)
            .into_iter()
            .map(|q| (q, q + delta))
            .collect()
    }
}

fn linspace<T: Scalar>(lo: T, hi: T, n: usize) -> Vec<T> {
    if n == 1 {
        return vec![lo];
    }
    let step = (hi - lo) / T::count(n - 1);
    (0..n).map(|i| if i == n - 1 { hi } else { lo + step * T::count(i) }).collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SweepPoint<T> {
    pub delta: T,
    pub auc: f64,
    /// Quantile pairs that produced scores.
    pub n_pairs: usize,
    /// Pairs dropped because some column gave `a >= b`.
    pub n_skipped: usize,
}

/// Runs CAMLE under every AFR of the sweep and reports, per quantile width,
/// the AUC of the scores averaged over that width's quantile pairs.
pub fn run_sensitivity_sweep<T: Scalar, C: AsRef<[T]> + Sync>(
    columns: &[C],
    labels: &[bool],
    config: &SweepConfig<T>,
    camle_config: &CamleConfig<T>,
) -> Result<Vec<SweepPoint<T>>> {
    config.validate()?;
    camle_config.validate()?;
    if columns.is_empty() {
        return Err(CamleError::InvalidInput("dataset has no columns".into()));
    }
    let n = labels.len();
    if columns.iter().any(|c| c.as_ref().len() != n) {
        return Err(CamleError::InvalidInput("columns and labels differ in length".into()));
    }
    let sorted = columns.iter().map(|c| sorted_finite(c.as_ref())).collect::<Result<Vec<_>>>()?;

    let mut out = Vec::with_capacity(config.n_offsets);
    for delta in config.offsets() {
        let runs: Vec<Option<Result<Vec<T>>>> = config
            .pairs(delta)
            .into_par_iter()
            .map(|(q_lo, q_hi)| {
                let mut afrs = Vec::with_capacity(sorted.len());
                for s in &sorted {
                    let (a, b) = (quantile_sorted(s, q_lo), quantile_sorted(s, q_hi));
                    if a >= b {
                        return None;
                    }
                    afrs.push(AfrSpec::Explicit(Afr::new(a, b).ok()?));
                }
                Some(camle_score(columns, &afrs, camle_config).map(|s| s.into_vec()))
            })
            .collect();

        let mut total = vec![T::zero(); n];
        let (mut n_pairs, mut n_skipped) = (0, 0);
        for run in runs {
            match run {
                Some(scores) => {
                    for (t, s) in total.iter_mut().zip(scores?) {
                        *t = *t + s;
                    }
                    n_pairs += 1;
                }
                None => n_skipped += 1,
            }
        }
        if n_skipped > 0 {
            warn!("delta {delta}: skipped {n_skipped} quantile pairs with an empty AFR");
        }
        if n_pairs == 0 {
            return Err(CamleError::Degenerate(format!("every AFR at delta {delta} is empty")));
        }
        let k = T::count(n_pairs);
        total.iter_mut().for_each(|t| *t = *t / k);
        out.push(SweepPoint { delta, auc: auc_roc(&total, labels)?, n_pairs, n_skipped });
    }
    Ok(out)
}
