use crate::error::{CamleError, Result};
use crate::scalar::Scalar;

/// Area under the ROC curve: the probability that a random anomaly outscores a
/// random normal point, ties counting one half.
///
/// Mid-ranks are accumulated in integer half-units, so the result equals the
/// pairwise count divided by `n_1 n_0` up to the final division.
pub fn auc_roc<T: Scalar>(scores: &[T], labels: &[bool]) -> Result<f64> {
    if scores.len() != labels.len() {
        return Err(CamleError::InvalidInput(format!(
            "{} scores but {} labels",
            scores.len(),
            labels.len()
        )));
    }
    if scores.iter().any(|s| s.is_nan()) {
        return Err(CamleError::InvalidInput("scores contain NaN".into()));
    }
    let n1 = labels.iter().filter(|&&l| l).count() as u64;
    let n0 = labels.len() as u64 - n1;
    if n1 == 0 || n0 == 0 {
        return Err(CamleError::Domain("AUC needs both anomalies and normal points".into()));
    }
    let mut order: Vec<usize> = (0..scores.len()).collect();
    order.sort_by(|&i, &j| scores[i].partial_cmp(&scores[j]).unwrap());

    // twice the rank sum of the anomalies
    let mut rank_sum2: u64 = 0;
    let mut i = 0;
    while i < order.len() {
        let mut j = i + 1;
        while j < order.len() && scores[order[j]] == scores[order[i]] {
            j += 1;
        }
        // 1-based ranks i+1..=j share the mid-rank (i + 1 + j) / 2
        let mid2 = (i + 1 + j) as u64;
        let anomalies = order[i..j].iter().filter(|&&k| labels[k]).count() as u64;
        rank_sum2 += mid2 * anomalies;
        i = j;
    }
    let u2 = rank_sum2 - n1 * (n1 + 1);
    Ok(u2 as f64 / (2 * n1 * n0) as f64)
}

/// Median; even lengths average the two central order statistics.
pub fn median<T: Scalar>(values: &[T]) -> Result<T> {
    if values.is_empty() {
        return Err(CamleError::Domain("median of an empty sequence".into()));
    }
    if values.iter().any(|v| v.is_nan()) {
        return Err(CamleError::InvalidInput("median of NaN".into()));
    }
    let mut v = values.to_vec();
    v.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let m = v.len() / 2;
    Ok(if v.len() % 2 == 1 { v[m] } else { (v[m - 1] + v[m]) / T::lit(2.0) })
}

/// Median absolute deviation between estimates and ground truth.
pub fn mad<T: Scalar>(estimates: &[T], truth: &[T]) -> Result<T> {
    if estimates.len() != truth.len() {
        return Err(CamleError::InvalidInput(format!(
            "{} estimates but {} truth values",
            estimates.len(),
            truth.len()
        )));
    }
    let dev: Vec<T> = estimates.iter().zip(truth).map(|(&e, &t)| (e - t).abs()).collect();
    median(&dev)
}
