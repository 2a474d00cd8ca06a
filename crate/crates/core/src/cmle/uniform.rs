//! Diagnostic for a uniform normal component `U(k, l)`.
//!
//! With a uniform `f_N` the density surplus gradient through the upper
//! support endpoint is `n - s_b`, which forces the constrained weight to
//! `s_b / (n - omega) = 1`. No interior constrained solution exists, so the
//! consistency constraint never binds.

use serde::Serialize;

use crate::error::{CamleError, Result};
use crate::mixture::{Afr, LabelEstimate};
use crate::scalar::Scalar;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct UniformDiagnostic<T> {
    /// Uniform MLE support `[k, l]`: range of the normal-labeled points.
    pub k: T,
    pub l: T,
    /// Unconstrained weight `s_b / n`.
    pub p: T,
    /// Density surplus gradient through `l`.
    pub omega_l: T,
    /// Weight the constrained solution would need; `None` when `s_b = 0`.
    pub p_implied: Option<T>,
    pub constraint_inactive: bool,
}

pub fn uniform_constraint_check<T: Scalar>(x: &[T], b_hat: &LabelEstimate, afr: &Afr<T>) -> Result<UniformDiagnostic<T>> {
    if x.len() != b_hat.len() {
        return Err(CamleError::InvalidInput(format!(
            "data has {} points but labels have {}",
            x.len(),
            b_hat.len()
        )));
    }
    let (k, l) = x
        .iter()
        .zip(b_hat.as_slice())
        .filter(|(_, &b)| !b)
        .fold((T::infinity(), T::neg_infinity()), |(lo, hi), (&v, _)| (lo.min(v), hi.max(v)));
    if !(k < l) {
        return Err(CamleError::Degenerate("uniform fit needs two distinct normal-labeled points".into()));
    }
    if afr.a() < k || afr.b() > l {
        return Err(CamleError::InvalidInput(format!(
            "AFR [{}, {}] is not inside the uniform support [{k}, {l}]",
            afr.a(),
            afr.b()
        )));
    }
    let n = x.len();
    let s_b = b_hat.anomaly_count();
    let omega_l = T::count(n - s_b);
    let p_implied = (s_b > 0).then(|| T::count(s_b) / (T::count(n) - omega_l));
    Ok(UniformDiagnostic {
        k,
        l,
        p: T::count(s_b) / T::count(n),
        omega_l,
        p_implied,
        constraint_inactive: true,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn uniform_ll(k: f64, l: f64, m: usize) -> f64 {
        -(m as f64) * (l - k).ln()
    }

    fn uniform_ln_mass(k: f64, l: f64, afr: &Afr<f64>) -> f64 {
        (afr.width() / (l - k)).ln()
    }

    #[test]
    fn omega_matches_finite_difference() {
        let x = [0.0, 0.3, 1.7, 2.0, 5.0, -4.0];
        let b = LabelEstimate::new(vec![false, false, false, false, true, true]);
        let afr = Afr::new(0.5, 1.5).unwrap();
        let d = uniform_constraint_check(&x, &b, &afr).unwrap();
        assert_eq!((d.k, d.l), (0.0, 2.0));
        let h = 1e-6;
        let dl = (uniform_ll(d.k, d.l + h, 4) - uniform_ll(d.k, d.l - h, 4)) / (2.0 * h);
        let di = (uniform_ln_mass(d.k, d.l + h, &afr) - uniform_ln_mass(d.k, d.l - h, &afr)) / (2.0 * h);
        assert!((dl / di - d.omega_l).abs() < 1e-6, "{} vs {}", dl / di, d.omega_l);
        assert_eq!(d.omega_l, 4.0);
        assert_eq!(d.p_implied, Some(1.0));
        assert!(d.constraint_inactive);
    }

    #[test]
    fn no_anomalies_has_no_implied_weight() {
        let x = [0.0, 1.0, 2.0];
        let d = uniform_constraint_check(&x, &LabelEstimate::all_normal(3), &Afr::new(0.5, 1.5).unwrap()).unwrap();
        assert_eq!(d.p_implied, None);
        assert_eq!(d.p, 0.0);
    }

    #[test]
    fn afr_outside_support_is_rejected() {
        let x = [0.0, 1.0, 2.0];
        let r = uniform_constraint_check(&x, &LabelEstimate::all_normal(3), &Afr::new(-1.0, 1.0).unwrap());
        assert!(matches!(r, Err(CamleError::InvalidInput(_))));
    }
}
