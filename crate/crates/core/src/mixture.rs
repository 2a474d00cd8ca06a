//! Two-component mixture of a Gaussian normal-data density and an unknown
//! anomaly density, observed together with an anomaly-free region (AFR).

use serde::Serialize;

use crate::error::{CamleError, Result};
use crate::scalar::Scalar;
use crate::specfn::{std_normal_interval_mass, std_normal_quantile};

/// Closed interval `[a, b]` known to carry no anomaly mass.
/// Points exactly on either endpoint count as inside.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Afr<T> {
    a: T,
    b: T,
}

impl<T: Scalar> Afr<T> {
    pub fn new(a: T, b: T) -> Result<Self> {
        if !(a.is_finite() && b.is_finite()) {
            return Err(CamleError::InvalidInput(format!("AFR bounds must be finite, got [{a}, {b}]")));
        }
        if a >= b {
            return Err(CamleError::InvalidInput(format!("AFR needs a < b, got [{a}, {b}]")));
        }
        Ok(Self { a, b })
    }

    pub fn a(&self) -> T {
        self.a
    }

    pub fn b(&self) -> T {
        self.b
    }

    pub fn center(&self) -> T {
        (self.a + self.b) / T::lit(2.0)
    }

    pub fn width(&self) -> T {
        self.b - self.a
    }

    #[inline]
    pub fn contains(&self, x: T) -> bool {
        x >= self.a && x <= self.b
    }
}

/// Location and variance of the Gaussian normal-data component.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct GaussianParams<T> {
    pub mu: T,
    pub sigma2: T,
}

impl<T: Scalar> GaussianParams<T> {
    pub fn new(mu: T, sigma2: T) -> Result<Self> {
        if !(mu.is_finite() && sigma2.is_finite()) || sigma2 <= T::zero() {
            return Err(CamleError::InvalidInput(format!(
                "Gaussian parameters need finite mu and sigma2 > 0, got ({mu}, {sigma2})"
            )));
        }
        Ok(Self { mu, sigma2 })
    }

    pub fn sigma(&self) -> T {
        self.sigma2.sqrt()
    }

    pub fn pdf(&self, x: T) -> T {
        let d = x - self.mu;
        (-d * d / (T::lit(2.0) * self.sigma2)).exp() * self.mode_density()
    }

    pub fn ln_pdf(&self, x: T) -> T {
        let d = x - self.mu;
        -d * d / (T::lit(2.0) * self.sigma2) - T::lit(0.5) * (T::lit(2.0) * T::PI() * self.sigma2).ln()
    }

    /// Density at the mode, `1 / sqrt(2 pi sigma^2)`.
    pub fn mode_density(&self) -> T {
        (T::lit(2.0) * T::PI() * self.sigma2).sqrt().recip()
    }

    /// Probability mass of the Gaussian inside the AFR.
    pub fn mass_inside(&self, afr: &Afr<T>) -> T {
        let s = self.sigma();
        std_normal_interval_mass((afr.a - self.mu) / s, (afr.b - self.mu) / s)
    }
}

/// Guessed anomaly labels: `true` marks an estimated anomaly.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct LabelEstimate {
    labels: Vec<bool>,
}

impl LabelEstimate {
    pub fn new(labels: Vec<bool>) -> Self {
        Self { labels }
    }

    pub fn all_normal(n: usize) -> Self {
        Self { labels: vec![false; n] }
    }

    pub fn from_bits(bits: &[u8]) -> Self {
        Self { labels: bits.iter().map(|&b| b != 0).collect() }
    }

    pub fn as_slice(&self) -> &[bool] {
        &self.labels
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    /// Number of points labeled anomalous.
    pub fn anomaly_count(&self) -> usize {
        self.labels.iter().filter(|&&b| b).count()
    }

    /// Clears the label of every point inside the AFR.
    pub fn zero_inside<T: Scalar>(&mut self, x: &[T], afr: &Afr<T>) {
        for (label, &xt) in self.labels.iter_mut().zip(x) {
            if afr.contains(xt) {
                *label = false;
            }
        }
    }

    pub fn is_zeroed_inside<T: Scalar>(&self, x: &[T], afr: &Afr<T>) -> bool {
        self.labels.iter().zip(x).all(|(&l, &xt)| !(l && afr.contains(xt)))
    }
}

/// Wilson score interval `p_bar +- w` for the probability of falling outside the AFR.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct WilsonInterval<T> {
    pub p_bar: T,
    pub w: T,
}

impl<T: Scalar> WilsonInterval<T> {
    /// `residual^2 <= w^2`.
    pub fn admits(&self, residual: T) -> bool {
        residual * residual <= self.w * self.w
    }
}

/// Which complementary-slackness regime produced an estimate.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub enum KktCase {
    /// Neither constraint active: the plain MLE.
    Unconstrained,
    /// No labeled anomalies, so `p = 0`; the location and variance sit on the
    /// consistency boundary.
    BoundaryP,
    /// Consistency constraint active: `residual^2 = w^2`.
    ConsistencyActive,
    /// Joint boundary with `p` in `{0, 1}`. Not produced by the solver, which
    /// reports the `p = 0` boundary as `BoundaryP` and rejects `p = 1`.
    BothActive,
}

/// Fitted mixture together with the diagnostics of the fit.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MixtureEstimate<T> {
    pub params: GaussianParams<T>,
    /// Anomaly fraction (mixing weight of the anomaly density).
    pub p: T,
    /// Density surplus gradient; zero for unconstrained fits.
    pub omega: T,
    /// `1 - (1 - p) I - p_bar`.
    pub residual: T,
    pub kkt_case: KktCase,
    /// Set when no feasible constrained solution existed and the estimate is the
    /// location closest to feasibility instead.
    pub fallback: bool,
}

impl<T: Scalar> MixtureEstimate<T> {
    /// Returns the estimate with its residual evaluated against `interval`.
    pub fn with_residual(mut self, afr: &Afr<T>, interval: &WilsonInterval<T>) -> Self {
        self.residual = constraint_residual(&self.params, self.p, afr, interval);
        self
    }

    /// Mode value of the fitted normal density minus its value at `x`.
    pub fn score(&self, x: T) -> T {
        (self.params.mode_density() - self.params.pdf(x)).max(T::zero())
    }
}

/// Log-likelihood of `(params, p)` given guessed labels.
///
/// `f_inf_density` is the (constant) anomaly density value used at labeled
/// anomalies; it shifts the result by `s_b ln f_inf_density` and does not move
/// the maximizer. Returns `-inf` when `p` excludes a label class that is present.
pub fn log_likelihood<T: Scalar>(
    x: &[T],
    b_hat: &LabelEstimate,
    params: &GaussianParams<T>,
    p: T,
    f_inf_density: T,
) -> Result<T> {
    if x.len() != b_hat.len() {
        return Err(CamleError::InvalidInput(format!(
            "data has {} points but labels have {}",
            x.len(),
            b_hat.len()
        )));
    }
    if !(p >= T::zero() && p <= T::one()) {
        return Err(CamleError::Domain(format!("mixing weight {p} outside [0, 1]")));
    }
    if f_inf_density < T::zero() {
        return Err(CamleError::Domain("anomaly density must be nonnegative".into()));
    }
    let s_b = b_hat.anomaly_count();
    let n = x.len();
    if (p == T::zero() && s_b > 0) || (p == T::one() && s_b < n) {
        return Ok(T::neg_infinity());
    }
    let ln_normal_weight = if s_b == n { T::zero() } else { (T::one() - p).ln() };
    let ln_anomaly = if s_b == 0 { T::zero() } else { p.ln() + f_inf_density.ln() };
    let mut total = T::zero();
    for (&xt, &bt) in x.iter().zip(b_hat.as_slice()) {
        total = total + if bt { ln_anomaly } else { ln_normal_weight + params.ln_pdf(xt) };
    }
    Ok(total)
}

/// Default constant anomaly density: one tenth of a uniform density over the data range.
pub fn default_anomaly_density<T: Scalar>(x: &[T]) -> T {
    let (lo, hi) = x
        .iter()
        .fold((T::infinity(), T::neg_infinity()), |(lo, hi), &v| (lo.min(v), hi.max(v)));
    let range = hi - lo;
    if range > T::zero() && range.is_finite() {
        (range * T::lit(10.0)).recip()
    } else {
        T::lit(0.1)
    }
}

/// Model probability of observing a point outside the AFR, `1 - (1 - p) I`.
pub fn outside_mass<T: Scalar>(params: &GaussianParams<T>, p: T, afr: &Afr<T>) -> T {
    T::one() - (T::one() - p) * params.mass_inside(afr)
}

/// Fraction of points strictly outside the AFR.
pub fn empirical_outside_fraction<T: Scalar>(x: &[T], afr: &Afr<T>) -> Result<T> {
    if x.is_empty() {
        return Err(CamleError::Domain("empty dataset".into()));
    }
    let outside = x.iter().filter(|&&v| !afr.contains(v)).count();
    Ok(T::count(outside) / T::count(x.len()))
}

/// Wilson score interval for a binomial proportion `p_hat` observed over `n`
/// trials at significance level `alpha`.
pub fn wilson_interval<T: Scalar>(p_hat: T, n: usize, alpha: T) -> Result<WilsonInterval<T>> {
    if n == 0 {
        return Err(CamleError::Domain("Wilson interval needs n >= 1".into()));
    }
    if !(alpha > T::zero() && alpha < T::one()) {
        return Err(CamleError::Domain(format!("significance level {alpha} outside (0, 1)")));
    }
    if !(p_hat >= T::zero() && p_hat <= T::one()) {
        return Err(CamleError::Domain(format!("proportion {p_hat} outside [0, 1]")));
    }
    let z = std_normal_quantile(T::one() - alpha / T::lit(2.0))?;
    Ok(wilson_with_z(p_hat, n, z))
}

pub(crate) fn wilson_with_z<T: Scalar>(p_hat: T, n: usize, z: T) -> WilsonInterval<T> {
    let n = T::count(n);
    let z2 = z * z;
    let denom = T::one() + z2 / n;
    let p_bar = (p_hat + z2 / (T::lit(2.0) * n)) / denom;
    let w = z / denom * (p_hat * (T::one() - p_hat) / n + z2 / (T::lit(4.0) * n * n)).sqrt();
    WilsonInterval { p_bar, w }
}

/// `1 - (1 - p) I - p_bar`; the consistency constraint holds iff its square is at most `w^2`.
pub fn constraint_residual<T: Scalar>(
    params: &GaussianParams<T>,
    p: T,
    afr: &Afr<T>,
    interval: &WilsonInterval<T>,
) -> T {
    outside_mass(params, p, afr) - interval.p_bar
}

#[cfg(test)]
mod tests {
    use super::*;

    fn gauss(mu: f64, s2: f64) -> GaussianParams<f64> {
        GaussianParams::new(mu, s2).unwrap()
    }

    /// Simpson quadrature of the Gaussian density over [lo, hi].
    fn mass_by_quadrature(g: &GaussianParams<f64>, lo: f64, hi: f64) -> f64 {
        let n = 20_000;
        let h = (hi - lo) / n as f64;
        let mut s = g.pdf(lo) + g.pdf(hi);
        for i in 1..n {
            s += if i % 2 == 1 { 4.0 } else { 2.0 } * g.pdf(lo + i as f64 * h);
        }
        s * h / 3.0
    }

    #[test]
    fn afr_validation() {
        assert!(Afr::new(1.0, 1.0).is_err());
        assert!(Afr::new(2.0, 1.0).is_err());
        assert!(Afr::new(f64::NEG_INFINITY, 1.0).is_err());
        let afr = Afr::new(-1.0, 1.0).unwrap();
        assert!(afr.contains(-1.0) && afr.contains(1.0));
        assert!(!afr.contains(1.0 + 1e-15));
    }

    #[test]
    fn likelihood_single_point_at_mode() {
        let ll = log_likelihood(&[0.0], &LabelEstimate::from_bits(&[0]), &gauss(0.0, 1.0), 0.0, 1.0).unwrap();
        assert!((ll - (-0.918_938_533_204_672_7)).abs() < 1e-12);
    }

    #[test]
    fn likelihood_all_anomalies() {
        let ll = log_likelihood(&[0.0], &LabelEstimate::from_bits(&[1]), &gauss(0.0, 1.0), 1.0, 1.0).unwrap();
        assert_eq!(ll, 0.0);
    }

    #[test]
    fn likelihood_mixed_by_direct_summation() {
        let ll = log_likelihood(&[0.0, 2.0], &LabelEstimate::from_bits(&[0, 1]), &gauss(0.0, 1.0), 0.5, 0.05)
            .unwrap();
        let by_hand = (0.5f64).ln() - 0.5 * (2.0 * std::f64::consts::PI).ln() + (0.5f64).ln() + (0.05f64).ln();
        assert!((ll - by_hand).abs() < 1e-12);
        assert!((ll - (-5.300_965_167_878_554)).abs() < 1e-9);
    }

    #[test]
    fn likelihood_sentinel_for_excluded_class() {
        let b = LabelEstimate::from_bits(&[0, 1]);
        let g = gauss(0.0, 1.0);
        assert_eq!(log_likelihood(&[0.0, 1.0], &b, &g, 0.0, 1.0).unwrap(), f64::NEG_INFINITY);
        assert_eq!(log_likelihood(&[0.0, 1.0], &b, &g, 1.0, 1.0).unwrap(), f64::NEG_INFINITY);
        assert!(log_likelihood(&[0.0], &b, &g, 0.5, 1.0).is_err());
    }

    #[test]
    fn outside_mass_examples() {
        let afr = Afr::new(-1.0, 1.0).unwrap();
        assert_eq!(outside_mass(&gauss(3.0, 2.0), 1.0, &afr), 1.0);
        let narrow = Afr::new(0.0, 1.0).unwrap();
        assert!(outside_mass(&gauss(0.5, 1e-12), 0.0, &narrow) < 1e-12);

        let g = gauss(0.0, 1.0);
        let oracle = 1.0 - 0.8 * mass_by_quadrature(&g, -1.0, 1.0);
        let v = outside_mass(&g, 0.2, &afr);
        assert!((v - oracle).abs() < 1e-10);
        assert!((v - 0.453_848_406).abs() < 1e-8);
    }

    #[test]
    fn empirical_fraction_examples() {
        let afr = Afr::new(-1.0, 1.0).unwrap();
        assert_eq!(empirical_outside_fraction(&[0.0, 0.0, 0.0], &afr).unwrap(), 0.0);
        assert_eq!(empirical_outside_fraction(&[2.0, 3.0], &afr).unwrap(), 1.0);
        assert_eq!(empirical_outside_fraction(&[0.0, 2.0, -2.0, 0.5], &afr).unwrap(), 0.5);
        assert_eq!(empirical_outside_fraction(&[-1.0, 1.0], &afr).unwrap(), 0.0);
        assert!(empirical_outside_fraction::<f64>(&[], &afr).is_err());
    }

    #[test]
    fn wilson_without_spread() {
        let iv = wilson_with_z(0.3, 50, 0.0);
        assert_eq!(iv.p_bar, 0.3);
        assert_eq!(iv.w, 0.0);
        // alpha close to 1 pushes z to 0
        let iv = wilson_interval(0.3_f64, 50, 1.0 - 1e-12).unwrap();
        assert!((iv.p_bar - 0.3).abs() < 1e-12 && iv.w < 1e-12);
    }

    #[test]
    fn wilson_large_n() {
        // z tabulated independently
        let z: f64 = 1.959_963_984_540_054;
        let iv = wilson_interval(0.5_f64, 1_000_000, 0.05).unwrap();
        assert!((iv.p_bar - 0.5).abs() < 1e-12);
        let w = z / (1.0 + z * z / 1e6) * (0.25 / 1e6 + z * z / 4e12).sqrt();
        assert!((iv.w - w).abs() < 1e-12);
        assert!((iv.w - 0.00098).abs() < 1e-5);
    }

    #[test]
    fn wilson_office_counts() {
        let z: f64 = 1.959_963_984_540_054;
        let n = 365.0;
        let p_hat = 67.0 / 365.0;
        let denom = 1.0 + z * z / n;
        let p_bar = (p_hat + z * z / (2.0 * n)) / denom;
        let w = z / denom * (p_hat * (1.0 - p_hat) / n + z * z / (4.0 * n * n)).sqrt();
        let iv = wilson_interval(p_hat, 365, 0.05).unwrap();
        assert!((iv.p_bar - p_bar).abs() < 1e-12);
        assert!((iv.w - w).abs() < 1e-12);
        assert!((iv.p_bar - 0.186_857_328).abs() < 1e-8 && (iv.w - 0.039_644_845).abs() < 1e-8);
    }

    #[test]
    fn wilson_extremes_stay_in_unit_interval() {
        for &p in &[0.0, 1.0] {
            let iv = wilson_interval(p, 10, 0.05).unwrap();
            assert!(iv.p_bar > 0.0 && iv.p_bar < 1.0);
            assert!(iv.p_bar - iv.w <= 1.0 && iv.p_bar + iv.w >= 0.0);
        }
        assert!(wilson_interval(0.5, 0, 0.05).is_err());
        assert!(wilson_interval(0.5, 10, 0.0).is_err());
    }

    #[test]
    fn residual_examples() {
        let afr = Afr::new(-1.0, 1.0).unwrap();
        let g = gauss(0.0, 1.0);
        let iv = WilsonInterval { p_bar: outside_mass(&g, 0.3, &afr), w: 0.01 };
        assert!(constraint_residual(&g, 0.3, &afr, &iv).abs() < 1e-15);
        let iv = WilsonInterval { p_bar: 0.4, w: 0.01 };
        assert_eq!(constraint_residual(&g, 1.0, &afr, &iv), 1.0 - 0.4);
        assert!((constraint_residual(&g, 0.2, &afr, &iv) - 0.053_848_406).abs() < 1e-8);
    }

    #[test]
    fn zeroing_clears_labels_inside() {
        let afr = Afr::new(-1.0, 1.0).unwrap();
        let x = [0.0, 2.0, -1.0, 5.0];
        let mut b = LabelEstimate::from_bits(&[1, 1, 1, 0]);
        assert!(!b.is_zeroed_inside(&x, &afr));
        b.zero_inside(&x, &afr);
        assert_eq!(b.as_slice(), &[false, true, false, false]);
        assert!(b.is_zeroed_inside(&x, &afr));
    }
}
