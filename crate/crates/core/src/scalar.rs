use std::fmt::{Debug, Display};
use std::iter::Sum;

use num_traits::{Float, FloatConst, FromPrimitive, ToPrimitive};

/// Floating point scalar the estimators are written against: `f32` or `f64`.
pub trait Scalar:
    Float + FloatConst + FromPrimitive + ToPrimitive + Sum + Debug + Display + Send + Sync + 'static
{
    /// Converts an `f64` literal, saturating to infinity if it does not fit.
    #[inline]
    fn lit(v: f64) -> Self {
        Self::from_f64(v).unwrap_or_else(|| if v > 0.0 { Self::infinity() } else { Self::neg_infinity() })
    }

    /// Converts a count.
    #[inline]
    fn count(n: usize) -> Self {
        Self::from_usize(n).unwrap_or_else(Self::infinity)
    }

    /// `max(tol, k * epsilon)`, so tolerances written for `f64` stay meaningful for `f32`.
    #[inline]
    fn tol(tol: f64, ulps: f64) -> Self {
        Self::lit(tol).max(Self::epsilon() * Self::lit(ulps))
    }

    /// Smallest magnitude treated as a usable divisor.
    #[inline]
    fn tiny() -> Self {
        Self::lit(1e-300).max(Self::min_positive_value())
    }

    #[inline]
    fn as_f64(self) -> f64 {
        self.to_f64().unwrap_or(f64::NAN)
    }
}

impl Scalar for f32 {}
impl Scalar for f64 {}
