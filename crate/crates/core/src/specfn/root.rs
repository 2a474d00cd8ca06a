//! Bracketed scalar root finding shared by the special functions and the solver.

use crate::scalar::Scalar;

/// Iteration cap for every bracketed solve.
pub const MAX_ITER: usize = 200;

/// Safeguarded Newton iteration on a sign-changing bracket.
///
/// `f` returns `(value, derivative)`. A Newton step that leaves the current
/// bracket, is not finite, or fails to halve the previous step is replaced by
/// bisection. Non-finite function values are treated by their sign only.
/// Stops once the step or bracket is below `x_tol`, the value is exactly zero,
/// or after [`MAX_ITER`] iterations.
pub fn newton_bisect<T, F>(mut f: F, lo: T, hi: T, x_tol: T) -> T
where
    T: Scalar,
    F: FnMut(T) -> (T, T),
{
    let (f_lo, _) = f(lo);
    if f_lo == T::zero() {
        return lo;
    }
    let (f_hi, _) = f(hi);
    if f_hi == T::zero() {
        return hi;
    }
    // orient so that f(neg) < 0 < f(pos)
    let (mut neg, mut pos) = if f_lo < T::zero() { (lo, hi) } else { (hi, lo) };
    let two = T::lit(2.0);

    let mut x = (lo + hi) / two;
    let mut dx_old = (hi - lo).abs();
    let mut dx = dx_old;
    let (mut fx, mut dfx) = f(x);

    for _ in 0..MAX_ITER {
        if fx == T::zero() {
            return x;
        }
        if fx < T::zero() {
            neg = x;
        } else {
            pos = x;
        }
        let (a, b) = if neg < pos { (neg, pos) } else { (pos, neg) };

        let newton = x - fx / dfx;
        let newton_ok = fx.is_finite()
            && dfx.is_finite()
            && dfx != T::zero()
            && newton.is_finite()
            && newton > a
            && newton < b
            && (two * (fx / dfx)).abs() <= dx_old.abs();

        dx_old = dx;
        let next = if newton_ok {
            dx = fx / dfx;
            newton
        } else {
            let mid = a + (b - a) / two;
            dx = x - mid;
            mid
        };
        if next == x || (b - a) <= x_tol || dx.abs() <= x_tol {
            return next;
        }
        x = next;
        let (v, d) = f(x);
        fx = v;
        dfx = d;
    }
    x
}

/// Plain bisection on a sign-changing bracket. Stops when `|f| <= f_tol`,
/// the bracket is narrower than `x_tol`, or after [`MAX_ITER`] iterations.
/// Returns the midpoint-side endpoint with the smaller `|f|`.
pub fn bisect<T, F>(mut f: F, lo: T, hi: T, f_lo: T, x_tol: T, f_tol: T) -> T
where
    T: Scalar,
    F: FnMut(T) -> T,
{
    let two = T::lit(2.0);
    let (mut a, mut b) = (lo, hi);
    let lo_negative = f_lo < T::zero();
    let mut best = (lo, f_lo.abs());
    for _ in 0..MAX_ITER {
        let mid = a + (b - a) / two;
        if mid == a || mid == b {
            break;
        }
        let fm = f(mid);
        if fm.abs() < best.1 || !best.1.is_finite() {
            best = (mid, fm.abs());
        }
        if fm.abs() <= f_tol {
            return mid;
        }
        if (fm < T::zero()) == lo_negative {
            a = mid;
        } else {
            b = mid;
        }
        if (b - a).abs() <= x_tol {
            break;
        }
    }
    if best.1.is_finite() {
        best.0
    } else {
        a + (b - a) / two
    }
}
