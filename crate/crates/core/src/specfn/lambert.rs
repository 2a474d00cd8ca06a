//! Real branches of the Lambert W function and of the r-Lambert function,
//! the inverse of `g(x) = x e^x + r x`.

use serde::Serialize;

use crate::scalar::Scalar;
use crate::specfn::root::newton_bisect;

/// Minimum spacing between two reported r-Lambert solutions.
pub const MIN_SEPARATION: f64 = 1e-9;

/// All real solutions of `x e^x + r x = a`, strictly increasing.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RLambertSolutions<T> {
    solutions: Vec<T>,
}

impl<T: Scalar> RLambertSolutions<T> {
    pub fn as_slice(&self) -> &[T] {
        &self.solutions
    }

    pub fn len(&self) -> usize {
        self.solutions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.solutions.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = &T> {
        self.solutions.iter()
    }

    pub fn into_vec(self) -> Vec<T> {
        self.solutions
    }
}

fn x_tol<T: Scalar>(scale: T) -> T {
    T::tol(1e-12, 4.0).max(T::epsilon() * T::lit(4.0) * scale.abs())
}

/// Principal branch `W_0(s)` for `s >= -1/e`; `None` below the branch point.
pub fn lambert_w0<T: Scalar>(s: T) -> Option<T> {
    let branch = -T::E().recip();
    if !(s.is_finite()) || s < branch - T::epsilon() {
        return None;
    }
    if s <= branch {
        return Some(-T::one());
    }
    if s == T::zero() {
        return Some(T::zero());
    }
    let hi = if s <= T::E() { T::one() } else { s.ln() };
    Some(newton_bisect(
        |w| {
            let ew = w.exp();
            (w * ew - s, ew * (w + T::one()))
        },
        -T::one(),
        hi,
        x_tol(hi),
    ))
}

/// Secondary real branch `W_{-1}(s)` for `-1/e <= s < 0`.
pub fn lambert_wm1<T: Scalar>(s: T) -> Option<T> {
    let branch = -T::E().recip();
    if !(s.is_finite()) || s >= T::zero() || s < branch - T::epsilon() {
        return None;
    }
    if s <= branch {
        return Some(-T::one());
    }
    // w e^w decreases from 0- to -1/e on (-inf, -1]
    let mut lo = -T::lit(2.0);
    while lo * lo.exp() - s <= T::zero() {
        lo = lo * T::lit(2.0);
        if !lo.is_finite() {
            return None;
        }
    }
    Some(newton_bisect(
        |w| {
            let ew = w.exp();
            (w * ew - s, ew * (w + T::one()))
        },
        lo,
        -T::one(),
        x_tol(lo),
    ))
}

#[inline]
fn g<T: Scalar>(x: T, r: T) -> T {
    x * x.exp() + r * x
}

#[inline]
fn dg<T: Scalar>(x: T, r: T) -> T {
    x.exp() * (x + T::one()) + r
}

/// Stationary points of `g(x) = x e^x + r x`, ascending: solutions of
/// `e^x (x + 1) = -r`, i.e. `x = W(-r e) - 1` on each real Lambert branch.
pub fn r_lambert_critical_points<T: Scalar>(r: T) -> Vec<T> {
    let s = -r * T::E();
    let inflection = T::E().powi(-2);
    if r < T::zero() {
        lambert_w0(s).map(|w| vec![w - T::one()]).unwrap_or_default()
    } else if r == T::zero() {
        vec![-T::one()]
    } else if r < inflection {
        match (lambert_wm1(s), lambert_w0(s)) {
            (Some(lo), Some(hi)) if lo < hi => vec![lo - T::one(), hi - T::one()],
            _ => Vec::new(),
        }
    } else {
        Vec::new()
    }
}

#[derive(Clone, Copy, PartialEq, PartialOrd)]
enum Limit {
    NegInf,
    /// approached from below, never attained
    ZeroFromBelow,
    PosInf,
}

/// Solves `x e^x + r x = a` for every real `x`.
///
/// The stationary points of `g` split the line into monotone segments; each
/// segment whose range contains `a` holds exactly one root, found by
/// safeguarded Newton after bracketing (outward doubling on unbounded ends).
pub fn r_lambert<T: Scalar>(r: T, a: T) -> RLambertSolutions<T> {
    let mut solutions = Vec::with_capacity(3);
    if !(r.is_finite() && a.is_finite()) {
        return RLambertSolutions { solutions };
    }
    let crit = r_lambert_critical_points(r);

    let left_limit = if r > T::zero() {
        Limit::NegInf
    } else if r < T::zero() {
        Limit::PosInf
    } else {
        Limit::ZeroFromBelow
    };

    let mut bounds: Vec<Option<T>> = Vec::with_capacity(crit.len() + 2);
    bounds.push(None);
    bounds.extend(crit.iter().map(|&c| Some(c)));
    bounds.push(None);

    for seg in bounds.windows(2) {
        let (lo, hi) = (seg[0], seg[1]);
        if let Some(x) = segment_root(r, a, lo, hi, left_limit) {
            solutions.push(x);
        }
    }

    solutions.sort_by(|x, y| x.partial_cmp(y).unwrap());
    let sep = T::lit(MIN_SEPARATION);
    let mut out: Vec<T> = Vec::with_capacity(solutions.len());
    for x in solutions {
        match out.last() {
            Some(&last) if x - last <= sep => {
                // keep the better of two coincident roots
                if (g(x, r) - a).abs() < (g(last, r) - a).abs() {
                    *out.last_mut().unwrap() = x;
                }
            }
            _ => out.push(x),
        }
    }
    RLambertSolutions { solutions: out }
}

fn segment_root<T: Scalar>(r: T, a: T, lo: Option<T>, hi: Option<T>, left_limit: Limit) -> Option<T> {
    let f = |x: T| g(x, r) - a;

    // existence on a monotone segment: `a` must lie between the end values
    let contains = |end: Option<T>, limit: Limit| -> (bool, bool) {
        // returns (end value below-or-at a, end value above-or-at a)
        match end {
            Some(x) => {
                let d = f(x);
                (d <= T::zero(), d >= T::zero())
            }
            None => match limit {
                Limit::NegInf => (true, false),
                Limit::PosInf => (false, true),
                Limit::ZeroFromBelow => (a >= T::zero(), a < T::zero()),
            },
        }
    };
    let (lo_below, lo_above) = contains(lo, left_limit);
    let (hi_below, hi_above) = contains(hi, Limit::PosInf);
    if !((lo_below && hi_above) || (lo_above && hi_below)) {
        return None;
    }
    if let Some(x) = lo {
        if f(x) == T::zero() {
            return Some(x);
        }
    }
    if let Some(x) = hi {
        if f(x) == T::zero() {
            return Some(x);
        }
    }

    let (blo, bhi) = match (lo, hi) {
        (Some(l), Some(h)) => (l, h),
        (None, Some(h)) => (expand(&f, h, -T::one())?, h),
        (Some(l), None) => (l, expand(&f, l, T::one())?),
        (None, None) => {
            // g is increasing on the whole line
            let d0 = f(T::zero());
            if d0 == T::zero() {
                return Some(T::zero());
            }
            if d0 < T::zero() {
                (T::zero(), expand(&f, T::zero(), T::one())?)
            } else {
                (expand(&f, T::zero(), -T::one())?, T::zero())
            }
        }
    };
    let scale = blo.abs().max(bhi.abs());
    let x = newton_bisect(|x| (f(x), dg(x, r)), blo, bhi, x_tol(scale));
    x.is_finite().then_some(x)
}

/// Walks from `anchor` in direction `dir` with doubling steps until `f`
/// changes sign relative to `f(anchor)`.
fn expand<T: Scalar, F: Fn(T) -> T>(f: &F, anchor: T, dir: T) -> Option<T> {
    let d0 = f(anchor);
    let mut step = T::one();
    let cap = T::lit(1e300).min(T::max_value() / T::lit(4.0));
    loop {
        let x = anchor + dir * step;
        let d = f(x);
        if d == T::zero() || (d < T::zero()) != (d0 < T::zero()) {
            return Some(x);
        }
        step = step * T::lit(2.0);
        if step > cap {
            return None;
        }
    }
}
