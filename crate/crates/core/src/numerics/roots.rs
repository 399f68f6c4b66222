//! Bracketing root finder: Brent's method, i.e. inverse quadratic and secant
//! steps guarded by bisection so the bracket never widens.

use crate::error::{Error, Result};
use crate::Real;

/// Root location together with the final bracket and residual.
#[derive(Debug, Clone, Copy)]
pub struct RootResult<T> {
    pub root: T,
    pub bracket: (T, T),
    pub residual: T,
    pub iterations: usize,
}

const MAX_ITERATIONS: usize = 200;

/// Find a zero of `f` inside `[lo, hi]`.
///
/// Requires a sign change over the bracket (an exact zero at an endpoint is
/// accepted). Converges when the bracket width falls below
/// `tol + 4 eps |root|`; the residual at the returned point never exceeds
/// the smaller endpoint residual of the initial bracket.
pub fn find_root<T, F>(f: F, lo: T, hi: T, tol: T) -> Result<RootResult<T>>
where
    T: Real,
    F: Fn(T) -> T,
{
    if !(tol > T::zero()) {
        return Err(Error::InvalidConfig(format!(
            "root tolerance must be positive, got {tol}"
        )));
    }
    let mut a = lo;
    let mut b = hi;
    let mut fa = f(a);
    let mut fb = f(b);
    if fa == T::zero() {
        return Ok(RootResult { root: a, bracket: (a, a), residual: fa, iterations: 0 });
    }
    if fb == T::zero() {
        return Ok(RootResult { root: b, bracket: (b, b), residual: fb, iterations: 0 });
    }
    if fa.signum() == fb.signum() {
        return Err(Error::NoSignChange {
            lo: lo.to_f64().unwrap_or(f64::NAN),
            hi: hi.to_f64().unwrap_or(f64::NAN),
            f_lo: fa.to_f64().unwrap_or(f64::NAN),
            f_hi: fb.to_f64().unwrap_or(f64::NAN),
        });
    }

    let two = T::cast(2.0);
    let half = T::cast(0.5);
    let eps = T::epsilon();

    // Classic Brent state: b is the best iterate, a the previous one, c the
    // counterpoint keeping the sign change.
    let mut c = a;
    let mut fc = fa;
    let mut d = b - a;
    let mut e = d;

    for iter in 1..=MAX_ITERATIONS {
        if fb.abs() > fc.abs() {
            a = b;
            b = c;
            c = a;
            fa = fb;
            fb = fc;
            fc = fa;
        }
        let tol1 = two * eps * b.abs() + half * tol;
        let xm = half * (c - b);
        if xm.abs() <= tol1 || fb == T::zero() {
            let (blo, bhi) = if b < c { (b, c) } else { (c, b) };
            return Ok(RootResult { root: b, bracket: (blo, bhi), residual: fb, iterations: iter });
        }
        if e.abs() >= tol1 && fa.abs() > fb.abs() {
            // Attempt interpolation: secant if only two points are
            // distinct, inverse quadratic otherwise.
            let s = fb / fa;
            let (mut p, mut q);
            if a == c {
                p = two * xm * s;
                q = T::one() - s;
            } else {
                let q0 = fa / fc;
                let r = fb / fc;
                p = s * (two * xm * q0 * (q0 - r) - (b - a) * (r - T::one()));
                q = (q0 - T::one()) * (r - T::one()) * (s - T::one());
            }
            if p > T::zero() {
                q = -q;
            }
            p = p.abs();
            let min1 = T::cast(3.0) * xm * q - (tol1 * q).abs();
            let min2 = (e * q).abs();
            if two * p < min1.min(min2) {
                e = d;
                d = p / q;
            } else {
                d = xm;
                e = d;
            }
        } else {
            d = xm;
            e = d;
        }
        a = b;
        fa = fb;
        if d.abs() > tol1 {
            b += d;
        } else {
            b += tol1 * xm.signum();
        }
        fb = f(b);
        if (fb > T::zero()) == (fc > T::zero()) {
            c = a;
            fc = fa;
            d = b - a;
            e = d;
        }
    }

    Err(Error::QuadratureNoConvergence {
        value: b.to_f64().unwrap_or(f64::NAN),
        error_estimate: (c - b).abs().to_f64().unwrap_or(f64::NAN),
        evaluations: MAX_ITERATIONS,
    })
}

/// Walk `[lo, hi]` in `step` increments and return the first subinterval on
/// which `f` changes sign. The whole scan table rides along on failure so
/// the caller can see what the function looked like.
pub fn bracket_scan<T, F>(f: F, lo: T, hi: T, step: T) -> Result<(T, T)>
where
    T: Real,
    F: Fn(T) -> T,
{
    if !(step > T::zero()) || !(hi > lo) {
        return Err(Error::InvalidConfig(format!(
            "scan needs lo < hi and step > 0, got [{lo}, {hi}] step {step}"
        )));
    }
    let mut table = Vec::new();
    let mut x = lo;
    let mut fx = f(x);
    table.push((x.to_f64().unwrap_or(f64::NAN), fx.to_f64().unwrap_or(f64::NAN)));
    while x < hi {
        let next = (x + step).min(hi);
        let fnext = f(next);
        table.push((next.to_f64().unwrap_or(f64::NAN), fnext.to_f64().unwrap_or(f64::NAN)));
        if fx == T::zero() || fx.signum() != fnext.signum() {
            return Ok((x, next));
        }
        x = next;
        fx = fnext;
    }
    Err(Error::ScanFailed {
        lo: lo.to_f64().unwrap_or(f64::NAN),
        hi: hi.to_f64().unwrap_or(f64::NAN),
        step: step.to_f64().unwrap_or(f64::NAN),
        table,
    })
}
