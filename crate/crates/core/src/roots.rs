//! Bracketed scalar root finding.
//!
//! Brent's method: inverse quadratic / secant steps guarded by bisection, so
//! the bracket shrinks on every iteration and convergence is guaranteed for
//! any continuous function with a sign change.

use crate::error::{Error, Result};

/// Iteration cap shared by every bracketed solve in the crate.
pub const MAX_ITERATIONS: usize = 200;

#[derive(Debug, Clone, Copy)]
pub struct Tolerance {
    pub abs: f64,
    pub rel: f64,
}

impl Tolerance {
    pub fn relative(rel: f64) -> Self {
        Self { abs: 0.0, rel }
    }

    pub fn absolute(abs: f64) -> Self {
        Self { abs, rel: 0.0 }
    }
}

/// Find `x` in `[lo, hi]` with `f(x) = 0`. `f(lo)` and `f(hi)` must differ in
/// sign (a zero at either end is returned directly).
pub fn brent<F>(f: F, lo: f64, hi: f64, tol: Tolerance) -> Result<f64>
where
    F: Fn(f64) -> f64,
{
    let fa = f(lo);
    let fb = f(hi);
    brent_with_values(f, lo, hi, fa, fb, tol)
}

pub fn brent_with_values<F>(
    f: F,
    lo: f64,
    hi: f64,
    f_lo: f64,
    f_hi: f64,
    tol: Tolerance,
) -> Result<f64>
where
    F: Fn(f64) -> f64,
{
    if f_lo == 0.0 {
        return Ok(lo);
    }
    if f_hi == 0.0 {
        return Ok(hi);
    }
    if !(f_lo.is_finite() && f_hi.is_finite()) || f_lo.signum() == f_hi.signum() {
        return Err(Error::NotBracketed { lo, hi, f_lo, f_hi });
    }

    let (mut a, mut b) = (lo, hi);
    let (mut fa, mut fb) = (f_lo, f_hi);
    let (mut c, mut fc) = (b, fb);
    let mut d = b - a;
    let mut e = d;

    for _ in 0..MAX_ITERATIONS {
        if fb.signum() == fc.signum() {
            c = a;
            fc = fa;
            d = b - a;
            e = d;
        }
        if fc.abs() < fb.abs() {
            a = b;
            b = c;
            c = a;
            fa = fb;
            fb = fc;
            fc = fa;
        }

        let tol1 = 2.0 * f64::EPSILON * b.abs() + 0.5 * (tol.abs + tol.rel * b.abs());
        let xm = 0.5 * (c - b);
        if xm.abs() <= tol1 || fb == 0.0 {
            return Ok(b);
        }

        if e.abs() >= tol1 && fa.abs() > fb.abs() {
            let s = fb / fa;
            let (mut p, mut q);
            if a == c {
                p = 2.0 * xm * s;
                q = 1.0 - s;
            } else {
                let qa = fa / fc;
                let r = fb / fc;
                p = s * (2.0 * xm * qa * (qa - r) - (b - a) * (r - 1.0));
                q = (qa - 1.0) * (r - 1.0) * (s - 1.0);
            }
            if p > 0.0 {
                q = -q;
            }
            p = p.abs();
            let min1 = 3.0 * xm * q - (tol1 * q).abs();
            let min2 = (e * q).abs();
            if 2.0 * p < min1.min(min2) {
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
        b += if d.abs() > tol1 { d } else { tol1.copysign(xm) };
        fb = f(b);
    }

    Err(Error::NoConvergence {
        iterations: MAX_ITERATIONS,
        lo: b.min(c),
        hi: b.max(c),
    })
}

/// Plain bisection on a bracket until its width is at most `abs_tol`.
///
/// Returns the bracket midpoint. The side classification is `f(x) >= 0`, so a
/// root where `f` touches zero from above is assigned to the non-negative side.
pub fn bisect<F>(f: F, mut lo: f64, mut hi: f64, lo_nonneg: bool, abs_tol: f64) -> f64
where
    F: Fn(f64) -> f64,
{
    for _ in 0..MAX_ITERATIONS {
        if hi - lo <= abs_tol {
            break;
        }
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if (f(mid) >= 0.0) == lo_nonneg {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn brent_classic_functions() {
        let tol = Tolerance::relative(1e-14);
        let r = brent(|x: f64| x.sin() - 0.5 * x, 1.0, 2.0, tol).unwrap();
        assert!((r.sin() - 0.5 * r).abs() < 1e-14);

        let r = brent(|x: f64| x * x - 2.0, 0.0, 2.0, tol).unwrap();
        assert!((r - 2f64.sqrt()).abs() < 1e-14);

        let r = brent(
            |x: f64| (x - 1.0).powi(3),
            0.0,
            3.0,
            Tolerance::absolute(1e-12),
        )
        .unwrap();
        assert!((r - 1.0).abs() < 1e-9);
    }

    #[test]
    fn brent_rejects_missing_bracket() {
        let err = brent(|x: f64| x * x + 1.0, -1.0, 1.0, Tolerance::relative(1e-12));
        assert!(matches!(err, Err(Error::NotBracketed { .. })));
    }

    #[test]
    fn brent_endpoint_root() {
        let r = brent(|x: f64| x - 3.0, 3.0, 5.0, Tolerance::relative(1e-12)).unwrap();
        assert_eq!(r, 3.0);
    }

    #[test]
    fn bisect_converges_to_width() {
        let r = bisect(|x: f64| x - 0.3, 0.0, 1.0, false, 1e-10);
        assert!((r - 0.3).abs() <= 1e-10);
        let r = bisect(|x: f64| 0.7 - x, 0.0, 1.0, true, 1e-10);
        assert!((r - 0.7).abs() <= 1e-10);
    }
}
