//! Bracketing root finders.

use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::math::fabs;

/// Brent's method on a bracket with `f(a)` and `f(b)` of opposite sign.
/// Converges when the bracket width is below `xtol_rel * |x| + 4ε|x|`.
pub fn brent<F: FnMut(f64) -> f64>(mut f: F, mut a: f64, mut b: f64, xtol_rel: f64, op: &'static str) -> Result<f64> {
    let mut fa = f(a);
    let mut fb = f(b);
    if fa == 0.0 {
        return Ok(a);
    }
    if fb == 0.0 {
        return Ok(b);
    }
    if fa.signum() == fb.signum() {
        return Err(Error::NoRoot { op, lo: a, hi: b });
    }
    let mut c = a;
    let mut fc = fa;
    let mut d = b - a;
    let mut e = d;
    for _ in 0..500 {
        if fb.signum() == fc.signum() {
            c = a;
            fc = fa;
            d = b - a;
            e = d;
        }
        if fabs(fc) < fabs(fb) {
            a = b;
            b = c;
            c = a;
            fa = fb;
            fb = fc;
            fc = fa;
        }
        let tol = 2.0 * f64::EPSILON * fabs(b) + 0.5 * xtol_rel * fabs(b);
        let m = 0.5 * (c - b);
        if fabs(m) <= tol || fb == 0.0 {
            return Ok(b);
        }
        if fabs(e) >= tol && fabs(fa) > fabs(fb) {
            let s = fb / fa;
            let (mut p, mut q);
            if a == c {
                p = 2.0 * m * s;
                q = 1.0 - s;
            } else {
                let qq = fa / fc;
                let r = fb / fc;
                p = s * (2.0 * m * qq * (qq - r) - (b - a) * (r - 1.0));
                q = (qq - 1.0) * (r - 1.0) * (s - 1.0);
            }
            if p > 0.0 {
                q = -q;
            } else {
                p = -p;
            }
            if 2.0 * p < (3.0 * m * q - fabs(tol * q)).min(fabs(e * q)) {
                e = d;
                d = p / q;
            } else {
                d = m;
                e = m;
            }
        } else {
            d = m;
            e = m;
        }
        a = b;
        fa = fb;
        b += if fabs(d) > tol { d } else { tol.copysign(m) };
        fb = f(b);
    }
    Ok(b)
}

/// Plain bisection to `xtol_rel` relative width.
pub fn bisect<F: FnMut(f64) -> f64>(
    mut f: F,
    mut lo: f64,
    mut hi: f64,
    xtol_rel: f64,
    op: &'static str,
) -> Result<f64> {
    let flo = f(lo);
    let fhi = f(hi);
    if flo == 0.0 {
        return Ok(lo);
    }
    if fhi == 0.0 {
        return Ok(hi);
    }
    if flo.signum() == fhi.signum() {
        return Err(Error::NoRoot { op, lo, hi });
    }
    let lo_sign = flo.signum();
    while hi - lo > xtol_rel * fabs(0.5 * (lo + hi)) {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        let fm = f(mid);
        if fm == 0.0 {
            return Ok(mid);
        }
        if fm.signum() == lo_sign {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

/// Adjacent grid pairs across which `f` changes sign (or hits zero exactly).
pub fn sign_change_brackets<F: FnMut(f64) -> f64>(mut f: F, grid: &[f64]) -> Vec<(f64, f64)> {
    let mut out = Vec::new();
    let mut prev: Option<(f64, f64)> = None;
    for &x in grid {
        let fx = f(x);
        if let Some((px, pf)) = prev {
            if (pf < 0.0 && fx >= 0.0) || (pf > 0.0 && fx <= 0.0) {
                out.push((px, x));
            }
        }
        prev = Some((x, fx));
    }
    out
}
