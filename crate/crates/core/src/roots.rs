//! Bracketed root finding for the smooth dispersion functions.

use crate::error::{Error, Result};

const MAX_ITER: usize = 200;

/// Brent's method on a sign-changing bracket `[a, b]`.
pub(crate) fn brent<F>(mut f: F, mut a: f64, mut b: f64, mut fa: f64, mut fb: f64) -> Result<f64>
where
    F: FnMut(f64) -> f64,
{
    if fa == 0.0 {
        return Ok(a);
    }
    if fb == 0.0 {
        return Ok(b);
    }
    if fa.signum() == fb.signum() {
        return Err(Error::RootConvergence(format!(
            "no sign change on [{a}, {b}]"
        )));
    }
    let mut c = a;
    let mut fc = fa;
    let mut d = b - a;
    let mut e = d;
    for _ in 0..MAX_ITER {
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
        let tol = 2.0 * f64::EPSILON * b.abs() + 0.5 * f64::MIN_POSITIVE.sqrt();
        let m = 0.5 * (c - b);
        if m.abs() <= tol || fb == 0.0 {
            return Ok(b);
        }
        if e.abs() >= tol && fa.abs() > fb.abs() {
            let s = fb / fa;
            let (mut p, mut q);
            if a == c {
                p = 2.0 * m * s;
                q = 1.0 - s;
            } else {
                let qa = fa / fc;
                let r = fb / fc;
                p = s * (2.0 * m * qa * (qa - r) - (b - a) * (r - 1.0));
                q = (qa - 1.0) * (r - 1.0) * (s - 1.0);
            }
            if p > 0.0 {
                q = -q;
            } else {
                p = -p;
            }
            if 2.0 * p < (3.0 * m * q - (tol * q).abs()).min((e * q).abs()) {
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
        b += if d.abs() > tol { d } else { tol.copysign(m) };
        fb = f(b);
    }
    Err(Error::RootConvergence(format!(
        "Brent iteration limit reached near {b}"
    )))
}

/// All sign changes of `f` on the grid formed by `breakpoints`, each
/// interval between consecutive breakpoints subdivided into `subdivisions`
/// equal pieces, refined to machine precision. Breakpoints must be sorted.
pub(crate) fn scan_roots<F>(mut f: F, breakpoints: &[f64], subdivisions: usize) -> Result<Vec<f64>>
where
    F: FnMut(f64) -> f64,
{
    let mut grid = Vec::with_capacity(breakpoints.len() * subdivisions.max(1));
    for w in breakpoints.windows(2) {
        let (lo, hi) = (w[0], w[1]);
        if hi <= lo {
            continue;
        }
        for i in 0..subdivisions.max(1) {
            grid.push(lo + (hi - lo) * i as f64 / subdivisions.max(1) as f64);
        }
    }
    if let Some(&last) = breakpoints.last() {
        grid.push(last);
    }

    let mut roots = Vec::new();
    let mut prev: Option<(f64, f64)> = None;
    for &x in &grid {
        let fx = f(x);
        if !fx.is_finite() {
            return Err(Error::NonFinite(x));
        }
        if let Some((xp, fp)) = prev {
            if fx == 0.0 {
                roots.push(x);
            } else if fp != 0.0 && fp.signum() != fx.signum() {
                roots.push(brent(&mut f, xp, x, fp, fx)?);
            }
        } else if fx == 0.0 {
            roots.push(x);
        }
        prev = Some((x, fx));
    }
    Ok(roots)
}
