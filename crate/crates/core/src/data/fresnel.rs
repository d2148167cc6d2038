//! Fresnel integrals by adaptive Simpson quadrature.
//!
//! `x(t) = ∫₀ᵗ sin(s²) ds`, `y(t) = ∫₀ᵗ cos(s²) ds`. Both components are
//! integrated together so each subinterval is refined until both meet the
//! local tolerance.

use crate::error::{Error, Result};

const MAX_DEPTH: u32 = 48;

#[derive(Clone, Copy)]
struct Pair(f64, f64);

impl Pair {
    #[inline]
    fn at(s: f64) -> Self {
        let (sin, cos) = (s * s).sin_cos();
        Pair(sin, cos)
    }
}

#[inline]
fn simpson(a: f64, b: f64, fa: Pair, fm: Pair, fb: Pair) -> Pair {
    let h = (b - a) / 6.0;
    Pair(h * (fa.0 + 4.0 * fm.0 + fb.0), h * (fa.1 + 4.0 * fm.1 + fb.1))
}

#[allow(clippy::too_many_arguments)]
fn adapt(a: f64, b: f64, fa: Pair, fm: Pair, fb: Pair, whole: Pair, tol: f64, depth: u32) -> Pair {
    let m = 0.5 * (a + b);
    let lm = Pair::at(0.5 * (a + m));
    let rm = Pair::at(0.5 * (m + b));
    let left = simpson(a, m, fa, lm, fm);
    let right = simpson(m, b, fm, rm, fb);
    let refined = Pair(left.0 + right.0, left.1 + right.1);
    let dx = refined.0 - whole.0;
    let dy = refined.1 - whole.1;
    // Richardson: the error of the refined estimate is ~ (refined - whole) / 15.
    if depth >= MAX_DEPTH || (dx.abs().max(dy.abs()) <= 15.0 * tol) {
        return Pair(refined.0 + dx / 15.0, refined.1 + dy / 15.0);
    }
    let l = adapt(a, m, fa, lm, fm, left, 0.5 * tol, depth + 1);
    let r = adapt(m, b, fm, rm, fb, right, 0.5 * tol, depth + 1);
    Pair(l.0 + r.0, l.1 + r.1)
}

/// Returns `(x(t), y(t))` with absolute error at most `tol` in each component.
///
/// `tol` must lie in `(0, 1e-3]`. Negative `t` is handled through odd
/// symmetry of both integrals.
pub fn fresnel(t: f64, tol: f64) -> Result<(f64, f64)> {
    if !t.is_finite() {
        return Err(Error::invalid(format!("fresnel argument must be finite, got {t}")));
    }
    if !(tol > 0.0 && tol <= 1e-3) {
        return Err(Error::invalid(format!("fresnel tolerance must be in (0, 1e-3], got {tol}")));
    }
    if t == 0.0 {
        return Ok((0.0, 0.0));
    }
    let sign = t.signum();
    let t = t.abs();

    // The integrand oscillates with local period ~π/s, so a fixed number of
    // panels per oscillation keeps the adaptive refinement from being fooled
    // by coincidentally matching Simpson estimates.
    let panels = 1 + (2.0 * t * t).ceil() as usize;
    let width = t / panels as f64;
    // Local errors add, and the Richardson correction is conservative; halving
    // keeps the summed error safely under `tol`.
    let panel_tol = 0.5 * tol / panels as f64;

    let mut sum = Pair(0.0, 0.0);
    let mut fa = Pair::at(0.0);
    for p in 0..panels {
        let a = p as f64 * width;
        let b = if p + 1 == panels { t } else { (p + 1) as f64 * width };
        let fm = Pair::at(0.5 * (a + b));
        let fb = Pair::at(b);
        let whole = simpson(a, b, fa, fm, fb);
        let part = adapt(a, b, fa, fm, fb, whole, panel_tol, 0);
        sum.0 += part.0;
        sum.1 += part.1;
        fa = fb;
    }
    Ok((sign * sum.0, sign * sum.1))
}
