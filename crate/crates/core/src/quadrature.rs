//! One-dimensional adaptive Simpson quadrature.

use crate::error::{Error, Result};

const MAX_DEPTH: u32 = 48;

/// Relative tolerance used for mode integrals that lack a closed form.
pub const DEFAULT_REL_TOL: f64 = 1e-10;

/// Integrates `f` over `[a, b]` to relative tolerance `rel_tol`.
///
/// The tolerance is taken relative to a coarse estimate of `integral |f|`, so
/// integrals that cancel to zero still terminate.
pub fn integrate<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, rel_tol: f64) -> Result<f64> {
    if !(a.is_finite() && b.is_finite()) {
        return Err(Error::NumericalFailure(format!(
            "quadrature needs finite bounds, got [{a}, {b}]"
        )));
    }
    if a == b {
        return Ok(0.0);
    }
    let (lo, hi, sign) = if a < b { (a, b, 1.0) } else { (b, a, -1.0) };

    // Scale estimate from a fixed 64-panel composite rule on |f|.
    let panels = 64;
    let h = (hi - lo) / panels as f64;
    let mut scale = 0.0;
    for k in 0..panels {
        let x0 = lo + k as f64 * h;
        scale += (f(x0).abs() + 4.0 * f(x0 + 0.5 * h).abs() + f(x0 + h).abs()) * h / 6.0;
    }
    if scale == 0.0 {
        return Ok(0.0);
    }
    let tol = rel_tol * scale;

    let mut total = 0.0;
    let mut worst = 0.0f64;
    // Seeding with the panels avoids missing narrow features at the top level.
    for k in 0..panels {
        let x0 = lo + k as f64 * h;
        let x1 = x0 + h;
        let (fa, fm, fb) = (f(x0), f(x0 + 0.5 * h), f(x1));
        let whole = simpson(fa, fm, fb, h);
        let (v, err) = recurse(&f, x0, x1, fa, fm, fb, whole, tol / panels as f64, MAX_DEPTH);
        total += v;
        worst = worst.max(err);
    }
    if !total.is_finite() {
        return Err(Error::NumericalFailure(format!(
            "quadrature over [{lo}, {hi}] produced a non-finite value"
        )));
    }
    if worst.is_nan() || worst > tol {
        return Err(Error::NumericalFailure(format!(
            "quadrature over [{lo}, {hi}] did not converge: estimate {total:e}, error {worst:e}, tolerance {tol:e}"
        )));
    }
    Ok(sign * total)
}

fn simpson(fa: f64, fm: f64, fb: f64, width: f64) -> f64 {
    width / 6.0 * (fa + 4.0 * fm + fb)
}

#[allow(clippy::too_many_arguments)]
fn recurse<F: Fn(f64) -> f64>(
    f: &F,
    a: f64,
    b: f64,
    fa: f64,
    fm: f64,
    fb: f64,
    whole: f64,
    tol: f64,
    depth: u32,
) -> (f64, f64) {
    let m = 0.5 * (a + b);
    let lm = 0.5 * (a + m);
    let rm = 0.5 * (m + b);
    let (flm, frm) = (f(lm), f(rm));
    let left = simpson(fa, flm, fm, m - a);
    let right = simpson(fm, frm, fb, b - m);
    let delta = left + right - whole;
    if delta.abs() <= 15.0 * tol {
        return (left + right + delta / 15.0, delta.abs() / 15.0);
    }
    if depth == 0 {
        return (left + right + delta / 15.0, delta.abs() / 15.0);
    }
    let (l, el) = recurse(f, a, m, fa, flm, fm, left, 0.5 * tol, depth - 1);
    let (r, er) = recurse(f, m, b, fm, frm, fb, right, 0.5 * tol, depth - 1);
    (l + r, el + er)
}
