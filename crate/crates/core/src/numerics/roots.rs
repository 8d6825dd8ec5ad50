//! Bracketed root finding for strictly decreasing functions.

use crate::error::{Error, Result};

/// Maximum number of bracket expansions in either direction.
pub const MAX_EXPANSIONS: usize = 200;

const MAX_ITERATIONS: usize = 1000;

/// Solves `f(x) = target` for a strictly decreasing `f` on `(0, inf)`.
///
/// The bracket `[lo, hi]` is widened (doubling `hi`, halving `lo`) until it
/// contains the root, then refined by an Illinois secant step safeguarded by
/// bisection. Bisection is geometric while the bracket spans more than a
/// factor of four.
pub fn find_root_decreasing<F>(f: F, target: f64, lo: f64, hi: f64, rel_tol: f64) -> Result<f64>
where
    F: Fn(f64) -> f64,
{
    if !(lo > 0.0 && hi > lo && hi.is_finite()) {
        return Err(Error::Domain(format!(
            "invalid initial bracket [{lo}, {hi}]"
        )));
    }
    if !(rel_tol > 0.0) {
        return Err(Error::Domain(format!(
            "rel_tol must be positive, got {rel_tol}"
        )));
    }
    if !target.is_finite() {
        return Err(Error::Domain(format!(
            "target must be finite, got {target}"
        )));
    }
    let g = |x: f64| f(x) - target;

    let (mut lo, mut hi) = (lo, hi);
    let mut g_hi = g(hi);
    let mut n = 0;
    while g_hi > 0.0 {
        if n == MAX_EXPANSIONS {
            return Err(Error::Bracket(format!(
                "f stays above target {target} up to x = {hi}"
            )));
        }
        lo = hi;
        hi *= 2.0;
        g_hi = g(hi);
        n += 1;
    }
    let mut g_lo = g(lo);
    n = 0;
    while g_lo < 0.0 {
        if n == MAX_EXPANSIONS {
            return Err(Error::Bracket(format!(
                "f stays below target {target} down to x = {lo}"
            )));
        }
        hi = lo;
        g_hi = g_lo;
        lo *= 0.5;
        g_lo = g(lo);
        n += 1;
    }
    if g_lo.is_nan() || g_hi.is_nan() {
        return Err(Error::Domain(
            "function returned NaN inside the bracket".into(),
        ));
    }
    if g_lo == 0.0 {
        return Ok(lo);
    }
    if g_hi == 0.0 {
        return Ok(hi);
    }

    // Invariant: g_lo > 0 > g_hi.
    let mut side = 0i8;
    let mut last_width = hi - lo;
    for _ in 0..MAX_ITERATIONS {
        let width = hi - lo;
        if width <= rel_tol * hi {
            return Ok(lo + 0.5 * width);
        }
        let use_bisection = width > 0.5 * last_width;
        last_width = width;
        let mut x = if use_bisection {
            if hi > 4.0 * lo {
                (lo * hi).sqrt()
            } else {
                lo + 0.5 * width
            }
        } else {
            lo + g_lo * width / (g_lo - g_hi)
        };
        if !(x > lo && x < hi) {
            x = lo + 0.5 * width;
        }
        let gx = g(x);
        if gx.is_nan() {
            return Err(Error::Domain(format!("function returned NaN at x = {x}")));
        }
        if gx == 0.0 {
            return Ok(x);
        }
        if gx > 0.0 {
            lo = x;
            g_lo = gx;
            if side == 1 {
                g_hi *= 0.5;
            }
            side = 1;
        } else {
            hi = x;
            g_hi = gx;
            if side == -1 {
                g_lo *= 0.5;
            }
            side = -1;
        }
        if use_bisection {
            // a bisection step resets the Illinois weights
            side = 0;
            last_width = f64::INFINITY;
        }
    }
    Err(Error::NonConvergence {
        subdivisions: MAX_ITERATIONS,
        value: 0.5 * (lo + hi),
        error: hi - lo,
    })
}
