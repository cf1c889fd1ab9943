//! Bisection on monotone scalar curves.

use crate::error::{Error, Result};

/// Relative width of the multiplier interval at which bisection stops.
pub const LAMBDA_REL_WIDTH: f64 = 1e-12;
const MAX_DOUBLINGS: usize = 4096;
const MAX_ITERS: usize = 4096;

/// Find `λ > lower` with `curve(λ) == c` for a curve that decreases strictly
/// from `+∞` at `lower⁺` to `0` at `+∞`.
///
/// Bracket: `lo = lower·(1 + 1e-12) + 1e-300`, `hi` doubled from `2·lo` until
/// `curve(hi) < c`. Stops when `|curve - c| < rel_tol·max(1, c)` or when the
/// interval is narrower than [`LAMBDA_REL_WIDTH`] relative to `hi`.
pub fn solve_decreasing(curve: impl Fn(f64) -> f64, lower: f64, c: f64, rel_tol: f64) -> Result<f64> {
    if !(c > 0.0) || !c.is_finite() {
        return Err(Error::InvalidParameter(format!(
            "tolerance c must be positive and finite, got {c}"
        )));
    }
    let target_tol = rel_tol * c.max(1.0);
    let mut lo = lower * (1.0 + 1e-12) + 1e-300;
    let at_lo = curve(lo);
    if !(at_lo >= c) {
        return Err(Error::UnsatisfiableTolerance {
            c,
            low: 0.0,
            high: at_lo,
        });
    }
    let mut hi = 2.0 * lo;
    let mut at_hi = curve(hi);
    let mut doublings = 0;
    while !(at_hi < c) {
        lo = hi;
        hi *= 2.0;
        doublings += 1;
        if doublings > MAX_DOUBLINGS || !hi.is_finite() {
            return Err(Error::UnsatisfiableTolerance {
                c,
                low: at_hi,
                high: at_lo,
            });
        }
        at_hi = curve(hi);
    }
    if (at_hi - c).abs() < target_tol {
        return Ok(hi);
    }
    for _ in 0..MAX_ITERS {
        let mid = 0.5 * (lo + hi);
        if hi - lo <= LAMBDA_REL_WIDTH * hi {
            return Ok(mid);
        }
        let v = curve(mid);
        if (v - c).abs() < target_tol {
            return Ok(mid);
        }
        if v > c {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

/// Root of an increasing function on `[lo, hi]` with `f(lo) ≤ 0 ≤ f(hi)`,
/// bisected until the interval stops shrinking in floating point.
pub fn bisect_increasing(f: impl Fn(f64) -> f64, mut lo: f64, mut hi: f64) -> f64 {
    for _ in 0..MAX_ITERS {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if f(mid) > 0.0 {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    0.5 * (lo + hi)
}
