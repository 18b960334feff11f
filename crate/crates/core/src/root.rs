//! Bracketed inversion of increasing maps.

use crate::error::{Error, Result};

/// Grow a bracket `[lo, hi]` with `f(lo) <= y <= f(hi)`, doubling the
/// step outward from `x0`.
pub fn bracket_increasing<F>(f: &F, y: f64, x0: f64) -> Result<(f64, f64)>
where
    F: Fn(f64) -> Result<f64>,
{
    let mut step = 1.0_f64.max(x0.abs() * 1e-3);
    let (mut lo, mut hi) = (x0, x0);
    let f0 = f(x0)?;
    if f0 == y {
        return Ok((x0, x0));
    }
    if f0 < y {
        loop {
            hi = x0 + step;
            if !hi.is_finite() {
                return Err(Error::NoBracket { y });
            }
            if f(hi)? >= y {
                break;
            }
            lo = hi;
            step *= 2.0;
        }
    } else {
        loop {
            lo = x0 - step;
            if !lo.is_finite() {
                return Err(Error::NoBracket { y });
            }
            if f(lo)? <= y {
                break;
            }
            hi = lo;
            step *= 2.0;
        }
    }
    Ok((lo, hi))
}

/// Solve `f(x) = y` on a bracket by bisection, then polish with
/// safeguarded Newton steps when a derivative is supplied.
///
/// The returned point satisfies `|f(x) - y| <= tol` or the bracket has
/// collapsed to adjacent floats.
pub fn solve_increasing<F, D>(f: &F, df: Option<&D>, y: f64, (mut lo, mut hi): (f64, f64), tol: f64) -> Result<f64>
where
    F: Fn(f64) -> Result<f64>,
    D: Fn(f64) -> Result<f64>,
{
    if lo == hi {
        return Ok(lo);
    }
    // Coarse bisection: enough to put Newton in its basin.
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        let fm = f(mid)?;
        if fm == y {
            return Ok(mid);
        }
        if fm < y {
            lo = mid;
        } else {
            hi = mid;
        }
        if df.is_some() && hi - lo <= 1e-6 * (1.0 + lo.abs()) {
            break;
        }
    }
    let mut x = 0.5 * (lo + hi);
    if let Some(df) = df {
        for _ in 0..50 {
            let fx = f(x)? - y;
            if fx.abs() <= 0.25 * tol {
                return Ok(x);
            }
            if fx < 0.0 {
                lo = x;
            } else {
                hi = x;
            }
            let d = df(x)?;
            let mut next = x - fx / d;
            if !(next > lo && next < hi) || !next.is_finite() {
                next = 0.5 * (lo + hi);
            }
            if next == x || hi <= lo {
                break;
            }
            x = next;
        }
    } else {
        for _ in 0..1100 {
            let mid = 0.5 * (lo + hi);
            if mid <= lo || mid >= hi {
                break;
            }
            let fm = f(mid)?;
            if (fm - y).abs() <= 0.25 * tol {
                return Ok(mid);
            }
            if fm < y {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        x = 0.5 * (lo + hi);
    }
    Ok(x)
}

type NoDeriv = fn(f64) -> Result<f64>;

/// Invert an increasing map with no derivative information.
pub fn invert_increasing<F>(f: &F, y: f64, tol: f64) -> Result<f64>
where
    F: Fn(f64) -> Result<f64>,
{
    let bracket = bracket_increasing(f, y, y)?;
    solve_increasing::<F, NoDeriv>(f, None, y, bracket, tol)
}
