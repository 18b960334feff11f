//! Equivariant chart maps between closed intervals.
//!
//! Every bounded interval `[a, b]` gets the chart
//! `psi(x) = 1/(b - x) - 1/(x - a)`, a diffeomorphism of `(a, b)` onto
//! the line whose two poles have unit residue. The map between two
//! intervals is `psi_J^{-1} . psi_I`. Because every map factors through
//! the same chart, `phi_{J,K} . phi_{I,J} = phi_{I,K}` and
//! `phi_{I,I} = id` hold exactly; the unit residues force `phi' = 1`
//! at both endpoints, and `phi` only depends on the length ratio up to
//! translation and scale, so it is close to a translation when the
//! lengths are close.

use crate::error::{Error, Result};
use crate::interval::IntervalQ;
use serde::{Deserialize, Serialize};

/// Chart coordinate of `x` in `(a, b)`.
fn chart(a: f64, b: f64, x: f64) -> f64 {
    1.0 / (b - x) - 1.0 / (x - a)
}

/// A point of `[c, d]` together with its distances to both ends, each
/// computed without cancellation.
#[derive(Clone, Copy, Debug)]
struct Located {
    y: f64,
    from_lo: f64,
    from_hi: f64,
}

/// Inverse chart of `[c, d]`: the unique `y` with `psi(y) = v`.
fn chart_inv(c: f64, d: f64, v: f64) -> Located {
    let len = d - c;
    let vl = v * len;
    let root = 2.0_f64.hypot(vl);
    if vl >= 0.0 {
        let s = 2.0 * len / (2.0 + vl + root);
        Located { y: (d - s).max(c), from_lo: len - s, from_hi: s }
    } else {
        let t = 2.0 * len / (2.0 - vl + root);
        Located { y: (c + t).min(d), from_lo: t, from_hi: len - t }
    }
}

/// The diffeomorphism `phi_{I,J}` of `I` onto `J`, extended to the
/// whole line by unit-slope translation outside `I`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct YoccozMap {
    pub from: IntervalQ,
    pub to: IntervalQ,
}

/// Build `phi_{I,J}`.
pub fn yoccoz_map(from: IntervalQ, to: IntervalQ) -> Result<YoccozMap> {
    YoccozMap::new(from, to)
}

impl YoccozMap {
    pub fn new(from: IntervalQ, to: IntervalQ) -> Result<Self> {
        for i in [from, to] {
            if !i.is_bounded() {
                return Err(Error::DegenerateInterval { lo: i.lo(), hi: i.hi() });
            }
        }
        Ok(YoccozMap { from, to })
    }

    pub(crate) fn between(from: (f64, f64), to: (f64, f64)) -> Self {
        YoccozMap { from: IntervalQ::closed(from.0, from.1), to: IntervalQ::closed(to.0, to.1) }
    }

    pub fn inverse(&self) -> YoccozMap {
        YoccozMap { from: self.to, to: self.from }
    }

    fn locate(&self, x: f64) -> Option<Located> {
        let (a, b) = (self.from.lo(), self.from.hi());
        let (c, d) = (self.to.lo(), self.to.hi());
        if x <= a || x >= b {
            return None;
        }
        Some(chart_inv(c, d, chart(a, b, x)))
    }

    pub fn eval(&self, x: f64) -> f64 {
        let (a, b) = (self.from.lo(), self.from.hi());
        if x <= a {
            return self.to.lo() + (x - a);
        }
        if x >= b {
            return self.to.hi() + (x - b);
        }
        self.locate(x).map(|l| l.y).unwrap_or(x)
    }

    pub fn deriv(&self, x: f64) -> f64 {
        let (a, b) = (self.from.lo(), self.from.hi());
        let Some(l) = self.locate(x) else {
            return 1.0;
        };
        let (p, q) = (b - x, x - a);
        let (s, t) = (l.from_hi, l.from_lo);
        let r = (s / p) * (t / q);
        r * r * (p * p + q * q) / (s * s + t * t)
    }
}
