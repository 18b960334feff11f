//! Closed intervals of the extended line.

use crate::decimal;
use crate::error::{Error, Result};
use serde::{Deserialize, Serialize};
use std::fmt;

/// A closed interval `[lo, hi]` with `lo < hi`.
///
/// `lo` may be `-inf` and `hi` may be `+inf`; the reversed infinities
/// and NaN are rejected at construction, so `is_bounded` is the only
/// place that needs to look at finiteness.
#[derive(Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawInterval", into = "RawInterval")]
pub struct IntervalQ {
    lo: f64,
    hi: f64,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawInterval {
    #[serde(with = "decimal")]
    lo: f64,
    #[serde(with = "decimal")]
    hi: f64,
}

impl TryFrom<RawInterval> for IntervalQ {
    type Error = Error;
    fn try_from(r: RawInterval) -> Result<Self> {
        IntervalQ::new(r.lo, r.hi)
    }
}

impl From<IntervalQ> for RawInterval {
    fn from(i: IntervalQ) -> Self {
        RawInterval { lo: i.lo, hi: i.hi }
    }
}

impl IntervalQ {
    pub fn new(lo: f64, hi: f64) -> Result<Self> {
        if lo.is_nan() || hi.is_nan() || lo == f64::INFINITY || hi == f64::NEG_INFINITY {
            return Err(Error::InvalidInterval { lo, hi });
        }
        if lo >= hi {
            return Err(Error::DegenerateInterval { lo, hi });
        }
        Ok(IntervalQ { lo, hi })
    }

    /// Like [`IntervalQ::new`] for literals known to be valid.
    ///
    /// Panics on an invalid pair.
    pub fn closed(lo: f64, hi: f64) -> Self {
        IntervalQ::new(lo, hi).expect("valid interval literal")
    }

    pub fn whole_line() -> Self {
        IntervalQ { lo: f64::NEG_INFINITY, hi: f64::INFINITY }
    }

    pub fn lo(&self) -> f64 {
        self.lo
    }

    pub fn hi(&self) -> f64 {
        self.hi
    }

    pub fn is_bounded(&self) -> bool {
        self.lo.is_finite() && self.hi.is_finite()
    }

    pub fn length(&self) -> f64 {
        self.hi - self.lo
    }

    pub fn midpoint(&self) -> f64 {
        0.5 * (self.lo + self.hi)
    }

    pub fn contains(&self, x: f64) -> bool {
        self.lo <= x && x <= self.hi
    }

    pub fn contains_open(&self, x: f64) -> bool {
        self.lo < x && x < self.hi
    }

    pub fn is_subset_of(&self, other: &IntervalQ) -> bool {
        other.lo <= self.lo && self.hi <= other.hi
    }

    /// `self` lies in the interior of `other`.
    pub fn is_interior_subset_of(&self, other: &IntervalQ) -> bool {
        other.lo < self.lo && self.hi < other.hi
    }

    pub fn intersect(&self, other: &IntervalQ) -> Option<IntervalQ> {
        IntervalQ::new(self.lo.max(other.lo), self.hi.min(other.hi)).ok()
    }

    /// Interiors overlap by more than `tol`.
    pub fn interiors_overlap(&self, other: &IntervalQ, tol: f64) -> bool {
        self.lo.max(other.lo) < self.hi.min(other.hi) - tol
    }

    /// Evenly spaced points `lo..=hi` (bounded intervals only).
    pub fn grid(&self, n: usize) -> Vec<f64> {
        debug_assert!(self.is_bounded());
        let n = n.max(2);
        let h = self.length() / (n - 1) as f64;
        (0..n).map(|i| if i + 1 == n { self.hi } else { self.lo + h * i as f64 }).collect()
    }

    /// Midpoints of `n` equal cells, which never hit the endpoints.
    pub fn cell_midpoints(&self, n: usize) -> Vec<f64> {
        debug_assert!(self.is_bounded());
        let h = self.length() / n as f64;
        (0..n).map(|i| self.lo + h * (i as f64 + 0.5)).collect()
    }
}

impl fmt::Debug for IntervalQ {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[{}, {}]", decimal::format(self.lo), decimal::format(self.hi))
    }
}

impl fmt::Display for IntervalQ {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Debug::fmt(self, f)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_bad_endpoints() {
        assert!(IntervalQ::new(1.0, 1.0).is_err());
        assert!(IntervalQ::new(2.0, 1.0).is_err());
        assert!(IntervalQ::new(f64::INFINITY, 1.0).is_err());
        assert!(IntervalQ::new(0.0, f64::NEG_INFINITY).is_err());
        assert!(IntervalQ::new(f64::NAN, 1.0).is_err());
        let ray = IntervalQ::new(f64::NEG_INFINITY, 0.0).unwrap();
        assert!(!ray.is_bounded());
    }

    #[test]
    fn json_uses_decimal_strings() {
        let i = IntervalQ::new(f64::NEG_INFINITY, 0.5).unwrap();
        let s = serde_json::to_string(&i).unwrap();
        assert_eq!(s, r#"{"lo":"-inf","hi":"0.5"}"#);
        let back: IntervalQ = serde_json::from_str(&s).unwrap();
        assert_eq!(back, i);
        assert!(serde_json::from_str::<IntervalQ>(r#"{"lo":"1","hi":"0"}"#).is_err());
    }

    #[test]
    fn nesting_predicates() {
        let a = IntervalQ::closed(-1.0, 1.0);
        let b = IntervalQ::closed(-2.0, 2.0);
        assert!(a.is_interior_subset_of(&b));
        assert!(!b.is_subset_of(&a));
        assert!(!IntervalQ::closed(-2.0, 1.0).is_interior_subset_of(&b));
        assert!(!IntervalQ::closed(0.0, 1.0).interiors_overlap(&IntervalQ::closed(1.0, 2.0), 0.0));
    }
}
