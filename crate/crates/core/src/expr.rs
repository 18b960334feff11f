//! Expression trees for orientation-preserving homeomorphisms of the line.

use crate::bump;
use crate::decimal;
use crate::error::{Error, Result};
use crate::interval::IntervalQ;
use crate::root::{bracket_increasing, solve_increasing};
use crate::stage::StageMap;
use crate::tol;
use crate::yoccoz::YoccozMap;
use serde::{Deserialize, Serialize};

/// A closed node vocabulary; every node denotes an increasing bijection
/// of the line. Maps supported on an interval are the identity outside.
///
/// `Compose { maps: [g, f] }` is `g . f`: the last entry acts first.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "op", rename_all = "snake_case")]
pub enum HomeoExpr {
    Identity,
    Affine {
        #[serde(with = "decimal")]
        slope: f64,
        #[serde(with = "decimal")]
        offset: f64,
    },
    Translation {
        #[serde(with = "decimal")]
        shift: f64,
    },
    ExpBump {
        interval: IntervalQ,
    },
    Piecewise {
        pieces: Vec<Piece>,
    },
    Compose {
        maps: Vec<HomeoExpr>,
    },
    Inverse {
        map: Box<HomeoExpr>,
    },
    Yoccoz(YoccozMap),
    Stage(StageMap),
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Piece {
    pub interval: IntervalQ,
    pub map: HomeoExpr,
}

/// Which side a one-sided quantity is taken from.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Side {
    Left,
    Right,
}

pub fn compose(fs: Vec<HomeoExpr>) -> Result<HomeoExpr> {
    if fs.is_empty() {
        return Err(Error::InvalidMap("compose needs at least one map".into()));
    }
    Ok(HomeoExpr::Compose { maps: fs })
}

pub fn invert(f: HomeoExpr) -> HomeoExpr {
    HomeoExpr::Inverse { map: Box::new(f) }
}

fn checked(x: f64, y: f64) -> Result<f64> {
    if x.is_finite() && !y.is_finite() {
        return Err(Error::NonFinite { x });
    }
    Ok(y)
}

impl HomeoExpr {
    pub fn translation(shift: f64) -> Self {
        HomeoExpr::Translation { shift }
    }

    pub fn affine(slope: f64, offset: f64) -> Self {
        HomeoExpr::Affine { slope, offset }
    }

    pub fn exp_bump(lo: f64, hi: f64) -> Self {
        HomeoExpr::ExpBump { interval: IntervalQ::closed(lo, hi) }
    }

    pub fn stage(index: u32, depth: u32) -> Result<Self> {
        Ok(HomeoExpr::Stage(StageMap::new(index, depth)?))
    }

    pub fn inverse(&self) -> Self {
        invert(self.clone())
    }

    /// `self . other`.
    pub fn then_after(&self, other: &HomeoExpr) -> Self {
        HomeoExpr::Compose { maps: vec![self.clone(), other.clone()] }
    }

    pub fn is_identity_node(&self) -> bool {
        match self {
            HomeoExpr::Identity => true,
            HomeoExpr::Affine { slope, offset } => *slope == 1.0 && *offset == 0.0,
            HomeoExpr::Translation { shift } => *shift == 0.0,
            HomeoExpr::Compose { maps } => maps.iter().all(HomeoExpr::is_identity_node),
            HomeoExpr::Inverse { map } => map.is_identity_node(),
            _ => false,
        }
    }

    /// Structural checks that do not need sampling.
    pub fn validate(&self) -> Result<()> {
        match self {
            HomeoExpr::Identity => Ok(()),
            HomeoExpr::Affine { slope, offset } => {
                if !(slope.is_finite() && *slope > 0.0 && offset.is_finite()) {
                    return Err(Error::InvalidMap(format!("affine needs finite slope > 0, got {slope}")));
                }
                Ok(())
            }
            HomeoExpr::Translation { shift } => {
                if !shift.is_finite() {
                    return Err(Error::InvalidMap("translation shift must be finite".into()));
                }
                Ok(())
            }
            HomeoExpr::ExpBump { interval } => {
                if !interval.is_bounded() {
                    return Err(Error::InvalidMap(format!("exp_bump needs a bounded interval, got {interval}")));
                }
                Ok(())
            }
            HomeoExpr::Piecewise { pieces } => validate_pieces(pieces),
            HomeoExpr::Compose { maps } => {
                if maps.is_empty() {
                    return Err(Error::InvalidMap("compose needs at least one map".into()));
                }
                maps.iter().try_for_each(HomeoExpr::validate)
            }
            HomeoExpr::Inverse { map } => map.validate(),
            HomeoExpr::Yoccoz(y) => YoccozMap::new(y.from, y.to).map(|_| ()),
            HomeoExpr::Stage(s) => s.validate(),
        }
    }

    /// Sampled strict monotonicity on `n` grid points of `window`.
    pub fn check_monotone(&self, window: &IntervalQ, n: usize) -> Result<()> {
        let mut prev: Option<(f64, f64)> = None;
        for x in window.grid(n) {
            let y = self.eval(x)?;
            if let Some((px, py)) = prev {
                if y <= py {
                    return Err(Error::InvalidMap(format!("not increasing between {px} and {x}: {py} >= {y}")));
                }
            }
            prev = Some((x, y));
        }
        Ok(())
    }

    /// Largest `|f(f^-1(y)) - y|` over `n` grid points of `window`.
    pub fn inverse_residual(&self, window: &IntervalQ, n: usize) -> Result<f64> {
        let mut worst: f64 = 0.0;
        for y in window.grid(n) {
            let x = self.eval_inv(y)?;
            worst = worst.max((self.eval(x)? - y).abs());
        }
        Ok(worst)
    }

    pub fn eval(&self, x: f64) -> Result<f64> {
        if x.is_infinite() {
            return Ok(x);
        }
        let y = match self {
            HomeoExpr::Identity => x,
            HomeoExpr::Affine { slope, offset } => slope * x + offset,
            HomeoExpr::Translation { shift } => x + shift,
            HomeoExpr::ExpBump { interval } => bump::eval(interval.lo(), interval.hi(), x),
            HomeoExpr::Piecewise { pieces } => match piece_at(pieces, x) {
                Some(p) => p.map.eval(x)?,
                None => x,
            },
            HomeoExpr::Compose { maps } => {
                let mut y = x;
                for m in maps.iter().rev() {
                    y = m.eval(y)?;
                }
                y
            }
            HomeoExpr::Inverse { map } => map.eval_inv(x)?,
            HomeoExpr::Yoccoz(m) => m.eval(x),
            HomeoExpr::Stage(s) => s.eval(x),
        };
        checked(x, y)
    }

    /// The inverse map at `y`. Closed forms where they exist; any
    /// residual above the inversion tolerance is polished by a
    /// bracketed solve.
    pub fn eval_inv(&self, y: f64) -> Result<f64> {
        if y.is_infinite() {
            return Ok(y);
        }
        let x = match self {
            HomeoExpr::Identity => y,
            HomeoExpr::Affine { slope, offset } => (y - offset) / slope,
            HomeoExpr::Translation { shift } => y - shift,
            HomeoExpr::ExpBump { interval } => bump::inverse(interval.lo(), interval.hi(), y, tol::TAU_INV * 1e-2)?,
            HomeoExpr::Piecewise { pieces } => self.piecewise_inv(pieces, y)?,
            HomeoExpr::Compose { maps } => {
                let mut x = y;
                for m in maps {
                    x = m.eval_inv(x)?;
                }
                x
            }
            HomeoExpr::Inverse { map } => map.eval(y)?,
            HomeoExpr::Yoccoz(m) => m.inverse().eval(y),
            HomeoExpr::Stage(s) => s.eval_inv(y)?,
        };
        checked(y, x)
    }

    fn piecewise_inv(&self, pieces: &[Piece], y: f64) -> Result<f64> {
        let image =
            |p: &Piece| -> Result<(f64, f64)> { Ok((p.map.eval(p.interval.lo())?, p.map.eval(p.interval.hi())?)) };
        let (Some(first), Some(last)) = (pieces.first(), pieces.last()) else {
            return Ok(y);
        };
        if y < image(first)?.0 || y > image(last)?.1 {
            return Ok(y);
        }
        // Piece images are ordered; find the last one starting at or below y.
        let (mut lo, mut hi) = (0usize, pieces.len());
        while hi - lo > 1 {
            let mid = (lo + hi) / 2;
            if image(&pieces[mid])?.0 <= y {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        let p = &pieces[lo];
        let x = p.map.eval_inv(y)?;
        let x = x.clamp(p.interval.lo(), p.interval.hi());
        if (p.map.eval(x)? - y).abs() <= tol::TAU_INV {
            return Ok(x);
        }
        let f = |t: f64| self.eval(t);
        let df = |t: f64| Ok(self.deriv(t));
        let bracket = bracket_increasing(&f, y, x)?;
        solve_increasing(&f, Some(&df), y, bracket, tol::TAU_INV * 1e-2)
    }

    /// Closed-form derivative by the chain rule. At a piecewise
    /// breakpoint the right-hand piece is used.
    pub fn deriv(&self, x: f64) -> f64 {
        match self {
            HomeoExpr::Identity | HomeoExpr::Translation { .. } => 1.0,
            HomeoExpr::Affine { slope, .. } => *slope,
            HomeoExpr::ExpBump { interval } => bump::deriv(interval.lo(), interval.hi(), x),
            HomeoExpr::Piecewise { pieces } => match piece_at(pieces, x) {
                Some(p) => p.map.deriv(x),
                None => 1.0,
            },
            HomeoExpr::Compose { maps } => {
                let mut y = x;
                let mut d = 1.0;
                for m in maps.iter().rev() {
                    d *= m.deriv(y);
                    y = m.eval(y).unwrap_or(f64::NAN);
                }
                d
            }
            HomeoExpr::Inverse { map } => match map.eval_inv(x) {
                Ok(z) => 1.0 / map.deriv(z),
                Err(_) => f64::NAN,
            },
            HomeoExpr::Yoccoz(m) => m.deriv(x),
            HomeoExpr::Stage(s) => s.deriv(x),
        }
    }

    /// Finitely many points of `window` where fixed points may start or
    /// stop, or where the map may fail to be smooth.
    pub fn hints(&self, window: &IntervalQ) -> Vec<f64> {
        let mut out = Vec::new();
        self.collect_hints(window, &mut out);
        out.retain(|x| window.contains(*x));
        out.sort_by(f64::total_cmp);
        out.dedup();
        out
    }

    fn collect_hints(&self, window: &IntervalQ, out: &mut Vec<f64>) {
        match self {
            HomeoExpr::Identity | HomeoExpr::Affine { .. } | HomeoExpr::Translation { .. } => {}
            HomeoExpr::ExpBump { interval } => out.extend([interval.lo(), interval.hi()]),
            HomeoExpr::Piecewise { pieces } => {
                for p in pieces {
                    out.extend([p.interval.lo(), p.interval.hi()].into_iter().filter(|x| x.is_finite()));
                    if let Some(w) = p.interval.intersect(window) {
                        p.map.collect_hints(&w, out);
                    }
                }
            }
            HomeoExpr::Compose { maps } => {
                // Hints of each factor, pulled back through the factors acting before it.
                for (k, m) in maps.iter().enumerate() {
                    let before = &maps[k + 1..];
                    let pulled = before.iter().try_fold(window.grid(2), |pts, f| {
                        pts.into_iter().map(|p| f.eval(p)).collect::<Result<Vec<_>>>()
                    });
                    let Ok(ends) = pulled else { continue };
                    let Ok(w) = IntervalQ::new(ends[0], ends[1]) else { continue };
                    for h in m.hints(&w) {
                        let back = before.iter().try_fold(h, |p, f| f.eval_inv(p));
                        if let Ok(b) = back {
                            out.push(b);
                        }
                    }
                }
            }
            HomeoExpr::Inverse { map } => {
                let lo = map.eval_inv(window.lo());
                let hi = map.eval_inv(window.hi());
                if let (Ok(lo), Ok(hi)) = (lo, hi) {
                    if let Ok(w) = IntervalQ::new(lo, hi) {
                        for h in map.hints(&w) {
                            if let Ok(y) = map.eval(h) {
                                out.push(y);
                            }
                        }
                    }
                }
            }
            HomeoExpr::Yoccoz(m) => out.extend([m.from.lo(), m.from.hi()]),
            HomeoExpr::Stage(s) => out.extend(s.hints(window, tol::FIX_RESOLUTION)),
        }
    }
}

fn validate_pieces(pieces: &[Piece]) -> Result<()> {
    if pieces.is_empty() {
        return Err(Error::InvalidMap("piecewise needs at least one piece".into()));
    }
    for p in pieces {
        p.map.validate()?;
    }
    for w in pieces.windows(2) {
        let (a, b) = (&w[0], &w[1]);
        if a.interval.hi() != b.interval.lo() {
            return Err(Error::InvalidMap(format!("pieces {} and {} are not contiguous", a.interval, b.interval)));
        }
        let t = a.interval.hi();
        let (l, r) = (a.map.eval(t)?, b.map.eval(t)?);
        if (l - r).abs() > tol::TAU_CONT * (1.0 + t.abs()) {
            return Err(Error::InvalidMap(format!("jump of {:e} at breakpoint {t}", (l - r).abs())));
        }
    }
    // Identity outside the covered window: finite ends must be fixed.
    let first = &pieces[0];
    let last = &pieces[pieces.len() - 1];
    for (t, m) in [(first.interval.lo(), &first.map), (last.interval.hi(), &last.map)] {
        if t.is_finite() {
            let y = m.eval(t)?;
            if (y - t).abs() > tol::TAU_CONT * (1.0 + t.abs()) {
                return Err(Error::InvalidMap(format!("outer end {t} is sent to {y}, not fixed")));
            }
        }
    }
    Ok(())
}

/// Piece whose interval holds `x`; at a shared breakpoint, the right one.
fn piece_at(pieces: &[Piece], x: f64) -> Option<&Piece> {
    let first = pieces.first()?;
    let last = pieces.last()?;
    if x < first.interval.lo() || x > last.interval.hi() {
        return None;
    }
    let idx = pieces.partition_point(|p| p.interval.lo() <= x);
    Some(&pieces[idx.saturating_sub(1)])
}

/// Central difference with two Richardson levels.
pub fn central_derivative<F: Fn(f64) -> f64>(f: F, x: f64, h: f64) -> f64 {
    let d = |h: f64| (f(x + h) - f(x - h)) / (2.0 * h);
    let (d1, d2, d3) = (d(h), d(h / 2.0), d(h / 4.0));
    let r1 = (4.0 * d2 - d1) / 3.0;
    let r2 = (4.0 * d3 - d2) / 3.0;
    (16.0 * r2 - r1) / 15.0
}

/// One-sided difference quotient at steps `h, h/2, ..., h/2^(levels-1)`,
/// Richardson-extrapolated in `h`.
pub fn one_sided_derivative<F: Fn(f64) -> f64>(f: F, x: f64, side: Side, h: f64, levels: usize) -> f64 {
    let s = match side {
        Side::Left => -1.0,
        Side::Right => 1.0,
    };
    let fx = f(x);
    let mut table: Vec<f64> = (0..levels.max(1))
        .map(|k| {
            let step = h / f64::powi(2.0, k as i32);
            (f(x + s * step) - fx) / (s * step)
        })
        .collect();
    let mut factor = 2.0;
    while table.len() > 1 {
        table = table.windows(2).map(|w| (factor * w[1] - w[0]) / (factor - 1.0)).collect();
        factor *= 2.0;
    }
    table[0]
}

/// Derivative with a differentiability check: the one-sided quotients
/// must agree within `tol`.
pub fn checked_derivative(f: &HomeoExpr, x: f64, h: f64, tol: f64) -> Result<f64> {
    let g = |t: f64| f.eval(t).unwrap_or(f64::NAN);
    let left = one_sided_derivative(g, x, Side::Left, h, 3);
    let right = one_sided_derivative(g, x, Side::Right, h, 3);
    if !((left - right).abs() <= tol) {
        return Err(Error::NonDifferentiablePoint { x, left, right });
    }
    Ok(0.5 * (left + right))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn f1() -> HomeoExpr {
        HomeoExpr::exp_bump(-1.0, 1.0)
    }

    #[test]
    fn leaf_values() {
        assert_eq!(f1().eval(1.0).unwrap(), 1.0);
        assert_eq!(f1().eval(-1.0).unwrap(), -1.0);
        assert_eq!(HomeoExpr::Identity.eval(0.37).unwrap(), 0.37);
        assert_eq!(HomeoExpr::affine(2.0, 5.0).deriv(-3.0), 2.0);
        assert_eq!(HomeoExpr::translation(1.0).eval(f64::INFINITY).unwrap(), f64::INFINITY);
    }

    #[test]
    fn inversion_and_composition() {
        let t = invert(HomeoExpr::translation(0.25));
        assert_eq!(t.eval(1.0).unwrap(), 0.75);
        let a = invert(HomeoExpr::affine(2.0, 1.0));
        assert_eq!(a.eval(5.0).unwrap(), 2.0);
        let round = compose(vec![invert(f1()), f1()]).unwrap();
        assert!((round.eval(0.5).unwrap() - 0.5).abs() < 1e-10);
        let c = compose(vec![HomeoExpr::translation(1.0), HomeoExpr::translation(2.0)]).unwrap();
        assert_eq!(c.eval(0.0).unwrap(), 3.0);
        let c = compose(vec![HomeoExpr::affine(2.0, 0.0), HomeoExpr::translation(1.0)]).unwrap();
        assert_eq!(c.eval(1.0).unwrap(), 4.0);
        assert!(compose(vec![]).is_err());
    }

    #[test]
    fn piecewise_lookup_and_validation() {
        let pw = HomeoExpr::Piecewise {
            pieces: vec![
                Piece { interval: IntervalQ::closed(0.0, 0.5), map: HomeoExpr::affine(1.5, 0.0) },
                Piece { interval: IntervalQ::closed(0.5, 1.0), map: HomeoExpr::affine(0.5, 0.5) },
            ],
        };
        pw.validate().unwrap();
        assert_eq!(pw.eval(0.25).unwrap(), 0.375);
        assert_eq!(pw.eval(2.0).unwrap(), 2.0);
        assert_eq!(pw.deriv(0.75), 0.5);
        assert!((pw.eval_inv(0.9).unwrap() - 0.8).abs() < 1e-15);
        assert!(pw.inverse_residual(&IntervalQ::closed(-1.0, 2.0), 101).unwrap() < 1e-12);

        let broken = HomeoExpr::Piecewise {
            pieces: vec![
                Piece { interval: IntervalQ::closed(0.0, 0.5), map: HomeoExpr::affine(1.5, 0.0) },
                Piece { interval: IntervalQ::closed(0.5, 1.0), map: HomeoExpr::Identity },
            ],
        };
        assert!(broken.validate().is_err());
    }

    #[test]
    fn json_shape() {
        let e = compose(vec![HomeoExpr::affine(2.0, 0.5), invert(f1()), HomeoExpr::stage(1, 2).unwrap()]).unwrap();
        let j = serde_json::to_value(&e).unwrap();
        assert_eq!(j["op"], "compose");
        assert_eq!(j["maps"][0]["slope"], "2");
        assert_eq!(j["maps"][1]["map"]["op"], "exp_bump");
        assert_eq!(j["maps"][2]["op"], "stage");
        let back: HomeoExpr = serde_json::from_value(j).unwrap();
        assert_eq!(back, e);
        let y: HomeoExpr =
            serde_json::from_str(r#"{"op":"yoccoz","from":{"lo":"0","hi":"1"},"to":{"lo":"0","hi":"1.01"}}"#).unwrap();
        assert!(matches!(y, HomeoExpr::Yoccoz(_)));
    }

    #[test]
    fn one_sided_quotients_converge() {
        let d = one_sided_derivative(|x: f64| x.exp(), 0.0, Side::Right, 1e-2, 3);
        assert!((d - 1.0).abs() < 1e-7);
        let kink = HomeoExpr::Piecewise {
            pieces: vec![
                Piece { interval: IntervalQ::closed(-1.0, 0.0), map: HomeoExpr::affine(0.5, -0.5) },
                Piece { interval: IntervalQ::closed(0.0, 1.0), map: HomeoExpr::affine(1.5, -0.5) },
            ],
        };
        assert!(matches!(checked_derivative(&kink, 0.0, 1e-3, 1e-5), Err(Error::NonDifferentiablePoint { .. })));
    }
}
