//! Independent oracles shared by the integration tests.
#![allow(dead_code)]

use linelab::expr::{HomeoExpr, Piece};
use linelab::interval::IntervalQ;
use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, ToPrimitive, Zero};
use rand::Rng;

pub type Q = BigRational;

pub fn q(n: i64, d: i64) -> Q {
    Q::new(BigInt::from(n), BigInt::from(d))
}

pub fn qf(x: &Q) -> f64 {
    x.to_f64().expect("finite rational")
}

/// A piecewise-linear homeomorphism with rational knots, the identity
/// outside its first and last knot (both fixed).
#[derive(Clone, Debug)]
pub struct ExactPl {
    pub knots: Vec<(Q, Q)>,
}

impl ExactPl {
    pub fn eval(&self, x: &Q) -> Q {
        let (first, last) = (&self.knots[0], &self.knots[self.knots.len() - 1]);
        if x <= &first.0 || x >= &last.0 {
            return x.clone();
        }
        let i = self.knots.iter().position(|k| &k.0 >= x).unwrap();
        let (x0, y0) = &self.knots[i - 1];
        let (x1, y1) = &self.knots[i];
        y0 + (y1 - y0) * (x - x0) / (x1 - x0)
    }

    /// The same map as a float expression tree.
    pub fn expr(&self) -> HomeoExpr {
        let pieces = self
            .knots
            .windows(2)
            .map(|w| {
                let s = (&w[1].1 - &w[0].1) / (&w[1].0 - &w[0].0);
                let off = &w[0].1 - &s * &w[0].0;
                Piece {
                    interval: IntervalQ::closed(qf(&w[0].0), qf(&w[1].0)),
                    map: HomeoExpr::affine(qf(&s), qf(&off)),
                }
            })
            .collect();
        HomeoExpr::Piecewise { pieces }
    }

    /// Exact fixed set inside `[lo, hi]` as sorted closed intervals.
    pub fn fixed_parts(&self, lo: &Q, hi: &Q) -> Vec<(Q, Q)> {
        let mut parts: Vec<(Q, Q)> = Vec::new();
        let mut push = |a: Q, b: Q| {
            if let Some(last) = parts.last_mut() {
                if a <= last.1 {
                    if b > last.1 {
                        last.1 = b;
                    }
                    return;
                }
            }
            parts.push((a, b));
        };
        let first = self.knots[0].0.clone();
        let last = self.knots[self.knots.len() - 1].0.clone();
        if lo < &first {
            push(lo.clone(), first.clone().min(hi.clone()));
        }
        for w in self.knots.windows(2) {
            let (x0, y0) = &w[0];
            let (x1, y1) = &w[1];
            let d0 = y0 - x0;
            let d1 = y1 - x1;
            if d0.is_zero() && d1.is_zero() {
                push(x0.clone(), x1.clone());
            } else if d0.is_zero() {
                push(x0.clone(), x0.clone());
            } else if d1.is_zero() {
                push(x1.clone(), x1.clone());
            } else if (d0 > Q::zero()) != (d1 > Q::zero()) {
                // the displacement is linear on the piece
                let t = &d0 / (&d0 - &d1);
                let x = x0 + t * (x1 - x0);
                push(x.clone(), x);
            }
        }
        if hi > &last {
            push(last.max(lo.clone()), hi.clone());
        }
        parts.retain(|(a, b)| b >= lo && a <= hi);
        parts
    }
}

/// Do `f` and `g` cross inside `[lo, hi]`: does one of them send a fixed
/// end of a complementary component of the other's fixed set strictly
/// inside that component?
pub fn exact_crossed(f: &ExactPl, g: &ExactPl, lo: &Q, hi: &Q) -> bool {
    for (a, b) in [(f, g), (g, f)] {
        let parts = a.fixed_parts(lo, hi);
        for w in parts.windows(2) {
            let (clo, chi) = (&w[0].1, &w[1].0);
            for e in [clo, chi] {
                let y = b.eval(e);
                if &y > clo && &y < chi {
                    return true;
                }
            }
        }
    }
    false
}

fn rational_in(rng: &mut impl Rng, lo: i64, hi: i64, den: i64) -> Q {
    q(rng.gen_range(lo * den + 1..hi * den), den)
}

/// A random PL homeomorphism of `[-1, 1]` with knots of denominator at
/// most 1000. With probability `share` some interior knots are fixed,
/// drawn from `pins`.
pub fn random_pl(rng: &mut impl Rng, pins: &[Q], share: f64) -> ExactPl {
    let n = rng.gen_range(2..6);
    let mut xs: Vec<Q> = Vec::new();
    let mut ys: Vec<Q> = Vec::new();
    while xs.len() < n {
        let den = rng.gen_range(2..=1000);
        let x = rational_in(rng, -1, 1, den);
        if !xs.contains(&x) {
            xs.push(x);
        }
    }
    while ys.len() < n {
        let den = rng.gen_range(2..=1000);
        let y = rational_in(rng, -1, 1, den);
        if !ys.contains(&y) {
            ys.push(y);
        }
    }
    xs.sort();
    ys.sort();
    let mut knots: Vec<(Q, Q)> = xs.into_iter().zip(ys).collect();
    if !pins.is_empty() && rng.gen_bool(share) {
        let p = pins[rng.gen_range(0..pins.len())].clone();
        if let Some(i) = knots.iter().position(|k| k.0 > p) {
            let prev_y = if i == 0 { q(-1, 1) } else { knots[i - 1].1.clone() };
            if (i == 0 || knots[i - 1].0 < p) && prev_y < p && p < knots[i].1 {
                knots.insert(i, (p.clone(), p));
            }
        }
    }
    let mut all = vec![(q(-1, 1), q(-1, 1))];
    all.extend(knots);
    all.push((Q::one(), Q::one()));
    ExactPl { knots: all }
}

/// The chart `1/(b - x) - 1/(x - a)` of `(a, b)` and its inverse, on
/// plain formulas, for a derivative oracle of chart maps.
pub fn chart(a: f64, b: f64, x: f64) -> f64 {
    1.0 / (b - x) - 1.0 / (x - a)
}

pub fn chart_deriv(a: f64, b: f64, x: f64) -> f64 {
    1.0 / ((b - x) * (b - x)) + 1.0 / ((x - a) * (x - a))
}

/// Derivative of the chart map `(a, b) -> (c, d)` at `x` by the chain
/// rule `psi_I'(x) / psi_J'(phi(x))`, with `phi(x)` supplied.
pub fn chart_map_deriv(i: (f64, f64), j: (f64, f64), x: f64, phi_x: f64) -> f64 {
    chart_deriv(i.0, i.1, x) / chart_deriv(j.0, j.1, phi_x)
}

/// `mu([a, b])` for the collapse measure: length minus the gap length
/// inside.
pub fn gap_deflated_length(gaps: &[(f64, f64)], a: f64, b: f64) -> f64 {
    let removed: f64 = gaps.iter().map(|&(lo, hi)| (hi.min(b) - lo.max(a)).max(0.0)).sum();
    (b - a) - removed
}
