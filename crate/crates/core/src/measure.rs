//! Radon measures on the line and the constructions that produce
//! invariant ones: translation numbers, Hölder's conjugacy for free
//! actions, collapse maps over a fixed set, and counting measures on
//! discrete orbits.

use crate::decimal;
use crate::error::{Error, Result};
use crate::expr::{HomeoExpr, Piece};
use crate::group::GroupSpec;
use crate::interval::IntervalQ;
use crate::structure::{fixed_set, is_free_action, FreenessReport};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::collections::{BTreeMap, VecDeque};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "variant", rename_all = "snake_case")]
pub enum RadonMeasure {
    /// Point masses.
    DiracComb {
        #[serde(with = "decimal::vec")]
        points: Vec<f64>,
        #[serde(with = "decimal::vec")]
        weights: Vec<f64>,
    },
    /// `normalization` times the number of distinct points of the orbit
    /// of `base` under words of length at most `word_length`.
    OrbitCounting {
        #[serde(with = "decimal")]
        base: f64,
        generators: Vec<HomeoExpr>,
        word_length: usize,
        #[serde(with = "decimal")]
        normalization: f64,
    },
    /// `mu([a, b]) = phi(b) - phi(a)` with `phi = map . collapse`.
    StieltjesFromMap {
        #[serde(skip_serializing_if = "Option::is_none", default)]
        collapse: Option<CollapseMap>,
        map: HomeoExpr,
    },
    /// `mu([a, b]) = h(b) - h(a)`.
    LebesguePullback { conjugacy: HomeoExpr },
}

impl RadonMeasure {
    /// Unit masses at the given points.
    pub fn comb(mut points: Vec<f64>) -> Self {
        points.sort_by(f64::total_cmp);
        let weights = vec![1.0; points.len()];
        RadonMeasure::DiracComb { points, weights }
    }

    pub fn lebesgue() -> Self {
        RadonMeasure::LebesguePullback { conjugacy: HomeoExpr::Identity }
    }

    /// Atom locations, for probe placement.
    pub fn atoms(&self) -> &[f64] {
        match self {
            RadonMeasure::DiracComb { points, .. } => points,
            _ => &[],
        }
    }
}

/// Mass of the closed interval `[a, b]`.
pub fn measure_interval(mu: &RadonMeasure, a: f64, b: f64) -> Result<f64> {
    if !(a.is_finite() && b.is_finite()) || a > b {
        return Err(Error::InvalidInterval { lo: a, hi: b });
    }
    match mu {
        RadonMeasure::DiracComb { points, weights } => {
            let i = points.partition_point(|&p| p < a);
            let j = points.partition_point(|&p| p <= b);
            Ok(weights[i..j].iter().sum())
        }
        RadonMeasure::OrbitCounting { base, generators, word_length, normalization } => {
            let pts = orbit_ball(generators, *base, *word_length)?;
            Ok(normalization * pts.iter().filter(|&&p| a <= p && p <= b).count() as f64)
        }
        RadonMeasure::StieltjesFromMap { collapse, map } => {
            let phi = |x: f64| -> Result<f64> {
                let c = collapse.as_ref().map_or(x, |c| c.eval(x));
                map.eval(c)
            };
            Ok((phi(b)? - phi(a)?).max(0.0))
        }
        RadonMeasure::LebesguePullback { conjugacy } => Ok((conjugacy.eval(b)? - conjugacy.eval(a)?).max(0.0)),
    }
}

/// `max |mu(g[a, b]) - mu([a, b])|` over the intervals.
pub fn invariance_residual(mu: &RadonMeasure, g: &HomeoExpr, intervals: &[(f64, f64)]) -> Result<f64> {
    let rs: Vec<f64> = intervals
        .par_iter()
        .map(|&(a, b)| Ok((measure_interval(mu, g.eval(a)?, g.eval(b)?)? - measure_interval(mu, a, b)?).abs()))
        .collect::<Result<_>>()?;
    Ok(rs.into_iter().fold(0.0, f64::max))
}

/// `n` random intervals inside `window` whose images under every map
/// stay inside it. Endpoints (and their images) within `margin` of a
/// point of `avoid` are rejected.
pub fn probe_intervals(
    window: &IntervalQ,
    maps: &[HomeoExpr],
    n: usize,
    seed: u64,
    avoid: &[f64],
    margin: f64,
) -> Result<Vec<(f64, f64)>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let near = |x: f64| {
        let i = avoid.partition_point(|&p| p < x);
        (i < avoid.len() && avoid[i] - x < margin) || (i > 0 && x - avoid[i - 1] < margin)
    };
    let ok = |x: f64| -> Result<bool> {
        if near(x) {
            return Ok(false);
        }
        for g in maps {
            let y = g.eval(x)?;
            if !window.contains(y) || near(y) {
                return Ok(false);
            }
        }
        Ok(true)
    };
    let mut out = Vec::with_capacity(n);
    let mut tries = 0;
    while out.len() < n && tries < 1000 * n.max(1) {
        tries += 1;
        let a = rng.gen_range(window.lo()..window.hi());
        let b = rng.gen_range(window.lo()..window.hi());
        let (a, b) = if a <= b { (a, b) } else { (b, a) };
        if ok(a)? && ok(b)? {
            out.push((a, b));
        }
    }
    if out.len() < n {
        return Err(Error::Precondition(format!(
            "found only {} of {n} probe intervals whose images stay in {window}",
            out.len()
        )));
    }
    Ok(out)
}

/// Masses of nested intervals about the window centre, smallest first.
/// A Radon measure gives finite, nondecreasing values.
pub fn radon_sweep(mu: &RadonMeasure, window: &IntervalQ, levels: usize) -> Result<Vec<f64>> {
    let c = window.midpoint();
    let r = window.length() / 2.0;
    (1..=levels)
        .map(|i| {
            let s = r * i as f64 / levels as f64;
            measure_interval(mu, c - s, c + s)
        })
        .collect()
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Gap {
    #[serde(with = "decimal")]
    pub lo: f64,
    #[serde(with = "decimal")]
    pub hi: f64,
}

/// The monotone surjection that crushes each gap closure to a point and
/// has slope 1 elsewhere, normalized to the identity left of the first
/// gap.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "CollapseRepr", into = "CollapseRepr")]
pub struct CollapseMap {
    gaps: Vec<Gap>,
    /// Total gap length strictly left of gap `i`.
    removed: Vec<f64>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct CollapseRepr {
    gaps: Vec<Gap>,
}

impl TryFrom<CollapseRepr> for CollapseMap {
    type Error = Error;
    fn try_from(r: CollapseRepr) -> Result<Self> {
        CollapseMap::new(r.gaps.into_iter().map(|g| (g.lo, g.hi)).collect())
    }
}

impl From<CollapseMap> for CollapseRepr {
    fn from(c: CollapseMap) -> Self {
        CollapseRepr { gaps: c.gaps }
    }
}

impl CollapseMap {
    /// Gaps must be finite, nondegenerate and disjoint; they are sorted.
    pub fn new(mut gaps: Vec<(f64, f64)>) -> Result<Self> {
        gaps.sort_by(|a, b| a.0.total_cmp(&b.0));
        for &(lo, hi) in &gaps {
            if !(lo.is_finite() && hi.is_finite()) || lo >= hi {
                return Err(Error::InvalidInterval { lo, hi });
            }
        }
        if let Some(w) = gaps.windows(2).find(|w| w[1].0 < w[0].1) {
            return Err(Error::Precondition(format!(
                "gaps ({}, {}) and ({}, {}) overlap",
                w[0].0, w[0].1, w[1].0, w[1].1
            )));
        }
        let mut removed = Vec::with_capacity(gaps.len() + 1);
        let mut acc = 0.0;
        removed.push(0.0);
        for &(lo, hi) in &gaps {
            acc += hi - lo;
            removed.push(acc);
        }
        Ok(CollapseMap { gaps: gaps.into_iter().map(|(lo, hi)| Gap { lo, hi }).collect(), removed })
    }

    pub fn gaps(&self) -> &[Gap] {
        &self.gaps
    }

    /// The constant value on gap `i`.
    pub fn level(&self, i: usize) -> f64 {
        self.gaps[i].lo - self.removed[i]
    }

    pub fn eval(&self, x: f64) -> f64 {
        let i = self.gaps.partition_point(|g| g.hi < x);
        if i < self.gaps.len() && self.gaps[i].lo <= x {
            self.level(i)
        } else {
            x - self.removed[i]
        }
    }
}

/// Collapse the gaps and return the Stieltjes measure of the result,
/// post-composed with `quotient` when given.
///
/// Every generator must send each gap onto a gap within `eps_fix`.
/// Images that leave the span of the gap list cannot be checked and are
/// skipped.
pub fn collapse_and_measure(
    gaps: &[(f64, f64)],
    gens: &GroupSpec,
    quotient: Option<HomeoExpr>,
) -> Result<(CollapseMap, RadonMeasure)> {
    let cm = CollapseMap::new(gaps.to_vec())?;
    let eps = gens.tolerances.eps_fix;
    if let (Some(first), Some(last)) = (cm.gaps.first(), cm.gaps.last()) {
        let (span_lo, span_hi) = (first.lo, last.hi);
        for g in &gens.generators {
            for f in [g.map.clone(), g.map.inverse()] {
                for gap in &cm.gaps {
                    let (a, b) = (f.eval(gap.lo)?, f.eval(gap.hi)?);
                    if a < span_lo - eps || b > span_hi + eps {
                        continue;
                    }
                    let tol = eps * (1.0 + a.abs().max(b.abs()));
                    let hit = cm.gaps.iter().any(|h| (h.lo - a).abs() <= tol && (h.hi - b).abs() <= tol);
                    if !hit {
                        return Err(Error::GapsNotInvariant { generator: g.name.clone(), lo: gap.lo, hi: gap.hi });
                    }
                }
            }
        }
    }
    let mu =
        RadonMeasure::StieltjesFromMap { collapse: Some(cm.clone()), map: quotient.unwrap_or(HomeoExpr::Identity) };
    Ok((cm, mu))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TranslationNumberEstimate {
    #[serde(with = "decimal")]
    pub value: f64,
    #[serde(with = "decimal")]
    pub error_bar: f64,
    pub n_max: usize,
    #[serde(with = "decimal")]
    pub base: f64,
    /// `(f^m(x0) - x0) / m` sampled over the last quarter of iterates.
    #[serde(with = "decimal::vec")]
    pub tail: Vec<f64>,
}

/// Beyond this magnitude iterates carry no useful precision.
const REPRESENTABLE: f64 = 1e15;

/// Estimate `lim (f^n(x0) - x0) / n` for `f` without fixed points in
/// `window`.
pub fn translation_number(
    f: &HomeoExpr,
    x0: f64,
    n_max: usize,
    window: &IntervalQ,
) -> Result<TranslationNumberEstimate> {
    if n_max == 0 {
        return Err(Error::Precondition("n_max must be positive".into()));
    }
    let rep = fixed_set(f, window, 1000)?;
    if let Some(p) = rep.fixed_intervals.first() {
        return Err(Error::HasFixedPoints { x: p.lo });
    }
    let start = n_max - n_max / 4;
    let stride = ((n_max / 4) / 16).max(1);
    let mut x = x0;
    let mut tail = Vec::new();
    for m in 1..=n_max {
        x = f.eval(x)?;
        if !x.is_finite() || x.abs() > REPRESENTABLE {
            return Err(Error::WindowEscape { iterate: m, x });
        }
        if m >= start && ((m - start).is_multiple_of(stride) || m == n_max) {
            tail.push((x - x0) / m as f64);
        }
    }
    let value = (x - x0) / n_max as f64;
    let (lo, hi) = tail.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(l, h), &t| (l.min(t), h.max(t)));
    let error_bar = 4.0 * (hi - lo) + 1e-12 * (1.0 + value.abs());
    Ok(TranslationNumberEstimate { value, error_bar, n_max, base: x0, tail })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct NamedTau {
    pub name: String,
    pub estimate: TranslationNumberEstimate,
}

/// The ratio `tau(g) / tau(g0)` for one generator.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RotationRatio {
    pub name: String,
    #[serde(with = "decimal")]
    pub ratio: f64,
    /// Interval allowed by the cyclic order of reduced orbit points.
    #[serde(with = "decimal")]
    pub ratio_lo: f64,
    #[serde(with = "decimal")]
    pub ratio_hi: f64,
    /// `true` when the bounds came from orbit order, `false` when they
    /// were inconsistent and the translation numbers were used.
    pub from_order: bool,
    /// Some orbit point coincided with another: the ratio is rational.
    pub periodic: bool,
}

/// Diagnostics of a Hölder conjugacy; the measure itself is returned
/// alongside.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct HolderReport {
    pub base_generator: String,
    /// `g0` was replaced by its inverse to make it move points right.
    pub base_inverted: bool,
    #[serde(with = "decimal")]
    pub base_point: f64,
    pub taus: Vec<NamedTau>,
    pub ratios: Vec<RotationRatio>,
    pub freeness: FreenessReport,
    pub knots_per_domain: usize,
    /// Orbit points used to bound the rotation ratios.
    pub orbit_length: usize,
}

/// Below this every generator counts as having zero translation number.
pub const TAU_FLOOR: f64 = 1e-6;

const MAX_KNOTS: usize = 1_000_000;

/// Orbit points of `g` reduced into the fundamental domain
/// `[x0, g0(x0))`: `(position, b, k)` with `g^b(x0) = g0^k(position)`.
fn reduced_orbit(g0: &HomeoExpr, g: &HomeoExpr, x0: f64, x1: f64, n: usize) -> Result<Vec<(f64, i64, i64)>> {
    let mut out = Vec::with_capacity(n);
    let (mut q, mut k) = (x0, 0i64);
    for b in 1..=n as i64 {
        q = g.eval(q)?;
        let mut steps = 0;
        while q >= x1 {
            q = g0.eval_inv(q)?;
            k += 1;
            steps += 1;
            if steps > 1_000_000 {
                return Err(Error::WindowEscape { iterate: b as usize, x: q });
            }
        }
        while q < x0 {
            q = g0.eval(q)?;
            k -= 1;
            steps += 1;
            if steps > 1_000_000 {
                return Err(Error::WindowEscape { iterate: b as usize, x: q });
            }
        }
        out.push((q, b, k));
    }
    Ok(out)
}

/// Bounds on `rho` from `theta_b = b rho - k_b` increasing along the
/// reduced orbit, with `theta = 0` at `x0` and `1` at `g0(x0)`.
fn ratio_bounds(pts: &[(f64, i64, i64)], x0: f64, x1: f64, same: f64) -> (f64, f64, bool) {
    let mut all: Vec<(f64, i64, i64)> = pts.to_vec();
    all.push((x0, 0, 0));
    all.push((x1, 0, -1));
    all.sort_by(|a, b| a.0.total_cmp(&b.0));
    let (mut lo, mut hi) = (f64::NEG_INFINITY, f64::INFINITY);
    let mut periodic = false;
    for w in all.windows(2) {
        let ((pi, bi, ki), (pj, bj, kj)) = (w[0], w[1]);
        let db = (bi - bj) as f64;
        let dk = (ki - kj) as f64;
        let equal = pj - pi <= same;
        periodic |= equal && bi != bj;
        if db > 0.0 {
            hi = hi.min(dk / db);
            if equal {
                lo = lo.max(dk / db);
            }
        } else if db < 0.0 {
            lo = lo.max(dk / db);
            if equal {
                hi = hi.min(dk / db);
            }
        }
    }
    (lo, hi, periodic)
}

/// Hölder's theorem at desk scale: for a free action, find `h` with
/// every generator conjugated to a translation, and return Lebesgue
/// measure pulled back by `h`.
///
/// `h` is built on the fundamental domain `[x0, g0(x0))` of a base
/// generator from the reduced orbits of the others, interpolated
/// linearly, and extended `g0`-equivariantly over the window.
pub fn conjugacy_to_translation(gens: &GroupSpec, window: &IntervalQ) -> Result<(RadonMeasure, HolderReport)> {
    gens.validate()?;
    let freeness = is_free_action(gens, window, gens.budgets.word_length)?;
    if !freeness.free {
        return Err(Error::NotFree { word: freeness.witness.clone().unwrap_or_default() });
    }
    let x0 = window.midpoint();
    let n_iter = gens.budgets.iterates.max(1);
    let taus: Vec<NamedTau> = gens
        .generators
        .iter()
        .map(|g| Ok(NamedTau { name: g.name.clone(), estimate: translation_number(&g.map, x0, n_iter, window)? }))
        .collect::<Result<_>>()?;
    let Some(base) = taus.iter().position(|t| t.estimate.value.abs() >= TAU_FLOOR) else {
        return Err(Error::DegenerateTau { floor: TAU_FLOOR });
    };
    let tau0 = taus[base].estimate.value;
    let inverted = tau0 < 0.0;
    let g0 = if inverted { gens.map(base).inverse() } else { gens.map(base).clone() };
    let tau0 = tau0.abs();
    let x1 = g0.eval(x0)?;
    let same = 1e-9 * (1.0 + x0.abs().max(x1.abs()));
    let n = gens.budgets.samples.clamp(1, 500);
    // theta_b = b rho - k_b carries b times the error of rho, so rho is
    // bounded on a long orbit while knots come from its first n points
    let orbit_length = n_iter.clamp(n, 100_000);

    // knots (position, theta) in the fundamental domain
    let mut knots: Vec<(f64, f64)> = vec![(x0, 0.0)];
    let mut ratios = Vec::new();
    for (j, g) in gens.generators.iter().enumerate() {
        if j == base {
            continue;
        }
        let pts = reduced_orbit(&g0, &g.map, x0, x1, orbit_length)?;
        let (lo, hi, periodic) = ratio_bounds(&pts, x0, x1, same);
        let est = taus[j].estimate.value / taus[base].estimate.value;
        let from_order = lo.is_finite() && hi.is_finite() && lo <= hi + 1e-12;
        let rho = if from_order { 0.5 * (lo + hi) } else { est };
        ratios.push(RotationRatio {
            name: g.name.clone(),
            ratio: if inverted { -rho } else { rho },
            ratio_lo: if inverted { -hi } else { lo },
            ratio_hi: if inverted { -lo } else { hi },
            from_order,
            periodic,
        });
        knots.extend(pts[..n].iter().map(|&(q, b, k)| (q, (b as f64 * rho - k as f64).clamp(0.0, 1.0))));
    }
    knots.sort_by(|a, b| a.0.total_cmp(&b.0));
    // keep a strictly increasing chain; coincident or misordered points
    // are numerical noise
    let mut chain: Vec<(f64, f64)> = Vec::with_capacity(knots.len());
    for (q, t) in knots {
        match chain.last() {
            Some(&(pq, pt)) if q - pq <= same || t <= pt || t >= 1.0 => {}
            _ => chain.push((q, t)),
        }
    }

    // spread over the window by powers of g0
    let mut global: Vec<(f64, f64)> = Vec::new();
    let mut domain = chain.clone();
    let mut m = 0i64;
    loop {
        global.extend(domain.iter().map(|&(q, t)| (q, tau0 * (m as f64 + t))));
        if domain[0].0 > window.hi() {
            break;
        }
        if global.len() > MAX_KNOTS {
            return Err(Error::Precondition(format!("base generator moves too little to cover {window}")));
        }
        domain = domain.iter().map(|&(q, t)| Ok((g0.eval(q)?, t))).collect::<Result<_>>()?;
        m += 1;
    }
    let mut domain = chain;
    let mut m = 0i64;
    while domain[0].0 > window.lo() {
        domain = domain.iter().map(|&(q, t)| Ok((g0.eval_inv(q)?, t))).collect::<Result<_>>()?;
        m -= 1;
        if global.len() > MAX_KNOTS {
            return Err(Error::Precondition(format!("base generator moves too little to cover {window}")));
        }
        global.extend(domain.iter().map(|&(q, t)| (q, tau0 * (m as f64 + t))));
    }
    global.sort_by(|a, b| a.0.total_cmp(&b.0));
    global.dedup_by(|b, a| b.0 - a.0 <= same);

    let conjugacy = pl_from_knots(&global)?;
    let report = HolderReport {
        base_generator: gens.generators[base].name.clone(),
        base_inverted: inverted,
        base_point: x0,
        taus,
        ratios,
        freeness,
        knots_per_domain: n,
        orbit_length,
    };
    Ok((RadonMeasure::LebesguePullback { conjugacy }, report))
}

/// Increasing piecewise-affine interpolant with end rays continuing the
/// outer slopes.
pub(crate) fn pl_from_knots(knots: &[(f64, f64)]) -> Result<HomeoExpr> {
    if knots.len() < 2 {
        return Err(Error::Precondition("need at least two knots".into()));
    }
    let affine = |(x0, y0): (f64, f64), (x1, y1): (f64, f64)| {
        let s = (y1 - y0) / (x1 - x0);
        HomeoExpr::affine(s, y0 - s * x0)
    };
    let last = knots.len() - 1;
    let mut pieces = Vec::with_capacity(knots.len() + 1);
    pieces.push(Piece { interval: IntervalQ::new(f64::NEG_INFINITY, knots[0].0)?, map: affine(knots[0], knots[1]) });
    for w in knots.windows(2) {
        if w[1].1 <= w[0].1 {
            return Err(Error::InvalidMap(format!("knot values not increasing at {}", w[1].0)));
        }
        pieces.push(Piece { interval: IntervalQ::new(w[0].0, w[1].0)?, map: affine(w[0], w[1]) });
    }
    pieces.push(Piece {
        interval: IntervalQ::new(knots[last].0, f64::INFINITY)?,
        map: affine(knots[last - 1], knots[last]),
    });
    Ok(HomeoExpr::Piecewise { pieces })
}

#[derive(Clone, Copy)]
struct Key(f64);

impl PartialEq for Key {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other).is_eq()
    }
}

impl Eq for Key {}

impl PartialOrd for Key {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Key {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        self.0.total_cmp(&other.0)
    }
}

/// Two orbit points this close are the same point reached by two words.
fn same_point(a: f64, b: f64) -> bool {
    (a - b).abs() <= 1e-9 * (1.0 + a.abs().max(b.abs()))
}

/// Insert unless an equal point is present; returns the distance to the
/// nearest distinct neighbour when inserted.
fn insert_point(set: &mut BTreeMap<Key, ()>, x: f64) -> Option<(f64, f64)> {
    let below = set.range(..=Key(x)).next_back().map(|(k, _)| k.0);
    let above = set.range(Key(x)..).next().map(|(k, _)| k.0);
    if below.is_some_and(|b| same_point(b, x)) || above.is_some_and(|a| same_point(a, x)) {
        return None;
    }
    set.insert(Key(x), ());
    let nb = [below, above].into_iter().flatten().min_by(|a, b| (a - x).abs().total_cmp(&(b - x).abs()));
    Some((x, nb.unwrap_or(f64::INFINITY)))
}

/// Distinct points of the orbit of `y` under words of length at most
/// `depth` in `maps` and their inverses.
fn orbit_ball(maps: &[HomeoExpr], y: f64, depth: usize) -> Result<Vec<f64>> {
    let inv: Vec<HomeoExpr> = maps.iter().map(HomeoExpr::inverse).collect();
    let mut set = BTreeMap::new();
    set.insert(Key(y), ());
    let mut frontier = vec![y];
    for _ in 0..depth {
        let mut next = Vec::new();
        for &x in &frontier {
            for f in maps.iter().chain(inv.iter()) {
                let z = f.eval(x)?;
                if insert_point(&mut set, z).is_some() {
                    next.push(z);
                }
            }
        }
        frontier = next;
    }
    Ok(set.into_keys().map(|k| k.0).collect())
}

/// Unit comb on the orbit of `y` inside the window, enumerated
/// breadth-first.
///
/// Fails with `OrbitAccumulates` as soon as two distinct orbit points
/// come within `eps_sep`, or when more than `budgets.iterates` points
/// fit in the window (then the closest pair found is reported).
pub fn discrete_orbit_measure(gens: &GroupSpec, y: f64, window: &IntervalQ) -> Result<RadonMeasure> {
    if !window.contains(y) {
        return Err(Error::Precondition(format!("{y} is outside the window {window}")));
    }
    let eps = gens.tolerances.eps_sep;
    let cap = gens.budgets.iterates.max(16);
    let maps: Vec<HomeoExpr> = gens.generators.iter().flat_map(|g| [g.map.clone(), g.map.inverse()]).collect();
    let mut set = BTreeMap::new();
    set.insert(Key(y), ());
    let mut queue = VecDeque::from([y]);
    let mut closest = (f64::INFINITY, y, y);
    while let Some(x) = queue.pop_front() {
        for f in &maps {
            let z = f.eval(x)?;
            if !window.contains(z) {
                continue;
            }
            if let Some((z, nb)) = insert_point(&mut set, z) {
                let d = (z - nb).abs();
                if d < closest.0 {
                    closest = (d, z.min(nb), z.max(nb));
                }
                if d < eps {
                    return Err(Error::OrbitAccumulates { a: closest.1, b: closest.2 });
                }
                if set.len() > cap {
                    return Err(Error::OrbitAccumulates { a: closest.1, b: closest.2 });
                }
                queue.push_back(z);
            }
        }
    }
    Ok(RadonMeasure::comb(set.into_keys().map(|k| k.0).collect()))
}
