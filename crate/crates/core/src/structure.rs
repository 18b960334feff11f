//! Fixed sets, crossed pairs and freeness.

use crate::decimal;
use crate::error::{Error, Result};
use crate::expr::HomeoExpr;
use crate::group::{reduced_words, GroupSpec, Word};
use crate::interval::IntervalQ;
use crate::tol;
use serde::{Deserialize, Serialize};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FixedKind {
    /// An isolated fixed point.
    Point,
    /// An interval of fixed points.
    Plateau,
    /// A stretch shorter than the resolution in which fixed points
    /// accumulate; its two ends are fixed.
    Cluster,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Sign {
    Above,
    Below,
}

impl Sign {
    fn of(d: f64) -> Sign {
        if d > 0.0 {
            Sign::Above
        } else {
            Sign::Below
        }
    }

    fn flip(self) -> Sign {
        match self {
            Sign::Above => Sign::Below,
            Sign::Below => Sign::Above,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct FixedPart {
    #[serde(with = "decimal")]
    pub lo: f64,
    #[serde(with = "decimal")]
    pub hi: f64,
    pub kind: FixedKind,
}

/// A component of the complement of the fixed set, clipped to the
/// window. An end that is a window edge rather than a fixed point is
/// flagged, since the true component continues past it.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Component {
    #[serde(with = "decimal")]
    pub lo: f64,
    #[serde(with = "decimal")]
    pub hi: f64,
    pub sign: Sign,
    pub lo_fixed: bool,
    pub hi_fixed: bool,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    /// Read off the expression tree.
    Structural,
    /// Grid scan with bisection.
    Scan,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FixedSetReport {
    pub window: IntervalQ,
    pub fixed_intervals: Vec<FixedPart>,
    pub complement_components: Vec<Component>,
    pub method: Method,
    pub advisories: Vec<String>,
}

#[derive(Clone, Copy, Debug, PartialEq)]
enum Seg {
    Fixed(f64, f64, FixedKind),
    Move(f64, f64, Sign),
}

impl FixedSetReport {
    pub fn is_empty(&self) -> bool {
        self.fixed_intervals.is_empty()
    }

    /// A fixed point strictly inside the window, if any.
    pub fn interior_fixed_point(&self) -> Option<f64> {
        let w = self.window;
        self.fixed_intervals.iter().find_map(|p| {
            if w.contains_open(p.lo) {
                Some(p.lo)
            } else if w.contains_open(p.hi) {
                Some(p.hi)
            } else if p.lo < w.lo() && p.hi > w.hi() {
                Some(w.midpoint())
            } else {
                None
            }
        })
    }

    /// No fixed point anywhere in `(lo, hi)`.
    pub fn free_on(&self, lo: f64, hi: f64) -> bool {
        self.fixed_intervals.iter().all(|p| p.hi <= lo || p.lo >= hi)
    }

    pub fn component_containing(&self, x: f64) -> Option<&Component> {
        self.complement_components.iter().find(|c| c.lo < x && x < c.hi)
    }

    /// The fixed part holding `x`, if `x` is fixed.
    pub fn part_containing(&self, x: f64) -> Option<&FixedPart> {
        self.fixed_intervals.iter().find(|p| p.lo <= x && x <= p.hi)
    }

    /// Ends of fixed parts, i.e. points known to be fixed.
    pub fn fixed_points(&self) -> Vec<f64> {
        let mut v: Vec<f64> = self
            .fixed_intervals
            .iter()
            .flat_map(|p| if p.lo == p.hi { vec![p.lo] } else { vec![p.lo, p.hi] })
            .collect();
        v.dedup();
        v
    }

    fn from_segs(window: IntervalQ, segs: Vec<Seg>, method: Method, advisories: Vec<String>) -> Self {
        let segs = normalize(segs);
        let mut fixed = Vec::new();
        let mut comps = Vec::new();
        for (k, s) in segs.iter().enumerate() {
            match *s {
                Seg::Fixed(lo, hi, kind) => fixed.push(FixedPart { lo, hi, kind }),
                Seg::Move(lo, hi, sign) => {
                    comps.push(Component { lo, hi, sign, lo_fixed: k > 0, hi_fixed: k + 1 < segs.len() })
                }
            }
        }
        FixedSetReport { window, fixed_intervals: fixed, complement_components: comps, method, advisories }
    }
}

/// Merge touching fixed parts and equal-signed moving stretches; a sign
/// change between two moving stretches becomes a fixed point.
fn normalize(segs: Vec<Seg>) -> Vec<Seg> {
    let mut out: Vec<Seg> = Vec::with_capacity(segs.len());
    for s in segs {
        if let Seg::Move(lo, hi, _) = s {
            if !(lo < hi) {
                continue;
            }
        }
        match (out.last_mut(), s) {
            (Some(Seg::Fixed(_, h, k)), Seg::Fixed(lo, hi, k2)) if lo <= *h => {
                *h = h.max(hi);
                *k = merged_kind(*k, k2);
            }
            (Some(Seg::Move(_, h, sg)), Seg::Move(lo, hi, sg2)) if *sg == sg2 && lo <= *h => {
                *h = h.max(hi);
            }
            (Some(Seg::Move(_, h, _)), Seg::Move(lo, hi, sg2)) => {
                let t = *h;
                out.push(Seg::Fixed(t, t, FixedKind::Point));
                out.push(Seg::Move(lo.max(t), hi, sg2));
            }
            _ => out.push(s),
        }
    }
    for s in out.iter_mut() {
        if let Seg::Fixed(lo, hi, k) = s {
            if *k == FixedKind::Point && hi > lo {
                *k = FixedKind::Cluster;
            }
        }
    }
    out
}

fn merged_kind(a: FixedKind, b: FixedKind) -> FixedKind {
    use FixedKind::*;
    match (a, b) {
        (Plateau, _) | (_, Plateau) => Plateau,
        (Cluster, _) | (_, Cluster) => Cluster,
        _ => Point,
    }
}

/// Tile `[lo, hi]` from fixed items, with `gap_sign` for the stretches
/// between them.
fn tile(lo: f64, hi: f64, items: &[(f64, f64, FixedKind)], gap_sign: impl Fn(f64, f64) -> Sign) -> Vec<Seg> {
    let mut segs = Vec::new();
    let mut cursor = lo;
    for &(a, b, k) in items {
        let (a, b) = (a.max(lo), b.min(hi));
        if a > b {
            continue;
        }
        if a > cursor {
            segs.push(Seg::Move(cursor, a, gap_sign(cursor, a)));
        }
        segs.push(Seg::Fixed(a, b, k));
        cursor = cursor.max(b);
    }
    if cursor < hi {
        segs.push(Seg::Move(cursor, hi, gap_sign(cursor, hi)));
    }
    segs
}

/// Fixed structure of a map whose displacement `d` is affine on `[lo, hi]`.
fn linear_segs(lo: f64, hi: f64, d_lo: f64, d_hi: f64) -> Vec<Seg> {
    let z = 1e-12 * (1.0 + lo.abs() + hi.abs());
    let (zl, zh) = (d_lo.abs() <= z, d_hi.abs() <= z);
    match (zl, zh) {
        (true, true) => vec![Seg::Fixed(lo, hi, FixedKind::Plateau)],
        (true, false) => vec![Seg::Fixed(lo, lo, FixedKind::Point), Seg::Move(lo, hi, Sign::of(d_hi))],
        (false, true) => vec![Seg::Move(lo, hi, Sign::of(d_lo)), Seg::Fixed(hi, hi, FixedKind::Point)],
        (false, false) if (d_lo > 0.0) == (d_hi > 0.0) => vec![Seg::Move(lo, hi, Sign::of(d_lo))],
        (false, false) => {
            let t = (lo + (hi - lo) * d_lo / (d_lo - d_hi)).clamp(lo, hi);
            vec![Seg::Move(lo, t, Sign::of(d_lo)), Seg::Fixed(t, t, FixedKind::Point), Seg::Move(t, hi, Sign::of(d_hi))]
        }
    }
}

/// Fixed structure read off the tree, when every node on the way has a
/// known one.
fn structural(f: &HomeoExpr, lo: f64, hi: f64, res: f64) -> Option<Vec<Seg>> {
    match f {
        HomeoExpr::Identity => Some(vec![Seg::Fixed(lo, hi, FixedKind::Plateau)]),
        HomeoExpr::Translation { shift } => Some(if *shift == 0.0 {
            vec![Seg::Fixed(lo, hi, FixedKind::Plateau)]
        } else {
            vec![Seg::Move(lo, hi, Sign::of(*shift))]
        }),
        HomeoExpr::Affine { .. } => {
            let d_lo = f.eval(lo).ok()? - lo;
            let d_hi = f.eval(hi).ok()? - hi;
            Some(linear_segs(lo, hi, d_lo, d_hi))
        }
        HomeoExpr::ExpBump { interval } => {
            let (a, b) = (interval.lo(), interval.hi());
            let items = [(f64::NEG_INFINITY, a, FixedKind::Plateau), (b, f64::INFINITY, FixedKind::Plateau)];
            Some(tile(lo, hi, &items, |_, _| Sign::Above))
        }
        HomeoExpr::Stage(s) => {
            let k = s.depth as f64;
            let mut items = vec![(f64::NEG_INFINITY, -k, FixedKind::Plateau)];
            if let Ok(w) = IntervalQ::new(lo.max(-k), hi.min(k)) {
                items.extend(
                    s.fixed_marks(&w, res)
                        .into_iter()
                        .map(|(a, b)| (a, b, if a == b { FixedKind::Point } else { FixedKind::Cluster })),
                );
            }
            items.push((k, f64::INFINITY, FixedKind::Plateau));
            Some(tile(lo, hi, &items, |_, _| Sign::Above))
        }
        HomeoExpr::Inverse { map } => {
            let segs = structural(map, lo, hi, res)?;
            Some(
                segs.into_iter()
                    .map(|s| match s {
                        Seg::Move(a, b, sg) => Seg::Move(a, b, sg.flip()),
                        other => other,
                    })
                    .collect(),
            )
        }
        HomeoExpr::Compose { maps } if maps.len() == 1 => structural(&maps[0], lo, hi, res),
        HomeoExpr::Compose { maps } if maps.iter().all(HomeoExpr::is_identity_node) => {
            Some(vec![Seg::Fixed(lo, hi, FixedKind::Plateau)])
        }
        HomeoExpr::Piecewise { pieces } => {
            let mut segs = Vec::new();
            let mut cursor = lo;
            for p in pieces {
                let (a, b) = (p.interval.lo().max(lo), p.interval.hi().min(hi));
                if a >= b {
                    continue;
                }
                if a > cursor {
                    segs.push(Seg::Fixed(cursor, a, FixedKind::Plateau));
                }
                segs.extend(structural(&p.map, a, b, res)?);
                cursor = b;
            }
            if cursor < hi {
                segs.push(Seg::Fixed(cursor, hi, FixedKind::Plateau));
            }
            Some(segs)
        }
        _ => None,
    }
}

/// Grid scan of `f(x) - x`, refined by bisection.
fn scan(f: &HomeoExpr, window: &IntervalQ, grid: usize, eps: f64, advisories: &mut Vec<String>) -> Result<Vec<Seg>> {
    let disp = |x: f64| -> Result<f64> { Ok(f.eval(x)? - x) };
    let mut xs = window.grid(grid.max(2));
    xs.extend(f.hints(window));
    xs.sort_by(f64::total_cmp);
    xs.dedup();
    let ds: Vec<f64> = xs.iter().map(|&x| disp(x)).collect::<Result<_>>()?;
    let zero = |d: f64| d.abs() <= eps;

    let mut items: Vec<(f64, f64, FixedKind)> = Vec::new();
    let push_point = |items: &mut Vec<(f64, f64, FixedKind)>, x: f64| items.push((x, x, FixedKind::Point));
    let mut prev_cell_root = false;
    for i in 0..xs.len() {
        if zero(ds[i]) {
            push_point(&mut items, xs[i]);
        }
        if i + 1 == xs.len() {
            break;
        }
        let (a, b, da, db) = (xs[i], xs[i + 1], ds[i], ds[i + 1]);
        let mid = 0.5 * (a + b);
        let dm = disp(mid)?;
        let mut cell_root = false;
        if zero(da) && zero(db) {
            if zero(dm) {
                items.push((a, b, FixedKind::Plateau));
            }
        } else if !zero(da) && !zero(db) {
            if (da > 0.0) != (db > 0.0) {
                push_point(&mut items, bisect(&disp, a, b, da, eps)?);
                cell_root = true;
            } else if !zero(dm) && (dm > 0.0) != (da > 0.0) {
                advisories.push(format!("GridTooCoarse: two sign changes inside [{a}, {b}]"));
                push_point(&mut items, bisect(&disp, a, mid, da, eps)?);
                push_point(&mut items, bisect(&disp, mid, b, dm, eps)?);
                cell_root = true;
            }
        }
        if cell_root && prev_cell_root {
            advisories.push(format!("GridTooCoarse: sign changes in adjacent cells near {a}"));
        }
        prev_cell_root = cell_root;
    }
    items.sort_by(|p, q| p.0.total_cmp(&q.0));
    let sign_between = |lo: f64, hi: f64| -> Sign {
        // Largest displacement among the nodes inside, else the midpoint.
        let best = xs
            .iter()
            .zip(&ds)
            .filter(|(x, _)| lo < **x && **x < hi)
            .map(|(_, d)| *d)
            .max_by(|p, q| p.abs().total_cmp(&q.abs()));
        let d = best.unwrap_or_else(|| disp(0.5 * (lo + hi)).unwrap_or(0.0));
        Sign::of(d)
    };
    Ok(tile(window.lo(), window.hi(), &items, sign_between))
}

fn bisect(disp: &impl Fn(f64) -> Result<f64>, mut a: f64, mut b: f64, da: f64, eps: f64) -> Result<f64> {
    let up = da > 0.0;
    for _ in 0..200 {
        let m = 0.5 * (a + b);
        if m <= a || m >= b {
            break;
        }
        let dm = disp(m)?;
        if dm.abs() <= eps * 1e-3 {
            return Ok(m);
        }
        if (dm > 0.0) == up {
            a = m;
        } else {
            b = m;
        }
    }
    Ok(0.5 * (a + b))
}

/// Fixed set of `f` on a finite window.
///
/// Maps built from identity, affine, bump, piecewise and stage nodes get
/// their fixed set read off the tree exactly (up to the cluster
/// resolution for stage maps). Anything else is scanned on `grid`
/// points plus the tree's hint points, with `|f(x) - x| <= eps_fix`
/// counting as fixed.
pub fn fixed_set(f: &HomeoExpr, window: &IntervalQ, grid: usize) -> Result<FixedSetReport> {
    fixed_set_with(f, window, grid, tol::EPS_FIX, tol::FIX_RESOLUTION)
}

pub fn fixed_set_with(f: &HomeoExpr, window: &IntervalQ, grid: usize, eps: f64, res: f64) -> Result<FixedSetReport> {
    if !window.is_bounded() {
        return Err(Error::Precondition(format!("window {window} must be finite")));
    }
    if grid < 2 {
        return Err(Error::Precondition("grid needs at least 2 points".into()));
    }
    if let Some(segs) = structural(f, window.lo(), window.hi(), res) {
        return Ok(FixedSetReport::from_segs(*window, segs, Method::Structural, Vec::new()));
    }
    scan_fixed_set(f, window, grid, eps)
}

/// Always scan, ignoring any structure of the tree.
pub fn scan_fixed_set(f: &HomeoExpr, window: &IntervalQ, grid: usize, eps: f64) -> Result<FixedSetReport> {
    let mut adv = Vec::new();
    let segs = scan(f, window, grid, eps, &mut adv)?;
    adv.dedup();
    Ok(FixedSetReport::from_segs(*window, segs, Method::Scan, adv))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Endpoint {
    Lo,
    Hi,
}

/// `moved` sends an endpoint of the component `(lo, hi)` of the
/// complement of `Fix(fixer)` into `(lo, hi)`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CrossWitness {
    pub fixer: String,
    pub mover: String,
    #[serde(with = "decimal")]
    pub lo: f64,
    #[serde(with = "decimal")]
    pub hi: f64,
    pub endpoint: Endpoint,
    #[serde(with = "decimal")]
    pub sent: f64,
    /// Distance of the image from the nearer end of the component.
    #[serde(with = "decimal")]
    pub depth: f64,
}

enum Probe {
    Inside(f64),
    Outside,
    Band(f64),
}

fn classify_depth(d: f64, eps: f64) -> Probe {
    if d > 2.0 * eps {
        Probe::Inside(d)
    } else if d > eps {
        Probe::Band(d)
    } else {
        Probe::Outside
    }
}

/// Search for a crossing of `f` and `g` within `window`, in both orders.
///
/// Only endpoints that are fixed points are tested: a window edge or an
/// infinite end can never be sent inside. An image deeper than
/// `2 eps` into the component is a witness; within `eps` of an end it
/// has landed on the fixed set; in between the call reports
/// `Inconclusive` unless a definite witness turns up elsewhere.
pub fn is_crossed(
    (fname, f): (&str, &HomeoExpr),
    (gname, g): (&str, &HomeoExpr),
    window: &IntervalQ,
    grid: usize,
    eps: f64,
) -> Result<Option<CrossWitness>> {
    let mut band: Option<(f64, f64)> = None;
    for ((an, a), (bn, b)) in [((fname, f), (gname, g)), ((gname, g), (fname, f))] {
        let report = fixed_set_with(a, window, grid, eps, tol::FIX_RESOLUTION)?;
        for c in &report.complement_components {
            let ends = [(Endpoint::Lo, c.lo, c.lo_fixed), (Endpoint::Hi, c.hi, c.hi_fixed)];
            for (which, e, fixed) in ends {
                if !fixed {
                    continue;
                }
                let y = b.eval(e)?;
                let depth = (y - c.lo).min(c.hi - y);
                match classify_depth(depth, eps) {
                    Probe::Inside(depth) => {
                        return Ok(Some(CrossWitness {
                            fixer: an.to_string(),
                            mover: bn.to_string(),
                            lo: c.lo,
                            hi: c.hi,
                            endpoint: which,
                            sent: y,
                            depth,
                        }))
                    }
                    Probe::Band(d) => {
                        band.get_or_insert((e, d));
                    }
                    Probe::Outside => {}
                }
            }
        }
    }
    match band {
        Some((point, margin)) => Err(Error::Inconclusive { point, margin }),
        None => Ok(None),
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ConjugationCheck {
    pub holds: bool,
    pub points: usize,
    #[serde(with = "decimal")]
    pub worst_residual: f64,
}

/// For fixed points `x` of `f`, check that `g f g^-1` fixes `g(x)`.
pub fn fix_conjugation_check(
    f: &HomeoExpr,
    g: &HomeoExpr,
    window: &IntervalQ,
    samples: usize,
) -> Result<ConjugationCheck> {
    let report = fixed_set(f, window, samples.max(2))?;
    let mut pts = report.fixed_points();
    if report.fixed_intervals.iter().any(|p| p.kind == FixedKind::Plateau) {
        for p in report.fixed_intervals.iter().filter(|p| p.kind == FixedKind::Plateau) {
            if let Ok(i) = IntervalQ::new(p.lo, p.hi) {
                pts.extend(i.cell_midpoints(8));
            }
        }
    }
    if pts.len() > samples.max(1) {
        let step = pts.len() as f64 / samples as f64;
        pts = (0..samples).map(|k| pts[(k as f64 * step) as usize]).collect();
    }
    let conj = HomeoExpr::Compose { maps: vec![g.clone(), f.clone(), g.inverse()] };
    let mut worst: f64 = 0.0;
    for &x in &pts {
        let gx = g.eval(x)?;
        worst = worst.max((conj.eval(gx)? - gx).abs());
    }
    Ok(ConjugationCheck { holds: worst <= tol::EPS_FIX, points: pts.len(), worst_residual: worst })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FreenessReport {
    pub free: bool,
    pub word_length: usize,
    pub words_checked: usize,
    /// A non-identity word with a fixed point in the window.
    pub witness: Option<String>,
    #[serde(with = "decimal::option")]
    pub fixed_point: Option<f64>,
}

/// Sup of `|w(x) - x|` over the grid is at most `eps`.
pub fn acts_as_identity(w: &HomeoExpr, window: &IntervalQ, grid: usize, eps: f64) -> Result<bool> {
    for x in window.grid(grid) {
        if (w.eval(x)? - x).abs() > eps {
            return Ok(false);
        }
    }
    Ok(true)
}

/// First non-identity word of length at most `word_len` that has a
/// fixed point in the window, in the canonical word order.
pub fn first_word_with_fixed_point(
    gens: &GroupSpec,
    window: &IntervalQ,
    word_len: usize,
    grid: usize,
) -> Result<(usize, Option<(Word, f64)>)> {
    let eps = gens.tolerances.eps_fix;
    let words = reduced_words(&gens.name_order(), word_len);
    let mut checked = 0;
    for w in words {
        checked += 1;
        let e = gens.word_expr(&w);
        if acts_as_identity(&e, window, grid, eps)? {
            continue;
        }
        let rep = fixed_set_with(&e, window, grid, eps, gens.tolerances.fix_resolution)?;
        if let Some(p) = rep.fixed_intervals.first() {
            return Ok((checked, Some((w, p.lo))));
        }
    }
    Ok((checked, None))
}

pub fn is_free_action(gens: &GroupSpec, window: &IntervalQ, word_len: usize) -> Result<FreenessReport> {
    let grid = gens.budgets.samples.max(2);
    let (checked, hit) = first_word_with_fixed_point(gens, window, word_len, grid)?;
    Ok(match hit {
        Some((w, x)) => FreenessReport {
            free: false,
            word_length: word_len,
            words_checked: checked,
            witness: Some(gens.word_name(&w)),
            fixed_point: Some(x),
        },
        None => FreenessReport {
            free: true,
            word_length: word_len,
            words_checked: checked,
            witness: None,
            fixed_point: None,
        },
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expr::Piece;

    fn pl(knots: &[(f64, f64)]) -> HomeoExpr {
        let pieces = knots
            .windows(2)
            .map(|w| {
                let s = (w[1].1 - w[0].1) / (w[1].0 - w[0].0);
                Piece { interval: IntervalQ::closed(w[0].0, w[1].0), map: HomeoExpr::affine(s, w[0].1 - s * w[0].0) }
            })
            .collect();
        HomeoExpr::Piecewise { pieces }
    }

    #[test]
    fn translation_has_one_component() {
        let r = fixed_set(&HomeoExpr::translation(1.0), &IntervalQ::closed(-5.0, 5.0), 100).unwrap();
        assert!(r.is_empty());
        assert_eq!(r.complement_components.len(), 1);
        assert_eq!(r.complement_components[0].sign, Sign::Above);
        assert!(!r.complement_components[0].lo_fixed);
    }

    #[test]
    fn bump_is_fixed_outside_its_interval() {
        let r = fixed_set(&HomeoExpr::exp_bump(-1.0, 1.0), &IntervalQ::closed(-2.0, 2.0), 100).unwrap();
        assert_eq!(
            r.fixed_intervals,
            vec![
                FixedPart { lo: -2.0, hi: -1.0, kind: FixedKind::Plateau },
                FixedPart { lo: 1.0, hi: 2.0, kind: FixedKind::Plateau }
            ]
        );
        assert_eq!(r.complement_components.len(), 1);
        let c = r.complement_components[0];
        assert_eq!((c.lo, c.hi, c.sign), (-1.0, 1.0, Sign::Above));
        assert!(c.lo_fixed && c.hi_fixed);
    }

    #[test]
    fn pl_with_three_fixed_points() {
        let f = pl(&[(0.0, 0.0), (0.25, 0.375), (0.5, 0.5), (0.75, 0.625), (1.0, 1.0)]);
        for rep in [
            fixed_set(&f, &IntervalQ::closed(0.0, 1.0), 64).unwrap(),
            scan_fixed_set(&f, &IntervalQ::closed(0.0, 1.0), 64, 1e-9).unwrap(),
        ] {
            let pts: Vec<f64> = rep.fixed_intervals.iter().map(|p| p.lo).collect();
            assert_eq!(pts, vec![0.0, 0.5, 1.0], "{:?}", rep.method);
            let signs: Vec<Sign> = rep.complement_components.iter().map(|c| c.sign).collect();
            assert_eq!(signs, vec![Sign::Above, Sign::Below]);
        }
    }

    #[test]
    fn crossing_examples() {
        let w = IntervalQ::closed(-2.0, 2.0);
        let t1 = HomeoExpr::translation(1.0);
        let t2 = HomeoExpr::translation(2.0);
        assert!(is_crossed(("a", &t1), ("b", &t2), &w, 200, 1e-9).unwrap().is_none());
        let f = pl(&[(0.0, 0.0), (0.5, 0.75), (1.0, 1.0)]);
        let g = HomeoExpr::translation(0.5);
        let wit = is_crossed(("f", &f), ("g", &g), &w, 200, 1e-9).unwrap().unwrap();
        assert_eq!((wit.lo, wit.hi, wit.endpoint, wit.sent), (0.0, 1.0, Endpoint::Lo, 0.5));
        assert_eq!(wit.fixer, "f");
    }

    #[test]
    fn conjugation_moves_fixed_points() {
        let f = pl(&[(-1.0, -1.0), (0.0, 0.0), (1.0, 0.5), (2.0, 2.0)]);
        let r = fix_conjugation_check(&f, &HomeoExpr::translation(1.0), &IntervalQ::closed(-3.0, 3.0), 100).unwrap();
        assert!(r.holds);
        let id = fix_conjugation_check(&HomeoExpr::Identity, &f, &IntervalQ::closed(-3.0, 3.0), 50).unwrap();
        assert!(id.holds);
    }

    #[test]
    fn freeness() {
        let w = IntervalQ::closed(-10.0, 10.0);
        let mut g = GroupSpec::new(
            "t",
            vec![("a", HomeoExpr::translation(1.0)), ("b", HomeoExpr::translation(2f64.sqrt()))],
            w,
        );
        g.budgets.samples = 50;
        assert!(is_free_action(&g, &w, 6).unwrap().free);
        let p = GroupSpec::new("p", vec![("p", pl(&[(-1.0, -1.0), (0.0, 0.0), (1.0, 0.5), (2.0, 2.0)]))], w);
        let r = is_free_action(&p, &w, 3).unwrap();
        assert!(!r.free);
        assert_eq!(r.witness.as_deref(), Some("p"));
    }

    #[test]
    fn two_roots_in_one_cell_are_flagged() {
        // The bump lowered by 0.13 crosses the diagonal near +-0.14.
        let f = HomeoExpr::Compose { maps: vec![HomeoExpr::translation(-0.13), HomeoExpr::exp_bump(-1.0, 1.0)] };
        let r = scan_fixed_set(&f, &IntervalQ::closed(-0.9, 0.9), 4, 1e-9).unwrap();
        assert!(r.advisories.iter().any(|a| a.starts_with("GridTooCoarse")));
        let root = (1.0 + 2.0 / 0.13f64.ln()).sqrt();
        let pts = r.fixed_points();
        assert_eq!(pts.len(), 2);
        assert!((pts[0] + root).abs() < 1e-8 && (pts[1] - root).abs() < 1e-8, "{pts:?}");
        assert_eq!(r.complement_components[1].sign, Sign::Above);
    }
}
