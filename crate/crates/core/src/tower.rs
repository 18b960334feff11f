//! Towers: nested intervals whose maps fix exactly their ends.

use crate::decimal;
use crate::error::{Error, Result};
use crate::expr::HomeoExpr;
use crate::group::{reduced_words, Budget, GroupSpec, Word};
use crate::interval::IntervalQ;
use crate::structure::{acts_as_identity, fixed_set_with, FixedSetReport, Sign};
use crate::tol;
use serde::{Deserialize, Serialize};
use std::collections::HashMap;
use std::time::Instant;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TowerLevel {
    pub interval: IntervalQ,
    pub name: String,
    pub map: HomeoExpr,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct Tower {
    pub levels: Vec<TowerLevel>,
}

impl Tower {
    pub fn push(&mut self, interval: IntervalQ, name: impl Into<String>, map: HomeoExpr) {
        self.levels.push(TowerLevel { interval, name: name.into(), map });
    }

    pub fn len(&self) -> usize {
        self.levels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.levels.is_empty()
    }

    pub fn top(&self) -> Option<&TowerLevel> {
        self.levels.last()
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LevelCheck {
    pub level: usize,
    pub name: String,
    pub interval: IntervalQ,
    #[serde(with = "decimal")]
    pub lo_residual: f64,
    #[serde(with = "decimal")]
    pub hi_residual: f64,
    pub ends_fixed: bool,
    pub interior_free: bool,
    pub interior_sign: Option<Sign>,
    /// Strictly inside the next level; `None` on the top level.
    pub nested: Option<bool>,
    pub nested_in_interior: Option<bool>,
    pub pass: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TowerReport {
    pub levels: Vec<LevelCheck>,
    #[serde(with = "decimal")]
    pub tolerance: f64,
    pub pass: bool,
    pub failures: Vec<String>,
}

/// Re-derive every level's fixed set and check that the map fixes the
/// ends of its interval and nothing inside, and that the intervals are
/// strictly nested.
pub fn validate_tower(t: &Tower, eps: f64) -> TowerReport {
    let mut levels = Vec::new();
    let mut failures = Vec::new();
    if t.levels.is_empty() {
        failures.push("tower has no levels".to_string());
    }
    for (i, lvl) in t.levels.iter().enumerate() {
        let (lo, hi) = (lvl.interval.lo(), lvl.interval.hi());
        let res = |x: f64| lvl.map.eval(x).map(|y| (y - x).abs()).unwrap_or(f64::INFINITY);
        let (rl, rh) = (res(lo), res(hi));
        let ends_fixed = rl <= eps && rh <= eps;
        let (interior_free, interior_sign) =
            match fixed_set_with(&lvl.map, &lvl.interval, 2001, eps, tol::FIX_RESOLUTION) {
                Ok(rep) => {
                    let free = rep.free_on(lo, hi) && rep.complement_components.len() == 1;
                    (free, rep.complement_components.first().filter(|_| free).map(|c| c.sign))
                }
                Err(_) => (false, None),
            };
        let next = t.levels.get(i + 1).map(|n| n.interval);
        let nested = next.map(|n| lvl.interval.is_subset_of(&n) && lvl.interval != n);
        let nested_in_interior = next.map(|n| lvl.interval.is_interior_subset_of(&n));
        let pass = ends_fixed && interior_free && nested.unwrap_or(true);
        let n = i + 1;
        if !ends_fixed {
            failures.push(format!("level {n}: ends not fixed (residuals {rl:e}, {rh:e})"));
        }
        if !interior_free {
            failures.push(format!("level {n}: fixed points inside {}", lvl.interval));
        }
        if nested == Some(false) {
            failures.push(format!("level {n}: {} is not strictly inside the next level", lvl.interval));
        }
        levels.push(LevelCheck {
            level: n,
            name: lvl.name.clone(),
            interval: lvl.interval,
            lo_residual: rl,
            hi_residual: rh,
            ends_fixed,
            interior_free,
            interior_sign,
            nested,
            nested_in_interior,
            pass,
        });
    }
    TowerReport { pass: failures.is_empty(), levels, tolerance: eps, failures }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "status", rename_all = "snake_case")]
pub enum SearchStatus {
    /// The top level contains the window.
    Covered,
    BudgetExhausted {
        reason: String,
    },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TowerSearch {
    pub tower: Tower,
    pub status: SearchStatus,
    pub words_tried: usize,
}

impl TowerSearch {
    pub fn covered(&self) -> bool {
        self.status == SearchStatus::Covered
    }
}

/// Fixed sets of words, computed once per search.
struct WordCache<'a> {
    gens: &'a GroupSpec,
    window: IntervalQ,
    grid: usize,
    reports: HashMap<Word, Option<FixedSetReport>>,
}

impl<'a> WordCache<'a> {
    fn new(gens: &'a GroupSpec, window: IntervalQ) -> Self {
        WordCache { gens, window, grid: gens.budgets.samples.max(2), reports: HashMap::new() }
    }

    /// `None` for words acting as the identity on the window.
    fn report(&mut self, w: &Word) -> Result<Option<&FixedSetReport>> {
        if !self.reports.contains_key(w) {
            let e = self.gens.word_expr(w);
            let t = &self.gens.tolerances;
            let rep = if acts_as_identity(&e, &self.window, self.grid, t.eps_fix)? {
                None
            } else {
                Some(fixed_set_with(&e, &self.window, self.grid, t.eps_fix, t.fix_resolution)?)
            };
            self.reports.insert(w.clone(), rep);
        }
        Ok(self.reports[w].as_ref())
    }
}

fn covers(i: &IntervalQ, window: &IntervalQ) -> bool {
    i.lo() <= window.lo() && i.hi() >= window.hi()
}

/// Grow `tower` from `current` by pushers drawn from words in `members`.
#[allow(clippy::too_many_arguments)]
fn grow(
    gens: &GroupSpec,
    members: &[usize],
    window: &IntervalQ,
    budget: &Budget,
    mut current: IntervalQ,
    tower: &mut Tower,
    cache: &mut WordCache,
    started: Instant,
) -> Result<(SearchStatus, usize)> {
    let mut order = gens.name_order();
    order.retain(|g| members.contains(g));
    let words = reduced_words(&order, budget.word_length);
    let mut tried = 0;
    while !covers(&current, window) {
        if tower.len() >= budget.levels {
            return Ok((
                SearchStatus::BudgetExhausted { reason: format!("level budget {} reached", budget.levels) },
                tried,
            ));
        }
        let mut found = None;
        for w in &words {
            if started.elapsed().as_secs_f64() > budget.wall_clock_secs {
                return Ok((SearchStatus::BudgetExhausted { reason: "wall-clock budget spent".into() }, tried));
            }
            tried += 1;
            let Some(rep) = cache.report(w)? else { continue };
            if !rep.free_on(current.lo(), current.hi())
                || rep.part_containing(current.lo()).is_some()
                || rep.part_containing(current.hi()).is_some()
            {
                continue;
            }
            let Some(c) = rep.component_containing(current.midpoint()) else { continue };
            if !(c.lo_fixed && c.hi_fixed && c.lo < current.lo() && current.hi() < c.hi) {
                continue;
            }
            found = Some((w.clone(), IntervalQ::closed(c.lo, c.hi)));
            break;
        }
        let Some((w, next)) = found else {
            return Ok((
                SearchStatus::BudgetExhausted { reason: format!("no pusher up to word length {}", budget.word_length) },
                tried,
            ));
        };
        tower.push(next, gens.word_name(&w), gens.word_expr(&w));
        current = next;
    }
    Ok((SearchStatus::Covered, tried))
}

/// Constructive tower search: a seed element and one of its bounded
/// complement components, then repeatedly the first word with no fixed
/// point on the current interval, extended to its complement component.
pub fn search_tower(gens: &GroupSpec, window: &IntervalQ, budget: &Budget) -> Result<TowerSearch> {
    let started = Instant::now();
    let mut cache = WordCache::new(gens, *window);
    let all: Vec<usize> = (0..gens.generators.len()).collect();
    let words = reduced_words(&gens.name_order(), budget.word_length);
    let mut seed = None;
    let mut tried = 0;
    let centre = window.midpoint();
    for w in &words {
        tried += 1;
        let Some(rep) = cache.report(w)? else { continue };
        if rep.is_empty() {
            continue;
        }
        let best = rep.complement_components.iter().filter(|c| c.lo_fixed && c.hi_fixed).min_by(|a, b| {
            let da = (0.5 * (a.lo + a.hi) - centre).abs();
            let db = (0.5 * (b.lo + b.hi) - centre).abs();
            da.total_cmp(&db)
        });
        if let Some(c) = best {
            seed = Some((w.clone(), IntervalQ::closed(c.lo, c.hi)));
            break;
        }
    }
    let Some((w, first)) = seed else {
        return Err(Error::NoSeedElement(format!(
            "no word up to length {} has a bounded complement component in {window}",
            budget.word_length
        )));
    };
    let mut tower = Tower::default();
    tower.push(first, gens.word_name(&w), gens.word_expr(&w));
    let (status, more) = grow(gens, &all, window, budget, first, &mut tower, &mut cache, started)?;
    Ok(TowerSearch { tower, status, words_tried: tried + more })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct NilpotentTower {
    /// `Fix(A)` meets this interval exactly at its ends.
    pub base: IntervalQ,
    pub search: TowerSearch,
    /// Largest distance from a sampled commutator of B-generators to its
    /// nearest A-word.
    #[serde(with = "decimal")]
    pub commutator_residual: f64,
}

/// Common fixed set of several maps as closed pieces `(lo, hi)`.
fn common_fixed(reports: &[FixedSetReport]) -> Vec<(f64, f64)> {
    let mut acc: Option<Vec<(f64, f64)>> = None;
    for r in reports {
        let parts: Vec<(f64, f64)> = r.fixed_intervals.iter().map(|p| (p.lo, p.hi)).collect();
        acc = Some(match acc {
            None => parts,
            Some(prev) => {
                let mut out = Vec::new();
                for &(a, b) in &prev {
                    for &(c, d) in &parts {
                        let (lo, hi) = (a.max(c), b.min(d));
                        if lo <= hi {
                            out.push((lo, hi));
                        }
                    }
                }
                out
            }
        });
    }
    acc.unwrap_or_default()
}

/// Tower for a declared pair `A ⊴ B` with `[B, B] ≤ A`: a component
/// `(a0, b0)` of the complement of `Fix(A)` with finite ends, then
/// pushers from `B`.
pub fn search_tower_nilpotent(gens: &GroupSpec, window: &IntervalQ, budget: &Budget) -> Result<NilpotentTower> {
    let started = Instant::now();
    let (Some(a_names), Some(b_names)) = (&gens.subgroups.a, &gens.subgroups.b) else {
        return Err(Error::Precondition("subgroups A and B must be declared".into()));
    };
    let a = gens.members(Some(a_names));
    let b = gens.members(Some(b_names));
    let grid = gens.budgets.samples.max(2);
    let eps = gens.tolerances.eps_fix;

    // [B, B] ≤ A, sampled: each generator commutator must act like some
    // short A-word.
    let mut a_order = gens.name_order();
    a_order.retain(|g| a.contains(g));
    let mut a_words = vec![Word::default()];
    a_words.extend(reduced_words(&a_order, budget.word_length.min(3)));
    let a_exprs: Vec<HomeoExpr> = a_words.iter().map(|w| gens.word_expr(w)).collect();
    let pts = window.grid(grid.min(401));
    let mut worst: f64 = 0.0;
    for (i, &x) in b.iter().enumerate() {
        for &y in &b[i + 1..] {
            let (gx, gy) = (gens.map(x), gens.map(y));
            let comm = HomeoExpr::Compose { maps: vec![gx.clone(), gy.clone(), gx.inverse(), gy.inverse()] };
            let cv: Vec<f64> = pts.iter().map(|&p| comm.eval(p)).collect::<Result<_>>()?;
            let mut best = f64::INFINITY;
            for e in &a_exprs {
                let mut d: f64 = 0.0;
                for (&p, &c) in pts.iter().zip(&cv) {
                    d = d.max((e.eval(p)? - c).abs());
                    if d > best {
                        break;
                    }
                }
                best = best.min(d);
            }
            worst = worst.max(best);
            if best > eps {
                return Err(Error::SeriesViolation(format!(
                    "[{}, {}] is {best:e} away from every A-word up to length {}",
                    gens.generators[x].name,
                    gens.generators[y].name,
                    budget.word_length.min(3)
                )));
            }
        }
    }

    let reports: Vec<FixedSetReport> = a
        .iter()
        .map(|&i| fixed_set_with(gens.map(i), window, grid, eps, gens.tolerances.fix_resolution))
        .collect::<Result<_>>()?;
    let fixed = common_fixed(&reports);
    let centre = window.midpoint();
    let mut best: Option<(f64, f64)> = None;
    for pair in fixed.windows(2) {
        let (lo, hi) = (pair[0].1, pair[1].0);
        if lo < hi {
            let d = (0.5 * (lo + hi) - centre).abs();
            if best.is_none_or(|(l, h)| d < (0.5 * (l + h) - centre).abs()) {
                best = Some((lo, hi));
            }
        }
    }
    let Some((lo, hi)) = best else {
        return Err(Error::NoSeedElement(format!(
            "the complement of Fix(A) has no component with finite ends in {window}"
        )));
    };
    let base = IntervalQ::closed(lo, hi);
    let mut cache = WordCache::new(gens, *window);
    let mut tower = Tower::default();
    let (status, tried) = grow(gens, &b, window, budget, base, &mut tower, &mut cache, started)?;
    Ok(NilpotentTower { base, search: TowerSearch { tower, status, words_tried: tried }, commutator_residual: worst })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LexEntry {
    pub index: Vec<i64>,
    pub interval: IntervalQ,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LexFamily {
    pub base: IntervalQ,
    pub maps: Vec<HomeoExpr>,
    /// Inclusive index range per coordinate.
    pub bounds: Vec<(i64, i64)>,
    /// Entries in left-to-right order.
    pub entries: Vec<LexEntry>,
    /// Largest endpoint gap between `h_j(L_w)` and `L_{w + e_j}`.
    #[serde(with = "decimal")]
    pub shift_residual: f64,
    pub shift_rule_holds: bool,
}

fn power(h: &HomeoExpr, l: i64, x: f64) -> Result<f64> {
    let mut y = x;
    for _ in 0..l.unsigned_abs() {
        y = if l > 0 { h.eval(y)? } else { h.eval_inv(y)? };
    }
    Ok(y)
}

fn family_interval(base: &IntervalQ, hs: &[HomeoExpr], idx: &[i64]) -> Result<(f64, f64)> {
    let (mut lo, mut hi) = (base.lo(), base.hi());
    for (h, &l) in hs.iter().zip(idx).rev() {
        lo = power(h, l, lo)?;
        hi = power(h, l, hi)?;
    }
    Ok((lo, hi))
}

/// `L_w = h_1^{w_1} ... h_k^{w_k}(I_0)` over the index box, checked for
/// disjoint interiors, order and the shift rule.
///
/// `h_k` acts first and moves `I_0` furthest, so the order compared is
/// lexicographic with `w_k` most significant.
pub fn build_lex_family(base: IntervalQ, hs: &[HomeoExpr], bounds: &[(i64, i64)]) -> Result<LexFamily> {
    let k = hs.len();
    if k < 3 {
        return Err(Error::Precondition(format!("need at least 3 maps, got {k}")));
    }
    if bounds.len() != k || bounds.iter().any(|(a, b)| a > b) {
        return Err(Error::Precondition("index box must give one nonempty range per map".into()));
    }
    if !base.is_bounded() {
        return Err(Error::Precondition("base interval must be bounded".into()));
    }
    for (j, h) in hs.iter().enumerate() {
        for x in base.grid(33) {
            if h.eval(x)? <= x {
                return Err(Error::Precondition(format!("h_{} does not move {x} to the right", j + 1)));
            }
        }
    }
    let mut idx: Vec<i64> = bounds.iter().map(|b| b.0).collect();
    let mut entries = Vec::new();
    loop {
        let (lo, hi) = family_interval(&base, hs, &idx)?;
        entries.push(LexEntry { index: idx.clone(), interval: IntervalQ::new(lo, hi)? });
        let mut j = 0;
        loop {
            if j == k {
                break;
            }
            if idx[j] < bounds[j].1 {
                idx[j] += 1;
                break;
            }
            idx[j] = bounds[j].0;
            j += 1;
        }
        if j == k {
            break;
        }
    }
    let colex = |a: &Vec<i64>, b: &Vec<i64>| a.iter().rev().cmp(b.iter().rev());
    entries.sort_by(|a, b| colex(&a.index, &b.index));
    for w in entries.windows(2) {
        let (a, b) = (&w[0], &w[1]);
        if !(a.interval.hi() <= b.interval.lo() + tol::TAU_INV && a.interval.lo() < b.interval.lo()) {
            return Err(Error::OrderViolation { first: a.index.clone(), second: b.index.clone() });
        }
    }
    let pos: HashMap<Vec<i64>, usize> = entries.iter().enumerate().map(|(i, e)| (e.index.clone(), i)).collect();
    let mut worst: f64 = 0.0;
    for e in &entries {
        for (j, h) in hs.iter().enumerate() {
            let mut up = e.index.clone();
            up[j] += 1;
            if let Some(&t) = pos.get(&up) {
                let target = entries[t].interval;
                let lo = h.eval(e.interval.lo())?;
                let hi = h.eval(e.interval.hi())?;
                worst = worst.max((lo - target.lo()).abs()).max((hi - target.hi()).abs());
            }
        }
    }
    Ok(LexFamily {
        base,
        maps: hs.to_vec(),
        bounds: bounds.to_vec(),
        entries,
        shift_residual: worst,
        shift_rule_holds: worst <= tol::TAU_INV,
    })
}

/// The root of `a (1 + a)^(k - 2) = 1` in `(0, 1]`.
pub fn kopell_alpha_threshold(k: u32) -> Result<f64> {
    if k < 3 {
        return Err(Error::Precondition(format!("k must be at least 3, got {k}")));
    }
    let m = (k - 2) as f64;
    let g = |a: f64| a.ln() + m * a.ln_1p();
    let (mut lo, mut hi) = (f64::MIN_POSITIVE, 1.0);
    while hi - lo > 1e-13 {
        let mid = 0.5 * (lo + hi);
        if g(mid) < 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let mut a = 0.5 * (lo + hi);
    for _ in 0..3 {
        let step = g(a) / (1.0 / a + m / (1.0 + a));
        let next = a - step;
        if !(next > lo - 1e-12 && next < hi + 1e-12) {
            break;
        }
        a = next;
    }
    Ok(a)
}

/// `a (1 + a)^(k - 2) - 1`.
pub fn kopell_residual(k: u32, a: f64) -> f64 {
    a * (1.0 + a).powi(k as i32 - 2) - 1.0
}

/// Smallest `k >= 3` with `a (1 + a)^(k - 2) >= 1`.
pub fn kopell_min_depth(alpha: f64) -> Result<u32> {
    if !(alpha > 0.0 && alpha.is_finite()) {
        return Err(Error::Precondition(format!("alpha must be positive, got {alpha}")));
    }
    let guess = 2.0 + (1.0 / alpha).ln() / alpha.ln_1p();
    let mut k = (guess.ceil().max(3.0)).min(u32::MAX as f64) as u32;
    let holds = |k: u32| alpha.ln() + (k - 2) as f64 * alpha.ln_1p() >= -1e-15;
    while k > 3 && holds(k - 1) {
        k -= 1;
    }
    while !holds(k) {
        k += 1;
    }
    Ok(k)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MassPumpCertificate {
    pub level: usize,
    pub iterates: usize,
    pub base: IntervalQ,
    pub container: IntervalQ,
    pub images: Vec<IntervalQ>,
    pub disjoint: bool,
    pub contained: bool,
    pub monotone: bool,
    /// Distance from the last image to the end of the container it
    /// approaches.
    #[serde(with = "decimal")]
    pub remaining_gap: f64,
    /// Any invariant measure gives the container at least this multiple
    /// of the mass of the open base interval.
    pub mass_factor: usize,
    pub statement: String,
}

/// Iterate `f_{N+1}` on `int(I_N)` and certify that the images are
/// pairwise disjoint inside `I_{N+1}`. Levels are numbered from 1.
pub fn mass_pump(t: &Tower, n: usize, k: usize) -> Result<MassPumpCertificate> {
    if n == 0 || n + 1 > t.len() {
        return Err(Error::Precondition(format!("need levels {n} and {} in a tower of {}", n + 1, t.len())));
    }
    let base = t.levels[n - 1].interval;
    let next = &t.levels[n];
    let f = &next.map;
    let container = next.interval;
    let eps = tol::EPS_FIX;
    let mut images = vec![base];
    let (mut lo, mut hi) = (base.lo(), base.hi());
    let rightward = f.eval(base.midpoint())? >= base.midpoint();
    for i in 1..=k {
        let (nlo, nhi) = (f.eval(lo)?, f.eval(hi)?);
        let moved =
            if rightward { nlo > lo && nhi > hi && nlo >= hi - eps } else { nhi < hi && nlo < lo && nhi <= lo + eps };
        if !moved {
            return Err(Error::DisjointnessFailure { first: i - 1, second: i });
        }
        lo = nlo;
        hi = nhi;
        images.push(IntervalQ::new(lo, hi)?);
    }
    let contained = images.iter().all(|i| i.is_subset_of(&container));
    let remaining_gap = if rightward { container.hi() - hi } else { lo - container.lo() };
    Ok(MassPumpCertificate {
        level: n,
        iterates: k,
        base,
        container,
        disjoint: true,
        contained,
        monotone: true,
        remaining_gap,
        mass_factor: k + 1,
        statement: format!("mu(I_{}) >= {} * mu(int I_{}) for every invariant measure", n + 1, k + 1, n),
        images,
    })
}
