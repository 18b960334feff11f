//! Stage maps of the commuting C1 tower.
//!
//! Stage 1 is the flat bump on `[-1, 1]`. For `L >= 2` the ladder of
//! level `L` cuts `[-L, L]` into the core `P_0 = [-(L-1), L-1]` and the
//! pieces `P_m = [d_{m-1}, d_m]`, `P_{-m} = [c_m, c_{m-1}]` whose ends
//! accumulate at `±L`; the stage map `f_L` sends each `P_m` onto
//! `P_{m+1}` by the chart map between them. Every earlier stage `f_i`
//! is carried from level `L-1` to level `L` by conjugation: on `P_m` it
//! is `f_L^m f_i f_L^{-m}`. Chart maps compose exactly, so the power
//! `f_L^m` restricted to `P_0` is the single chart map `P_0 -> P_m` and
//! evaluation costs one chart pair per level regardless of `m`.
//! [`StageMap::eval_by_word`] evaluates the literal conjugation word one
//! ladder step at a time and serves as the independent route.

use crate::bump;
use crate::error::{Error, Result};
use crate::interval::IntervalQ;
use crate::tol;
use crate::yoccoz::YoccozMap;
use serde::{Deserialize, Serialize};

/// Breakpoint ladder: `d_n = L - tail(n)` and `c_n = -L + tail(n)`,
/// where `tail(n) = (n + 1)^(-p)`. `Harmonic` is `p = 1`.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum Ladder {
    #[default]
    Harmonic,
    Power {
        exponent: f64,
    },
}

enum Slot {
    Piece(i64),
    Unresolved,
}

impl Ladder {
    pub fn validate(&self) -> Result<()> {
        match *self {
            Ladder::Harmonic => Ok(()),
            Ladder::Power { exponent } if exponent.is_finite() && exponent > 0.0 => Ok(()),
            Ladder::Power { exponent } => {
                Err(Error::InvalidMap(format!("ladder exponent must be positive, got {exponent}")))
            }
        }
    }

    fn exponent(&self) -> f64 {
        match *self {
            Ladder::Harmonic => 1.0,
            Ladder::Power { exponent } => exponent,
        }
    }

    pub fn tail(&self, n: u64) -> f64 {
        match *self {
            Ladder::Harmonic => 1.0 / (n as f64 + 1.0),
            Ladder::Power { exponent } => (n as f64 + 1.0).powf(-exponent),
        }
    }

    /// `d_n` of the level-`level` ladder.
    pub fn right(&self, level: u32, n: u64) -> f64 {
        level as f64 - self.tail(n)
    }

    /// `c_n` of the level-`level` ladder.
    pub fn left(&self, level: u32, n: u64) -> f64 {
        -(level as f64) + self.tail(n)
    }

    /// Piece `P_m` of the level-`level` ladder.
    pub fn piece(&self, level: u32, m: i64) -> (f64, f64) {
        let k = m.unsigned_abs();
        match m.signum() {
            0 => (-(level as f64 - 1.0), level as f64 - 1.0),
            1 => (self.right(level, k - 1), self.right(level, k)),
            _ => (self.left(level, k), self.left(level, k - 1)),
        }
    }

    fn piece_width(&self, k: u64) -> f64 {
        self.tail(k - 1) - self.tail(k)
    }

    /// `(c_{n-1} - c_n) / (c_n - c_{n+1})`; tends to 1.
    pub fn gap_ratio(&self, n: u64) -> f64 {
        assert!(n >= 1);
        self.piece_width(n) / self.piece_width(n + 1)
    }

    /// Which piece holds `x`, assuming `level - 1 < |x| < level`.
    fn locate(&self, level: u32, x: f64) -> Slot {
        let ax = x.abs();
        let top = level as f64;
        let r = top - ax;
        let guess = r.powf(-1.0 / self.exponent()).floor();
        if !guess.is_finite() || guess > 1e15 {
            return Slot::Unresolved;
        }
        let mut k = (guess as u64).max(1);
        while k > 1 && ax < self.right(level, k - 1) {
            k -= 1;
        }
        while ax > self.right(level, k) {
            k += 1;
        }
        let lo = self.right(level, k - 1);
        let hi = self.right(level, k);
        if hi - lo < 16.0 * f64::EPSILON * top {
            return Slot::Unresolved;
        }
        let k = k as i64;
        Slot::Piece(if x > 0.0 { k } else { -k })
    }

    fn chart(&self, level: u32, from: i64, to: i64) -> YoccozMap {
        YoccozMap::between(self.piece(level, from), self.piece(level, to))
    }
}

/// Closed-form breakpoint data of one stage.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StageGeometry {
    /// Ladder level `L`: core `[-(L-1), L-1]`, accumulation at `±L`.
    pub level: u32,
    pub ladder: Ladder,
    /// `c_0..c_n` for the first few `n`.
    pub left: Vec<f64>,
    /// `d_0..d_n` for the first few `n`.
    pub right: Vec<f64>,
    /// `|gap ratio - 1|` at `n = checked`.
    pub gap_ratio_defect: f64,
    pub checked: u64,
}

impl StageGeometry {
    pub fn new(level: u32, ladder: Ladder, listed: u64, checked: u64) -> Self {
        let left = (0..=listed).map(|n| ladder.left(level, n)).collect();
        let right = (0..=listed).map(|n| ladder.right(level, n)).collect();
        let gap_ratio_defect = (ladder.gap_ratio(checked.max(1)) - 1.0).abs();
        StageGeometry { level, ladder, left, right, gap_ratio_defect, checked }
    }
}

#[derive(Clone, Copy, PartialEq)]
enum Dir {
    Forward,
    Backward,
}

/// The `index`-th map of the tower, truncated at `depth` stages: it acts
/// on `[-depth, depth]` and is the identity outside.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StageMap {
    pub index: u32,
    pub depth: u32,
    #[serde(default)]
    pub ladder: Ladder,
}

impl StageMap {
    pub fn new(index: u32, depth: u32) -> Result<Self> {
        let s = StageMap { index, depth, ladder: Ladder::Harmonic };
        s.validate()?;
        Ok(s)
    }

    pub fn validate(&self) -> Result<()> {
        if self.index == 0 || self.depth < self.index {
            return Err(Error::BadStage { index: self.index, depth: self.depth });
        }
        self.ladder.validate()
    }

    pub fn eval(&self, x: f64) -> f64 {
        if !(x.abs() < self.depth as f64) {
            return x;
        }
        self.level_eval(self.depth, x, Dir::Forward)
    }

    pub fn eval_inv(&self, y: f64) -> Result<f64> {
        if !(y.abs() < self.depth as f64) {
            return Ok(y);
        }
        Ok(self.level_eval(self.depth, y, Dir::Backward))
    }

    pub fn deriv(&self, x: f64) -> f64 {
        if !(x.abs() < self.depth as f64) {
            return 1.0;
        }
        self.level_deriv(self.depth, x)
    }

    /// Unconjugated stage map at its own level.
    fn base(&self, x: f64, dir: Dir) -> f64 {
        let i = self.index;
        if i == 1 {
            return match dir {
                Dir::Forward => bump::eval(-1.0, 1.0, x),
                Dir::Backward => bump::inverse(-1.0, 1.0, x, tol::TAU_INV * 1e-2).unwrap_or(x),
            };
        }
        self.ladder_step(i, x, dir)
    }

    /// One step of the level-`level` ladder map (or its inverse).
    fn ladder_step(&self, level: u32, x: f64, dir: Dir) -> f64 {
        if x.abs() >= level as f64 {
            return x;
        }
        let m = if x.abs() <= level as f64 - 1.0 {
            0
        } else {
            match self.ladder.locate(level, x) {
                Slot::Piece(m) => m,
                Slot::Unresolved => return x,
            }
        };
        let to = if dir == Dir::Forward { m + 1 } else { m - 1 };
        self.ladder.chart(level, m, to).eval(x)
    }

    fn base_deriv(&self, x: f64) -> f64 {
        let i = self.index;
        if i == 1 {
            return bump::deriv(-1.0, 1.0, x);
        }
        if x.abs() >= i as f64 {
            return 1.0;
        }
        let m = if x.abs() <= i as f64 - 1.0 {
            0
        } else {
            match self.ladder.locate(i, x) {
                Slot::Piece(m) => m,
                Slot::Unresolved => return 1.0,
            }
        };
        self.ladder.chart(i, m, m + 1).deriv(x)
    }

    fn level_eval(&self, level: u32, x: f64, dir: Dir) -> f64 {
        if level == self.index {
            return self.base(x, dir);
        }
        let core = level as f64 - 1.0;
        if x.abs() <= core {
            return self.level_eval(level - 1, x, dir);
        }
        if x.abs() >= level as f64 {
            return x;
        }
        match self.ladder.locate(level, x) {
            Slot::Unresolved => x,
            Slot::Piece(m) => {
                let z = self.ladder.chart(level, m, 0).eval(x);
                let w = self.level_eval(level - 1, z, dir);
                self.ladder.chart(level, 0, m).eval(w)
            }
        }
    }

    fn level_deriv(&self, level: u32, x: f64) -> f64 {
        if level == self.index {
            return self.base_deriv(x);
        }
        let core = level as f64 - 1.0;
        if x.abs() <= core {
            return self.level_deriv(level - 1, x);
        }
        if x.abs() >= level as f64 {
            return 1.0;
        }
        match self.ladder.locate(level, x) {
            Slot::Unresolved => 1.0,
            Slot::Piece(m) => {
                let down = self.ladder.chart(level, m, 0);
                let up = self.ladder.chart(level, 0, m);
                let z = down.eval(x);
                let w = self.level_eval(level - 1, z, Dir::Forward);
                down.deriv(x) * self.level_deriv(level - 1, z) * up.deriv(w)
            }
        }
    }

    /// Evaluate through the literal word `f_L^{m} f_i f_L^{-m}`, one
    /// ladder step at a time, refusing pieces deeper than `piece_cap`.
    pub fn eval_by_word(&self, x: f64, piece_cap: u64) -> Result<f64> {
        if !(x.abs() < self.depth as f64) {
            return Ok(x);
        }
        self.level_word(self.depth, x, piece_cap)
    }

    fn level_word(&self, level: u32, x: f64, cap: u64) -> Result<f64> {
        if level == self.index {
            return Ok(self.base(x, Dir::Forward));
        }
        let core = level as f64 - 1.0;
        if x.abs() <= core {
            return self.level_word(level - 1, x, cap);
        }
        if x.abs() >= level as f64 {
            return Ok(x);
        }
        let m = match self.ladder.locate(level, x) {
            Slot::Piece(m) => m,
            Slot::Unresolved => return Err(Error::PieceDepthExceeded { piece: u64::MAX, cap }),
        };
        if m.unsigned_abs() > cap {
            return Err(Error::PieceDepthExceeded { piece: m.unsigned_abs(), cap });
        }
        let (toward, away) = if m > 0 { (Dir::Backward, Dir::Forward) } else { (Dir::Forward, Dir::Backward) };
        let mut z = x;
        for _ in 0..m.unsigned_abs() {
            z = self.ladder_step(level, z, toward);
        }
        let mut w = self.level_word(level - 1, z, cap)?;
        for _ in 0..m.unsigned_abs() {
            w = self.ladder_step(level, w, away);
        }
        Ok(w)
    }

    /// Fixed points of the map inside `window`: isolated points and
    /// clusters (closed intervals below `resolution` where fixed points
    /// accumulate). Between consecutive items the map is strictly above
    /// the identity. Outside `[-depth, depth]` the map is the identity,
    /// which is not reported here.
    pub fn fixed_marks(&self, window: &IntervalQ, resolution: f64) -> Vec<(f64, f64)> {
        let marks = self.level_marks(self.depth, resolution);
        marks
            .into_iter()
            .filter(|&(lo, hi)| hi >= window.lo() && lo <= window.hi())
            .map(|(lo, hi)| (lo.max(window.lo()), hi.min(window.hi())))
            .collect()
    }

    fn level_marks(&self, level: u32, res: f64) -> Vec<(f64, f64)> {
        if level == self.index {
            let e = level as f64;
            return vec![(-e, -e), (e, e)];
        }
        let inner = self.level_marks(level - 1, res);
        let mut out = inner.clone();
        for side in [1_i64, -1] {
            let mut k: u64 = 1;
            loop {
                let m = side * k as i64;
                if self.ladder.piece_width(k) < res || k > 10_000_000 {
                    let edge = self.ladder.tail(k - 1);
                    let top = level as f64;
                    out.push(if side > 0 { (top - edge, top) } else { (-top, -top + edge) });
                    break;
                }
                let chart = self.ladder.chart(level, 0, m);
                map_run(&inner, &chart, res, &mut out);
                k += 1;
            }
        }
        coalesce(out, res)
    }

    /// Finitely many points where fixed points or kinks may sit.
    pub fn hints(&self, window: &IntervalQ, resolution: f64) -> Vec<f64> {
        self.fixed_marks(window, resolution)
            .into_iter()
            .flat_map(|(lo, hi)| if lo == hi { vec![lo] } else { vec![lo, hi] })
            .collect()
    }
}

/// Push the images of `items` under `chart`, collapsing any run whose
/// image spans less than `res` into one cluster.
fn map_run(items: &[(f64, f64)], chart: &YoccozMap, res: f64, out: &mut Vec<(f64, f64)>) {
    if items.is_empty() {
        return;
    }
    let lo = chart.eval(items[0].0);
    let hi = chart.eval(items[items.len() - 1].1);
    if items.len() == 1 || hi - lo < res {
        out.push((lo, hi));
        return;
    }
    let mid = items.len() / 2;
    map_run(&items[..mid], chart, res, out);
    map_run(&items[mid..], chart, res, out);
}

/// Sort and merge items closer than `res`.
fn coalesce(mut items: Vec<(f64, f64)>, res: f64) -> Vec<(f64, f64)> {
    items.sort_by(|a, b| a.0.total_cmp(&b.0));
    let mut out: Vec<(f64, f64)> = Vec::with_capacity(items.len());
    for (lo, hi) in items {
        match out.last_mut() {
            Some(last) if lo - last.1 < res => last.1 = last.1.max(hi),
            _ => out.push((lo, hi)),
        }
    }
    out
}
