//! The truncated commuting C1 family: build records and the verification
//! battery run against them.

use crate::decimal;
use crate::error::{Error, Result};
use crate::expr::{one_sided_derivative, HomeoExpr, Side};
use crate::group::{Generator, GroupSpec};
use crate::interval::IntervalQ;
use crate::stage::{Ladder, StageGeometry, StageMap};
use crate::tol;
use crate::tower::{mass_pump, validate_tower, MassPumpCertificate, Tower, TowerReport};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

/// Breakpoints listed per side in a build record.
const LISTED: u64 = 8;

/// How an earlier map is carried to a later ladder level.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExtensionRecord {
    pub map: String,
    pub level: u32,
    /// Conjugating map.
    pub by: String,
    pub rule: String,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CounterexampleBuild {
    pub stages: u32,
    pub ladder: Ladder,
    /// Ladder data of levels `2..=stages`.
    pub geometry: Vec<StageGeometry>,
    pub maps: Vec<Generator>,
    pub extensions: Vec<ExtensionRecord>,
}

/// `f_1, ..., f_K` on the default ladder.
pub fn build_counterexample(stages: u32) -> Result<CounterexampleBuild> {
    build_with_ladder(stages, Ladder::Harmonic)
}

pub fn build_with_ladder(stages: u32, ladder: Ladder) -> Result<CounterexampleBuild> {
    if stages < 2 {
        return Err(Error::Precondition(format!("need at least 2 stages, got {stages}")));
    }
    ladder.validate()?;
    let geometry = (2..=stages).map(|l| StageGeometry::new(l, ladder, LISTED, tol::N_CHECK)).collect();
    let maps = (1..=stages)
        .map(|i| Generator {
            name: format!("f{i}"),
            map: HomeoExpr::Stage(StageMap { index: i, depth: stages, ladder }),
        })
        .collect();
    let mut extensions = Vec::new();
    for level in 2..=stages {
        for i in 1..level {
            extensions.push(ExtensionRecord {
                map: format!("f{i}"),
                level,
                by: format!("f{level}"),
                rule: format!("on P_m: f{level}^m f{i} f{level}^-m"),
            });
        }
    }
    Ok(CounterexampleBuild { stages, ladder, geometry, maps, extensions })
}

impl CounterexampleBuild {
    pub fn map(&self, k: u32) -> &HomeoExpr {
        &self.maps[k as usize - 1].map
    }

    /// The tower `([-k, k], f_k)`.
    pub fn tower(&self) -> Tower {
        let mut t = Tower::default();
        for (i, g) in self.maps.iter().enumerate() {
            let k = (i + 1) as f64;
            t.push(IntervalQ::closed(-k, k), g.name.clone(), g.map.clone());
        }
        t
    }

    /// The group as an analysis input, windowed on `[-K, K]`.
    pub fn group_spec(&self) -> GroupSpec {
        let mut g = GroupSpec::new(
            &format!("commuting-c1-{}", self.stages),
            Vec::new(),
            IntervalQ::closed(-(self.stages as f64), self.stages as f64),
        );
        g.generators = self.maps.clone();
        g
    }

    /// Scale `f_k` by `factor`, breaking commutativity.
    pub fn tampered(&self, k: u32, factor: f64) -> Self {
        let mut b = self.clone();
        let m = &mut b.maps[k as usize - 1].map;
        *m = HomeoExpr::Compose { maps: vec![HomeoExpr::affine(factor, 0.0), m.clone()] };
        b
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct VerifyOptions {
    /// Sample points for commutativity and shape checks.
    pub samples: usize,
    /// Junctions per side and level.
    pub n_check: u64,
    /// Iterates for each mass pump.
    pub pump_iterates: usize,
    /// Junction quotients use this fraction of the narrower adjacent piece.
    pub junction_step: f64,
}

impl Default for VerifyOptions {
    fn default() -> Self {
        VerifyOptions { samples: 1000, n_check: tol::N_CHECK, pump_iterates: 100, junction_step: JUNCTION_STEP }
    }
}

/// Tolerance of the commutativity check.
pub const TAU_COMMUTE: f64 = 1e-8;
/// Tolerance on `|f_k'(±k) - 1|`.
pub const TAU_ENDPOINT: f64 = 1e-6;
/// First step of the endpoint difference quotients; two more halve it.
pub const ENDPOINT_STEP: f64 = 1e-6;
/// Junction quotients use this fraction of the narrower adjacent piece.
pub const JUNCTION_STEP: f64 = 1e-3;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CheckRow {
    pub check: String,
    pub location: String,
    #[serde(with = "decimal")]
    pub residual: f64,
    #[serde(with = "decimal")]
    pub tolerance: f64,
    pub pass: bool,
}

impl CheckRow {
    fn new(check: &str, location: String, residual: f64, tolerance: f64) -> Self {
        CheckRow { check: check.into(), location, residual, tolerance, pass: residual <= tolerance }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CheckSummary {
    pub check: String,
    pub rows: usize,
    #[serde(with = "decimal")]
    pub worst: f64,
    #[serde(with = "decimal")]
    pub tolerance: f64,
    pub pass: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct VerificationReport {
    pub stages: u32,
    pub options: VerifyOptions,
    pub summary: Vec<CheckSummary>,
    pub rows: Vec<CheckRow>,
    pub tower: TowerReport,
    pub pumps: Vec<MassPumpCertificate>,
    pub pass: bool,
}

impl VerificationReport {
    pub fn check(&self, name: &str) -> Option<&CheckSummary> {
        self.summary.iter().find(|s| s.check == name)
    }

    /// The residual table as CSV with a header row.
    pub fn csv(&self) -> String {
        let mut s = String::from("check,location,residual,tolerance,pass\n");
        for r in &self.rows {
            s.push_str(&format!(
                "{},\"{}\",{},{},{}\n",
                r.check,
                r.location,
                decimal::format(r.residual),
                decimal::format(r.tolerance),
                r.pass
            ));
        }
        s
    }
}

fn ev(f: &HomeoExpr) -> impl Fn(f64) -> f64 + '_ {
    move |x| f.eval(x).unwrap_or(f64::NAN)
}

fn commutativity(b: &CounterexampleBuild, opts: &VerifyOptions) -> Vec<CheckRow> {
    let k = b.stages as f64;
    let xs = IntervalQ::closed(-(k - 1.0), k - 1.0).grid(opts.samples.max(2));
    let mut rows = Vec::new();
    for i in 1..=b.stages {
        for j in i + 1..=b.stages {
            let (fi, fj) = (ev(b.map(i)), ev(b.map(j)));
            let (worst, at) = xs
                .par_iter()
                .map(|&x| ((fi(fj(x)) - fj(fi(x))).abs(), x))
                .reduce(|| (0.0, f64::NAN), |a, c| if c.0 > a.0 || c.0.is_nan() { c } else { a });
            let worst = if worst.is_nan() { f64::INFINITY } else { worst };
            rows.push(CheckRow::new(
                "commutativity",
                format!("f{i} f{j} worst at x={}", decimal::format(at)),
                worst,
                TAU_COMMUTE,
            ));
        }
    }
    rows
}

fn junctions(b: &CounterexampleBuild, opts: &VerifyOptions) -> Vec<CheckRow> {
    let ladder = b.ladder;
    let mut jobs = Vec::new();
    for i in 1..=b.stages {
        for level in i.max(2)..=b.stages {
            for n in 0..=opts.n_check {
                let wl = if n == 0 { 1.0 } else { ladder.tail(n - 1) - ladder.tail(n) };
                let wr = ladder.tail(n) - ladder.tail(n + 1);
                let h = opts.junction_step * wl.min(wr);
                jobs.push((i, level, n, 'd', ladder.right(level, n), h));
                jobs.push((i, level, n, 'c', ladder.left(level, n), h));
            }
        }
    }
    jobs.par_iter()
        .map(|&(i, level, n, name, x, h)| {
            let f = ev(b.map(i));
            let left = one_sided_derivative(&f, x, Side::Left, h, 3);
            let right = one_sided_derivative(&f, x, Side::Right, h, 3);
            let r = (left - right).abs();
            CheckRow::new(
                "junction_c1",
                format!("f{i} level {level} {name}_{n}={}", decimal::format(x)),
                if r.is_nan() { f64::INFINITY } else { r },
                tol::TAU_DERIV,
            )
        })
        .collect()
}

fn one_step(f: &impl Fn(f64) -> f64, x: f64, side: Side, h: f64) -> f64 {
    one_sided_derivative(f, x, side, h, 1)
}

/// One-sided quotients at `ENDPOINT_STEP / 2^j`, `j = 0, 1, 2`.
pub fn endpoint_quotients(f: &HomeoExpr, x: f64, side: Side) -> [f64; 3] {
    let g = ev(f);
    [0, 1, 2].map(|j| one_step(&g, x, side, ENDPOINT_STEP / f64::powi(2.0, j)))
}

fn endpoints(b: &CounterexampleBuild) -> Vec<CheckRow> {
    let mut rows = Vec::new();
    for k in 1..=b.stages {
        let kf = k as f64;
        for x in [-kf, kf] {
            for side in [Side::Left, Side::Right] {
                let q = endpoint_quotients(b.map(k), x, side);
                let r = (q[2] - 1.0).abs();
                rows.push(CheckRow::new(
                    "endpoint_derivative",
                    format!(
                        "f{k} at {} from the {}",
                        decimal::format(x),
                        if side == Side::Left { "left" } else { "right" }
                    ),
                    if r.is_nan() { f64::INFINITY } else { r },
                    TAU_ENDPOINT,
                ));
            }
        }
    }
    rows
}

/// `f_k(±k) = ±k` and `f_k(x) > x` at sample points of `[-0.95 k, 0.95 k]`.
fn shape(b: &CounterexampleBuild, opts: &VerifyOptions) -> Vec<CheckRow> {
    let mut rows = Vec::new();
    for k in 1..=b.stages {
        let f = ev(b.map(k));
        let kf = k as f64;
        let end = (f(kf) - kf).abs().max((f(-kf) + kf).abs());
        rows.push(CheckRow::new("stage_shape", format!("f{k} fixes ±{k}"), end, tol::EPS_FIX));
        let xs = IntervalQ::closed(-0.95 * kf, 0.95 * kf).grid(opts.samples.max(2));
        let low = xs.iter().map(|&x| f(x) - x).fold(f64::INFINITY, f64::min);
        // residual is 0 when every margin is positive
        let r = if low > 0.0 { 0.0 } else { 1.0 };
        rows.push(CheckRow::new(
            "stage_shape",
            format!("f{k} above the identity, least margin {}", decimal::format(low)),
            r,
            0.0,
        ));
    }
    rows
}

/// Closed-form evaluation against the literal conjugation word.
fn coherence(b: &CounterexampleBuild, opts: &VerifyOptions) -> Vec<CheckRow> {
    let k = b.stages as f64;
    let xs = IntervalQ::closed(-k, k).cell_midpoints(opts.samples.max(1));
    let mut rows = Vec::new();
    for g in &b.maps {
        let HomeoExpr::Stage(s) = &g.map else {
            rows.push(CheckRow::new(
                "coherence",
                format!("{} is not a stage map", g.name),
                f64::INFINITY,
                tol::TAU_INV,
            ));
            continue;
        };
        let (mut worst, mut at, mut skipped) = (0.0f64, f64::NAN, 0usize);
        for &x in &xs {
            match s.eval_by_word(x, tol::N_PIECE_CAP) {
                Ok(y) => {
                    let d = (y - s.eval(x)).abs();
                    if d > worst || d.is_nan() {
                        worst = d;
                        at = x;
                    }
                }
                Err(_) => skipped += 1,
            }
        }
        rows.push(CheckRow::new(
            "coherence",
            format!("{} worst at x={} ({skipped} points beyond the piece cap)", g.name, decimal::format(at)),
            if worst.is_nan() { f64::INFINITY } else { worst },
            tol::TAU_INV,
        ));
    }
    rows
}

/// Run every check on the build.
pub fn verify_counterexample(b: &CounterexampleBuild, opts: &VerifyOptions) -> VerificationReport {
    let mut rows = commutativity(b, opts);
    rows.extend(junctions(b, opts));
    rows.extend(endpoints(b));
    rows.extend(shape(b, opts));
    rows.extend(coherence(b, opts));

    let tower = validate_tower(&b.tower(), tol::EPS_FIX);
    rows.extend(tower.levels.iter().map(|l| {
        CheckRow::new(
            "tower",
            format!("level {} {} on {}", l.level, l.name, l.interval),
            if l.pass { 0.0 } else { 1.0 },
            0.0,
        )
    }));
    let t = b.tower();
    let mut pumps = Vec::new();
    for n in 1..b.stages as usize {
        match mass_pump(&t, n, opts.pump_iterates) {
            Ok(c) => {
                let ok = c.disjoint && c.contained && c.monotone;
                rows.push(CheckRow::new(
                    "mass_pump",
                    format!("level {n}: {}", c.statement),
                    if ok { 0.0 } else { 1.0 },
                    0.0,
                ));
                pumps.push(c);
            }
            Err(e) => rows.push(CheckRow::new("mass_pump", format!("level {n}: {e}"), 1.0, 0.0)),
        }
    }

    let mut summary: Vec<CheckSummary> = Vec::new();
    for r in &rows {
        match summary.iter_mut().find(|s| s.check == r.check) {
            Some(s) => {
                s.rows += 1;
                s.worst = s.worst.max(r.residual);
                s.pass &= r.pass;
            }
            None => summary.push(CheckSummary {
                check: r.check.clone(),
                rows: 1,
                worst: r.residual,
                tolerance: r.tolerance,
                pass: r.pass,
            }),
        }
    }
    let pass = summary.iter().all(|s| s.pass);
    VerificationReport { stages: b.stages, options: *opts, summary, rows, tower, pumps, pass }
}
