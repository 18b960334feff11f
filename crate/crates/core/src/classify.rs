//! The case analysis for groups without crossed elements: a global fixed
//! point, a free action, or a fixed-point-bearing subgroup whose fixed
//! set is either collapsed or carries a discrete orbit. Anything else is
//! reported as unclassified with whatever certificates were found.

use crate::decimal;
use crate::derived::{derive_to_empty, DerivedSetSequence, SetNode};
use crate::error::{Error, Result};
use crate::expr::HomeoExpr;
use crate::group::{Budget, GroupSpec};
use crate::interval::IntervalQ;
use crate::measure::{
    collapse_and_measure, conjugacy_to_translation, discrete_orbit_measure, invariance_residual, probe_intervals,
    HolderReport, RadonMeasure,
};
use crate::structure::{
    first_word_with_fixed_point, fixed_set_with, is_crossed, CrossWitness, FixedKind, FixedSetReport,
};
use crate::tol::Tolerances;
use crate::tower::{mass_pump, search_tower, validate_tower, MassPumpCertificate, TowerReport, TowerSearch};
use serde::{Deserialize, Serialize};

/// Probe intervals per generator for invariance residuals.
pub const PROBES: usize = 64;
const PROBE_SEED: u64 = 0x6c69_6e65;
/// Iterates used by the mass-pump certificate.
pub const PUMP_ITERATES: usize = 100;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Case {
    GlobalFixedPoint,
    FreeAction,
    CollapsedFixedSet,
    DiscreteOrbit,
    Unclassified,
}

impl Case {
    pub fn label(self) -> &'static str {
        match self {
            Case::GlobalFixedPoint => "Case 1",
            Case::FreeAction => "Subcase 2a",
            Case::CollapsedFixedSet => "Subcase 2b",
            Case::DiscreteOrbit => "Subcase 2c",
            Case::Unclassified => "Unclassified",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "outcome", rename_all = "snake_case")]
pub enum CrossOutcome {
    Clear,
    Crossed {
        witness: CrossWitness,
    },
    Inconclusive {
        #[serde(with = "decimal")]
        point: f64,
        #[serde(with = "decimal")]
        margin: f64,
    },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PairCrossing {
    pub first: String,
    pub second: String,
    #[serde(flatten)]
    pub outcome: CrossOutcome,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct NamedFixedSet {
    pub name: String,
    pub report: FixedSetReport,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ResidualRow {
    pub generator: String,
    #[serde(with = "decimal")]
    pub residual: f64,
    #[serde(with = "decimal")]
    pub tolerance: f64,
    pub probes: usize,
    pub pass: bool,
}

/// A closed invariant set suggested by bounded orbit data. Never a proof
/// of minimality.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MinimalSetCandidate {
    pub description: String,
    #[serde(with = "decimal::vec")]
    pub points: Vec<f64>,
    pub status: String,
}

impl MinimalSetCandidate {
    fn new(description: impl Into<String>, points: Vec<f64>) -> Self {
        MinimalSetCandidate { description: description.into(), points, status: "candidate".into() }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ClassificationReport {
    pub case: Case,
    pub label: String,
    pub reason: String,
    pub crossings: Vec<PairCrossing>,
    pub fixed_sets: Vec<NamedFixedSet>,
    /// Names of the elements taken as generators of the fixed-point
    /// bearing subgroup.
    pub gamma: Vec<String>,
    pub measure: Option<RadonMeasure>,
    pub residuals: Vec<ResidualRow>,
    pub minimal_set: Option<MinimalSetCandidate>,
    pub holder: Option<HolderReport>,
    pub derived: Option<DerivedSetSequence>,
    pub tower: Option<TowerSearch>,
    pub tower_validation: Option<TowerReport>,
    pub certificate: Option<MassPumpCertificate>,
    pub budget: Budget,
    pub tolerances: Tolerances,
}

impl ClassificationReport {
    fn new(gens: &GroupSpec) -> Self {
        ClassificationReport {
            case: Case::Unclassified,
            label: Case::Unclassified.label().into(),
            reason: String::new(),
            crossings: Vec::new(),
            fixed_sets: Vec::new(),
            gamma: Vec::new(),
            measure: None,
            residuals: Vec::new(),
            minimal_set: None,
            holder: None,
            derived: None,
            tower: None,
            tower_validation: None,
            certificate: None,
            budget: gens.budgets,
            tolerances: gens.tolerances,
        }
    }

    fn settle(mut self, case: Case, reason: impl Into<String>) -> Self {
        self.case = case;
        self.label = case.label().into();
        self.reason = reason.into();
        self
    }

    pub fn any_crossed(&self) -> bool {
        self.crossings.iter().any(|c| !matches!(c.outcome, CrossOutcome::Clear))
    }

    pub fn residuals_pass(&self) -> bool {
        self.residuals.iter().all(|r| r.pass)
    }
}

/// Pairwise crossing table.
pub fn crossing_table(gens: &GroupSpec, window: &IntervalQ) -> Result<Vec<PairCrossing>> {
    let grid = gens.budgets.samples.max(2);
    let eps = gens.tolerances.eps_fix;
    let mut out = Vec::new();
    for i in 0..gens.generators.len() {
        for j in i + 1..gens.generators.len() {
            let (a, b) = (&gens.generators[i], &gens.generators[j]);
            let outcome = match is_crossed((&a.name, &a.map), (&b.name, &b.map), window, grid, eps) {
                Ok(None) => CrossOutcome::Clear,
                Ok(Some(witness)) => CrossOutcome::Crossed { witness },
                Err(Error::Inconclusive { point, margin }) => CrossOutcome::Inconclusive { point, margin },
                Err(e) => return Err(e),
            };
            out.push(PairCrossing { first: a.name.clone(), second: b.name.clone(), outcome });
        }
    }
    Ok(out)
}

/// Pairwise intersections of two sorted lists of closed intervals.
fn intersect(a: &[(f64, f64)], b: &[(f64, f64)]) -> Vec<(f64, f64)> {
    let mut out = Vec::new();
    let (mut i, mut j) = (0, 0);
    while i < a.len() && j < b.len() {
        let lo = a[i].0.max(b[j].0);
        let hi = a[i].1.min(b[j].1);
        if lo <= hi {
            out.push((lo, hi));
        }
        if a[i].1 < b[j].1 {
            i += 1;
        } else {
            j += 1;
        }
    }
    out
}

fn parts(r: &FixedSetReport) -> Vec<(f64, f64)> {
    r.fixed_intervals.iter().map(|p| (p.lo, p.hi)).collect()
}

/// Common fixed set of several reports, as sorted closed intervals.
fn common_fixed(reports: &[&FixedSetReport]) -> Vec<(f64, f64)> {
    let mut it = reports.iter();
    let Some(first) = it.next() else { return Vec::new() };
    it.fold(parts(first), |acc, r| intersect(&acc, &parts(r)))
}

/// Parts of `set` meeting the open window, clipped to it.
fn interior_parts(set: &[(f64, f64)], window: &IntervalQ) -> Vec<(f64, f64)> {
    set.iter()
        .filter(|&&(lo, hi)| hi > window.lo() && lo < window.hi())
        .map(|&(lo, hi)| (lo.max(window.lo()), hi.min(window.hi())))
        .filter(|&(lo, hi)| window.contains_open(lo) || window.contains_open(hi) || lo < hi)
        .collect()
}

fn residual_rows(gens: &GroupSpec, mu: &RadonMeasure, window: &IntervalQ) -> Result<Vec<ResidualRow>> {
    let tol = gens.tolerances.tau_meas;
    let margin = gens.tolerances.eps_sep / 4.0;
    gens.generators
        .iter()
        .enumerate()
        .map(|(i, g)| {
            let probes = probe_intervals(
                window,
                std::slice::from_ref(&g.map),
                PROBES,
                PROBE_SEED + i as u64,
                mu.atoms(),
                margin,
            )?;
            let residual = invariance_residual(mu, &g.map, &probes)?;
            Ok(ResidualRow {
                generator: g.name.clone(),
                residual,
                tolerance: tol,
                probes: probes.len(),
                pass: residual <= tol,
            })
        })
        .collect()
}

/// Run the case tree on `gens` inside `window` with the given budget.
pub fn classify_action(gens: &GroupSpec, window: &IntervalQ, budget: &Budget) -> Result<ClassificationReport> {
    let mut gens = gens.clone();
    gens.budgets = *budget;
    gens.validate()?;
    let gens = &gens;
    let grid = budget.samples.max(2);
    let t = gens.tolerances;
    let mut rep = ClassificationReport::new(gens);

    rep.crossings = crossing_table(gens, window)?;
    if rep.any_crossed() {
        return Ok(rep.settle(Case::Unclassified, "crossed elements present"));
    }

    for g in &gens.generators {
        let report = fixed_set_with(&g.map, window, grid, t.eps_fix, t.fix_resolution)?;
        rep.fixed_sets.push(NamedFixedSet { name: g.name.clone(), report });
    }
    let all: Vec<&FixedSetReport> = rep.fixed_sets.iter().map(|f| &f.report).collect();
    let global = interior_parts(&common_fixed(&all), window);
    if let Some(&(lo, hi)) = global.first() {
        let x = if window.contains_open(lo) {
            lo
        } else if window.contains_open(hi) {
            hi
        } else {
            0.5 * (lo + hi)
        };
        let mu = RadonMeasure::comb(vec![x]);
        rep.residuals = residual_rows(gens, &mu, window)?;
        rep.measure = Some(mu);
        rep.minimal_set = Some(MinimalSetCandidate::new("global fixed point", vec![x]));
        return Ok(rep.settle(Case::GlobalFixedPoint, format!("every generator fixes {x}")));
    }

    let mut gamma: Vec<(String, HomeoExpr, FixedSetReport)> = rep
        .fixed_sets
        .iter()
        .filter(|f| !f.report.is_empty())
        .map(|f| (f.name.clone(), gens.map(gens.index_of(&f.name).unwrap_or(0)).clone(), f.report.clone()))
        .collect();

    if gamma.is_empty() {
        let (_, hit) = first_word_with_fixed_point(gens, window, budget.word_length, grid)?;
        match hit {
            None => return free_case(gens, window, rep),
            Some((w, _)) => {
                let e = gens.word_expr(&w);
                let r = fixed_set_with(&e, window, grid, t.eps_fix, t.fix_resolution)?;
                gamma.push((gens.word_name(&w), e, r));
            }
        }
    }
    rep.gamma = gamma.iter().map(|g| g.0.clone()).collect();

    let greps: Vec<&FixedSetReport> = gamma.iter().map(|g| &g.2).collect();
    let fix_closed = common_fixed(&greps);
    let fix_gamma = interior_parts(&fix_closed, window);
    if fix_gamma.is_empty() {
        return tower_case(gens, window, rep);
    }
    let clustered = greps.iter().any(|r| {
        r.fixed_intervals
            .iter()
            .any(|p| p.kind == FixedKind::Cluster && fix_gamma.iter().any(|&(lo, hi)| p.lo <= hi && lo <= p.hi))
    });
    if clustered {
        return Ok(rep.settle(Case::Unclassified, "fixed set of the subgroup accumulates below resolution"));
    }
    if fix_gamma.iter().any(|&(lo, hi)| hi - lo > t.fix_resolution) {
        // parts on the window edge still bound gaps
        return collapse_case(gens, window, &fix_closed, rep);
    }
    let nonfixing: Vec<usize> =
        rep.fixed_sets.iter().enumerate().filter(|(_, f)| f.report.is_empty()).map(|(i, _)| i).collect();
    orbit_case(gens, window, &fix_gamma, &nonfixing, rep)
}

fn free_case(gens: &GroupSpec, window: &IntervalQ, mut rep: ClassificationReport) -> Result<ClassificationReport> {
    let (mu, holder) = match conjugacy_to_translation(gens, window) {
        Ok(x) => x,
        Err(e) => return Ok(rep.settle(Case::Unclassified, format!("free action but no conjugacy: {e}"))),
    };
    rep.residuals = residual_rows(gens, &mu, window)?;
    let periodic = gens.generators.len() == 1 || holder.ratios.iter().all(|r| r.periodic);
    rep.minimal_set = Some(if periodic {
        match discrete_orbit_measure(gens, holder.base_point, window) {
            Ok(comb) => MinimalSetCandidate::new("discrete orbit of the base point", comb.atoms().to_vec()),
            Err(_) => MinimalSetCandidate::new("the whole line (orbits dense)", vec![window.lo(), window.hi()]),
        }
    } else {
        MinimalSetCandidate::new("the whole line (orbits dense)", vec![window.lo(), window.hi()])
    });
    rep.measure = Some(mu);
    let base = holder.base_generator.clone();
    rep.holder = Some(holder);
    Ok(rep.settle(
        Case::FreeAction,
        format!("free up to word length {}; conjugated to translations via {base}", gens.budgets.word_length),
    ))
}

fn tower_case(gens: &GroupSpec, window: &IntervalQ, mut rep: ClassificationReport) -> Result<ClassificationReport> {
    let search = match search_tower(gens, window, &gens.budgets) {
        Ok(s) => s,
        Err(Error::NoSeedElement(m)) => {
            return Ok(
                rep.settle(Case::Unclassified, format!("subgroup has no common fixed point and no tower seed: {m}"))
            )
        }
        Err(e) => return Err(e),
    };
    let validation = validate_tower(&search.tower, gens.tolerances.eps_fix);
    let covered = search.covered();
    if search.tower.len() >= 2 {
        rep.certificate = mass_pump(&search.tower, 1, PUMP_ITERATES).ok();
    }
    rep.tower = Some(search);
    let pass = validation.pass;
    rep.tower_validation = Some(validation);
    let reason = if covered && pass && rep.certificate.is_some() {
        "no invariant Radon measure (budget-bounded)".to_string()
    } else {
        "subgroup has no common fixed point; tower search did not cover the window within budget".to_string()
    };
    Ok(rep.settle(Case::Unclassified, reason))
}

fn collapse_case(
    gens: &GroupSpec,
    window: &IntervalQ,
    fix: &[(f64, f64)],
    mut rep: ClassificationReport,
) -> Result<ClassificationReport> {
    let gaps: Vec<(f64, f64)> = fix.windows(2).map(|w| (w[0].1, w[1].0)).filter(|&(lo, hi)| lo < hi).collect();
    let (cm, mu) = match collapse_and_measure(&gaps, gens, None) {
        Ok(x) => x,
        Err(e @ Error::GapsNotInvariant { .. }) => return Ok(rep.settle(Case::Unclassified, e.to_string())),
        Err(e) => return Err(e),
    };
    rep.residuals = residual_rows(gens, &mu, window)?;
    let ends: Vec<f64> = cm.gaps().iter().flat_map(|g| [g.lo, g.hi]).collect();
    rep.minimal_set = Some(MinimalSetCandidate::new("fixed set of the subgroup with gap closures collapsed", ends));
    rep.measure = Some(mu);
    let n = gaps.len();
    Ok(rep.settle(Case::CollapsedFixedSet, format!("fixed set of the subgroup has plateaus; {n} gaps collapsed")))
}

fn orbit_case(
    gens: &GroupSpec,
    window: &IntervalQ,
    fix: &[(f64, f64)],
    nonfixing: &[usize],
    mut rep: ClassificationReport,
) -> Result<ClassificationReport> {
    let Some(&gi) = nonfixing.first() else {
        return Ok(rep
            .settle(Case::Unclassified, "fixed set of the subgroup is discrete but every generator has fixed points"));
    };
    let x0 = fix.iter().map(|p| p.0).find(|&x| window.contains_open(x)).unwrap_or(fix[0].0);
    let g = gens.map(gi);
    let g = if g.eval(x0)? > x0 { g.clone() } else { g.inverse() };
    let (xm, x1) = (g.eval_inv(x0)?, g.eval(x0)?);
    let x2 = g.eval(x1)?;
    let atoms: Vec<f64> = fix.iter().map(|p| p.0).filter(|&x| xm <= x && x <= x2).collect();
    let seq = derive_to_empty(atoms.iter().map(|&x| SetNode::atom(x)).collect())?;
    let top = &seq.levels[seq.steps().saturating_sub(1)];
    let mut pts = Vec::new();
    for n in top {
        n.points(0, &mut pts);
    }
    let Some(y) = pts.into_iter().find(|&y| x0 <= y && y <= x1) else {
        return Ok(rep.settle(Case::Unclassified, "no point of top derived level in a fundamental domain"));
    };
    rep.derived = Some(seq);
    let mu = match discrete_orbit_measure(gens, y, window) {
        Ok(m) => m,
        Err(e @ Error::OrbitAccumulates { .. }) => return Ok(rep.settle(Case::Unclassified, e.to_string())),
        Err(e) => return Err(e),
    };
    rep.residuals = residual_rows(gens, &mu, window)?;
    rep.minimal_set = Some(MinimalSetCandidate::new(format!("orbit of {y}"), mu.atoms().to_vec()));
    rep.measure = Some(mu);
    let name = gens.generators[gi].name.clone();
    Ok(rep.settle(
        Case::DiscreteOrbit,
        format!("fixed set of the subgroup is discrete; counting measure on the orbit of {y} under {name}"),
    ))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expr::Piece;

    fn w(lo: f64, hi: f64) -> IntervalQ {
        IntervalQ::closed(lo, hi)
    }

    fn fixes_zero() -> HomeoExpr {
        HomeoExpr::Piecewise {
            pieces: vec![
                Piece { interval: IntervalQ::new(f64::NEG_INFINITY, 0.0).unwrap(), map: HomeoExpr::affine(0.5, 0.0) },
                Piece { interval: IntervalQ::new(0.0, f64::INFINITY).unwrap(), map: HomeoExpr::affine(2.0, 0.0) },
            ],
        }
    }

    #[test]
    fn intersections() {
        assert_eq!(intersect(&[(0.0, 2.0), (3.0, 5.0)], &[(1.0, 4.0)]), vec![(1.0, 2.0), (3.0, 4.0)]);
        assert_eq!(intersect(&[(0.0, 1.0)], &[(1.0, 2.0)]), vec![(1.0, 1.0)]);
    }

    #[test]
    fn global_fixed_point() {
        let g = GroupSpec::new("c1", vec![("p", fixes_zero())], w(-5.0, 5.0));
        let r = classify_action(&g, &g.window, &g.budgets).unwrap();
        assert_eq!(r.case, Case::GlobalFixedPoint);
        assert_eq!(r.measure.as_ref().unwrap().atoms(), &[0.0]);
        assert!(r.residuals_pass());
    }

    #[test]
    fn translation_is_free() {
        let g = GroupSpec::new("t", vec![("t", HomeoExpr::translation(1.0))], w(-5.0, 5.0));
        let r = classify_action(&g, &g.window, &g.budgets).unwrap();
        assert_eq!(r.case, Case::FreeAction, "{}", r.reason);
        assert!(r.residuals_pass());
        assert_eq!(r.minimal_set.unwrap().points.len(), 11);
    }

    #[test]
    fn crossed_pair_is_unclassified() {
        let g = GroupSpec::new(
            "x",
            vec![("a", HomeoExpr::exp_bump(0.0, 2.0)), ("b", HomeoExpr::exp_bump(1.0, 3.0))],
            w(-1.0, 4.0),
        );
        let r = classify_action(&g, &g.window, &g.budgets).unwrap();
        assert_eq!(r.case, Case::Unclassified);
        assert_eq!(r.reason, "crossed elements present");
    }

    #[test]
    fn discrete_fixed_set_and_translation() {
        // gamma fixes the integers, t shifts by one
        let mut pieces = Vec::new();
        for n in -6..6 {
            let a = n as f64;
            pieces.push(Piece { interval: w(a, a + 1.0), map: HomeoExpr::exp_bump(a, a + 1.0) });
        }
        let gamma = HomeoExpr::Piecewise { pieces };
        let g = GroupSpec::new("d", vec![("g", gamma), ("t", HomeoExpr::translation(1.0))], w(-4.0, 4.0));
        let r = classify_action(&g, &g.window, &g.budgets).unwrap();
        assert_eq!(r.case, Case::DiscreteOrbit, "{}", r.reason);
        assert!(r.residuals_pass(), "{:?}", r.residuals);
        assert_eq!(r.measure.unwrap().atoms().len(), 9);
    }

    #[test]
    fn stage_group_is_unclassified_with_tower() {
        let gens: Vec<(String, HomeoExpr)> =
            (1..=4).map(|i| (format!("f{i}"), HomeoExpr::stage(i, 4).unwrap())).collect();
        let g = GroupSpec::new("stages", gens.iter().map(|(n, e)| (n.as_str(), e.clone())).collect(), w(-4.0, 4.0));
        let r = classify_action(&g, &g.window, &g.budgets).unwrap();
        assert_eq!(r.case, Case::Unclassified);
        assert_eq!(r.reason, "no invariant Radon measure (budget-bounded)");
        assert_eq!(r.certificate.unwrap().mass_factor, 101);
    }
}
