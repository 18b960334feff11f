//! End-to-end acceptance criteria. Each criterion prints one line and the
//! test fails if any of them fails.

mod common;

use std::time::{Duration, Instant};

use common::*;
use linelab::classify::{classify_action, Case};
use linelab::counterexample::{build_counterexample, verify_counterexample, VerifyOptions};
use linelab::error::Error;
use linelab::expr::{HomeoExpr, Piece};
use linelab::group::{Budget, GroupSpec};
use linelab::interval::IntervalQ;
use linelab::measure::{invariance_residual, measure_interval, probe_intervals, RadonMeasure};
use linelab::structure::is_crossed;
use linelab::tower::{build_lex_family, kopell_alpha_threshold, kopell_residual, mass_pump};
use linelab::yoccoz::yoccoz_map;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

type Outcome = Result<String, String>;
type Criterion = (&'static str, fn() -> Outcome);

fn check(cond: bool, ok: impl Into<String>, bad: impl Into<String>) -> Outcome {
    if cond {
        Ok(ok.into())
    } else {
        Err(bad.into())
    }
}

fn w(lo: f64, hi: f64) -> IntervalQ {
    IntervalQ::closed(lo, hi)
}

fn counterexample_k4() -> Outcome {
    let t = Instant::now();
    let b = build_counterexample(4).map_err(|e| e.to_string())?;
    let r = verify_counterexample(&b, &VerifyOptions::default());
    let elapsed = t.elapsed();
    let get = |name: &str| r.check(name).map(|s| (s.worst, s.pass)).unwrap_or((f64::NAN, false));
    let (comm, comm_ok) = get("commutativity");
    let (endp, endp_ok) = get("endpoint_derivative");
    let (junc, junc_ok) = get("junction_c1");
    let rows = r.rows.iter().filter(|x| x.check == "commutativity").count();
    let ok = r.pass
        && comm_ok
        && comm <= 1e-8
        && rows == 6
        && r.options.samples >= 1000
        && endp_ok
        && endp <= 1e-6
        && junc_ok
        && junc <= 1e-5
        && r.tower.levels.len() == 4
        && r.tower.pass
        && elapsed <= Duration::from_secs(120);
    let msg = format!(
        "commute {comm:.2e}, endpoint {endp:.2e}, junction {junc:.2e}, tower {} levels, {:.2?}",
        r.tower.levels.len(),
        elapsed
    );
    check(ok, msg.clone(), msg)
}

fn mass_pump_k4() -> Outcome {
    let b = build_counterexample(4).map_err(|e| e.to_string())?;
    let tower = b.tower();
    let t = Instant::now();
    let c = mass_pump(&tower, 1, 100).map_err(|e| e.to_string())?;
    let elapsed = t.elapsed();
    // recheck the images independently of the certificate flags
    let f2 = b.map(2);
    let (mut lo, mut hi) = (-1.0f64, 1.0f64);
    let mut ok = c.images.len() == 101 && c.mass_factor == 101;
    for img in c.images.iter().skip(1) {
        let (nlo, nhi) = (f2.eval(lo).unwrap(), f2.eval(hi).unwrap());
        ok &= nlo >= hi && nlo > lo && (img.lo() - nlo).abs() <= 1e-12 && (img.hi() - nhi).abs() <= 1e-12;
        ok &= -2.0 <= nlo && nhi <= 2.0;
        lo = nlo;
        hi = nhi;
    }
    ok &= elapsed <= Duration::from_secs(5);
    let msg = format!("{} images in [-2, 2], last ends at {hi:.9}, {:.2?}", c.images.len(), elapsed);
    check(ok, msg.clone(), msg)
}

fn crossing_oracle() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed_c055);
    let pins = [q(-1, 2), q(0, 1), q(1, 3), q(3, 4)];
    let (lo, hi) = (q(-2, 1), q(2, 1));
    let window = w(-2.0, 2.0);
    let total = 400;
    let (mut agree, mut inconclusive, mut crossed) = (0, 0, 0);
    let mut disagreements = Vec::new();
    for i in 0..total {
        let f = random_pl(&mut rng, &pins, 0.6);
        let g = random_pl(&mut rng, &pins, 0.6);
        let truth = exact_crossed(&f, &g, &lo, &hi);
        crossed += truth as usize;
        match is_crossed(("f", &f.expr()), ("g", &g.expr()), &window, 1000, 1e-9) {
            Ok(found) if found.is_some() == truth => agree += 1,
            Ok(_) => disagreements.push(i),
            Err(Error::Inconclusive { .. }) => inconclusive += 1,
            Err(e) => return Err(format!("pair {i}: {e}")),
        }
    }
    let decided = total - inconclusive;
    let rate = inconclusive as f64 / total as f64;
    let msg = format!(
        "{agree}/{decided} decided pairs agree ({crossed} crossed), {inconclusive} inconclusive ({:.1}%), disagreements {:?}",
        100.0 * rate,
        disagreements
    );
    check(agree == decided && rate <= 0.02, msg.clone(), msg)
}

fn kopell() -> Outcome {
    let golden = (5f64.sqrt() - 1.0) / 2.0;
    let a3 = kopell_alpha_threshold(3).map_err(|e| e.to_string())?;
    let mut prev = f64::INFINITY;
    let mut worst_res: f64 = 0.0;
    let mut decreasing = true;
    for k in 3..=60 {
        let a = kopell_alpha_threshold(k).map_err(|e| e.to_string())?;
        // independent residual of a (1 + a)^(k - 2) = 1
        let res = (a * (1.0 + a).powi(k as i32 - 2) - 1.0).abs();
        worst_res = worst_res.max(res).max(kopell_residual(k, a));
        decreasing &= a < prev;
        prev = a;
    }
    let msg = format!("alpha(3) off by {:.1e}, residual {worst_res:.1e}, decreasing {decreasing}", (a3 - golden).abs());
    check((a3 - golden).abs() <= 1e-10 && decreasing && worst_res <= 1e-10, msg.clone(), msg)
}

fn lex_family() -> Outcome {
    let b = build_counterexample(4).map_err(|e| e.to_string())?;
    let hs: Vec<HomeoExpr> = (2..=4).map(|k| b.map(k).clone()).collect();
    let fam = build_lex_family(w(-1.0, 1.0), &hs, &[(-2, 2); 3]).map_err(|e| e.to_string())?;
    let mut ok = fam.entries.len() == 125 && fam.shift_residual <= 1e-8;
    // recompute order and disjointness from the entries
    for pair in fam.entries.windows(2) {
        let (a, c) = (&pair[0], &pair[1]);
        let colex_less = a.index.iter().rev().lt(c.index.iter().rev());
        ok &= colex_less && a.interval.hi() <= c.interval.lo() + 1e-10 && a.interval.lo() < c.interval.lo();
    }
    for e in &fam.entries {
        ok &= e.interval.lo() >= -4.0 && e.interval.hi() <= 4.0;
    }
    let msg =
        format!("{} intervals ordered and disjoint, shift residual {:.2e}", fam.entries.len(), fam.shift_residual);
    check(ok, msg.clone(), msg)
}

/// A nonlinear homeomorphism: bumps on top of an affine map.
fn h0() -> HomeoExpr {
    HomeoExpr::Compose {
        maps: vec![HomeoExpr::exp_bump(-3.0, 3.0), HomeoExpr::exp_bump(-8.0, 1.0), HomeoExpr::affine(1.3, 0.2)],
    }
}

fn conjugated_translation(s: f64) -> HomeoExpr {
    HomeoExpr::Compose { maps: vec![h0(), HomeoExpr::translation(s), h0().inverse()] }
}

fn holder() -> Outcome {
    let mut g = GroupSpec::new(
        "holder",
        vec![("a", conjugated_translation(1.0)), ("b", conjugated_translation(2f64.sqrt()))],
        w(-10.0, 10.0),
    );
    g.budgets = Budget { word_length: 3, samples: 200, ..Budget::default() };
    let r = classify_action(&g, &g.window, &g.budgets).map_err(|e| e.to_string())?;
    if r.case != Case::FreeAction {
        return Err(format!("classified as {}: {}", r.label, r.reason));
    }
    let hr = r.holder.as_ref().ok_or("no conjugacy report")?;
    let ratio = hr.ratios.iter().find(|x| x.name != hr.base_generator).map(|x| x.ratio).ok_or("no ratio")?;
    let expected = if hr.base_generator == "a" { 2f64.sqrt() } else { 1.0 / 2f64.sqrt() };
    let mu = r.measure.as_ref().ok_or("no measure")?;
    let maps: Vec<HomeoExpr> = g.generators.iter().map(|x| x.map.clone()).collect();
    let probes = probe_intervals(&g.window, &maps, 64, 7, &[], 0.0).map_err(|e| e.to_string())?;
    let mut worst: f64 = 0.0;
    for m in &maps {
        worst = worst.max(invariance_residual(mu, m, &probes).map_err(|e| e.to_string())?);
    }
    let msg = format!("ratio {ratio:.6} vs {expected:.6}, residual {worst:.2e} on {} probes", probes.len());
    check((ratio - expected).abs() <= 1e-3 && worst <= 1e-4 && probes.len() == 64, msg.clone(), msg)
}

fn collapse() -> Outcome {
    let mut bumps = Vec::new();
    let mut inverse_bumps = Vec::new();
    for n in -12..12 {
        let a = n as f64;
        for (list, map) in [
            (&mut bumps, HomeoExpr::exp_bump(a, a + 0.5)),
            (&mut inverse_bumps, HomeoExpr::exp_bump(a, a + 0.5).inverse()),
        ] {
            list.push(Piece { interval: w(a, a + 0.5), map });
            list.push(Piece { interval: w(a + 0.5, a + 1.0), map: HomeoExpr::Identity });
        }
    }
    let gamma = HomeoExpr::Piecewise { pieces: bumps };
    let gamma_prime = HomeoExpr::Piecewise { pieces: inverse_bumps };
    let shift = HomeoExpr::Compose { maps: vec![HomeoExpr::translation(1.0), gamma_prime] };
    let g = GroupSpec::new("collapse", vec![("gamma", gamma), ("g", shift)], w(-8.0, 8.0));
    let r = classify_action(&g, &g.window, &g.budgets).map_err(|e| e.to_string())?;
    if r.case != Case::CollapsedFixedSet {
        return Err(format!("classified as {}: {}", r.label, r.reason));
    }
    let mu = r.measure.as_ref().ok_or("no measure")?;
    if !matches!(mu, RadonMeasure::StieltjesFromMap { .. }) {
        return Err("measure is not a Stieltjes measure".into());
    }
    let worst = r.residuals.iter().map(|x| x.residual).fold(0.0, f64::max);
    let mut zero = true;
    for n in -7..7 {
        let a = n as f64;
        zero &= measure_interval(mu, a, a + 0.5).map_err(|e| e.to_string())? == 0.0;
    }
    // compare against gap-deflated length on a few intervals
    let gaps: Vec<(f64, f64)> = (-12..12).map(|n| (n as f64, n as f64 + 0.5)).collect();
    let mut oracle: f64 = 0.0;
    for (a, b) in [(-7.3, 6.1), (-0.2, 0.7), (1.6, 4.45)] {
        let m = measure_interval(mu, a, b).map_err(|e| e.to_string())?;
        oracle = oracle.max((m - gap_deflated_length(&gaps, a, b)).abs());
    }
    let msg = format!(
        "residual {worst:.2e} over {} generators, gap mass zero {zero}, oracle gap {oracle:.1e}",
        r.residuals.len()
    );
    check(worst <= 1e-6 && r.residuals_pass() && zero && oracle <= 1e-12, msg.clone(), msg)
}

fn yoccoz() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(42);
    let interval = |rng: &mut ChaCha8Rng| {
        let a: f64 = rng.gen_range(-5.0..5.0);
        w(a, a + rng.gen_range(0.1..4.0))
    };
    let mut cocycle: f64 = 0.0;
    let mut deriv: f64 = 0.0;
    for _ in 0..100 {
        let (i, j, k) = (interval(&mut rng), interval(&mut rng), interval(&mut rng));
        let ij = yoccoz_map(i, j).unwrap();
        let jk = yoccoz_map(j, k).unwrap();
        let ik = yoccoz_map(i, k).unwrap();
        for x in i.cell_midpoints(20) {
            let scale = k.length().max(1.0);
            cocycle = cocycle.max((jk.eval(ij.eval(x)) - ik.eval(x)).abs() / scale);
            let y = ij.eval(x);
            let d = chart_map_deriv((i.lo(), i.hi()), (j.lo(), j.hi()), x, y);
            deriv = deriv.max((ij.deriv(x) - d).abs() / d.max(1.0));
        }
    }
    let base = w(0.0, 1.0);
    let id = yoccoz_map(base, base).unwrap();
    let ident = base.grid(101).iter().map(|&x| (id.eval(x) - x).abs()).fold(0.0, f64::max);
    let sup = |r: f64| {
        let m = yoccoz_map(base, w(0.0, r)).unwrap();
        base.cell_midpoints(2000).iter().map(|&x| (m.deriv(x) - 1.0).abs()).fold(0.0, f64::max)
    };
    let (near, far) = (sup(1.01), sup(2.0));
    let msg = format!(
        "cocycle {cocycle:.1e}, identity {ident:.1e}, derivative vs chain rule {deriv:.1e}, sup|phi'-1| {near:.3e} < {far:.3e}"
    );
    check(cocycle <= 1e-10 && ident <= 1e-12 && deriv <= 1e-8 && near < far, msg.clone(), msg)
}

fn fixes_zero() -> HomeoExpr {
    HomeoExpr::Piecewise {
        pieces: vec![
            Piece { interval: IntervalQ::new(f64::NEG_INFINITY, 0.0).unwrap(), map: HomeoExpr::affine(0.5, 0.0) },
            Piece { interval: IntervalQ::new(0.0, f64::INFINITY).unwrap(), map: HomeoExpr::affine(2.0, 0.0) },
        ],
    }
}

fn classification() -> Outcome {
    let stage: Vec<(String, HomeoExpr)> = (1..=4).map(|i| (format!("f{i}"), HomeoExpr::stage(i, 4).unwrap())).collect();
    let fixtures = [
        (GroupSpec::new("fixed", vec![("p", fixes_zero())], w(-5.0, 5.0)), Case::GlobalFixedPoint),
        (GroupSpec::new("shift", vec![("t", HomeoExpr::translation(1.0))], w(-5.0, 5.0)), Case::FreeAction),
        (
            GroupSpec::new("stages", stage.iter().map(|(n, e)| (n.as_str(), e.clone())).collect(), w(-4.0, 4.0)),
            Case::Unclassified,
        ),
    ];
    let mut labels = Vec::new();
    for (g, want) in &fixtures {
        let first = classify_action(g, &g.window, &g.budgets).map_err(|e| e.to_string())?;
        let second = classify_action(g, &g.window, &g.budgets).map_err(|e| e.to_string())?;
        let same = serde_json::to_string(&first).unwrap() == serde_json::to_string(&second).unwrap();
        if first.case != *want || !same {
            return Err(format!("{}: got {} (repeatable {same})", g.name, first.label));
        }
        if *want == Case::Unclassified {
            let t = first.tower_validation.as_ref().ok_or("no tower")?;
            let c = first.certificate.as_ref().ok_or("no certificate")?;
            if !(t.pass && t.levels.len() == 4 && c.mass_factor == 101) {
                return Err("tower or certificate missing".into());
            }
        }
        labels.push(first.label);
    }
    Ok(format!("{} (each run twice, identical reports)", labels.join(", ")))
}

#[test]
fn acceptance() {
    let criteria: [Criterion; 9] = [
        ("counterexample K=4 verifies", counterexample_k4),
        ("mass pump gives 101 disjoint images", mass_pump_k4),
        ("crossing detection matches exact PL oracle", crossing_oracle),
        ("Kopell threshold", kopell),
        ("lexicographic family for K=4", lex_family),
        ("Holder conjugacy recovers sqrt(2)", holder),
        ("collapse measure is invariant", collapse),
        ("Yoccoz maps: cocycle, identity, derivative", yoccoz),
        ("classification of reference groups", classification),
    ];
    let mut failed = 0;
    for (i, (name, run)) in criteria.iter().enumerate() {
        match run() {
            Ok(detail) => println!("[PASS] {}. {name}: {detail}", i + 1),
            Err(detail) => {
                failed += 1;
                println!("[FAIL] {}. {name}: {detail}", i + 1);
            }
        }
    }
    assert_eq!(failed, 0, "{failed} acceptance criteria failed");
}
