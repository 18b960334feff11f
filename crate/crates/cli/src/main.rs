use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};
use linelab::classify::{classify_action, Case, ClassificationReport, ResidualRow, PROBES};
use linelab::counterexample::{build_counterexample, verify_counterexample, CounterexampleBuild, VerifyOptions};
use linelab::decimal;
use linelab::group::GroupSpec;
use linelab::interval::IntervalQ;
use linelab::measure::{invariance_residual, probe_intervals, RadonMeasure};
use linelab::tower::{
    kopell_alpha_threshold, kopell_min_depth, kopell_residual, search_tower, search_tower_nilpotent, validate_tower,
    NilpotentTower, Tower, TowerReport, TowerSearch,
};
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use serde_json::Value;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

const SCHEMA: u64 = 1;

#[derive(Parser)]
#[command(name = "linelab", version, about = "Analyses of groups of homeomorphisms of the line")]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Crossings, tower search and classification of a group spec.
    Analyze(AnalyzeArgs),
    /// Build or verify the commuting C1 tower family.
    #[command(subcommand)]
    Counterexample(CounterexampleCmd),
    /// Regularity threshold a(1+a)^(k-2) = 1.
    Kopell(KopellArgs),
    /// Find or validate nested towers of intervals.
    #[command(subcommand)]
    Tower(TowerCmd),
    /// Estimate or check invariant Radon measures.
    #[command(subcommand)]
    Measure(MeasureCmd),
}

#[derive(Args)]
struct AnalyzeArgs {
    spec: PathBuf,
    /// Directory for report.json, residuals.csv and sweep.csv.
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    budget_words: Option<usize>,
    #[arg(long, num_args = 2, value_names = ["A", "B"], allow_negative_numbers = true)]
    window: Option<Vec<f64>>,
}

#[derive(Subcommand)]
enum CounterexampleCmd {
    /// Write the depth-K stage maps, ladder geometry and tower.
    Build {
        #[arg(long)]
        stages: u32,
        #[arg(long)]
        out: PathBuf,
    },
    /// Run every check on a build file and print a summary per check.
    Verify {
        build: PathBuf,
        #[arg(long)]
        report: Option<PathBuf>,
        #[arg(long)]
        csv: Option<PathBuf>,
        #[arg(long, default_value_t = 1000)]
        samples: usize,
        #[arg(long, default_value_t = linelab::tol::N_CHECK)]
        n_check: u64,
    },
}

#[derive(Args)]
#[group(required = true, multiple = false)]
struct KopellArgs {
    #[arg(long)]
    k: Option<u32>,
    #[arg(long)]
    alpha: Option<f64>,
}

#[derive(Subcommand)]
enum TowerCmd {
    /// Search for a tower in the group of a spec.
    Find {
        spec: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
        /// Use the declared subgroups A and B.
        #[arg(long)]
        nilpotent: bool,
    },
    /// Validate a tower file, a tower search report or a build file.
    Verify {
        tower: PathBuf,
        #[arg(long)]
        report: Option<PathBuf>,
        #[arg(long, default_value_t = linelab::tol::EPS_FIX)]
        eps: f64,
    },
}

#[derive(Subcommand)]
enum MeasureCmd {
    /// Classify and write the resulting invariant measure.
    Estimate {
        spec: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long)]
        csv: Option<PathBuf>,
    },
    /// Invariance residuals of a stored measure under the spec's generators.
    Verify {
        spec: PathBuf,
        measure: PathBuf,
        #[arg(long)]
        csv: Option<PathBuf>,
        #[arg(long, default_value_t = 1)]
        seed: u64,
    },
}

/// Exit status beyond success and input errors.
const EXIT_FLAGGED: u8 = 2;

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            // help and version go to stdout with status 0; usage errors are input errors
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 1 } else { 0 });
        }
    };
    if let Ok(n) = std::env::var("LINELAB_THREADS") {
        if let Ok(n) = n.trim().parse::<usize>() {
            // ignore failure: the pool may already exist
            let _ = rayon::ThreadPoolBuilder::new().num_threads(n.max(1)).build_global();
        }
    }
    match run(cli) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
    }
}

fn run(cli: Cli) -> Result<u8> {
    match cli.cmd {
        Cmd::Analyze(a) => analyze(a),
        Cmd::Counterexample(CounterexampleCmd::Build { stages, out }) => {
            let b = build_counterexample(stages)?;
            write_doc(&out, &b)?;
            println!("wrote {} stage maps to {}", b.maps.len(), out.display());
            Ok(0)
        }
        Cmd::Counterexample(CounterexampleCmd::Verify { build, report, csv, samples, n_check }) => {
            let b: CounterexampleBuild = read_doc(&build)?;
            let opts = VerifyOptions { samples, n_check, ..Default::default() };
            let r = verify_counterexample(&b, &opts);
            for s in &r.summary {
                println!(
                    "{:<20} {:>5} rows  worst {:>12}  tol {:>8}  {}",
                    s.check,
                    s.rows,
                    fmt12(s.worst),
                    decimal::format(s.tolerance),
                    if s.pass { "pass" } else { "FAIL" }
                );
            }
            if let Some(p) = report {
                write_doc(&p, &r)?;
            }
            if let Some(p) = csv {
                fs::write(&p, r.csv()).with_context(|| format!("writing {}", p.display()))?;
            }
            Ok(if r.pass { 0 } else { EXIT_FLAGGED })
        }
        Cmd::Kopell(KopellArgs { k: Some(k), .. }) => {
            let a = kopell_alpha_threshold(k)?;
            println!("alpha*({k}) = {a:.12}");
            println!("residual = {:e}", kopell_residual(k, a));
            Ok(0)
        }
        Cmd::Kopell(KopellArgs { alpha: Some(a), .. }) => {
            let k = kopell_min_depth(a)?;
            println!("smallest k with {a} (1 + {a})^(k-2) >= 1: k = {k}");
            Ok(0)
        }
        Cmd::Kopell(_) => bail!("give --k or --alpha"),
        Cmd::Tower(TowerCmd::Find { spec, out, nilpotent }) => tower_find(&spec, out, nilpotent),
        Cmd::Tower(TowerCmd::Verify { tower, report, eps }) => {
            let t = load_tower(&tower)?;
            let r = validate_tower(&t, eps);
            print_tower(&r);
            if let Some(p) = report {
                write_doc(&p, &r)?;
            }
            Ok(if r.pass { 0 } else { EXIT_FLAGGED })
        }
        Cmd::Measure(MeasureCmd::Estimate { spec, out, csv }) => {
            let g = load_spec(&spec)?;
            let c = classify_action(&g, &g.window, &g.budgets)?;
            println!("{}: {}", c.label, c.reason);
            let Some(mu) = &c.measure else {
                println!("no invariant measure produced");
                return Ok(EXIT_FLAGGED);
            };
            if let Some(p) = out {
                write_doc(&p, &MeasureDoc { case: c.case, measure: mu.clone(), residuals: c.residuals.clone() })?;
            }
            if let Some(p) = csv {
                write_residuals(&p, &c.residuals)?;
            }
            print_residuals(&c.residuals);
            Ok(if c.residuals_pass() { 0 } else { EXIT_FLAGGED })
        }
        Cmd::Measure(MeasureCmd::Verify { spec, measure, csv, seed }) => {
            let g = load_spec(&spec)?;
            let mu = load_measure(&measure)?;
            let rows = residuals(&g, &mu, seed)?;
            print_residuals(&rows);
            if let Some(p) = csv {
                write_residuals(&p, &rows)?;
            }
            Ok(if rows.iter().all(|r| r.pass) { 0 } else { EXIT_FLAGGED })
        }
    }
}

#[derive(Serialize, Deserialize)]
struct MeasureDoc {
    case: Case,
    measure: RadonMeasure,
    residuals: Vec<ResidualRow>,
}

#[derive(Serialize)]
struct AnalysisReport {
    spec: String,
    window: IntervalQ,
    classification: ClassificationReport,
    /// Why no tower search ran, if it did not.
    tower_skipped: Option<String>,
    tower: Option<TowerSearch>,
    tower_validation: Option<TowerReport>,
    nilpotent: Option<NilpotentTower>,
    exit_code: u8,
}

fn analyze(a: AnalyzeArgs) -> Result<u8> {
    let mut g = load_spec(&a.spec)?;
    if let Some(n) = a.budget_words {
        g.budgets.word_length = n;
    }
    if let Some(w) = &a.window {
        g.window = IntervalQ::new(w[0], w[1]).context("--window")?;
    }
    g.validate().context("spec")?;
    let c = classify_action(&g, &g.window, &g.budgets)?;
    let (mut tower, mut nilpotent, mut skipped) = (None, None, None);
    if c.any_crossed() {
        skipped = Some("crossed elements present".to_string());
    } else if let Some(t) = &c.tower {
        tower = Some(t.clone());
    } else if g.subgroups.a.is_some() && g.subgroups.b.is_some() {
        match search_tower_nilpotent(&g, &g.window, &g.budgets) {
            Ok(n) => nilpotent = Some(n),
            Err(e) => skipped = Some(e.to_string()),
        }
    } else {
        match search_tower(&g, &g.window, &g.budgets) {
            Ok(t) => tower = Some(t),
            Err(e) => skipped = Some(e.to_string()),
        }
    }
    let tower_validation = tower.as_ref().map(|t| validate_tower(&t.tower, g.tolerances.eps_fix));
    let code = if c.case == Case::Unclassified { EXIT_FLAGGED } else { 0 };

    let crossed = c.crossings.iter().filter(|p| !matches!(p.outcome, linelab::classify::CrossOutcome::Clear)).count();
    println!("{}: {} generators, window {}", g.name, g.generators.len(), g.window);
    println!("crossings: {crossed} of {} pairs", c.crossings.len());
    match (&tower, &nilpotent, &skipped) {
        (Some(t), _, _) => println!("tower: {} levels, {:?}", t.tower.len(), t.status),
        (_, Some(n), _) => println!("tower (nilpotent): base {}, {} levels", n.base, n.search.tower.len()),
        (_, _, Some(r)) => println!("tower: skipped ({r})"),
        _ => {}
    }
    println!("classification: {} ({})", c.label, c.reason);
    if let Some(cert) = &c.certificate {
        println!("certificate: {}", cert.statement);
    }
    print_residuals(&c.residuals);

    if let Some(dir) = &a.out {
        fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
        write_residuals(&dir.join("residuals.csv"), &c.residuals)?;
        write_sweep(&dir.join("sweep.csv"), &g)?;
        let report = AnalysisReport {
            spec: g.name.clone(),
            window: g.window,
            classification: c,
            tower_skipped: skipped,
            tower,
            tower_validation,
            nilpotent,
            exit_code: code,
        };
        write_doc(&dir.join("report.json"), &report)?;
    }
    Ok(code)
}

fn tower_find(spec: &Path, out: Option<PathBuf>, nilpotent: bool) -> Result<u8> {
    let g = load_spec(spec)?;
    let search = if nilpotent {
        let n = search_tower_nilpotent(&g, &g.window, &g.budgets)?;
        println!("base {} (commutator residual {})", n.base, fmt12(n.commutator_residual));
        n.search
    } else {
        search_tower(&g, &g.window, &g.budgets)?
    };
    for (i, l) in search.tower.levels.iter().enumerate() {
        println!("level {}: {} by {}", i + 1, l.interval, l.name);
    }
    println!("status: {:?} after {} words", search.status, search.words_tried);
    if let Some(p) = out {
        write_doc(&p, &search)?;
    }
    Ok(if search.covered() { 0 } else { EXIT_FLAGGED })
}

fn residuals(g: &GroupSpec, mu: &RadonMeasure, seed: u64) -> Result<Vec<ResidualRow>> {
    let tol = g.tolerances.tau_meas;
    let mut rows = Vec::new();
    for (i, gen) in g.generators.iter().enumerate() {
        let probes = probe_intervals(
            &g.window,
            std::slice::from_ref(&gen.map),
            PROBES,
            seed.wrapping_add(i as u64),
            mu.atoms(),
            g.tolerances.eps_sep / 4.0,
        )?;
        let r = invariance_residual(mu, &gen.map, &probes)?;
        rows.push(ResidualRow {
            generator: gen.name.clone(),
            residual: r,
            tolerance: tol,
            probes: probes.len(),
            pass: r <= tol,
        });
    }
    Ok(rows)
}

fn print_residuals(rows: &[ResidualRow]) {
    for r in rows {
        println!(
            "  residual {:<8} {:>12} over {} probes (tol {}) {}",
            r.generator,
            fmt12(r.residual),
            r.probes,
            decimal::format(r.tolerance),
            if r.pass { "pass" } else { "FAIL" }
        );
    }
}

fn print_tower(r: &TowerReport) {
    for l in &r.levels {
        println!("level {} {} on {}: {}", l.level, l.name, l.interval, if l.pass { "pass" } else { "FAIL" });
    }
    for f in &r.failures {
        println!("  {f}");
    }
}

fn fmt12(x: f64) -> String {
    format!("{x:.11e}")
}

fn write_residuals(path: &Path, rows: &[ResidualRow]) -> Result<()> {
    let mut w = csv::Writer::from_path(path).with_context(|| format!("writing {}", path.display()))?;
    w.write_record(["generator", "residual", "tolerance", "probes", "pass"])?;
    for r in rows {
        w.write_record([
            r.generator.clone(),
            decimal::format(r.residual),
            decimal::format(r.tolerance),
            r.probes.to_string(),
            r.pass.to_string(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

/// `x, f(x), f'(x)` for every generator on a uniform grid of the window.
fn write_sweep(path: &Path, g: &GroupSpec) -> Result<()> {
    let mut w = csv::Writer::from_path(path).with_context(|| format!("writing {}", path.display()))?;
    w.write_record(["generator", "x", "fx", "dfx"])?;
    for gen in &g.generators {
        for x in g.window.grid(201) {
            let fx = gen.map.eval(x)?;
            w.write_record([
                gen.name.clone(),
                decimal::format(x),
                decimal::format(fx),
                decimal::format(gen.map.deriv(x)),
            ])?;
        }
    }
    w.flush()?;
    Ok(())
}

/// Pretty JSON with a schema version; object keys come out sorted.
fn write_doc<T: Serialize>(path: &Path, doc: &T) -> Result<()> {
    let mut v = serde_json::to_value(doc)?;
    match &mut v {
        Value::Object(m) => {
            m.insert("schema".into(), Value::from(SCHEMA));
        }
        other => {
            let inner = std::mem::take(other);
            let mut m = serde_json::Map::new();
            m.insert("schema".into(), Value::from(SCHEMA));
            m.insert("data".into(), inner);
            v = Value::Object(m);
        }
    }
    let mut s = serde_json::to_string_pretty(&v)?;
    s.push('\n');
    fs::write(path, s).with_context(|| format!("writing {}", path.display()))
}

fn read_value(path: &Path) -> Result<Value> {
    let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    let mut v: Value = serde_json::from_str(&text).with_context(|| format!("parsing {}", path.display()))?;
    if let Value::Object(m) = &mut v {
        if let Some(s) = m.remove("schema") {
            if s != SCHEMA {
                bail!("{}: unsupported schema {s}", path.display());
            }
        }
    }
    Ok(v)
}

fn read_doc<T: DeserializeOwned>(path: &Path) -> Result<T> {
    let v = read_value(path)?;
    serde_json::from_value(v).with_context(|| format!("decoding {}", path.display()))
}

/// A group spec, or a counterexample build read as one.
fn load_spec(path: &Path) -> Result<GroupSpec> {
    let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    let v: Value = serde_json::from_str(&text).with_context(|| format!("parsing {}", path.display()))?;
    // decode from the text when possible so errors carry line and column
    if v.get("stages").is_some() && v.get("maps").is_some() {
        let b: CounterexampleBuild = read_doc(path)?;
        return Ok(b.group_spec());
    }
    let g: GroupSpec =
        if v.get("schema").is_some() { serde_json::from_value(read_value(path)?) } else { serde_json::from_str(&text) }
            .with_context(|| format!("decoding {}", path.display()))?;
    g.validate().with_context(|| format!("validating {}", path.display()))?;
    Ok(g)
}

fn load_tower(path: &Path) -> Result<Tower> {
    let v = read_value(path)?;
    if let Ok(t) = serde_json::from_value::<Tower>(v.clone()) {
        return Ok(t);
    }
    if let Ok(s) = serde_json::from_value::<TowerSearch>(v.clone()) {
        return Ok(s.tower);
    }
    if let Ok(b) = serde_json::from_value::<CounterexampleBuild>(v) {
        return Ok(b.tower());
    }
    bail!("{}: not a tower, tower search report or build file", path.display())
}

fn load_measure(path: &Path) -> Result<RadonMeasure> {
    let v = read_value(path)?;
    if let Some(m) = v.get("measure") {
        return serde_json::from_value(m.clone()).with_context(|| format!("decoding measure in {}", path.display()));
    }
    serde_json::from_value(v).with_context(|| format!("decoding {}", path.display()))
}
