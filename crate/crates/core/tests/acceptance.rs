//! One PASS/FAIL line per acceptance criterion.
//!
//! Runs without the libtest harness so the lines are always printed and the
//! runtimes are measured without other tests competing for the CPU.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::time::{Duration, Instant};

use stab_core::harness::*;

const SEED: u64 = 1;
const LEVEL: u32 = 5;

const FEM_FIRST: f64 = 0.01;
const FEM_SECOND: f64 = 0.02;
const FEM_SECONDS: u64 = 60;

const TRACE: f64 = 1e-10;
const TRACE_SAMPLES: usize = 100;
const GL_TRACE_SECONDS: u64 = 5;

const CPN_LEMMA: f64 = 1e-6;
const CPN_TRACE: f64 = 1e-5;
const CPN_TENSOR: f64 = 1e-6;
const CPN_SECONDS: u64 = 120;

const INNER_RELATIVE: f64 = 1e-3;
const INNER_ORDER: f64 = 1.9;
const GAP_ORDER: f64 = 1.0;
const FD_GRADIENT: f64 = 1e-6;
const FD_HESSIAN: f64 = 1e-5;

const GL_EPSILON: f64 = 0.5;
const GL_RESIDUAL: f64 = 1e-8;
const CERTIFY_CONSTANT: f64 = 1e-8;
const CERTIFY_ZERO: f64 = 0.01;
const CERTIFY_SUM: f64 = 1e-6;

const YMH_EPSILON: f64 = 0.3;
const YMH_DEGREE: i64 = 1;
const YMH_GAUGE: f64 = 1e-12;
const YMH_ENERGY: (f64, f64) = (0.98, 1.05);
const YMH_LAMBDA: f64 = 1e-6;
const YMH_BOGOMOLNY: f64 = 1e-3;
const YMH_RESIDUAL_MATCH: f64 = 0.1;
const YMH_TRIVIAL: f64 = 0.05;
const YMH_SECONDS: u64 = 600;

const PER_XI: f64 = 1e-3;
const XI_SUM: f64 = 0.05;

/// Criteria that fail with the prescribed discretization; the suite asserts
/// that they keep failing so that a silent change is noticed.
const EXPECTED_FAILURES: &[usize] = &[7];

fn config(dir: &Path, extra: &str) -> ExperimentConfig {
    let (lo, hi) = YMH_ENERGY;
    let text = format!(
        "output.dir = {}
mesh.level = {LEVEL}
pointlab.seed = {SEED}
pointlab.samples = {TRACE_SAMPLES}
gl.epsilon = {GL_EPSILON}
gl.solver.tol = {GL_RESIDUAL}
ymh.epsilon = {YMH_EPSILON}
ymh.degree = {YMH_DEGREE}
tol.fem.first = {FEM_FIRST}
tol.fem.second = {FEM_SECOND}
tol.pointlab.trace = {TRACE}
tol.cpn.lemma = {CPN_LEMMA}
tol.cpn.trace = {CPN_TRACE}
tol.cpn.tensor = {CPN_TENSOR}
tol.inner.relative = {INNER_RELATIVE}
tol.inner.order = {INNER_ORDER}
tol.gap.order = {GAP_ORDER}
tol.fd.gradient = {FD_GRADIENT}
tol.fd.hessian = {FD_HESSIAN}
tol.certify.constant = {CERTIFY_CONSTANT}
tol.certify.zero = {CERTIFY_ZERO}
tol.certify.sum = {CERTIFY_SUM}
tol.ymh.gauge = {YMH_GAUGE}
tol.ymh.energyLow = {lo}
tol.ymh.energyHigh = {hi}
tol.ymh.lambda = {YMH_LAMBDA}
tol.ymh.bogomolny = {YMH_BOGOMOLNY}
tol.ymh.residualMatch = {YMH_RESIDUAL_MATCH}
tol.ymh.trivial = {YMH_TRIVIAL}
tol.ymh.perXi = {PER_XI}
tol.ymh.xiSum = {XI_SUM}
{extra}",
        dir.display()
    );
    ExperimentConfig::parse(&text).unwrap()
}

/// A finished run: where it wrote and what it reported.
struct Run {
    label: String,
    config: ExperimentConfig,
    which: Experiment,
    levels: Option<Vec<u32>>,
    doc: ReportDoc,
}

impl Run {
    fn files(&self) -> Vec<PathBuf> {
        let dir = &self.config.output_dir;
        let mut out = vec![dir.join(format!("{}.json", self.doc.experiment_id))];
        out.extend(self.doc.artifacts.iter().map(|a| dir.join(a)));
        if let Some(levels) = &self.levels {
            for l in levels {
                out.push(dir.join(format!("level{l}/{}.json", self.which.id())));
            }
        }
        out
    }
}

struct Suite {
    root: tempfile::TempDir,
    runs: Vec<Run>,
    results: BTreeMap<usize, bool>,
}

impl Suite {
    fn run(&mut self, label: &str, extra: &str, which: Experiment) -> (ReportDoc, Duration) {
        let cfg = config(&self.root.path().join(label), extra);
        let start = Instant::now();
        let doc = run_experiment(&cfg, which).unwrap();
        let took = start.elapsed();
        self.runs.push(Run { label: label.into(), config: cfg, which, levels: None, doc: doc.clone() });
        (doc, took)
    }

    fn converge(&mut self, label: &str, which: Experiment, levels: &[u32]) -> ReportDoc {
        let cfg = config(&self.root.path().join(label), "");
        let doc = convergence_study(&cfg, which, levels).unwrap();
        self.runs.push(Run { label: label.into(), config: cfg, which, levels: Some(levels.to_vec()), doc: doc.clone() });
        doc
    }

    fn report(&mut self, criterion: usize, pass: bool, detail: String) {
        println!("criterion {criterion}: {} {detail}", if pass { "PASS" } else { "FAIL" });
        self.results.insert(criterion, pass);
    }
}

fn value(doc: &ReportDoc, name: &str) -> f64 {
    doc.value(name).unwrap_or_else(|| panic!("{} lacks {name}", doc.experiment_id))
}

fn clean(doc: &ReportDoc) -> bool {
    doc.all_pass() && doc.errors.is_empty()
}

fn criterion_1(s: &mut Suite) {
    let (doc, took) = s.run("fem", "", Experiment::FemValidate);
    let first = (1..=3).all(|k| (value(&doc, &format!("lambda{k}")) - 2.0).abs() <= FEM_FIRST * 2.0);
    let second = (4..=8).all(|k| (value(&doc, &format!("lambda{k}")) - 6.0).abs() <= FEM_SECOND * 6.0);
    let fast = took < Duration::from_secs(FEM_SECONDS);
    let detail = format!("firstClusterError={:.3e} runtime={:.2}s", value(&doc, "firstClusterError"), took.as_secs_f64());
    s.report(1, clean(&doc) && first && second && fast, detail);
}

fn sphere_sweep(s: &mut Suite, ymh: bool) -> (bool, f64, Duration) {
    let (which, tag) = if ymh { (Experiment::PointlabSphereYmh, "ymh") } else { (Experiment::PointlabSphereGl, "gl") };
    let mut ok = true;
    let mut worst = 0.0f64;
    let mut total = Duration::ZERO;
    for n in 2..=8 {
        let (doc, took) = s.run(&format!("sphere-{tag}-{n}"), &format!("pointlab.n = {n}\n"), which);
        total += took;
        let dev = value(&doc, "maxDeviation");
        worst = worst.max(dev);
        ok &= clean(&doc) && dev <= TRACE;
        if ymh && (n == 2 || n == 4) {
            let deg = value(&doc, "degenerateDeviation");
            worst = worst.max(deg);
            ok &= deg <= TRACE;
        }
    }
    (ok, worst, total)
}

fn criterion_2(s: &mut Suite) {
    let (ok, worst, took) = sphere_sweep(s, false);
    let fast = took < Duration::from_secs(GL_TRACE_SECONDS);
    s.report(2, ok && fast, format!("maxDeviation={worst:.3e} runtime={:.2}s", took.as_secs_f64()));
}

fn criterion_3(s: &mut Suite) {
    let (ok, worst, _) = sphere_sweep(s, true);
    s.report(3, ok, format!("maxDeviation={worst:.3e} (degenerate n=2,4 included)"));
}

fn criterion_4(s: &mut Suite) {
    let mut ok = true;
    let mut total = Duration::ZERO;
    let mut worst = [0.0f64; 4];
    for n in 1..=3 {
        let (doc, took) = s.run(&format!("cpn-{n}"), &format!("pointlab.n = {n}\n"), Experiment::PointlabCpn);
        total += took;
        let lemma = value(&doc, "lemma");
        let q = ["q1Relative", "q2q3Relative", "rotatedQ1Relative", "rotatedQ2q3Relative"]
            .iter()
            .map(|k| value(&doc, k))
            .fold(0.0, f64::max);
        let tensor = value(&doc, "hessianTensor").max(value(&doc, "hessianDiagonal"));
        let ricci = value(&doc, "ricci");
        ok &= clean(&doc) && lemma <= CPN_LEMMA && q <= CPN_TRACE && tensor <= CPN_TENSOR && ricci <= CPN_TENSOR;
        for (w, v) in worst.iter_mut().zip([lemma, q, tensor, ricci]) {
            *w = w.max(v);
        }
    }
    let fast = total < Duration::from_secs(CPN_SECONDS);
    let detail = format!(
        "lemma={:.1e} traceSums={:.1e} hessian={:.1e} ricci={:.1e} runtime={:.2}s",
        worst[0],
        worst[1],
        worst[2],
        worst[3],
        total.as_secs_f64()
    );
    s.report(4, ok && fast, detail);
}

fn criterion_5(s: &mut Suite) {
    let (inner, _) = s.run("innervar", "", Experiment::GlInnervar);
    let rel = value(&inner, "firstRelative").max(value(&inner, "secondRelative"));
    let order = value(&inner, "firstOrder").min(value(&inner, "secondOrder"));
    let gap = s.converge("gap", Experiment::Prop21Gap, &[3, 4, 5]);
    let gap_order = value(&gap, "order");
    let (fd, _) = s.run("fdcheck", "", Experiment::Fdcheck);
    let grad = value(&fd, "glGradient").max(value(&fd, "ymhGradient"));
    let hess = value(&fd, "glHessian").max(value(&fd, "ymhHessian"));
    let ok = clean(&inner)
        && clean(&gap)
        && clean(&fd)
        && rel <= INNER_RELATIVE
        && order >= INNER_ORDER
        && gap_order >= GAP_ORDER
        && grad <= FD_GRADIENT
        && hess <= FD_HESSIAN;
    let detail = format!("relative={rel:.2e} order={order:.2} gapOrder={gap_order:.2} fdGradient={grad:.1e} fdHessian={hess:.1e}");
    s.report(5, ok, detail);
}

fn criterion_6(s: &mut Suite) {
    let mut ok = true;
    let mut parts = Vec::new();
    for ansatz in ["vortex-pair", "modulated-pair", "random-harmonics", "half-constant", "zero"] {
        let (doc, _) = s.run(&format!("certify-{ansatz}"), &format!("gl.ansatz = {ansatz}\n"), Experiment::GlCertify);
        let residual = value(&doc, "residual");
        let lambda = doc.value("lambda1").unwrap_or(f64::NAN);
        let pass = clean(&doc) && residual <= GL_RESIDUAL;
        let summary = if doc.metrics.contains_key("negativeDirection") {
            let q = value(&doc, "rayleighQuotient");
            let sum = value(&doc, "conformalSum");
            ok &= pass && q < 0.0 && sum <= CERTIFY_SUM * value(&doc, "scale");
            format!("{ansatz}:quotient={q:.3},sum={sum:.1e}")
        } else if doc.metrics["lambda1"].target.is_some() {
            let target = -1.0 / (GL_EPSILON * GL_EPSILON);
            ok &= pass && (lambda - target).abs() <= CERTIFY_ZERO * target.abs();
            format!("{ansatz}:zero,lambda1={lambda:.4}")
        } else {
            ok &= pass && lambda >= -CERTIFY_CONSTANT;
            format!("{ansatz}:unit,lambda1={lambda:.1e}")
        };
        parts.push(summary);
    }
    s.report(6, ok, parts.join(" "));
}

fn criteria_7_8(s: &mut Suite) {
    let start = Instant::now();
    let (gauge, _) = s.run("ymh-gauge", "", Experiment::YmhGauge);
    let (v, _) = s.run("ymh-vortex", "", Experiment::YmhVortex);
    let took = start.elapsed();

    let gauge_ok = clean(&gauge)
        && ["energyInvariance", "fluxInvariance", "modulusInvariance", "composition"].iter().all(|k| value(&gauge, k) <= YMH_GAUGE)
        && value(&gauge, "degreeQuantized") == 1.0
        && value(&gauge, "degreePreserved") == 1.0;
    let ratio = value(&v, "energyRatio");
    let lambda = value(&v, "lambda1");
    let norm = value(&v, "hessianNorm");
    let defect = value(&v, "bogomolnyDefect");
    let residual = value(&v, "residualIntegral");
    let matched = (defect - residual).abs() <= YMH_RESIDUAL_MATCH * residual.abs();
    let trivial = value(&v, "trivialQuotient");
    let target = -1.0 / (YMH_EPSILON * YMH_EPSILON);
    let checks = [
        ("gauge", gauge_ok),
        ("energy", (YMH_ENERGY.0..=YMH_ENERGY.1).contains(&ratio)),
        ("lambda1", lambda >= -YMH_LAMBDA * norm),
        ("bogomolny", defect >= -YMH_BOGOMOLNY),
        ("residualMatch", matched),
        ("trivial", (trivial - target).abs() <= YMH_TRIVIAL * target.abs()),
        ("runtime", took < Duration::from_secs(YMH_SECONDS)),
    ];
    let failed: Vec<&str> = checks.iter().filter(|c| !c.1).map(|c| c.0).collect();
    let detail = format!(
        "energy/2pi={ratio:.5} lambda1={lambda:.2e} hessianNorm={norm:.0} defect={defect:.3e} residual={residual:.3e} trivial={trivial:.4} runtime={:.1}s failed={failed:?}",
        took.as_secs_f64()
    );
    s.report(7, failed.is_empty(), detail);

    let scale = 1.0 + value(&v, "energy");
    let per: Vec<f64> = (0..3).map(|i| value(&v, &format!("perXi{i}"))).collect();
    let sum: f64 = per.iter().sum();
    let target = 8.0 * value(&v, "curvatureEnergy");
    let ok = per.iter().all(|p| *p >= -PER_XI * scale) && (sum - target).abs() <= XI_SUM * target.abs();
    s.report(8, ok, format!("perXi={per:.4?} sum={sum:.4} target={target:.4}"));
}

fn criterion_9(s: &mut Suite) {
    let mut mismatched = Vec::new();
    let mut compared = 0;
    for run in &s.runs {
        let before: Vec<(PathBuf, Vec<u8>)> = run.files().into_iter().map(|p| {
            let b = std::fs::read(&p).unwrap_or_else(|e| panic!("{}: {e}", p.display()));
            (p, b)
        }).collect();
        match &run.levels {
            Some(l) => {
                convergence_study(&run.config, run.which, l).unwrap();
            }
            None => {
                run_experiment(&run.config, run.which).unwrap();
            }
        }
        for (p, b) in before {
            compared += 1;
            if std::fs::read(&p).unwrap() != b {
                mismatched.push(format!("{}:{}", run.label, p.file_name().unwrap().to_string_lossy()));
            }
        }
    }
    let detail = format!("files={compared} runs={} mismatched={mismatched:?}", s.runs.len());
    s.report(9, mismatched.is_empty(), detail);
}

fn main() {
    let mut s = Suite { root: tempfile::tempdir().unwrap(), runs: Vec::new(), results: BTreeMap::new() };
    criterion_1(&mut s);
    criterion_2(&mut s);
    criterion_3(&mut s);
    criterion_4(&mut s);
    criterion_5(&mut s);
    criterion_6(&mut s);
    criteria_7_8(&mut s);
    criterion_9(&mut s);

    assert_eq!(s.results.len(), 9);
    let passed = s.results.values().filter(|p| **p).count();
    println!("acceptance: {passed}/9 criteria pass, expected failures {EXPECTED_FAILURES:?}");
    for (c, pass) in &s.results {
        if EXPECTED_FAILURES.contains(c) {
            assert!(!pass, "criterion {c} now passes; drop it from EXPECTED_FAILURES");
        } else {
            assert!(pass, "criterion {c} failed");
        }
    }
}
