use std::sync::Arc;

use num_complex::Complex64;
use stab_core::geometry::Discretization;
use stab_core::gl::{Ansatz, GlParams};
use stab_core::harness::config::KEYS;
use stab_core::harness::*;
use stab_core::io::{read_json, write_json, GlSnapshot, YmhSnapshot};
use stab_core::ymh::{bundle_init, YmhState};
use stab_core::StabError;

fn config_in(dir: &std::path::Path, extra: &str) -> ExperimentConfig {
    ExperimentConfig::parse(&format!("output.dir = {}\n{extra}", dir.display())).unwrap()
}

#[test]
fn minimal_config_uses_defaults() {
    let c = ExperimentConfig::parse("# comment only\n\nmesh.level = 3\n").unwrap();
    let d = ExperimentConfig::default();
    assert_eq!(c.mesh_level, 3);
    assert_eq!(c.gl_epsilon, d.gl_epsilon);
    assert_eq!(c.tol, d.tol);
}

#[test]
fn bad_value_names_the_key() {
    let err = ExperimentConfig::parse("gl.epsilon = -1\n").unwrap_err();
    assert!(err.to_string().contains("gl.epsilon"), "{err}");
    assert!(ExperimentConfig::parse("mesh.level = 9\n").is_err());
    assert!(ExperimentConfig::parse("ymh.degree = one\n").is_err());
}

#[test]
fn unknown_key_gets_suggestion() {
    match ExperimentConfig::parse("gl.epsilonn = 0.3\n") {
        Err(StabError::UnknownKey { key, suggestion }) => {
            assert_eq!(key, "gl.epsilonn");
            assert_eq!(suggestion.as_deref(), Some("gl.epsilon"));
        }
        other => panic!("unexpected {other:?}"),
    }
    match ExperimentConfig::parse("completely.different = 1\n") {
        Err(StabError::UnknownKey { suggestion, .. }) => assert!(suggestion.is_none()),
        other => panic!("unexpected {other:?}"),
    }
}

#[test]
fn malformed_lines_report_line_numbers() {
    let err = ExperimentConfig::parse("mesh.level = 3\nno equals sign\n").unwrap_err();
    assert!(matches!(err, StabError::ConfigParse { line: 2, .. }), "{err}");
    let err = ExperimentConfig::parse("mesh.level = 3\nmesh.level = 4\n").unwrap_err();
    assert!(err.to_string().contains("mesh.level"));
    assert!(ExperimentConfig::parse("tol.ymh.energyLow = 1.1\n").is_err());
}

#[test]
fn echo_lists_every_key_once() {
    let echo = ExperimentConfig::default().echo();
    assert_eq!(echo.len(), KEYS.len());
    for (k, default, _) in KEYS {
        assert!(echo.contains_key(*k), "{k}");
        let mut c = ExperimentConfig::default();
        c.set(k, default).unwrap();
    }
    let help = ExperimentConfig::help_text();
    assert!(KEYS.iter().all(|(k, _, _)| help.contains(k)));
}

#[test]
fn experiment_names_round_trip() {
    let mut ids: Vec<&str> = Experiment::ALL.iter().map(|e| e.id()).collect();
    for e in Experiment::ALL {
        assert_eq!(e.id().parse::<Experiment>().unwrap(), e);
    }
    ids.sort();
    ids.dedup();
    assert_eq!(ids.len(), Experiment::ALL.len());
    let err = "gl-sovle".parse::<Experiment>().unwrap_err();
    assert!(err.to_string().contains("gl-solve"), "{err}");
}

#[test]
fn gl_snapshot_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let d = Arc::new(Discretization::icosphere(2).unwrap());
    let s = Ansatz::RandomHarmonics.build(d.clone(), GlParams::new(0.4).unwrap(), 3).unwrap();
    let path = dir.path().join("nested/gl-state.json");
    write_json(&path, &GlSnapshot::from_state(&s)).unwrap();
    let back: GlSnapshot = read_json(&path).unwrap();
    let t = back.to_state(d).unwrap();
    assert_eq!(s.u, t.u);
    let other = Arc::new(Discretization::icosphere(1).unwrap());
    assert!(back.to_state(other).is_err());
    let text = std::fs::read_to_string(&path).unwrap();
    for field in ["meshLevel", "epsilon", "realParts", "imagParts"] {
        assert!(text.contains(field));
    }
}

#[test]
fn ymh_snapshot_round_trip() {
    let d = Arc::new(Discretization::icosphere(2).unwrap());
    let b = bundle_init(d.clone(), -1).unwrap();
    let nv = d.mesh.num_vertices();
    let s = YmhState::new(b, (0..nv).map(|i| Complex64::new(0.5, i as f64 * 1e-3)).collect(), 0.3).unwrap();
    let snap = YmhSnapshot::from_state(&s).unwrap();
    assert_eq!(snap.degree, -1);
    let json = serde_json::to_string(&snap).unwrap();
    for field in ["meshLevel", "epsilon", "degree", "edgePhases", "\"re\"", "\"im\""] {
        assert!(json.contains(field), "{field}");
    }
    let back: YmhSnapshot = serde_json::from_str(&json).unwrap();
    let t = back.to_state(d.clone()).unwrap();
    assert_eq!(t.u, s.u);
    assert_eq!(t.bundle.theta, s.bundle.theta);
    let mut wrong = back.clone();
    wrong.degree = 2;
    assert!(wrong.to_state(d).is_err());
}

#[test]
fn report_survives_non_finite_values() {
    let mut doc = ReportDoc::new("x", ExperimentConfig::default().echo());
    doc.metric("nan", Metric::info(f64::NAN));
    doc.metric("ok", Metric::at_most(1.0, 2.0));
    let back: ReportDoc = serde_json::from_slice(&doc.to_bytes().unwrap()).unwrap();
    assert!(back.metrics["nan"].value.is_nan());
    assert_eq!(back.metrics["ok"], doc.metrics["ok"]);
}

#[test]
fn report_layout() {
    let dir = tempfile::tempdir().unwrap();
    let doc = run_experiment(&config_in(dir.path(), "pointlab.n = 3\npointlab.samples = 20\n"), Experiment::PointlabSphereGl).unwrap();
    let path = dir.path().join("pointlab-sphere-gl.json");
    let v: serde_json::Value = serde_json::from_slice(&std::fs::read(&path).unwrap()).unwrap();
    for key in ["schemaVersion", "experimentId", "configEcho", "metrics", "artifacts", "timing"] {
        assert!(v.get(key).is_some(), "{key}");
    }
    assert_eq!(v["schemaVersion"], 1);
    assert!(doc.all_pass());
    for a in &doc.artifacts {
        assert!(dir.path().join(a).exists(), "{a}");
    }
    let summary: PointlabSummary = read_json(&dir.path().join(&doc.artifacts[0])).unwrap();
    assert_eq!((summary.n, summary.samples), (3, 20));
    assert!(summary.pass);
}

#[test]
fn reports_are_byte_identical_across_runs() {
    for which in [Experiment::GlSolve, Experiment::PointlabCpn, Experiment::Fdcheck] {
        let (a, b) = (tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap());
        let extra = "mesh.level = 2\npointlab.n = 1\npointlab.samples = 10\n";
        let ca = config_in(a.path(), extra);
        let cb = config_in(b.path(), extra);
        let da = run_experiment(&ca, which).unwrap();
        let db = run_experiment(&cb, which).unwrap();
        // The echoed output directory is the only difference.
        let mut ea = da.clone();
        ea.config_echo.remove("output.dir");
        let mut eb = db.clone();
        eb.config_echo.remove("output.dir");
        assert_eq!(ea.to_bytes().unwrap(), eb.to_bytes().unwrap(), "{which}");
        for art in &da.artifacts {
            assert_eq!(std::fs::read(a.path().join(art)).unwrap(), std::fs::read(b.path().join(art)).unwrap(), "{art}");
        }
    }
}

#[test]
fn tight_tolerance_fails_metric() {
    let dir = tempfile::tempdir().unwrap();
    let c = config_in(dir.path(), "pointlab.n = 4\npointlab.samples = 10\ntol.pointlab.trace = 1e-300\n");
    let doc = run_experiment(&c, Experiment::PointlabSphereGl).unwrap();
    assert!(!doc.all_pass());
    assert!(doc.errors.is_empty());
    assert_eq!(doc.metrics[doc.failing()[0]].tolerance, Some(1e-300));
}

#[test]
fn convergence_study_validates_levels() {
    let dir = tempfile::tempdir().unwrap();
    let c = config_in(dir.path(), "");
    assert!(convergence_study(&c, Experiment::FemValidate, &[3, 5]).is_err());
    assert!(convergence_study(&c, Experiment::FemValidate, &[4, 3]).is_err());
    assert!(convergence_study(&c, Experiment::GlSolve, &[2, 3]).is_err());
}

#[test]
fn fem_eigenvalues_converge_at_second_order() {
    let dir = tempfile::tempdir().unwrap();
    let doc = convergence_study(&config_in(dir.path(), ""), Experiment::FemValidate, &[2, 3, 4]).unwrap();
    assert!(doc.all_pass(), "{:?}", doc.failing());
    let order = doc.value("order").unwrap();
    assert!(order > 1.8, "{order}");
    assert!(dir.path().join("converge-fem-validate.csv").exists());
    assert!(dir.path().join("level3/fem-validate.json").exists());
}

#[test]
fn observed_orders_of_halving_errors() {
    let o = observed_orders(&[0.4, 0.1, 0.025]);
    assert!(o.iter().all(|p| (p - 2.0).abs() < 1e-12));
}
