use std::path::Path;
use std::process::{Command, Output};

fn stab(args: &[&str], env: &[(&str, &str)]) -> Output {
    let mut c = Command::new(env!("CARGO_BIN_EXE_stab"));
    c.args(args).env_remove("STAB_SEED");
    for (k, v) in env {
        c.env(k, v);
    }
    c.output().unwrap()
}

fn write_config(dir: &Path, body: &str) -> String {
    let p = dir.join("run.cfg");
    std::fs::write(&p, format!("output.dir = {}\n{body}", dir.join("out").display())).unwrap();
    p.display().to_string()
}

#[test]
fn help_lists_config_keys() {
    let out = stab(&["--help"], &[]);
    assert!(out.status.success());
    let text = String::from_utf8_lossy(&out.stdout);
    assert!(text.contains("gl.epsilon") && text.contains("tol.ymh.xiSum"));
}

#[test]
fn pointlab_prints_summary() {
    let out = stab(&["pointlab", "sphere-ymh", "--n", "4", "--samples", "30", "--seed", "9"], &[]);
    assert_eq!(out.status.code(), Some(0));
    let v: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(v["identity"], "sphere-ymh");
    assert_eq!(v["n"], 4);
    assert_eq!(v["samples"], 30);
    assert_eq!(v["seed"], 9);
    assert_eq!(v["pass"], true);
    assert!(v["maxDeviation"].as_f64().unwrap() <= 1e-10);
    assert!(v["scale"].as_f64().unwrap() >= 1.0);
}

#[test]
fn seed_comes_from_environment() {
    let out = stab(&["pointlab", "cpn", "--n", "1", "--samples", "5"], &[("STAB_SEED", "77")]);
    assert_eq!(out.status.code(), Some(0));
    let v: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(v["seed"], 77);
    let out = stab(&["pointlab", "cpn", "--n", "1", "--samples", "5"], &[("STAB_SEED", "x")]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn usage_errors_exit_with_two() {
    let dir = tempfile::tempdir().unwrap();
    assert_eq!(stab(&["gl", "solve"], &[]).status.code(), Some(2));
    assert_eq!(stab(&["pointlab", "sphere-gl", "--n", "1"], &[]).status.code(), Some(2));

    let cfg = write_config(dir.path(), "gl.epsilonn = 0.3\n");
    let out = stab(&["gl", "solve", "--config", &cfg], &[]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("did you mean `gl.epsilon`"));

    let cfg = write_config(dir.path(), "gl.epsilon = -1\n");
    let out = stab(&["gl", "solve", "--config", &cfg], &[]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("gl.epsilon"));

    let out = stab(&["converge", "--experiment", "fem-validate", "--levels", "2,4"], &[]);
    assert_eq!(out.status.code(), Some(2));
    assert_eq!(stab(&["run", "--experiment", "nope"], &[]).status.code(), Some(2));
}

#[test]
fn metric_failure_exits_with_one() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "pointlab.n = 3\npointlab.samples = 10\ntol.pointlab.trace = 1e-300\n");
    let out = stab(&["run", "--experiment", "pointlab-sphere-gl", "--config", &cfg], &[]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stdout).contains("FAIL"));
    assert!(dir.path().join("out/pointlab-sphere-gl.json").exists());
}

#[test]
fn gl_solve_writes_state_and_report() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "mesh.level = 3\ngl.epsilon = 0.5\n");
    let out = stab(&["gl", "solve", "--config", &cfg], &[]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stdout));
    let state: serde_json::Value =
        serde_json::from_slice(&std::fs::read(dir.path().join("out/gl-state.json")).unwrap()).unwrap();
    assert_eq!(state["meshLevel"], 3);
    assert_eq!(state["realParts"].as_array().unwrap().len(), 642);
    assert!(dir.path().join("out/gl-solve.json").exists());
}

#[test]
fn fdcheck_passes() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "mesh.level = 2\n");
    let out = stab(&["fdcheck", "--config", &cfg], &[]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stdout));
}

#[test]
fn mesh_writes_off() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("m/level1.off");
    let out = stab(&["mesh", "--level", "1", "--out", path.to_str().unwrap()], &[]);
    assert_eq!(out.status.code(), Some(0));
    let text = std::fs::read_to_string(&path).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("OFF"));
    assert_eq!(lines.next(), Some("42 80 120"));
    assert_eq!(text.lines().filter(|l| l.starts_with("3 ")).count(), 80);
}
