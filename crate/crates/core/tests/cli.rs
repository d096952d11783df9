use std::path::Path;
use std::process::{Command, Output};

fn nevlab(args: &[&str], dir: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_nevlab"))
        .args(args)
        .current_dir(dir)
        .env_remove("NEVLAB_JOBS")
        .output()
        .expect("binary runs")
}

fn write(dir: &Path, name: &str, text: &str) -> String {
    let p = dir.join(name);
    std::fs::write(&p, text).unwrap();
    p.to_string_lossy().into_owned()
}

const BASIC: &str = r#"{
  "grid": {"from": 3, "to": 12},
  "measures": {"leb": {"kind": "uniform", "a": -1, "b": 1}},
  "functions": {
    "z": {"kind": "identity"},
    "inv": {"kind": "neg_inverse"},
    "f": {"kind": "triple", "measure": "leb"}
  },
  "gauges": {
    "one": {"kind": "constant", "value": 1},
    "id": {"kind": "identity"},
    "sq": {"kind": "power", "power": 2},
    "g": {"kind": "power", "power": 1.5}
  },
  "tasks": [
    {"op": "quotient_sweep", "function": "z", "k": "one", "lambda": "sq", "output": "sweeps/z.csv"},
    {"op": "quotient_sweep", "function": "f", "k": "one", "lambda": "id", "method": "both", "output": "sweeps/f.csv"},
    {"op": "classify", "function": "inv", "taus": [0, 0.5], "output": "classes.json"},
    {"op": "enigma", "function": "inv", "k": "one", "lambda": "id", "output": "enigma.json"}
  ]
}"#;

#[test]
fn run_writes_artifacts_and_exits_zero() {
    let dir = tempfile::tempdir().unwrap();
    let sc = write(dir.path(), "s.json", BASIC);
    let out = nevlab(&["run", "--scenario", &sc, "--out-dir", "out"], dir.path());
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stdout));
    let table = String::from_utf8_lossy(&out.stdout);
    assert_eq!(table.matches(" ok ").count(), 4, "{table}");
    let z = std::fs::read_to_string(dir.path().join("out/sweeps/z.csv")).unwrap();
    for line in z.lines().skip(1) {
        let v: Vec<f64> = line.split(',').map(|c| c.parse().unwrap()).collect();
        assert!((v[1] - v[0] * v[0]).abs() <= 1e-15 * v[1]);
    }
    let classes: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(dir.path().join("out/classes.json")).unwrap()).unwrap();
    assert_eq!(classes[0]["class"], "Julia");
    let enigma: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(dir.path().join("out/enigma.json")).unwrap()).unwrap();
    assert_eq!(enigma["member"], true);
}

#[test]
fn identical_runs_are_byte_identical_across_job_counts() {
    let dir = tempfile::tempdir().unwrap();
    let sc = write(dir.path(), "s.json", BASIC);
    assert_eq!(nevlab(&["run", "--scenario", &sc, "--out-dir", "a", "--jobs", "1"], dir.path()).status.code(), Some(0));
    assert_eq!(nevlab(&["run", "--scenario", &sc, "--out-dir", "b", "--jobs", "3"], dir.path()).status.code(), Some(0));
    for f in ["sweeps/z.csv", "sweeps/f.csv", "classes.json", "enigma.json"] {
        let a = std::fs::read(dir.path().join("a").join(f)).unwrap();
        let b = std::fs::read(dir.path().join("b").join(f)).unwrap();
        assert_eq!(a, b, "{f}");
    }
}

#[test]
fn malformed_json_exits_one_with_location() {
    let dir = tempfile::tempdir().unwrap();
    let sc = write(dir.path(), "bad.json", "{\n  \"tasks\": [\n    {\"op\": }\n  ]\n}");
    let out = nevlab(&["run", "--scenario", &sc], dir.path());
    assert_eq!(out.status.code(), Some(1));
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("line 3"), "{err}");
}

#[test]
fn missing_scenario_file_exits_one() {
    let dir = tempfile::tempdir().unwrap();
    let out = nevlab(&["run", "--scenario", "nope.json"], dir.path());
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn augur_with_steep_lambda_exits_two() {
    let dir = tempfile::tempdir().unwrap();
    let sc = write(
        dir.path(),
        "augur.json",
        r#"{
          "measures": {"d": {"kind": "dirac", "at": 0}},
          "gauges": {"one": {"kind": "constant", "value": 1}, "l": {"kind": "power", "power": 0.5}},
          "tasks": [{"op": "augur", "measure": "d", "k": "one", "lambda": "l", "output": "a.csv"}]
        }"#,
    );
    let out = nevlab(&["run", "--scenario", &sc], dir.path());
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stdout).contains("O(t)"));
}

#[test]
fn verify_unknown_suite_exits_one() {
    let dir = tempfile::tempdir().unwrap();
    let out = nevlab(&["verify", "nonexistent"], dir.path());
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn verify_single_suite_passes() {
    let dir = tempfile::tempdir().unwrap();
    let out = nevlab(&["verify", "closed-form-anchor"], dir.path());
    assert_eq!(out.status.code(), Some(0));
    assert!(String::from_utf8_lossy(&out.stdout).starts_with("[PASS]"));
}

#[test]
fn classify_foliate_horocycle_and_sweep_subcommands() {
    let dir = tempfile::tempdir().unwrap();
    let sc = write(dir.path(), "s.json", BASIC);
    let out = nevlab(&["classify", "--scenario", &sc, "--function", "f", "--tau", "0", "--tau", "-2"], dir.path());
    assert_eq!(out.status.code(), Some(0));
    let v: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(v[0]["class"], "TrueAC");
    assert_eq!(v[1]["class"], "Julia");

    let out = nevlab(
        &["foliate", "--scenario", &sc, "--function", "z", "--from", "-1", "--to", "1", "--points", "5"],
        dir.path(),
    );
    let v: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(v.as_array().unwrap().len(), 5);

    let out = nevlab(
        &["horocycle", "--scenario", &sc, "--function", "z", "--gamma", "g", "--betas", "2,4", "--seed", "5"],
        dir.path(),
    );
    let text = String::from_utf8_lossy(&out.stdout);
    assert!(text.starts_with("beta,sup\n2.0000000000000000e0,"), "{text}");

    let out = nevlab(
        &["sweep", "--scenario", &sc, "--function", "f", "--k", "one", "--lambda", "id", "--out-dir", "sw"],
        dir.path(),
    );
    assert_eq!(out.status.code(), Some(0));
    assert!(dir.path().join("sw/sweep.csv").exists());

    let out = nevlab(&["classify", "--scenario", &sc, "--function", "missing", "--tau", "0"], dir.path());
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn horocycle_at_a_pole_is_a_verdict_error() {
    let dir = tempfile::tempdir().unwrap();
    let sc = write(dir.path(), "s.json", BASIC);
    let out = nevlab(&["horocycle", "--scenario", &sc, "--function", "inv", "--gamma", "g"], dir.path());
    assert_eq!(out.status.code(), Some(2));
}
