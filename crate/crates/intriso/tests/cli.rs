use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn intriso(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_intriso"))
        .current_dir(dir)
        .args(args)
        .output()
        .unwrap()
}

fn stdout_json(o: &Output) -> Value {
    serde_json::from_slice(&o.stdout).unwrap()
}

fn write(dir: &Path, name: &str, body: &str) {
    fs::write(dir.join(name), body).unwrap();
}

fn line_files(dir: &Path) {
    write(dir, "s.json", r#"{"points": [[0], [0.1], [0.2], [0.3]]}"#);
    write(
        dir,
        "f.json",
        r#"{"source": "s.json", "kind": "euclidean", "d": 1, "image": [0, 0.1, 0.2, 0.3]}"#,
    );
}

#[test]
fn pull_prints_chain_distances() {
    let dir = tempfile::tempdir().unwrap();
    line_files(dir.path());
    let o = intriso(
        dir.path(),
        &["pull", "--space", "s.json", "--map", "f.json", "--eps", "0.15"],
    );
    assert_eq!(o.status.code(), Some(0));
    let v = stdout_json(&o);
    let pairs = v["pairs"].as_array().unwrap();
    assert_eq!(pairs.len(), 6);
    let far = pairs.iter().find(|p| p["i"] == 0 && p["j"] == 3).unwrap();
    assert!((far["value"].as_f64().unwrap() - 0.3).abs() < 1e-12);

    // below the spacing nothing is chained
    let o = intriso(
        dir.path(),
        &[
            "pull", "--space", "s.json", "--map", "f.json", "--eps", "0.05", "--pairs", "0,1",
        ],
    );
    assert_eq!(stdout_json(&o)["pairs"][0]["value"], "inf");
}

#[test]
fn certify_passes_for_the_identity_and_writes_out_file() {
    let dir = tempfile::tempdir().unwrap();
    line_files(dir.path());
    let o = intriso(
        dir.path(),
        &[
            "certify",
            "--space",
            "s.json",
            "--map",
            "f.json",
            "--schedule",
            "0.3,0.2,0.15",
            "--out",
            "cert.json",
        ],
    );
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let cert: Value = serde_json::from_str(&fs::read_to_string(dir.path().join("cert.json")).unwrap()).unwrap();
    assert_eq!(cert["pass"], true);
}

#[test]
fn bad_schedule_is_an_input_error() {
    let dir = tempfile::tempdir().unwrap();
    line_files(dir.path());
    let o = intriso(
        dir.path(),
        &[
            "certify",
            "--space",
            "s.json",
            "--map",
            "f.json",
            "--schedule",
            "0.1,0.2,0.3",
        ],
    );
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("strictly decreasing"));
}

#[test]
fn validate_locates_violations() {
    let dir = tempfile::tempdir().unwrap();
    line_files(dir.path());
    write(
        dir.path(),
        "asym.json",
        r#"{"dist": [[0, 1, 2], [1.5, 0, 1], [2, 1, 0]]}"#,
    );
    write(
        dir.path(),
        "zero.json",
        r#"{"graph": {"vertices": 3, "edges": [[0, 1, 0.5], [1, 2, 0]]}}"#,
    );
    write(dir.path(), "broken.json", "{\"points\": [[0],\n  [1]");

    assert_eq!(
        intriso(dir.path(), &["validate", "s.json", "f.json"]).status.code(),
        Some(0)
    );

    let o = intriso(dir.path(), &["validate", "asym.json"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("symmetry violation at (0,1)"));

    let o = intriso(dir.path(), &["validate", "zero.json"]);
    assert_eq!(o.status.code(), Some(2));
    let err = String::from_utf8_lossy(&o.stderr).to_string();
    assert!(
        err.contains("invariant violation") && err.contains("/graph/edges/1/2"),
        "{err}"
    );

    let o = intriso(dir.path(), &["validate", "broken.json"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("broken.json:2:"));
}

#[test]
fn fold1d_writes_a_piecewise_linear_map() {
    let dir = tempfile::tempdir().unwrap();
    write(
        dir.path(),
        "g.json",
        r#"{"graph": {"vertices": 3, "edges": [[0, 1, 0.4], [1, 2, 0.3]]}}"#,
    );
    write(dir.path(), "v.json", "[0, 0.1, 0.0]");
    let o = intriso(
        dir.path(),
        &[
            "fold1d", "--graph", "g.json", "--values", "v.json", "--eps", "0.05", "--out", "pl.json",
        ],
    );
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let pl: Value = serde_json::from_str(&fs::read_to_string(dir.path().join("pl.json")).unwrap()).unwrap();
    assert_eq!(pl["edges"].as_array().unwrap().len(), 2);
    assert!(pl["folds"].as_u64().unwrap() > 0);
    assert_eq!(intriso(dir.path(), &["validate", "pl.json"]).status.code(), Some(0));
}

#[test]
fn crooked_exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    assert_eq!(
        intriso(dir.path(), &["crooked", "make", "--eps", "0.5"]).status.code(),
        Some(0)
    );
    // the construction needs a longer domain at this ε
    let o = intriso(dir.path(), &["crooked", "make", "--eps", "0.25", "--domain", "1"]);
    assert_eq!(o.status.code(), Some(1));
    assert_eq!(stdout_json(&o)["required_domain"], 3.0);
}

#[test]
fn invlim_threads_of_an_inline_system() {
    let dir = tempfile::tempdir().unwrap();
    write(
        dir.path(),
        "sys.json",
        r#"{"levels": [{"points": [[0], [1]]}, {"points": [[0], [1], [2]]}], "bonding": [[0, 1, 1]]}"#,
    );
    let o = intriso(dir.path(), &["invlim", "threads", "--system", "sys.json"]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    assert_eq!(stdout_json(&o)["threads"].as_array().unwrap().len(), 3);
    let o = intriso(
        dir.path(),
        &["invlim", "dist", "--system", "sys.json", "--i", "0", "--j", "2"],
    );
    assert_eq!(stdout_json(&o)["value"], 2.0);
}

#[test]
fn gamma_build_checks_each_depth() {
    let dir = tempfile::tempdir().unwrap();
    let o = intriso(dir.path(), &["gamma", "build", "--depth", "3", "--out", "g.json"]);
    assert_eq!(o.status.code(), Some(0));
    let g: Value = serde_json::from_str(&fs::read_to_string(dir.path().join("g.json")).unwrap()).unwrap();
    assert_eq!(g["depth"], 3);
    assert_eq!(g["checks"].as_array().unwrap().len(), 3);
}

#[test]
fn run_is_reproducible_and_keeps_timing_in_the_manifest() {
    let dir = tempfile::tempdir().unwrap();
    write(
        dir.path(),
        "c.json",
        r#"{"scenario": "lemma-suite", "seed": 7, "params": {"trials": 5, "max_points": 10}}"#,
    );
    for out in ["a", "b"] {
        let o = intriso(dir.path(), &["--config", "c.json", "--jobs", "2", "run", "--out", out]);
        assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    }
    for name in ["inputs.json", "outputs.json", "assertions.json"] {
        assert_eq!(
            fs::read(dir.path().join("a").join(name)).unwrap(),
            fs::read(dir.path().join("b").join(name)).unwrap(),
            "{name}"
        );
    }
    let manifest: Value =
        serde_json::from_str(&fs::read_to_string(dir.path().join("a/manifest.json")).unwrap()).unwrap();
    assert_eq!(manifest["seed"], 7);
    assert_eq!(manifest["threads"], 2);
    assert!(manifest["wall_seconds"].is_number());
}

#[test]
fn unknown_scenario_exits_with_input_error() {
    let dir = tempfile::tempdir().unwrap();
    let o = intriso(dir.path(), &["run", "--scenario", "nope"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("unknown scenario"));
}
