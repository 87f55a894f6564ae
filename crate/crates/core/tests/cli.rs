use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;

fn hamsys(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_hamsys"))
        .args(args)
        .output()
        .expect("run hamsys")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

/// Write the problem of a built-in fixture to a file in `dir`.
fn spec_file(dir: &Path, id: &str) -> PathBuf {
    let out = hamsys(&["example", id, "--print-spec"]);
    assert!(out.status.success(), "print-spec failed for {id}");
    let path = dir.join(format!("{id}.json"));
    std::fs::write(&path, out.stdout).unwrap();
    path
}

#[test]
fn list_criteria_as_json() {
    let out = hamsys(&["list", "criteria", "--json"]);
    assert!(out.status.success());
    let v: Value = serde_json::from_str(&stdout(&out)).unwrap();
    let ids: Vec<&str> = v.as_array().unwrap().iter().map(|c| c["id"].as_str().unwrap()).collect();
    let mut sorted = ids.clone();
    sorted.sort();
    assert_eq!(ids, sorted);
    assert!(ids.contains(&"canonical-maximal"));
}

#[test]
fn validate_accepts_a_well_formed_system() {
    let dir = tempfile::tempdir().unwrap();
    let spec = spec_file(dir.path(), "ex3.1");
    let out = hamsys(&["--spec", spec.to_str().unwrap(), "--json", "validate", "--seed", "7"]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
}

#[test]
fn malformed_spec_exits_with_two() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("bad.json");
    std::fs::write(&path, r#"{"n": 2, "J": [["i", "0"], ["0", "-i"]], "H": [["1+", "0"]]}"#).unwrap();
    let out = hamsys(&["--spec", path.to_str().unwrap(), "validate"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(!out.stderr.is_empty());
}

#[test]
fn invalid_hamiltonian_exits_with_two() {
    let dir = tempfile::tempdir().unwrap();
    let spec = spec_file(dir.path(), "kac-krein");
    let text = std::fs::read_to_string(&spec).unwrap();
    let mut v: Value = serde_json::from_str(&text).unwrap();
    v["H"][0][0] = Value::String("-1".into());
    std::fs::write(&spec, v.to_string()).unwrap();
    let out = hamsys(&["--spec", spec.to_str().unwrap(), "analyze"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn analyze_reports_indices_and_is_reproducible() {
    let dir = tempfile::tempdir().unwrap();
    let spec = spec_file(dir.path(), "ex3.1");
    let a = dir.path().join("a.json");
    let b = dir.path().join("b.json");
    for out in [&a, &b] {
        let o = hamsys(&["--spec", spec.to_str().unwrap(), "--out", out.to_str().unwrap(), "analyze"]);
        assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    }
    let ra = std::fs::read(&a).unwrap();
    assert_eq!(ra, std::fs::read(&b).unwrap(), "reports differ between runs");
    let v: Value = serde_json::from_slice(&ra).unwrap();
    assert_eq!(v["status"], "ok");
    assert_eq!(v["deficiency"]["half_line"]["n_tilde_plus"], 1);
    assert_eq!(v["deficiency"]["half_line"]["n_tilde_minus"], 2);
    assert!(v.get("timings").is_none());
    assert!(dir.path().join("a.json.timings.json").exists());
}

#[test]
fn propagate_emits_log_scaled_points() {
    let dir = tempfile::tempdir().unwrap();
    let spec = spec_file(dir.path(), "kac-krein");
    let out = hamsys(&[
        "--spec",
        spec.to_str().unwrap(),
        "--json",
        "propagate",
        "--lambda",
        "0,1",
        "--at",
        "1,100,1000",
    ]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let v: Value = serde_json::from_str(&stdout(&out)).unwrap();
    let text = v.to_string();
    assert!(text.contains("log_scale"));
}

#[test]
fn deficiency_subcommand_counts_solutions() {
    let dir = tempfile::tempdir().unwrap();
    let spec = spec_file(dir.path(), "kac-krein");
    let out = hamsys(&["--spec", spec.to_str().unwrap(), "--json", "deficiency", "--interval", "right"]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let v: Value = serde_json::from_str(&stdout(&out)).unwrap();
    assert!(v.to_string().contains("\"n_tilde_plus\":1"));
}

#[test]
fn unknown_criterion_exits_with_two() {
    let dir = tempfile::tempdir().unwrap();
    let spec = spec_file(dir.path(), "kac-krein");
    let out = hamsys(&["--spec", spec.to_str().unwrap(), "criteria", "--id", "no-such-criterion"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn explain_prints_statement() {
    let out = hamsys(&["criteria", "--explain", "canonical-maximal"]);
    assert!(out.status.success());
    assert!(!stdout(&out).trim().is_empty());
}

#[test]
fn single_example_passes() {
    let out = hamsys(&["example", "canonical-decay"]);
    assert_eq!(out.status.code(), Some(0), "{}", stdout(&out));
}
