use std::fs;
use std::path::Path;
use std::process::Command;

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde_json::Value;

fn grouphankel(args: &[&str]) -> i32 {
    Command::new(env!("CARGO_BIN_EXE_grouphankel"))
        .args(args)
        .output()
        .expect("binary runs")
        .status
        .code()
        .expect("exit code")
}

fn write_spec(dir: &Path, text: &str) -> String {
    let path = dir.join("experiment.json");
    fs::write(&path, text).unwrap();
    path.to_string_lossy().into_owned()
}

fn read_json(path: &Path) -> Value {
    serde_json::from_str(&fs::read_to_string(path).unwrap()).unwrap()
}

const RANK_SPEC: &str = r#"{
    "group": {"kind": "int_lex", "n": 2},
    "symbol": {"kind": "rational_pullback", "terms": [{"pole": {"re": 0.5}, "coef": {"re": 1}}]},
    "tasks": [{"task": "ideal_check", "params": {"bound": 3}}, {"task": "kronecker_check", "params": {"bound": 16}}]
}"#;

#[test]
fn two_passing_tasks_exit_zero() {
    let dir = tempfile::tempdir().unwrap();
    let spec = write_spec(dir.path(), RANK_SPEC);
    let out = dir.path().join("out");
    assert_eq!(grouphankel(&["run", "--spec", &spec, "--out", out.to_str().unwrap()]), 0);
    let report = read_json(&out.join("report.json"));
    let sections = report["sections"].as_array().unwrap();
    assert_eq!(sections.len(), 2);
    assert_eq!(sections[0]["task"], "ideal_check");
    assert_eq!(sections[1]["task"], "kronecker_check");
    assert_eq!(sections[1]["result"]["numerical_rank"], 1);
    assert_eq!(report["version"], env!("CARGO_PKG_VERSION"));
    assert!(report["tolerances"]["rank_rel"].is_number());
    assert!(out.join("ideal_check.json").exists() && out.join("kronecker_check.json").exists());
}

#[test]
fn unknown_task_is_a_schema_error() {
    let dir = tempfile::tempdir().unwrap();
    let spec = write_spec(dir.path(), &RANK_SPEC.replace("kronecker_check", "frobnicate"));
    let out = dir.path().join("out");
    assert_eq!(grouphankel(&["run", "--spec", &spec, "--out", out.to_str().unwrap()]), 2);
    assert!(!out.exists());
}

#[test]
fn malformed_or_missing_files_exit_two() {
    let dir = tempfile::tempdir().unwrap();
    let spec = write_spec(dir.path(), "{\"group\": ");
    assert_eq!(grouphankel(&["run", "--spec", &spec]), 2);
    let missing = dir.path().join("nope.json");
    assert_eq!(grouphankel(&["rank", "--spec", missing.to_str().unwrap()]), 2);
}

#[test]
fn failing_task_exits_one_with_partial_report() {
    let dir = tempfile::tempdir().unwrap();
    // the geometric symbol is compact, so this expectation fails
    let spec = write_spec(
        dir.path(),
        r#"{"group": {"kind": "int_lex", "n": 2},
            "symbol": {"kind": "rational_pullback", "terms": [{"pole": {"re": 0.5}, "coef": {"re": 1}}]},
            "tasks": [{"task": "ideal_check"},
                      {"task": "compactness", "params": {"expect": "noncompact_witness"}},
                      {"task": "model_space"}]}"#,
    );
    let out = dir.path().join("out");
    assert_eq!(grouphankel(&["run", "--spec", &spec, "--out", out.to_str().unwrap()]), 1);
    let report = read_json(&out.join("report.json"));
    let s = report["sections"].as_array().unwrap();
    assert_eq!(s[0]["pass"], true);
    assert_eq!(s[1]["pass"], false);
    assert_eq!(s[1]["result"]["verdict"], "compact_consistent");
    // a rational symbol has no Blaschke factor to test
    assert!(s[2]["error"].is_string());
    assert_eq!(report["pass"], false);
}

/// `c_n = Σ r_k λ_k^{n−1}` and the spectral norm of its Hankel matrix,
/// computed without the library.
fn oracle_singular_values(poles: &[Complex64], residues: &[Complex64], n: usize) -> Vec<f64> {
    let c: Vec<Complex64> =
        (1..2 * n).map(|m| poles.iter().zip(residues).map(|(l, r)| r * l.powi(m as i32 - 1)).sum()).collect();
    let h = DMatrix::from_fn(n, n, |j, k| c[j + k]);
    let mut s: Vec<f64> = h.svd(false, false).singular_values.iter().copied().collect();
    s.sort_by(|a, b| b.total_cmp(a));
    s
}

#[test]
fn aak_degree_two_report() {
    let dir = tempfile::tempdir().unwrap();
    let spec = write_spec(
        dir.path(),
        r#"{"group": {"kind": "int_lex", "n": 2},
            "symbol": {"kind": "rational_pullback", "terms": [
                {"pole": {"re": 0.6}, "coef": {"re": 1}},
                {"pole": {"re": -0.2, "im": 0.5}, "coef": {"re": 0, "im": 2}}]},
            "tasks": [{"task": "aak", "params": {"n": 1}}]}"#,
    );
    let out = dir.path().join("out");
    assert_eq!(grouphankel(&["aak", "--spec", &spec, "--out", out.to_str().unwrap()]), 0);
    let aak = read_json(&out.join("aak.json"));
    let sigma = aak["result"]["sigma"].as_f64().unwrap();
    let achieved = aak["result"]["achieved_error"].as_f64().unwrap();
    assert!((achieved - sigma).abs() <= 1e-6 * sigma);
    let s = oracle_singular_values(
        &[Complex64::new(0.6, 0.0), Complex64::new(-0.2, 0.5)],
        &[Complex64::new(1.0, 0.0), Complex64::new(0.0, 2.0)],
        256,
    );
    assert!((sigma - s[1]).abs() <= 1e-10 * s[0]);
    assert_eq!(aak["result"]["aak"]["poles"].as_array().unwrap().len(), 1);
}

#[test]
fn reports_are_byte_identical() {
    let dir = tempfile::tempdir().unwrap();
    let spec = write_spec(dir.path(), RANK_SPEC);
    let a = dir.path().join("a");
    let b = dir.path().join("b");
    for out in [&a, &b] {
        assert_eq!(grouphankel(&["run", "--spec", &spec, "--out", out.to_str().unwrap(), "--seed", "5"]), 0);
    }
    assert_eq!(fs::read(a.join("report.json")).unwrap(), fs::read(b.join("report.json")).unwrap());
}

#[test]
fn verb_defaults_csv_and_max_n() {
    let dir = tempfile::tempdir().unwrap();
    let spec = write_spec(dir.path(), RANK_SPEC);
    let out = dir.path().join("out");
    let code =
        grouphankel(&["svd", "--spec", &spec, "--out", out.to_str().unwrap(), "--format", "csv", "--max-n", "2"]);
    assert_eq!(code, 0);
    let report = read_json(&out.join("report.json"));
    assert_eq!(report["sections"][0]["task"], "svd");
    assert_eq!(report["max_n"], 2);
    // bound 4 is clamped to 2: rows and columns of the [−2, 2]² box
    assert_eq!(report["sections"][0]["result"]["matrix_dims"], serde_json::json!([12, 13]));
    assert!(fs::read_to_string(out.join("svd.csv")).unwrap().starts_with("k,s_k\n"));
}
