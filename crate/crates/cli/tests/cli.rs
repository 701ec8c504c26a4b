use std::path::PathBuf;
use std::process::{Command, Output};

use filiform::algebra::GradedLieAlgebra;
use filiform::cochain::CochainDocument;
use filiform::cohomology::{family, TruncationWindow};
use serde_json::Value;

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_filiform"))
        .args(args)
        .env_remove("FILIFORM_CUTOFF")
        .output()
        .expect("binary runs")
}

fn code(o: &Output) -> i32 {
    o.status.code().expect("exited normally")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn json(o: &Output) -> Value {
    serde_json::from_slice(&o.stdout).unwrap_or_else(|e| panic!("{e}: {}", stdout(o)))
}

fn temp_file(name: &str, contents: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("filiform-cli-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let path = dir.join(name);
    std::fs::write(&path, contents).unwrap();
    path
}

#[test]
fn first_cohomology_table() {
    let o = run(&["dims", "--degree", "1", "--weights", "-3..3", "--cutoff", "30"]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let dims: Vec<u64> = stdout(&o)
        .lines()
        .skip(2)
        .map(|line| line.split_whitespace().nth(3).unwrap().parse().unwrap())
        .collect();
    assert_eq!(dims, [0, 0, 0, 1, 0, 1, 1]);
}

#[test]
fn table_and_json_agree() {
    let common = ["dims", "--degree", "2", "--weights", "-6..2", "--cutoff", "25"];
    let table = run(&common);
    let js = run(&[&common[..], &["--format", "json"]].concat());
    assert_eq!(code(&table), 0);
    assert_eq!(code(&js), 0);
    let rows: Vec<Vec<String>> =
        stdout(&table).lines().skip(2).map(|l| l.split_whitespace().map(String::from).collect()).collect();
    let reports = json(&js);
    let reports = reports.as_array().unwrap();
    assert_eq!(rows.len(), reports.len());
    for (row, r) in rows.iter().zip(reports) {
        for (col, field) in [(0, "weight"), (1, "dim_z"), (2, "dim_b"), (3, "dim_h")] {
            assert_eq!(row[col], r[field].to_string(), "{field}");
        }
        assert_eq!(row[4] == "yes", r["stable"].as_bool().unwrap());
    }
}

#[test]
fn json_is_deterministic() {
    let args = ["dims", "--weights", "-4..4", "--cutoff", "25", "--format", "json"];
    let a = run(&args);
    let b = run(&[&args[..], &["--jobs", "1"]].concat());
    assert_eq!(code(&a), 0);
    assert_eq!(a.stdout, b.stdout);
}

#[test]
fn cutoff_from_environment() {
    let o = Command::new(env!("CARGO_BIN_EXE_filiform"))
        .args(["dims", "--weights", "0..0", "--format", "json"])
        .env("FILIFORM_CUTOFF", "24")
        .output()
        .unwrap();
    assert_eq!(code(&o), 0);
    assert_eq!(json(&o)[0]["window"]["cutoff"], 24);
}

#[test]
fn m0_weight_zero_golden() {
    let o = run(&["dims", "--algebra", "m0", "--degree", "1", "--weights", "0..0", "--cutoff", "30", "--format", "json"]);
    assert_eq!(code(&o), 0);
    assert_eq!(json(&o)[0]["dim_h"], 2);
}

#[test]
fn usage_errors_exit_one() {
    for args in [
        vec!["dims", "--weights", "3..1"],
        vec!["dims", "--weights", "0..1", "--degree", "3"],
        vec!["dims"],
        vec!["deform", "--family", "5", "--weight", "0"],
        vec!["deform", "--family", "2", "--weight", "-3"],
        vec!["verify-paper", "--algebra", "L1"],
        vec!["verify-paper", "--only", "12"],
        vec!["dims", "--weights", "0..0", "--algebra", "no-such-algebra"],
    ] {
        let o = run(&args);
        assert_eq!(code(&o), 1, "{args:?}: {}", String::from_utf8_lossy(&o.stderr));
    }
}

#[test]
fn non_cocycle_is_reported() {
    let o = run(&["deform", "--family", "2", "--weight", "-3", "--cutoff", "30"]);
    assert_eq!(code(&o), 1);
    assert!(String::from_utf8_lossy(&o.stderr).contains("cocycle"));
}

#[test]
fn finite_deformation_exits_zero() {
    let o = run(&["deform", "--family", "2", "--weight", "-2", "--max-order", "8", "--cutoff", "30", "--format", "json"]);
    assert_eq!(code(&o), 0);
    let s = json(&o);
    assert_eq!(s["status"]["kind"], "true_finite");
    assert_eq!(s["window_limited"], false);
}

#[test]
fn obstruction_exits_three_with_certificate() {
    let o = run(&["deform", "--family", "3", "--weight", "0", "--max-order", "6", "--cutoff", "30"]);
    assert_eq!(code(&o), 3);
    let out = stdout(&o);
    assert!(out.contains("status: obstructed at order 5"), "{out}");
    assert!(out.contains("certificate: rank"), "{out}");
}

#[test]
fn column_restricted_gauge() {
    let o = run(&["deform", "--family", "3", "--weight", "0", "--gauge", "column-restricted", "--cutoff", "30", "--format", "json"]);
    assert_eq!(code(&o), 3);
    assert_eq!(json(&o)["status"]["order"], 2);
}

#[test]
fn cocycle_from_file() {
    let alg = GradedLieAlgebra::m2();
    let window = TruncationWindow::with_cutoff(30).unwrap();
    let omega = family(&alg, 2, -2, &window).unwrap();
    let doc = serde_json::to_string(&CochainDocument::from(omega)).unwrap();
    let path = temp_file("two-family.json", &doc);
    let path = path.to_str().unwrap();
    let from_file = run(&["deform", "--cocycle", path, "--cutoff", "30", "--format", "json"]);
    let from_family = run(&["deform", "--family", "2", "--weight", "-2", "--cutoff", "30", "--format", "json"]);
    assert_eq!(code(&from_file), 0, "{}", String::from_utf8_lossy(&from_file.stderr));
    assert_eq!(json(&from_file)["corrections"], json(&from_family)["corrections"]);
    assert_eq!(code(&run(&["deform", "--cocycle", path, "--weight", "-1", "--cutoff", "30"])), 1);
}

#[test]
fn window_limited_prolongation_exits_two() {
    let o = run(&["deform", "--family", "3", "--weight", "0", "--cutoff", "10", "--margin", "2"]);
    assert_eq!(code(&o), 2, "{}", stdout(&o));
    assert!(stdout(&o).contains("raise --cutoff"));
}

#[test]
fn suite_subset_in_json() {
    let o = run(&["verify-paper", "--only", "1,2,5", "--cutoff", "30", "--format", "json"]);
    assert_eq!(code(&o), 0, "{}", stdout(&o));
    let r = json(&o);
    let ids: Vec<u64> = r["criteria"].as_array().unwrap().iter().map(|c| c["id"].as_u64().unwrap()).collect();
    assert_eq!(ids, [1, 2, 5]);
    assert!(r["criteria"].as_array().unwrap().iter().all(|c| c["passed"] == true));
}

#[test]
fn small_cutoff_suite_is_unstable() {
    let o = run(&["verify-paper", "--cutoff", "12"]);
    assert_eq!(code(&o), 2);
    assert!(stdout(&o).contains("did not stabilise"));
}
