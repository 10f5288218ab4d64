use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;
use tempfile::TempDir;

const EXAMPLE1: &str = "c example\np cnf 5 3\n1 2 3 0\n-1 -2 4 0\n-1 -2 5 0\n";

fn write(dir: &Path, name: &str, text: &str) -> PathBuf {
    let p = dir.join(name);
    std::fs::write(&p, text).unwrap();
    p
}

fn minlb(args: &[&str]) -> Output {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_minlb"));
    for (k, _) in std::env::vars() {
        if k.starts_with("MINLB_") {
            cmd.env_remove(k);
        }
    }
    cmd.args(args).output().unwrap()
}

fn json(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout).unwrap_or_else(|e| panic!("{e}: {}", String::from_utf8_lossy(&out.stdout)))
}

#[test]
fn minlb_counts_example1_exactly() {
    let dir = TempDir::new().unwrap();
    let f = write(dir.path(), "ex1.cnf", EXAMPLE1);
    let out = minlb(&["minlb", "--delta", "0.2", f.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0));
    let v = json(&out);
    assert_eq!(v["count"], "3");
    assert_eq!(v["exact"], true);
    assert_eq!(v["branch"], "projenum");
    assert!((v["bound_log2"].as_f64().unwrap() - 3f64.log2()).abs() < 1e-12);
}

#[test]
fn identical_invocations_print_identical_bytes() {
    let dir = TempDir::new().unwrap();
    let f = write(dir.path(), "ex1.cnf", EXAMPLE1);
    for sub in ["minlb", "hashcount", "projenum"] {
        let a = minlb(&[sub, "--seed", "7", f.to_str().unwrap()]);
        let b = minlb(&[sub, "--seed", "7", f.to_str().unwrap()]);
        assert_eq!(a.stdout, b.stdout, "{sub}");
    }
}

#[test]
fn bruteforce_guard_exits_one() {
    let dir = TempDir::new().unwrap();
    let clause: Vec<String> = (1..=30).map(|i| i.to_string()).collect();
    let f = write(dir.path(), "big.cnf", &format!("p cnf 30 1\n{} 0\n", clause.join(" ")));
    let out = minlb(&["bruteforce", f.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(1));
    assert_eq!(json(&out)["error"], "usage");
}

#[test]
fn parse_errors_exit_two() {
    let dir = TempDir::new().unwrap();
    let f = write(dir.path(), "bad.cnf", "p cnf 2 1\n1 3 0\n");
    assert_eq!(minlb(&["projenum", f.to_str().unwrap()]).status.code(), Some(2));
    let t = write(dir.path(), "bad.txt", "1 2\nfoo\n");
    assert_eq!(minlb(&["mingen-count", t.to_str().unwrap()]).status.code(), Some(2));
}

#[test]
fn usage_errors_exit_one() {
    assert_eq!(minlb(&["frobnicate"]).status.code(), Some(1));
    assert_eq!(minlb(&["minlb", "--no-such-flag", "x.cnf"]).status.code(), Some(1));
    assert_eq!(minlb(&["minlb", "/definitely/missing.cnf"]).status.code(), Some(1));
    let dir = TempDir::new().unwrap();
    let f = write(dir.path(), "ex1.cnf", EXAMPLE1);
    assert_eq!(minlb(&["minlb", "--delta", "1.5", f.to_str().unwrap()]).status.code(), Some(1));
}

#[test]
fn exhausted_budget_exits_three() {
    let dir = TempDir::new().unwrap();
    let f = write(dir.path(), "ex1.cnf", EXAMPLE1);
    let out = minlb(&["minlb", "--timeout-s", "0", f.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(3));
    assert_eq!(json(&out)["error"], "budget");
}

#[test]
fn environment_overrides_flags() {
    let dir = TempDir::new().unwrap();
    let f = write(dir.path(), "ex1.cnf", EXAMPLE1);
    let out = Command::new(env!("CARGO_BIN_EXE_minlb"))
        .env("MINLB_TIMEOUT_S", "0")
        .args(["minlb", f.to_str().unwrap()])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(3));
    let out = Command::new(env!("CARGO_BIN_EXE_minlb"))
        .env("MINLB_CUT_LIMIT", "1")
        .env("MINLB_SEED", "5")
        .args(["minlb", f.to_str().unwrap()])
        .output()
        .unwrap();
    let v = json(&out);
    assert_eq!(v["branch"], "hashcount");
    assert_eq!(v["seed"], 5);
}

#[test]
fn hashcount_reports_confidence() {
    let dir = TempDir::new().unwrap();
    let f = write(dir.path(), "pairs.cnf", "p cnf 6 3\n1 2 0\n3 4 0\n5 6 0\n");
    let v = json(&minlb(&["hashcount", "--delta", "0.5", f.to_str().unwrap()]));
    assert_eq!(v["method"], "hashcount");
    assert_eq!(v["confidence"], 0.5);
    assert_eq!(v["exact"], false);
    let m = v["m_star"].as_f64().unwrap();
    assert!((v["bound_log2"].as_f64().unwrap() - (m - 2.0)).abs() < 1e-12);
}

#[test]
fn projenum_accepts_an_explicit_cut() {
    let dir = TempDir::new().unwrap();
    let f = write(dir.path(), "ex1.cnf", EXAMPLE1);
    let v = json(&minlb(&["projenum", "--cut", "1,2,3", f.to_str().unwrap()]));
    assert_eq!(v["count"], "3");
    assert_eq!(v["cut"], serde_json::json!([1, 2, 3]));
}

#[test]
fn dlp_export_prints_rules() {
    let dir = TempDir::new().unwrap();
    let f = write(dir.path(), "ex1.cnf", EXAMPLE1);
    let out = minlb(&["dlp-export", f.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(String::from_utf8(out.stdout).unwrap(), "x1 ; x2 ; x3.\nx4 :- x1, x2.\nx5 :- x1, x2.\n");
}

#[test]
fn mingen_count_and_enumeration() {
    let dir = TempDir::new().unwrap();
    // Items A = 0, B = 1.
    let t = write(dir.path(), "ab.txt", "0\n\n0 1\n");
    let v = json(&minlb(&["mingen-count", t.to_str().unwrap()]));
    assert_eq!(v["count"], "2");
    assert_eq!(v["clauses"], 2);
    assert_eq!(v["literals"], 3);
    let v = json(&minlb(&["mingen-count", "--enumerate", t.to_str().unwrap()]));
    assert_eq!(
        v["generators"],
        serde_json::json!([{"itemset": [], "cover": [1, 2]}, {"itemset": [1], "cover": [2]}])
    );
}

#[test]
fn indep_support_drops_defined_outputs() {
    let dir = TempDir::new().unwrap();
    // x1 ↔ x2 ∧ x3.
    let f = write(dir.path(), "and.cnf", "p cnf 3 3\n-1 2 0\n-1 3 0\n1 -2 -3 0\n");
    let v = json(&minlb(&["indep-support", f.to_str().unwrap()]));
    assert_eq!(v["support"], serde_json::json!([2, 3]));
}

#[test]
fn bench_writes_reports() {
    let dir = TempDir::new().unwrap();
    write(dir.path(), "a.cnf", EXAMPLE1);
    write(dir.path(), "b.cnf", "p cnf 4 2\n1 2 0\n3 4 0\n");
    write(dir.path(), "broken.cnf", "p cnf 1 1\n5 0\n");
    let out_path = dir.path().join("report.jsonl");
    let out = minlb(&[
        "bench",
        "--timeout-s",
        "30",
        "--methods",
        "projenum,minlb",
        "--out",
        out_path.to_str().unwrap(),
        dir.path().to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let summary = json(&out);
    assert_eq!(summary["instances"], 3);
    assert_eq!(summary["records"], 6);
    assert_eq!(summary["log_base"], 10.0);
    let lines: Vec<Value> = std::fs::read_to_string(&out_path)
        .unwrap()
        .lines()
        .map(|l| serde_json::from_str(l).unwrap())
        .collect();
    assert_eq!(lines.len(), 6);
    let broken: Vec<&Value> = lines.iter().filter(|r| r["instance"].as_str().unwrap().ends_with("broken.cnf")).collect();
    assert!(broken.iter().all(|r| r["status"] == "error" && r["bound_log2"].is_null()));
    // Two error rows at 2T each.
    let totals = &summary["tqp_totals"];
    assert!(totals["projenum"].as_f64().unwrap() >= 60.0);
    let csv = std::fs::read_to_string(dir.path().join("report.csv")).unwrap();
    assert_eq!(csv.lines().count(), 7);
}
