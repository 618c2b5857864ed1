use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;

fn sample(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../instances").join(name)
}

fn gcmc(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_gcmc")).args(args).env_remove("GCMC_STATE_CAP").output().unwrap()
}

fn json(out: &Output) -> Value {
    assert!(out.status.success(), "stderr: {}", String::from_utf8_lossy(&out.stderr));
    serde_json::from_slice(&out.stdout).unwrap()
}

fn path(p: &Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn solve_p3_is_feasible_and_reproducible() {
    let inst = sample("p3-independent-set.json");
    let args = ["--instance", path(&inst), "--constraint", "independent-set", "--seed", "7"];
    let a = gcmc(&args);
    let b = gcmc(&args);
    assert_eq!(a.stdout, b.stdout);
    let r = json(&a);
    assert_eq!(r["mode"], "solve");
    assert_eq!(r["feasible"], true);
    assert_eq!(r["lp_value"].as_f64().unwrap(), 2.0);
    let cut = r["cut_value"].as_f64().unwrap();
    assert!(cut == 0.0 || cut == 2.0);
    let s: Vec<u64> = r["solution"].as_array().unwrap().iter().map(|v| v.as_u64().unwrap()).collect();
    assert!(!(s.contains(&0) && s.contains(&1)) && !(s.contains(&1) && s.contains(&2)));
}

#[test]
fn certify_samples_meet_half_guarantee() {
    for name in ["p3-independent-set.json", "cycle6-vertex-cover.json", "spider-connectivity.json"] {
        let inst = sample(name);
        let r = json(&gcmc(&["--instance", path(&inst), "--mode", "certify", "--seed", "3"]));
        let c = &r["certificate"];
        assert!(c["ratio"].as_f64().unwrap() >= 0.5 - 1e-6, "{name}");
        assert!(c["lp_value"].as_f64().unwrap() >= c["opt_value"].as_f64().unwrap() - 1e-6, "{name}");
        assert_eq!(c["audit"]["failures"], 0, "{name}");
        assert_eq!(r["solve"]["feasible"], true, "{name}");
    }
}

#[test]
fn constraint_flag_supplies_missing_constraint() {
    let inst = sample("grid2x3-dominating-set.json");
    let missing = gcmc(&["--instance", path(&inst)]);
    assert_eq!(missing.status.code(), Some(1));
    let r = json(&gcmc(&["--instance", path(&inst), "--constraint", "dominating-set", "--mode", "oracle"]));
    assert_eq!(r["constraint"], "dominating-set");
    assert!(r["feasible_count"].as_u64().unwrap() > 0);
}

#[test]
fn family_modes_agree_on_small_instance() {
    let inst = sample("cycle6-vertex-cover.json");
    let lp = |family| json(&gcmc(&["--instance", path(&inst), "--family", family]))["lp_value"].as_f64().unwrap();
    assert!((lp("full") - lp("reduced")).abs() < 1e-9);
}

#[test]
fn algorithm2_reports_chosen_part() {
    let inst = sample("cycle6-vertex-cover.json");
    let part = sample("cycle6-partition.json");
    let args = ["--instance", path(&inst), "--mode", "algorithm2", "--partition", path(&part), "--seed", "5"];
    let a = gcmc(&args);
    assert_eq!(a.stdout, gcmc(&args).stdout);
    let r = json(&a);
    assert_eq!(r["h"], 3);
    assert_eq!(r["parts"].as_array().unwrap().len(), 3);
    let chosen = r["chosen_part"].as_u64().unwrap() as usize;
    assert_eq!(r["parts"][chosen]["value"], r["best_value"]);
}

#[test]
fn out_flag_writes_the_same_report() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("report.json");
    let inst = sample("cycle6-vertex-cover.json");
    let written = gcmc(&["--instance", path(&inst), "--seed", "1", "--out", path(&out)]);
    assert!(written.status.success());
    assert!(written.stdout.is_empty());
    let printed = gcmc(&["--instance", path(&inst), "--seed", "1"]);
    assert_eq!(std::fs::read(&out).unwrap(), printed.stdout);
}

#[test]
fn malformed_json_exits_one_with_diagnostic() {
    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.json");
    std::fs::write(&bad, "{\"n\": 3, \"edges\": [[0, 1]").unwrap();
    let out = gcmc(&["--instance", path(&bad), "--constraint", "vertex-cover"]);
    assert_eq!(out.status.code(), Some(1));
    assert!(out.stdout.is_empty());
    assert!(!out.stderr.is_empty());
}

#[test]
fn io_and_usage_errors_exit_one() {
    assert_eq!(gcmc(&["--instance", "/definitely/not/here.json"]).status.code(), Some(1));
    let inst = sample("p3-independent-set.json");
    assert_eq!(gcmc(&["--instance", path(&inst), "--trials", "0"]).status.code(), Some(1));
    assert_eq!(gcmc(&["--instance", path(&inst), "--constraint", "clique"]).status.code(), Some(1));
    assert_eq!(gcmc(&["--instance", path(&inst), "--mode", "algorithm2"]).status.code(), Some(1));
}

#[test]
fn cap_errors_exit_two() {
    let inst = sample("cycle6-vertex-cover.json");
    let out = Command::new(env!("CARGO_BIN_EXE_gcmc"))
        .args(["--instance", path(&inst)])
        .env("GCMC_STATE_CAP", "1")
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(2));
    assert_eq!(gcmc(&["--instance", path(&inst), "--state-cap", "1"]).status.code(), Some(2));

    let dir = tempfile::tempdir().unwrap();
    let part = dir.path().join("spider.json");
    std::fs::write(&part, r#"{"parts": [[0, 1, 2], [3, 4], [5, 6]]}"#).unwrap();
    let spider = sample("spider-connectivity.json");
    let out = gcmc(&["--instance", path(&spider), "--mode", "algorithm2", "--partition", path(&part)]);
    assert_eq!(out.status.code(), Some(2));
}
