use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::{json, Value};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_mdimlab"))
}

fn shipped(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../configs").join(format!("{name}.json"))
}

fn write_config(dir: &Path, name: &str, cfg: &Value) -> PathBuf {
    let path = dir.join(name);
    std::fs::write(&path, serde_json::to_string_pretty(cfg).unwrap()).unwrap();
    path
}

fn run(args: &[&str]) -> Output {
    bin().args(args).env("MDIMLAB_THREADS", "2").output().unwrap()
}

#[test]
fn reports_are_byte_identical_across_runs() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = shipped("kraft");
    for format in ["csv", "json"] {
        let a = dir.path().join(format!("a.{format}"));
        let b = dir.path().join(format!("b.{format}"));
        for out in [&a, &b] {
            let o = run(&["kraft", "--config", cfg.to_str().unwrap(), "--format", format, "--out", out.to_str().unwrap()]);
            assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
        }
        assert_eq!(std::fs::read(&a).unwrap(), std::fs::read(&b).unwrap());
    }
}

#[test]
fn json_report_has_summary_fields() {
    let o = run(&["kraft", "--config", shipped("kraft").to_str().unwrap(), "--format", "json"]);
    assert_eq!(o.status.code(), Some(0));
    let v: Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(v["suite"], "kraft");
    assert_eq!(v["fail_count"], 0);
    assert!(v["pass_count"].as_u64().unwrap() > 0);
    assert!(v["rows"].as_array().unwrap().iter().all(|r| r["pass"] != false));
}

#[test]
fn csv_report_has_the_header() {
    let o = run(&["kraft", "--config", shipped("kraft").to_str().unwrap(), "--format", "csv"]);
    assert_eq!(o.status.code(), Some(0));
    let text = String::from_utf8(o.stdout).unwrap();
    assert!(text.starts_with("suite,kind,name,subject,r,lhs,rhs,pass,detail"), "{text}");
}

#[test]
fn seed_override_changes_sampled_geometry_but_stays_deterministic() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(
        dir.path(),
        "geometry.json",
        &json!({
            "suite": "geometry",
            "params": {"balls": 50, "exhaustive_balls": 10, "points": 50, "r_max": 4,
                       "dims": [1, 2], "enumeration_count": 200, "enumeration_dims": [1, 2]}
        }),
    );
    let cfg = cfg.to_str().unwrap();
    let a = run(&["geometry", "--config", cfg, "--seed", "3", "--format", "csv"]);
    let b = run(&["geometry", "--config", cfg, "--seed", "3", "--format", "csv"]);
    assert_eq!(a.status.code(), Some(0), "{}", String::from_utf8_lossy(&a.stderr));
    assert_eq!(a.stdout, b.stdout);
}

#[test]
fn failing_check_exits_one() {
    // A modulus override too small for scale(8) is refuted by sampling.
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(
        dir.path(),
        "dpi.json",
        &json!({
            "suite": "dpi",
            "functions": [{"name": "scale", "c": "8", "modulus": {"form": "linear", "s": 0}}]
        }),
    );
    let o = run(&["dpi", "--config", cfg.to_str().unwrap(), "--format", "csv"]);
    assert_eq!(o.status.code(), Some(1), "{}", String::from_utf8_lossy(&o.stderr));
    assert!(String::from_utf8_lossy(&o.stderr).contains("FAIL"));
}

#[test]
fn unknown_suite_exits_two() {
    let o = run(&["no-such-suite"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("unknown suite"));
}

#[test]
fn mismatched_config_suite_exits_two() {
    let o = run(&["geometry", "--config", shipped("kraft").to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn malformed_config_exits_two() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("bad.json");
    std::fs::write(&path, "{ not json").unwrap();
    let o = run(&["kraft", "--config", path.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
}
