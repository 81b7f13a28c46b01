use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_mmf-multicast"))
}

fn write(dir: &Path, name: &str, body: &str) -> String {
    let p = dir.join(name);
    fs::write(&p, body).unwrap();
    p.to_str().unwrap().to_string()
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().unwrap()
}

#[test]
fn sweep_to_file_is_reproducible() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "cfg.json", r#"{"n_antennas": 32, "group_sizes": [3, 3]}"#);
    let sweep = write(
        dir.path(),
        "sweep.json",
        r#"{"variable": "n_antennas", "grid": [4, 16, 48], "n_drops": 3}"#,
    );
    let a = dir.path().join("a.csv");
    let b = dir.path().join("b.csv");
    for out in [&a, &b] {
        let o = run(&["--config", &cfg, "--sweep", &sweep, "--seed", "5", "--out", out.to_str().unwrap()]);
        assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    }
    let text = fs::read_to_string(&a).unwrap();
    assert_eq!(text, fs::read_to_string(&b).unwrap());
    assert_eq!(text.lines().count(), 1 + 3 * 6);
    assert!(text.lines().nth(2).unwrap().contains("ZF-undp,infeasible"));
}

#[test]
fn single_point_json_for_one_scheme() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "cfg.json", r#"{"n_antennas": 16, "group_sizes": [2, 2]}"#);
    let o = run(&["--config", &cfg, "--scheme", "mrt-mucp", "--drops", "2", "--format", "json"]);
    assert!(o.status.success());
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    let rows = v["rows"].as_array().unwrap();
    assert_eq!(rows.len(), 1);
    assert_eq!(rows[0]["scheme"], "MRT-mucp");
    assert_eq!(rows[0]["grid_value"], 16.0);
}

#[test]
fn recommend_prints_best_scheme() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "cfg.json", r#"{"n_antennas": 6, "group_sizes": [3, 3]}"#);
    let o = run(&["--config", &cfg, "--drops", "2", "--recommend"]);
    assert!(o.status.success());
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert!(v[0]["per_scheme_se"]["ZF-undp"].is_null());
    assert!(v[0]["best_scheme"].is_string());
}

#[test]
fn mc_samples_adds_validation_column() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "cfg.json", r#"{"n_antennas": 16, "group_sizes": [2, 2]}"#);
    let o = run(&["--config", &cfg, "--drops", "1", "--mc-samples", "200", "--scheme", "ZF-mucp"]);
    assert!(o.status.success());
    let text = String::from_utf8(o.stdout).unwrap();
    assert!(text.lines().next().unwrap().ends_with("mc_rel_dev"));
}

#[test]
fn failures_exit_nonzero_with_a_diagnostic() {
    let dir = tempfile::tempdir().unwrap();
    let missing = dir.path().join("missing.json");
    let o = run(&["--config", missing.to_str().unwrap()]);
    assert!(!o.status.success());
    assert!(String::from_utf8_lossy(&o.stderr).contains("missing.json"));

    let cfg = write(dir.path(), "cfg.json", r#"{"n_antennas": 16, "group_sizes": [2]}"#);
    let o = run(&["--config", &cfg, "--scheme", "nonsense"]);
    assert!(!o.status.success());
    assert!(String::from_utf8_lossy(&o.stderr).contains("unknown scheme"));

    let bad = write(dir.path(), "bad.json", r#"{"n_antennas": 16}"#);
    let o = run(&["--config", &bad]);
    assert!(!o.status.success());

    let sweep = write(dir.path(), "s.json", r#"{"variable": "n_antennas", "grid": [8, 4]}"#);
    let o = run(&["--config", &cfg, "--sweep", &sweep]);
    assert!(!o.status.success());
    assert!(String::from_utf8_lossy(&o.stderr).contains("increasing"));
}
