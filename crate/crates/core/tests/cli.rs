use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn runwave(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_runwave")).args(args).output().unwrap()
}

fn write(dir: &Path, name: &str, text: &str) -> String {
    let p = dir.join(name);
    std::fs::write(&p, text).unwrap();
    p.to_str().unwrap().to_string()
}

fn json(out: &Output) -> Value {
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    serde_json::from_slice(&out.stdout).unwrap()
}

const PROTOCOL: &str = r#"{
  "schema_version": 1,
  "drive": {"x": 5},
  "measurement": {"z_true": 0.15, "relative_error": 0.05},
  "window": [0, 1],
  "stages": [{"xi": 0.25, "phi0": "coarse"}, {"xi": 2}, {"xi": 4}]
}"#;

#[test]
fn invert_schema() {
    let v = json(&runwave(&["invert", "--x", "5", "--xi", "2", "--R", "0.812", "--rel-err", "0.05"]));
    assert_eq!(v["schema_version"], 1);
    let c = v["candidates"].as_array().unwrap();
    assert_eq!(c.len(), 4);
    for key in ["branch", "z_hat", "z_lo", "z_hi", "phi_solution"] {
        assert!(c[0].get(key).is_some(), "{key}");
    }
    assert_eq!(v["relative_uncertainty"].as_array().unwrap().len(), 4);
    assert!(v["flags"].is_array());
}

#[test]
fn ratio_curve_to_file() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("curve.csv");
    let o = runwave(&["ratio-curve", "--x", "1", "--points", "33", "--out", out.to_str().unwrap()]);
    assert!(o.status.success() && o.stdout.is_empty());
    let text = std::fs::read_to_string(out).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("# schema_version=1"));
    assert_eq!(lines.next(), Some("phi_rad,R,dR_dPhi"));
    let rows: Vec<Vec<f64>> = lines.map(|l| l.split(',').map(|c| c.parse().unwrap()).collect()).collect();
    assert_eq!(rows.len(), 33);
    // the grid includes Φ = π, where the ratio vanishes
    assert!(rows[16][1].abs() < 1e-15);
}

#[test]
fn position_curve_branch_counts() {
    let count = |xi: &str, window: &str| {
        let o = runwave(&["position-curve", "--x", "5", "--xi", xi, "--window", window, "--points", "64"]);
        assert!(o.status.success());
        let text = String::from_utf8(o.stdout).unwrap();
        let rows: Vec<&str> = text.lines().skip(2).collect();
        // rows sharing an interior ratio sample
        let r = rows[rows.len() / 2].split(',').next().unwrap();
        rows.iter().filter(|l| l.split(',').next() == Some(r)).count()
    };
    assert_eq!(count("4", "0:1"), 8);
    assert_eq!(count("2", "0:1"), 4);
    assert_eq!(count("0.25", "0:2"), 1);
}

#[test]
fn protocol_completes() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "p.json", PROTOCOL);
    let v = json(&runwave(&["protocol", "--config", &cfg]));
    assert_eq!(v["stages"].as_array().unwrap().len(), 3);
    for key in ["xi", "phi0", "interval"] {
        assert!(v["stages"][0].get(key).is_some());
    }
    assert!(v["final"]["relative_uncertainty"].as_f64().unwrap() <= 0.04);
}

#[test]
fn protocol_ambiguous_branch() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "p.json", &PROTOCOL.replace(r#"{"xi": 2}, "#, ""));
    let o = runwave(&["protocol", "--config", &cfg]);
    assert_eq!(o.status.code(), Some(5));
    assert!(String::from_utf8_lossy(&o.stderr).contains("stage 1"));
    assert!(o.stdout.is_empty());
}

#[test]
fn protocol_rejects_decreasing_stages() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "p.json", &PROTOCOL.replace(r#"{"xi": 4}"#, r#"{"xi": 1}"#));
    assert_eq!(runwave(&["protocol", "--config", &cfg]).status.code(), Some(2));
}

#[test]
fn config_errors() {
    let dir = tempfile::tempdir().unwrap();
    let bad = write(dir.path(), "bad.json", "{\n  \"drive\": {\"x\": 5},\n  \"extra\": 1\n}");
    let o = runwave(&["ratio-curve", "--config", &bad]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("line 3"));
    assert_eq!(runwave(&["ratio-curve", "--config", "/nonexistent.json"]).status.code(), Some(2));
    assert_eq!(runwave(&["invert", "--x", "5", "--xi", "2"]).status.code(), Some(2));
}

#[test]
fn exit_codes() {
    assert_eq!(runwave(&["invert", "--x", "5", "--xi", "0", "--R", "0.5"]).status.code(), Some(3));
    assert_eq!(runwave(&["invert", "--x", "5", "--xi", "2", "--R", "0.99"]).status.code(), Some(4));
    assert_eq!(runwave(&["position-curve", "--x", "5", "--xi", "0"]).status.code(), Some(3));
}

#[test]
fn steady_state_and_optimizer() {
    let v = json(&runwave(&["steady-state", "--x", "5", "--phi", "1.8849555921538759"]));
    assert!((v["ratio_numeric"].as_f64().unwrap() - 0.81229).abs() < 1e-4);
    assert!(v["abs_difference"].as_f64().unwrap() < 1e-8);
    let v = json(&runwave(&["optimize-phi0", "--x", "5", "--xi", "2", "--z-est", "0.15"]));
    let opt = v["slope_at_operating_point"].as_f64().unwrap().abs();
    assert!(opt > v["slope_at_phi0_zero"].as_f64().unwrap().abs());
    assert!(v["phi0_star"].as_f64().unwrap() >= 0.0);
}

#[test]
fn seeded_noise_is_reproducible() {
    let args = [
        "invert", "--x", "5", "--xi", "2", "--z-true", "0.15", "--rel-err", "0.05", "--seed", "9",
    ];
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "n.json", r#"{"measurement": {"z_true": 0.15, "noise_sigma": 0.02}}"#);
    let mut with_cfg = args.to_vec();
    with_cfg.extend(["--config", &cfg]);
    let a = runwave(&with_cfg);
    let b = runwave(&with_cfg);
    assert!(a.status.success());
    assert_eq!(a.stdout, b.stdout);
    let mut other_seed = with_cfg.clone();
    other_seed[10] = "10";
    assert_ne!(runwave(&other_seed).stdout, a.stdout);
}
