use std::fs;
use std::process::{Command, Output};

fn hks(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_hks")).args(args).output().expect("spawn hks")
}

fn json(out: &Output) -> serde_json::Value {
    assert!(out.status.success(), "stderr: {}", String::from_utf8_lossy(&out.stderr));
    serde_json::from_slice(&out.stdout).expect("stdout is JSON")
}

#[test]
fn riemann_check_spot_value() {
    let v = json(&hks(&["riemann-check", "--rho", "1", "--q", "0"]));
    let e = std::f64::consts::E;
    assert!((v["w"][0].as_f64().unwrap() - e).abs() < 1e-10);
    assert!((v["w"][1].as_f64().unwrap() + e).abs() < 1e-10);
    assert!((v["det_grad_w"].as_f64().unwrap() - 2.0 * e * e).abs() < 1e-8);
    assert!(v["roundtrip_error"].as_f64().unwrap() < 1e-8);
}

#[test]
fn negative_q_is_accepted() {
    let v = json(&hks(&["riemann-check", "--rho", "2", "--q", "-0.5"]));
    assert!(v["lambda"][0].as_f64().unwrap() < 0.0);
}

#[test]
fn constant_scenario_writes_artifacts() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("run");
    let v = json(&hks(&["scenario", "constant", "--grid-n", "64", "--out", out.to_str().unwrap()]));
    assert_eq!(v["verdict"], "completed");
    assert!(v["constant_check"]["c_error"].as_f64().unwrap() < 1e-8);
    let norms = fs::read_to_string(out.join("norms.csv")).unwrap();
    assert!(norms.starts_with("t,sup_rho,sup_c,sup_grad_rho,sup_hess_c,sup_grad_log_c,X_m\n"));
    let report: serde_json::Value = serde_json::from_str(&fs::read_to_string(out.join("report.json")).unwrap()).unwrap();
    assert_eq!(report["config"]["grid"]["cells_per_axis"], 64);
}

#[test]
fn config_roundtrip_with_overrides() {
    let dir = tempfile::tempdir().unwrap();
    let dumped = hks(&["scenario", "remark11", "--dump-config"]);
    assert!(dumped.status.success());
    let path = dir.path().join("c.json");
    fs::write(&path, &dumped.stdout).unwrap();
    let v = json(&hks(&["simulate", "--config", path.to_str().unwrap(), "--grid-n", "1024", "--cfl", "0.3", "--t-end", "0.05"]));
    assert_eq!(v["cells_per_axis"], 1024);
    assert_eq!(v["verdict"], "completed");
    assert!((v["t_final"].as_f64().unwrap() - 0.05).abs() < 1e-12);
}

#[test]
fn unknown_config_keys_are_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("bad.json");
    let mut c: serde_json::Value = serde_json::from_slice(&hks(&["scenario", "constant", "--dump-config"]).stdout).unwrap();
    c["colour"] = "blue".into();
    fs::write(&path, c.to_string()).unwrap();
    let out = hks(&["simulate", "--config", path.to_str().unwrap()]);
    assert!(!out.status.success());
    assert!(String::from_utf8_lossy(&out.stderr).contains("colour"));
}

#[test]
fn bad_target_interval_is_rejected() {
    let out = hks(&["scenario", "thm13_case1", "--target-interval", "3,1"]);
    assert!(!out.status.success());
}

#[test]
fn propagation_reports_clean_cone() {
    let v = json(&hks(&["propagation", "--grid-n", "512"]));
    assert_eq!(v["report"]["cone_violation"], false);
    assert!(v["cone"]["A"].as_f64().unwrap() >= 1.0);
}

#[test]
fn sweep_writes_summary() {
    let dir = tempfile::tempdir().unwrap();
    let v = json(&hks(&["sweep", "--ns", "256,512", "--out", dir.path().to_str().unwrap()]));
    assert_eq!(v.as_array().unwrap().len(), 2);
    let csv = fs::read_to_string(dir.path().join("sweep.csv")).unwrap();
    assert_eq!(csv.lines().count(), 3);
    assert!(dir.path().join("n512").join("report.json").exists());
}
