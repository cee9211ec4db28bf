use std::io::Write;
use std::process::Command;

use serde_json::Value;

fn run(args: &[&str]) -> (i32, String, String) {
    let mut out = Vec::new();
    let mut err = Vec::new();
    let mut full = vec!["pic"];
    full.extend_from_slice(args);
    let code = pic::cli::run(full, &mut out, &mut err);
    (code, String::from_utf8(out).unwrap(), String::from_utf8(err).unwrap())
}

fn json(s: &str) -> Value {
    serde_json::from_str(s).unwrap()
}

fn toy_csv(ys: &[f64]) -> tempfile::NamedTempFile {
    let mut f = tempfile::NamedTempFile::new().unwrap();
    writeln!(f, "a,b,y").unwrap();
    let xa = [1.0, -1.0, 0.5, -0.5, 2.0, -2.0, 0.3, -0.3];
    let xb = [0.2, 0.1, -0.4, 1.0, -0.6, 0.3, -0.9, 0.5];
    for i in 0..ys.len() {
        writeln!(f, "{},{},{}", xa[i], xb[i], ys[i]).unwrap();
    }
    f
}

#[test]
fn closed_form_calibration() {
    let (code, out, _) = run(&["calibrate", "--method", "closed", "--n", "100", "--p", "100"]);
    assert_eq!(code, 0);
    let v = json(&out);
    assert!((v["lambda"].as_f64().unwrap() - 0.40728).abs() < 1e-5);
    assert!(out.contains("e-1"));
}

#[test]
fn usage_errors_exit_with_two() {
    let (code, _, err) = run(&["calibrate", "--method", "closed", "--n", "100", "--p", "100", "--alpha", "1.5"]);
    assert_eq!(code, 2);
    assert_eq!(json(&err)["error"], "usage");
    assert_eq!(run(&["calibrate", "--bogus"]).0, 2);
    assert_eq!(run(&["simulate-phase", "--methods", "magic"]).0, 2);
    assert_eq!(run(&["fit", "--data", "/nonexistent/file.csv"]).0, 2);
}

#[test]
fn computational_failures_exit_with_one() {
    let f = toy_csv(&[0.0; 8]);
    let (code, _, err) = run(&["fit", "--data", f.path().to_str().unwrap(), "--family", "bernoulli", "--lambda", "0.1"]);
    assert_eq!(code, 1, "{err}");
    assert_eq!(json(&err)["error"], "computation");
}

#[test]
fn fit_threshold_behaviour() {
    let f = toy_csv(&[3.0, 1.0, 2.5, 1.5, 4.0, 0.0, 2.2, 1.8]);
    let path = f.path().to_str().unwrap();
    let (code, out, _) = run(&["fit", "--data", path, "--lambda", "0.05"]);
    assert_eq!(code, 0);
    let v = json(&out);
    assert!(!v["support"].as_array().unwrap().is_empty());
    assert_eq!(v["support_names"][0], "a");
    assert!(v["calibration"].is_null());

    let (_, out, _) = run(&["fit", "--data", path, "--lambda", "1e6"]);
    let v = json(&out);
    assert!(v["support"].as_array().unwrap().is_empty());
    assert!((v["original"]["intercept"].as_f64().unwrap() - 2.0).abs() < 1e-9);

    let (code, out, _) = run(&["fit", "--data", path, "--penalty", "scad", "--refit", "--draws", "200"]);
    assert_eq!(code, 0);
    assert!(!json(&out)["calibration"].is_null());
}

#[test]
fn select_l0_runs() {
    let f = toy_csv(&[3.0, 1.0, 2.5, 1.5, 4.0, 0.0, 2.2, 1.8]);
    let path = f.path().to_str().unwrap();
    for crit in ["pivotal-bic", "bic", "ebic"] {
        let (code, out, err) = run(&["select-l0", "--data", path, "--criterion", crit, "--draws", "200"]);
        assert_eq!(code, 0, "{err}");
        assert!(json(&out)["support"].is_array());
    }
}

#[test]
fn runs_are_byte_identical() {
    let args = ["--seed", "5", "null-coverage", "--n", "30", "--p", "10", "--reps", "100", "--draws", "100"];
    let a = run(&args);
    let b = run(&args);
    assert_eq!(a.0, 0);
    assert_eq!(a.1, b.1);
    let c = run(&["--seed", "6", "--threads", "2", "null-coverage", "--n", "30", "--p", "10", "--reps", "100", "--draws", "100"]);
    assert_eq!(c.0, 0);
}

#[test]
fn phase_grid_csv() {
    let (code, out, _) = run(&["simulate-phase", "--n", "40", "--p", "10", "--s", "0:4:2", "--reps", "2", "--methods", "oracle"]);
    assert_eq!(code, 0);
    let lines: Vec<&str> = out.lines().collect();
    assert_eq!(lines[0], "method,n,p,s,rep_count,pesr,se,mean_fit_seconds");
    assert_eq!(lines.len(), 4);
    for l in &lines[1..] {
        let pesr: f64 = l.split(',').nth(5).unwrap().parse().unwrap();
        assert_eq!(pesr, 1.0);
    }

    let dir = tempfile::tempdir().unwrap();
    let file = dir.path().join("grid.csv");
    let (code, summary, _) = run(&[
        "simulate-phase", "--n", "40", "--p", "10", "--s", "1,2", "--reps", "2", "--draws", "100", "--out",
        file.to_str().unwrap(),
    ]);
    assert_eq!(code, 0);
    assert!(!summary.is_empty());
    assert_eq!(std::fs::read_to_string(&file).unwrap().lines().count(), 5);
}

#[test]
fn demo_and_binary() {
    let (code, out, _) = run(&["demo-poisson", "--n", "50", "--draws", "200", "--mc-draws", "100"]);
    assert_eq!(code, 0);
    assert!(out.starts_with('#'));

    let status = Command::new(env!("CARGO_BIN_EXE_pic"))
        .args(["calibrate", "--method", "closed", "--n", "100", "--p", "100"])
        .output()
        .unwrap();
    assert!(status.status.success());
    assert!(String::from_utf8_lossy(&status.stdout).contains("4.0728"));
    let status = Command::new(env!("CARGO_BIN_EXE_pic")).arg("frobnicate").output().unwrap();
    assert_eq!(status.status.code(), Some(2));
    let status = Command::new(env!("CARGO_BIN_EXE_pic"))
        .env("PIC_SEED", "9")
        .args(["calibrate", "--n", "30", "--p", "5", "--draws", "100"])
        .output()
        .unwrap();
    assert_eq!(json(&String::from_utf8_lossy(&status.stdout))["seed"], 9);
}
