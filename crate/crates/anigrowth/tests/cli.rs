use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use tempfile::TempDir;

const STUDY_HEADER: &str = "finger_id,impression_id,minutia_id,x_ref,y_ref,x_query,y_query";
const ESTIMATE_HEADER: &str = "finger_id,impression_id,gamma_hat,beta_hat,tau_hat,lambda_hat,n,iterations,final_F";

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_anigrowth")).args(args).output().unwrap()
}

fn ok(args: &[&str]) -> String {
    let out = run(args);
    assert!(out.status.success(), "{args:?}: {}", String::from_utf8_lossy(&out.stderr));
    String::from_utf8(out.stdout).unwrap()
}

fn code(args: &[&str]) -> i32 {
    run(args).status.code().unwrap()
}

fn path(dir: &TempDir, name: &str) -> PathBuf {
    dir.path().join(name)
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

/// Stand-in study of `seed` plus its estimate table.
fn simulated(dir: &TempDir, seed: u64) -> (PathBuf, PathBuf) {
    let study = path(dir, &format!("study{seed}.csv"));
    let est = path(dir, &format!("est{seed}.csv"));
    let seed = seed.to_string();
    ok(&["--seed", &seed, "--output", s(&study), "simulate"]);
    ok(&["--output", s(&est), "estimate", s(&study)]);
    (study, est)
}

#[test]
fn usage_errors_exit_with_one() {
    assert_eq!(code(&[]), 1);
    assert_eq!(code(&["bogus"]), 1);
    assert_eq!(code(&["estimate"]), 1);
    assert_eq!(code(&["test", "--test", "nope", "x.csv"]), 1);
    assert_eq!(code(&["--help"]), 0);
}

#[test]
fn data_errors_exit_with_two() {
    let dir = TempDir::new().unwrap();
    assert_eq!(code(&["estimate", s(&path(&dir, "missing.csv"))]), 2);
    let bad = path(&dir, "bad.csv");
    fs::write(&bad, format!("{STUDY_HEADER}\n1,1,1,0,0,1,1\n1,1,2,NaN,0,1,1\n")).unwrap();
    let out = run(&["estimate", s(&bad)]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("line 3"));
}

#[test]
fn degenerate_pairs_exit_with_three() {
    let dir = TempDir::new().unwrap();
    let flat = path(&dir, "flat.csv");
    fs::write(&flat, format!("{STUDY_HEADER}\n1,1,1,0,0,0,0\n1,1,2,1,0,0,0\n1,1,3,0,1,0,0\n")).unwrap();
    assert_eq!(code(&["estimate", s(&flat)]), 3);
}

#[test]
fn simulation_is_reproducible() {
    let a = ok(&["--seed", "11", "simulate"]);
    let b = ok(&["--seed", "11", "simulate"]);
    let c = ok(&["--seed", "12", "simulate"]);
    assert_eq!(a, b);
    assert_ne!(a, c);
    assert_eq!(a.lines().next(), Some(STUDY_HEADER));
    let pairs: std::collections::BTreeSet<&str> =
        a.lines().skip(1).map(|l| l.rsplitn(6, ',').last().unwrap()).collect();
    assert_eq!(pairs.len(), 56);
}

#[test]
fn identity_pairs_estimate_no_growth() {
    let dir = TempDir::new().unwrap();
    let input = path(&dir, "same.csv");
    let mut text = format!("{STUDY_HEADER}\n");
    for (j, (x, y)) in [(0.0, 0.0), (30.0, 5.0), (-12.0, 44.0), (8.0, -27.0), (51.0, 60.0)].iter().enumerate() {
        text.push_str(&format!("1,1,{},{x},{y},{x},{y}\n", j + 1));
    }
    fs::write(&input, text).unwrap();
    let out = ok(&["estimate", s(&input)]);
    let mut lines = out.lines();
    assert_eq!(lines.next(), Some(ESTIMATE_HEADER));
    let row: Vec<&str> = lines.next().unwrap().split(',').collect();
    let field = |i: usize| row[i].parse::<f64>().unwrap();
    assert!(field(3).abs() < 1e-9, "beta {}", row[3]);
    assert!(field(4).abs() < 1e-9, "tau {}", row[4]);
    assert!((field(5) - 1.0).abs() < 1e-9, "lambda {}", row[5]);
    assert_eq!(row[6], "5");
}

#[test]
fn estimate_covers_every_pair() {
    let dir = TempDir::new().unwrap();
    let (_, est) = simulated(&dir, 0);
    let text = fs::read_to_string(est).unwrap();
    assert_eq!(text.lines().next(), Some(ESTIMATE_HEADER));
    assert_eq!(text.lines().count(), 57);
}

#[test]
fn test_reports_follow_the_schema() {
    let dir = TempDir::new().unwrap();
    let (_, est) = simulated(&dir, 1);
    for test in ["rayleigh", "distal-vm", "distal-boot"] {
        let out = ok(&["--format", "json", "test", "--test", test, s(&est)]);
        let json: serde_json::Value = serde_json::from_str(&out).unwrap();
        for key in ["test_id", "statistic", "threshold", "p_value", "decision", "alpha", "epsilon", "seed", "config"] {
            assert!(json.get(key).is_some(), "{test} lacks {key}");
        }
        assert_eq!(json.as_object().unwrap().len(), 9);
        assert_eq!(json["alpha"], 0.05);
        assert!(["reject", "retain"].contains(&json["decision"].as_str().unwrap()));
    }
}

#[test]
fn rate_test_retains_against_its_own_sample() {
    let dir = TempDir::new().unwrap();
    let (_, est) = simulated(&dir, 2);
    let out = ok(&["--format", "json", "test", "--test", "tau-ks", "--reference", s(&est), s(&est)]);
    let json: serde_json::Value = serde_json::from_str(&out).unwrap();
    assert_eq!(json["decision"], "retain");
    assert_eq!(json["statistic"], 0.0);
    assert_eq!(code(&["test", "--test", "tau-ks", s(&est)]), 1);
}

#[test]
fn report_csv_has_the_fixed_columns() {
    let dir = TempDir::new().unwrap();
    let (_, est) = simulated(&dir, 3);
    let out = ok(&["--format", "csv", "test", "--test", "rayleigh", s(&est)]);
    let header = out.lines().next().unwrap();
    assert!(header.starts_with("test_id,statistic,threshold,p_value,decision,alpha,epsilon,seed"));
    assert_eq!(out.lines().count(), 2);
}

#[test]
fn empty_estimates_are_a_usage_error() {
    let dir = TempDir::new().unwrap();
    let empty = path(&dir, "empty.csv");
    fs::write(&empty, format!("{ESTIMATE_HEADER}\n")).unwrap();
    assert_eq!(code(&["align-precision", s(&empty)]), 1);
}

#[test]
fn align_precision_reports_eta() {
    let dir = TempDir::new().unwrap();
    let (_, est) = simulated(&dir, 4);
    let boxplot = path(&dir, "box.csv");
    let out = ok(&["--format", "json", "align-precision", "--boxplot", s(&boxplot), s(&est)]);
    let json: serde_json::Value = serde_json::from_str(&out).unwrap();
    let eta = json["eta"].as_f64().unwrap();
    assert!(eta > 0.0 && eta < std::f64::consts::PI);
    assert_eq!(json["epsilon"].as_f64().unwrap(), 2.0 * eta);
    assert!(boxplot.exists());
}

/// Reruns the sweep pipeline by hand at one direction.
fn rayleigh_rejects(dir: &TempDir, gamma: f64, tau: f64) -> bool {
    let grown = path(dir, "grown.csv");
    let est = path(dir, "grown_est.csv");
    let (g, t) = (gamma.to_string(), tau.to_string());
    ok(&["--output", s(&grown), "simulate", "--gamma", &g, "--tau", &t]);
    ok(&["--output", s(&est), "estimate", s(&grown)]);
    let out = ok(&["--format", "json", "test", "--test", "rayleigh", s(&est)]);
    let json: serde_json::Value = serde_json::from_str(&out).unwrap();
    json["decision"] == "reject"
}

#[test]
fn sweep_minimum_is_the_first_rejecting_rate() {
    let dir = TempDir::new().unwrap();
    let csv = path(&dir, "sweep.csv");
    let step = 0.004;
    ok(&[
        "--output", s(&csv), "sweep", "--test", "rayleigh", "--gamma-steps", "3", "--tau-step", "0.004",
        "--tau-max", "0.1",
    ]);
    let text = fs::read_to_string(&csv).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("gamma,tau_min"));
    let rows: Vec<(f64, &str)> = lines
        .map(|l| {
            let (g, t) = l.split_once(',').unwrap();
            (g.parse().unwrap(), t)
        })
        .collect();
    assert_eq!(rows.len(), 3);
    let meta: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(format!("{}.meta.json", s(&csv))).unwrap()).unwrap();
    assert!(meta.is_object());

    let (gamma, tau) = rows.iter().find(|r| r.1 != "above-grid").expect("some direction detected");
    let tau: f64 = tau.parse().unwrap();
    assert!(rayleigh_rejects(&dir, *gamma, tau));
    let k = (tau / step).round() as u32;
    if k > 1 {
        assert!(!rayleigh_rejects(&dir, *gamma, (k - 1) as f64 * step));
    }
}

#[test]
fn sweep_marks_undetected_directions() {
    let out = ok(&["sweep", "--test", "rayleigh", "--gamma-steps", "2", "--tau-step", "0.001", "--tau-max", "0.001"]);
    let rows: Vec<&str> = out.lines().skip(1).collect();
    assert_eq!(rows.len(), 2);
    for row in rows {
        let t = row.split_once(',').unwrap().1;
        assert!(t == "above-grid" || t == "0.001", "{row}");
    }
}
