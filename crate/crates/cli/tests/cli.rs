use std::path::{Path, PathBuf};
use std::process::Command;

use adaptail_cli::{run, Cli, Outcome, UsageError};
use clap::Parser;
use serde_json::Value;

fn go(args: &[&str]) -> anyhow::Result<Outcome> {
    let mut argv = vec!["adaptail"];
    argv.extend_from_slice(args);
    run(Cli::try_parse_from(argv)?)
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

fn json(path: &Path) -> Value {
    serde_json::from_str(&std::fs::read_to_string(path).unwrap()).unwrap()
}

fn read_csv(path: &Path) -> (Vec<String>, Vec<Vec<String>>) {
    let mut r = csv::Reader::from_path(path).unwrap();
    let h = r.headers().unwrap().iter().map(String::from).collect();
    let rows = r.records().map(|x| x.unwrap().iter().map(String::from).collect()).collect();
    (h, rows)
}

fn col(rows: &[Vec<String>], j: usize) -> Vec<f64> {
    rows.iter().map(|r| r[j].parse().unwrap()).collect()
}

fn pareto_file(dir: &Path) -> PathBuf {
    let out = go(&["sample", "--law", "pareto", "--n", "1000", "--seed", "3", "--out", s(dir)]).unwrap();
    out.artifacts[0].clone()
}

#[test]
fn estimate_on_pareto_data() {
    let dir = tempfile::tempdir().unwrap();
    let data = pareto_file(dir.path());
    let out = go(&["estimate", "--input", s(&data), "--p", "0.99,0.999", "--out", s(dir.path())]).unwrap();
    let v = json(&out.artifacts[0]);
    assert_eq!(v["n"], 1000);
    assert_eq!(v["rejected"], false);
    assert_eq!(v["k_hat"], 1000);
    let th = v["theta_hat"].as_f64().unwrap();
    assert!((0.9..=1.1).contains(&th), "{th}");
    let q = &v["quantiles"];
    assert!(q["0.99"].as_f64().unwrap() < q["0.999"].as_f64().unwrap());
    let (h, rows) = read_csv(&out.artifacts[1]);
    assert_eq!(h, vec!["k", "hill"]);
    assert_eq!(rows.len(), 999);
}

#[test]
fn estimate_on_change_point_data() {
    let dir = tempfile::tempdir().unwrap();
    let out = go(&[
        "sample",
        "--law",
        "pareto_change_point:theta1=3,theta2=1,tau=1000",
        "--n",
        "1000",
        "--seed",
        "9",
        "--out",
        s(dir.path()),
    ])
    .unwrap();
    let est = go(&["estimate", "--input", s(&out.artifacts[0]), "--p", "0.999", "--out", s(dir.path())]).unwrap();
    let v = json(&est.artifacts[0]);
    assert_eq!(v["rejected"], true);
    let k = v["k_hat"].as_u64().unwrap();
    // about 1000·(1/1000)^{1/3} = 100 points above the change point
    assert!((40..=200).contains(&k), "{k}");
    let q = v["quantiles"]["0.999"].as_f64().unwrap();
    // P(X > 1000) = 1000^{−1/3} = 0.1 and Pareto(1) above it, so q_{0.999} = 1000·100
    assert!(q > 3e4 && q < 3e5, "{q}");
}

#[test]
fn input_errors() {
    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.csv");
    std::fs::write(&bad, "value\n1.5\n2.5\n-1\n").unwrap();
    let e = go(&["estimate", "--input", s(&bad)]).unwrap_err();
    assert!(format!("{e:#}").contains("non-positive observation at line 4"), "{e:#}");
    let missing = dir.path().join("nope.csv");
    assert!(go(&["estimate", "--input", s(&missing)]).is_err());
    let e = go(&["estimate"]).unwrap_err();
    assert!(e.downcast_ref::<UsageError>().is_some());
}

#[test]
fn infeasible_config_names_the_condition() {
    let dir = tempfile::tempdir().unwrap();
    let data = pareto_file(dir.path());
    let e = go(&["estimate", "--input", s(&data), "--delta", "0.001", "--out", s(dir.path())]).unwrap_err();
    let msg = format!("{e:#}");
    assert!(msg.contains("(1−delta)·r_i ≤ r_(i−1) fails"), "{msg}");
    let tiny = dir.path().join("tiny.csv");
    std::fs::write(&tiny, "1\n2\n3\n4\n5\n").unwrap();
    let msg = format!("{:#}", go(&["estimate", "--input", s(&tiny)]).unwrap_err());
    assert!(msg.contains("no feasible starting index for n = 5"), "{msg}");
}

#[test]
fn config_file_and_flag_precedence() {
    let dir = tempfile::tempdir().unwrap();
    let data = pareto_file(dir.path());
    let cfg = dir.path().join("run.toml");
    std::fs::write(&cfg, "rho = 0.3\ndelta = 0.1\nz = 12\np = [0.95]\n").unwrap();
    let out =
        go(&["estimate", "--config", s(&cfg), "--input", s(&data), "--rho", "0.2", "--out", s(dir.path())]).unwrap();
    let v = json(&out.artifacts[0]);
    assert_eq!(v["config"]["rho"], 0.2);
    assert_eq!(v["config"]["delta"], 0.1);
    assert_eq!(v["z"], 12.0);
    assert!(v["quantiles"]["0.95"].is_number());

    std::fs::write(&cfg, "rhoo = 0.3\n").unwrap();
    let e = go(&["estimate", "--config", s(&cfg), "--input", s(&data)]).unwrap_err();
    assert!(e.downcast_ref::<UsageError>().is_some());
}

#[test]
fn calibration_is_reproducible_and_usable() {
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    let args = |d: &Path| go(&["calibrate", "--n", "300", "--reps", "40", "--seed", "5", "--out", s(d)]).unwrap();
    let (x, y) = (args(a.path()), args(b.path()));
    assert!(x.warnings.iter().any(|w| w.contains("low-precision calibration")));
    assert_eq!(std::fs::read(&x.artifacts[0]).unwrap(), std::fs::read(&y.artifacts[0]).unwrap());
    let seq = go(&["calibrate", "--n", "300", "--reps", "40", "--seed", "5", "--workers", "1", "--out", s(b.path())])
        .unwrap();
    assert_eq!(std::fs::read(&x.artifacts[0]).unwrap(), std::fs::read(&seq.artifacts[0]).unwrap());

    let z = json(&x.artifacts[0])["z"].as_f64().unwrap();
    let data = go(&["sample", "--law", "cauchy", "--n", "300", "--seed", "1", "--out", s(a.path())]).unwrap().artifacts
        [0]
    .clone();
    let cal = x.artifacts[0].clone();
    let est = go(&["estimate", "--input", s(&data), "--calibration-file", s(&cal), "--out", s(a.path())]).unwrap();
    assert_eq!(json(&est.artifacts[0])["z"].as_f64().unwrap(), z);
    assert!(est.warnings.iter().any(|w| w.contains("replications")));
}

#[test]
fn simulate_writes_tables_and_manifest() {
    let dir = tempfile::tempdir().unwrap();
    let out = go(&[
        "simulate",
        "table2",
        "--law",
        "hall",
        "--n",
        "400",
        "--reps",
        "30",
        "--seed",
        "2",
        "--out",
        s(dir.path()),
    ])
    .unwrap();
    let names: Vec<String> =
        out.artifacts.iter().map(|p| p.file_name().unwrap().to_str().unwrap().to_string()).collect();
    assert_eq!(names, vec!["hall_400_table2.csv", "hall_400_table2_selection.csv", "hall_400_table2_manifest.json"]);
    assert!(out.warnings.iter().any(|w| w.contains("low-precision")));
    let m = json(&out.artifacts[2]);
    assert_eq!(m["seed"], 2);
    assert_eq!(m["n_rep"], 30);
    let digest = m["artifacts"][0]["sha256"].as_str().unwrap().to_string();
    assert_eq!(digest, adaptail_cli::commands::sha256_file(&out.artifacts[0]).unwrap());
    let (h, rows) = read_csv(&out.artifacts[0]);
    assert_eq!(h[0], "k");
    assert_eq!(rows.len(), 14);

    assert!(Cli::try_parse_from(["adaptail", "simulate", "table9", "--law", "cauchy"]).is_err());
    let e = go(&["simulate", "table1", "--law", "weibull"]).unwrap_err();
    assert!(e.downcast_ref::<UsageError>().is_some());
    let e = go(&["simulate", "table1"]).unwrap_err();
    assert!(e.downcast_ref::<UsageError>().is_some());
}

#[test]
fn analyze_curves() {
    let dir = tempfile::tempdir().unwrap();
    let run_law = |law: &str| {
        let out =
            go(&["analyze", "--law", law, "--points", "12", "--t-min", "3", "--t-max", "1e5", "--out", s(dir.path())])
                .unwrap();
        let (h, rows) = read_csv(&out.artifacts[0]);
        assert_eq!(h, vec!["t", "theta_t", "alpha", "chi2", "error"]);
        assert!(rows.iter().all(|r| r[4].is_empty()), "{rows:?}");
        (col(&rows, 0), col(&rows, 1), col(&rows, 3))
    };
    let (_, th, chi) = run_law("pareto:theta=0.7");
    assert!(th.iter().all(|v| (v - 0.7).abs() < 1e-8));
    assert!(chi.iter().all(|v| v.abs() < 1e-8));
    let (t, th, _) = run_law("lpp:beta=1");
    for (t, th) in t.iter().zip(&th) {
        assert!((th - (1.0 + 1.0 / t.ln())).abs() < 1e-8);
    }
    let (_, th, chi) = run_law("hall");
    assert!(th.windows(2).all(|w| w[1] < w[0]) && (th[11] - 1.0).abs() < 1e-4);
    assert!(chi.windows(2).all(|w| w[1] <= w[0]));
    assert!(go(&["analyze", "--law", "hall", "--t-min", "1.0"]).is_err());
}

#[test]
fn binary_exit_codes() {
    let bin = env!("CARGO_BIN_EXE_adaptail");
    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.csv");
    std::fs::write(&bad, "1\n0\n").unwrap();
    let o = Command::new(bin).args(["estimate", "--input", s(&bad)]).output().unwrap();
    assert_eq!(o.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&o.stderr).contains("non-positive observation at line 2"));
    let o = Command::new(bin).args(["simulate", "nope"]).output().unwrap();
    assert_eq!(o.status.code(), Some(2));
    let o = Command::new(bin).args(["simulate", "table1", "--law", "nope"]).output().unwrap();
    assert_eq!(o.status.code(), Some(2));
    let o =
        Command::new(bin).args(["calibrate", "--n", "200", "--reps", "5", "--out", s(dir.path())]).output().unwrap();
    assert_eq!(o.status.code(), Some(0));
    assert!(String::from_utf8_lossy(&o.stderr).contains("warning: low-precision calibration"));
}
