use std::fs;
use std::path::Path;
use std::process::Command;

use gammareg::estimators::fit_mle;
use gammareg::{Dataset, Matrix, MleOptions};
use serde_json::Value;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_gammareg"))
}

fn write_csv(path: &Path, rows: &[[f64; 3]]) {
    let mut s = String::from("a,b,y\n");
    for r in rows {
        s.push_str(&format!("{},{},{}\n", r[0], r[1], r[2]));
    }
    fs::write(path, s).unwrap();
}

fn toy_rows() -> Vec<[f64; 3]> {
    let mut rng = gammareg::RngStream::new(3, 0);
    (0..40)
        .map(|_| {
            let a = rng.standard_normal();
            let b = rng.standard_normal();
            let y = rng.gamma(2.0, (0.3 * a - 0.2 * b + 0.5f64).exp() / 2.0).unwrap();
            [a, b, y]
        })
        .collect()
}

fn stderr_json(out: &std::process::Output) -> Value {
    let line = String::from_utf8_lossy(&out.stderr);
    serde_json::from_str(line.lines().last().unwrap()).unwrap()
}

#[test]
fn mle_run_is_a_pass_through_of_the_library() {
    let dir = tempfile::tempdir().unwrap();
    let csv = dir.path().join("d.csv");
    let rows = toy_rows();
    write_csv(&csv, &rows);
    let out_dir = dir.path().join("out");
    let st = bin()
        .args(["fit", "--response", "y", "--zeta", "0.5", "--estimators", "MLE", "--format", "json"])
        .arg("--data")
        .arg(&csv)
        .arg("--output")
        .arg(&out_dir)
        .status()
        .unwrap();
    assert!(st.success());
    let report: Value = serde_json::from_str(&fs::read_to_string(out_dir.join("fit.json")).unwrap()).unwrap();
    let got: Vec<f64> = report["estimates"][0]["estimate"]
        .as_array()
        .unwrap()
        .iter()
        .map(|v| v.as_f64().unwrap())
        .collect();

    let x = Matrix::from_rows(&rows.iter().map(|r| [1.0, r[0], r[1]]).collect::<Vec<_>>()).unwrap();
    let data = Dataset::new(x, rows.iter().map(|r| r[2]).collect(), 0.5).unwrap();
    let fit = fit_mle(&data, &MleOptions::default()).unwrap();
    assert_eq!(got, fit.beta_hat);
    assert_eq!(report["coefficients"], serde_json::json!(["intercept", "a", "b"]));

    let manifest: Value = serde_json::from_str(&fs::read_to_string(out_dir.join("manifest.json")).unwrap()).unwrap();
    assert_eq!(manifest["mle_mode"], "likelihood-consistent");
    assert_eq!(manifest["command"], "fit");
}

#[test]
fn missing_file_exits_with_two_and_json_error() {
    let dir = tempfile::tempdir().unwrap();
    let out = bin()
        .args(["fit", "--data", "/definitely/not/here.csv", "--response", "y", "--zeta", "1"])
        .arg("--output")
        .arg(dir.path())
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(2));
    assert_eq!(stderr_json(&out)["error"], "ingestion");
}

#[test]
fn zero_response_names_the_row() {
    let dir = tempfile::tempdir().unwrap();
    let csv = dir.path().join("d.csv");
    let mut rows = toy_rows();
    rows[4][2] = 0.0;
    write_csv(&csv, &rows);
    let out = bin()
        .args(["fit", "--response", "y", "--zeta", "1"])
        .arg("--data")
        .arg(&csv)
        .arg("--output")
        .arg(dir.path().join("o"))
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(2));
    assert_eq!(stderr_json(&out)["row"], 5);
}

#[test]
fn constant_covariate_is_reported_by_name() {
    let dir = tempfile::tempdir().unwrap();
    let csv = dir.path().join("d.csv");
    let mut rows = toy_rows();
    rows.iter_mut().for_each(|r| r[1] = 2.0);
    write_csv(&csv, &rows);
    let out = bin()
        .args(["diagnose", "--response", "y", "--bootstrap", "200"])
        .arg("--data")
        .arg(&csv)
        .arg("--output")
        .arg(dir.path().join("o"))
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(3));
    let msg = stderr_json(&out)["message"].as_str().unwrap().to_owned();
    assert!(msg.contains("column 1"), "{msg}");
}

#[test]
fn infeasible_restrictions_exit_with_three() {
    let dir = tempfile::tempdir().unwrap();
    let csv = dir.path().join("d.csv");
    write_csv(&csv, &toy_rows());
    let cfg = dir.path().join("c.json");
    fs::write(
        &cfg,
        r#"{"command": "fit", "response": "y", "zeta": 0.5, "estimators": ["BEGRC"],
            "restrictions": [{"coeffs": {"a": 1.0}, "bound": 1.0, "sense": "ge"},
                             {"coeffs": {"a": 1.0}, "bound": 0.0, "sense": "le"}],
            "mcmc": {"n_iter": 500, "burn_in": 100}}"#,
    )
    .unwrap();
    let out = bin()
        .arg("fit")
        .arg("--config")
        .arg(&cfg)
        .arg("--data")
        .arg(&csv)
        .arg("--output")
        .arg(dir.path().join("o"))
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(3));
    assert_eq!(stderr_json(&out)["error"], "compute");
}

#[test]
fn simulate_is_byte_identical_across_thread_counts() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("g.json");
    fs::write(
        &cfg,
        r#"{"command": "simulate",
            "grid": {"zetas": [0.5], "ns": [25], "rhos": [0.9], "beta_true": [1, 1, 1], "replications": 6},
            "mcmc": {"n_iter": 600, "burn_in": 100}, "seed": 5}"#,
    )
    .unwrap();
    let run = |threads: &str, name: &str| {
        let out = dir.path().join(name);
        let st = bin()
            .arg("simulate")
            .arg("--config")
            .arg(&cfg)
            .args(["--threads", threads])
            .arg("--output")
            .arg(&out)
            .status()
            .unwrap();
        assert!(st.success());
        out
    };
    let a = run("1", "a");
    let b = run("3", "b");
    for f in ["report.csv", "mse_table.csv", "sd_bias_table.csv"] {
        assert_eq!(fs::read(a.join(f)).unwrap(), fs::read(b.join(f)).unwrap(), "{f}");
    }
    let mse = fs::read_to_string(a.join("mse_table.csv")).unwrap();
    assert_eq!(mse.lines().count(), 2);
}
