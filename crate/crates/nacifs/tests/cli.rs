//! End-to-end runs of the compiled binary: artifact layout, manifest
//! digests, exit codes, and independence of results from the thread count.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_nacifs"))
}

fn write_pair_config(dir: &Path) -> PathBuf {
    let path = dir.join("pair.json");
    fs::write(
        &path,
        r#"{
            "domain": { "eta": 0.1 },
            "mode": "periodic",
            "period": [[
                { "kind": "similarity", "a": [0.3, 0.0], "b": [-0.5, 0.0], "c": [0.0, 0.0] },
                { "kind": "similarity", "a": [0.3, 0.0], "b": [0.5, 0.0], "c": [0.0, 0.0] }
            ]],
            "horizon": 16
        }"#,
    )
    .unwrap();
    path
}

fn stderr_json(out: &Output) -> serde_json::Value {
    let text = String::from_utf8_lossy(&out.stderr);
    serde_json::from_str(text.trim()).unwrap_or_else(|e| panic!("bad error JSON ({e}): {text}"))
}

#[test]
fn validate_prints_generations_and_writes_manifest() {
    let dir = tempfile::tempdir().unwrap();
    let config = write_pair_config(dir.path());
    let out = bin()
        .args(["validate"])
        .arg(&config)
        .args(["--upto", "5", "--out-dir"])
        .arg(dir.path())
        .output()
        .unwrap();
    assert!(out.status.success(), "{out:?}");
    let stdout = String::from_utf8(out.stdout).unwrap();
    assert_eq!(stdout.matches(": degree 2, ok").count(), 5);
    assert!(stdout.contains("all 5 generations valid"));
    let manifest: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(dir.path().join("manifest.json")).unwrap())
            .unwrap();
    assert_eq!(manifest["command"], "validate");
    assert_eq!(manifest["outputs"][0]["path"], "validation.json");
    let digest = manifest["outputs"][0]["sha256"].as_str().unwrap();
    assert_eq!(digest.len(), 64);
}

#[test]
fn overlapping_maps_fail_validation_with_exit_3() {
    let dir = tempfile::tempdir().unwrap();
    let config = dir.path().join("overlap.json");
    fs::write(
        &config,
        r#"{
            "domain": { "eta": 0.1 },
            "mode": "periodic",
            "period": [[
                { "kind": "similarity", "a": [0.4, 0.0], "b": [-0.3, 0.0], "c": [0.0, 0.0] },
                { "kind": "similarity", "a": [0.4, 0.0], "b": [0.3, 0.0], "c": [0.0, 0.0] }
            ]],
            "horizon": 4
        }"#,
    )
    .unwrap();
    let out = bin()
        .arg("validate")
        .arg(&config)
        .arg("--out-dir")
        .arg(dir.path())
        .output()
        .unwrap();
    // Invalid geometry is refused at load time: no artifacts, JSON error only.
    assert_eq!(out.status.code(), Some(3));
    let err = stderr_json(&out);
    assert_eq!(err["error"]["kind"], "validation_failed");
    assert_eq!(err["error"]["exit"], 3);
    assert!(err["error"]["message"]
        .as_str()
        .unwrap()
        .contains("overlap"));
}

#[test]
fn unknown_flags_and_bad_files_exit_2() {
    let out = bin().args(["validate", "x.json", "--bogus"]).output().unwrap();
    assert_eq!(out.status.code(), Some(2));
    let out = bin().args(["validate", "/no/such/file.json"]).output().unwrap();
    assert_eq!(out.status.code(), Some(2));
    assert_eq!(stderr_json(&out)["error"]["kind"], "config");
    let out = bin().arg("--help").output().unwrap();
    assert_eq!(out.status.code(), Some(0));
    assert!(String::from_utf8_lossy(&out.stdout).contains("Usage"));
}

#[test]
fn measure_csv_is_identical_across_thread_counts() {
    let dir = tempfile::tempdir().unwrap();
    let config = write_pair_config(dir.path());
    let mut csvs = Vec::new();
    for threads in ["1", "4"] {
        let out_dir = dir.path().join(format!("t{threads}"));
        let out = bin()
            .arg("measure")
            .arg(&config)
            .args([
                "--depth", "6", "--assign", "2", "--walkers", "20000", "--seed", "11",
                "--threads", threads, "--out-dir",
            ])
            .arg(&out_dir)
            .output()
            .unwrap();
        assert!(out.status.success(), "{out:?}");
        csvs.push(fs::read(out_dir.join("measure.csv")).unwrap());
    }
    assert_eq!(csvs[0], csvs[1], "walker tallies must not depend on threads");
    let text = String::from_utf8(csvs[0].clone()).unwrap();
    assert_eq!(text.lines().next().unwrap(), "offset,word,count,value,stderr");
    // Two branches at depth two: header plus four cylinder rows.
    assert_eq!(text.lines().count(), 5);
    let total: f64 = text
        .lines()
        .skip(1)
        .map(|l| l.split(',').nth(3).unwrap().parse::<f64>().unwrap())
        .sum();
    assert!((total - 1.0).abs() < 1e-12, "values sum to {total}");
}

#[test]
fn dims_report_on_an_exact_measure_needs_no_walkers() {
    let dir = tempfile::tempdir().unwrap();
    let config = write_pair_config(dir.path());
    let out = bin()
        .arg("dims")
        .arg(&config)
        .args([
            "--measure", "uniform", "--nmax", "10", "--window", "3", "--out-dir",
        ])
        .arg(dir.path())
        .output()
        .unwrap();
    assert!(out.status.success(), "{out:?}");
    let csv = fs::read_to_string(dir.path().join("dims.csv")).unwrap();
    assert_eq!(
        csv.lines().next().unwrap(),
        "n,entropy,lyapunov,ratio,entropy_stderr,lyapunov_stderr,ratio_stderr"
    );
    assert_eq!(csv.lines().count(), 11);
    let report: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(dir.path().join("dims.json")).unwrap()).unwrap();
    let expected = (2.0f64).ln() / (1.0f64 / 0.3).ln();
    assert!((report["hd_estimate"].as_f64().unwrap() - expected).abs() < 1e-12);
}

#[test]
fn perturb_scale_mode_reproduces_the_exact_diameter_column() {
    let dir = tempfile::tempdir().unwrap();
    let config = write_pair_config(dir.path());
    let out = bin()
        .arg("perturb")
        .arg(&config)
        .args([
            "--mode",
            "scale-a",
            "--epsilons",
            "0.1,0.02",
            "--assign",
            "2",
            "--diam-depth",
            "2",
            "--window",
            "1",
            "--walkers",
            "400",
            "--out-dir",
        ])
        .arg(dir.path())
        .output()
        .unwrap();
    assert!(out.status.success(), "{out:?}");
    let csv = fs::read_to_string(dir.path().join("continuity.csv")).unwrap();
    let rows: Vec<Vec<f64>> = csv
        .lines()
        .skip(1)
        .map(|l| l.split(',').map(|v| v.parse().unwrap()).collect())
        .collect();
    assert_eq!(rows.len(), 3); // zero-step anchor plus two steps
    assert_eq!(rows[0][0], 0.0);
    assert_eq!(rows[0][2], 0.0);
    for (row, eps) in rows[1..].iter().zip([0.1, 0.02]) {
        assert_eq!(row[0], eps);
        let expected = (1.0f64 + eps).ln();
        assert!(
            (row[2] - expected).abs() < 1e-12,
            "scale step {eps}: diameter distance {} != {expected}",
            row[2]
        );
    }
}

#[test]
fn asi_table_on_exact_diameters_marks_pure_similarities_flat() {
    let dir = tempfile::tempdir().unwrap();
    let config = write_pair_config(dir.path());
    let out = bin()
        .arg("asi")
        .arg(&config)
        .args([
            "--functional", "diam", "--kmax", "2", "--budget", "300", "--out-dir",
        ])
        .arg(dir.path())
        .output()
        .unwrap();
    assert!(out.status.success(), "{out:?}");
    let csv = fs::read_to_string(dir.path().join("asi.csv")).unwrap();
    assert_eq!(csv.lines().next().unwrap(), "k,beta_hat,samples");
    assert_eq!(csv.lines().count(), 4);
    for line in csv.lines().skip(1) {
        let beta: f64 = line.split(',').nth(1).unwrap().parse().unwrap();
        // Similarity diameters factor exactly, so no prefix influence.
        assert!(beta.abs() < 1e-14, "beta {beta} should vanish");
    }
}

#[test]
fn report_round_trips_the_manifest_to_stdout() {
    let dir = tempfile::tempdir().unwrap();
    let config = write_pair_config(dir.path());
    let out = bin()
        .arg("validate")
        .arg(&config)
        .args(["--upto", "2", "--out-dir"])
        .arg(dir.path())
        .output()
        .unwrap();
    assert!(out.status.success());
    let out = bin()
        .arg("report")
        .arg(dir.path().join("manifest.json"))
        .output()
        .unwrap();
    assert!(out.status.success(), "{out:?}");
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.contains("command:   validate"));
    assert!(text.contains("validation.json"));
    assert!(text.contains("sha256="));
}
