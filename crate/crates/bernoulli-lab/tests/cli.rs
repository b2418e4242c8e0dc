//! Binary-level tests: file layouts, exit codes, and reproducibility.

use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_bernoulli-lab"))
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("binary runs")
}

fn stdout(out: &Output) -> String {
    String::from_utf8_lossy(&out.stdout).to_string()
}

#[test]
fn annulus_prints_critical_radius() {
    let out = run(&["annulus", "--d", "2", "--lambda", "1"]);
    assert!(out.status.success());
    assert!(stdout(&out).contains("1.763222834"));
}

#[test]
fn annulus_profile_export() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("profile.csv");
    let out = run(&[
        "annulus",
        "--d",
        "2",
        "--profile-out",
        path.to_str().unwrap(),
        "--cells",
        "256",
    ]);
    assert!(out.status.success());
    let text = fs::read_to_string(&path).unwrap();
    assert!(text.starts_with("r,value\n"));
    assert_eq!(text.lines().count(), 1 + 257);
    // endpoint rows carry the boundary data
    let first = text.lines().nth(1).unwrap();
    assert!(first.split(',').nth(1).unwrap().starts_with("1.0000"));
}

#[test]
fn oracle1d_reports_both_tie_minimizers() {
    let out = run(&[
        "oracle1d", "--L", "1", "--a", "0.25", "--b", "0.25", "--lambda", "1",
    ]);
    assert!(out.status.success());
    let parsed: serde_json::Value = serde_json::from_str(&stdout(&out)).unwrap();
    let arr = parsed.as_array().unwrap();
    assert_eq!(arr.len(), 2);
    for m in arr {
        let e = m["energy"].as_f64().unwrap();
        assert!((e - 1.0).abs() <= 1e-12);
    }
}

#[test]
fn bad_domain_is_exit_code_2() {
    let out = run(&[
        "solve",
        "--domain",
        r#"{"kind":"interval","params":{"a":1.0,"b":1.0},"dimension":1}"#,
        "--datum",
        r#"{"rule":{"kind":"constant","params":{"value":0.2}}}"#,
        "--h",
        "0.1",
        "--out",
        "/tmp/bernoulli-lab-test-bad",
    ]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn unknown_check_kind_is_exit_code_2() {
    let out = run(&[
        "check",
        "--kind",
        "nonsense",
        "--domain",
        r#"{"kind":"interval","params":{"a":0.0,"b":1.0},"dimension":1}"#,
        "--h",
        "0.1",
        "--out",
        "/tmp/bernoulli-lab-test-badkind",
    ]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn solve_writes_field_report_manifest() {
    let dir = tempfile::tempdir().unwrap();
    let out = run(&[
        "solve",
        "--domain",
        r#"{"kind":"interval","params":{"a":0.0,"b":1.0},"dimension":1}"#,
        "--datum",
        r#"{"rule":{"kind":"constant","params":{"value":0.1}}}"#,
        "--h",
        "0.01",
        "--lambda",
        "1",
        "--mode",
        "single",
        "--out",
        dir.path().to_str().unwrap(),
    ]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    for name in ["field.csv", "report.json", "config.json", "manifest.json"] {
        assert!(dir.path().join(name).exists(), "{name} missing");
    }
    let report: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(dir.path().join("report.json")).unwrap())
            .unwrap();
    for key in [
        "energy",
        "sweeps",
        "residual",
        "positivity_measure",
        "converged",
        "mode",
    ] {
        assert!(report.get(key).is_some(), "report key {key} missing");
    }
    assert_eq!(report["converged"], serde_json::Value::Bool(true));
    let field = fs::read_to_string(dir.path().join("field.csv")).unwrap();
    assert!(field.starts_with("ix,iy,x,y,value\n"));
}

#[test]
fn extremes_mode_writes_both_fields() {
    let dir = tempfile::tempdir().unwrap();
    let out = run(&[
        "solve",
        "--domain",
        r#"{"kind":"interval","params":{"a":0.0,"b":1.0},"dimension":1}"#,
        "--datum",
        r#"{"rule":{"kind":"constant","params":{"value":0.25}}}"#,
        "--h",
        "0.01",
        "--mode",
        "extremes",
        "--out",
        dir.path().to_str().unwrap(),
    ]);
    assert!(out.status.success());
    assert!(dir.path().join("field_lower.csv").exists());
    assert!(dir.path().join("field_upper.csv").exists());
    let report: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(dir.path().join("report.json")).unwrap())
            .unwrap();
    // at the symmetric tie the extremes separate by about the datum level
    let gap = report["gap"].as_f64().unwrap();
    assert!(gap > 0.2, "gap {gap}");
}

fn manifest_hashes(dir: &Path) -> Vec<(String, String)> {
    let m: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(dir.join("manifest.json")).unwrap()).unwrap();
    m["outputs"]
        .as_array()
        .unwrap()
        .iter()
        .map(|e| {
            (
                e["path"].as_str().unwrap().to_string(),
                e["sha256"].as_str().unwrap().to_string(),
            )
        })
        .collect()
}

#[test]
fn identical_configs_reproduce_identical_hashes() {
    let args = |out: &str| {
        vec![
            "sweep1d".to_string(),
            "--L".into(),
            "1".into(),
            "--tmin".into(),
            "0.1".into(),
            "--tmax".into(),
            "0.4".into(),
            "--tstep".into(),
            "0.01".into(),
            "--out".into(),
            out.to_string(),
        ]
    };
    let d1 = tempfile::tempdir().unwrap();
    let d2 = tempfile::tempdir().unwrap();
    let o1 = bin().args(args(d1.path().to_str().unwrap())).output().unwrap();
    let o2 = bin().args(args(d2.path().to_str().unwrap())).output().unwrap();
    assert!(o1.status.success() && o2.status.success());
    assert_eq!(manifest_hashes(d1.path()), manifest_hashes(d2.path()));
    // the sweep CSV has the documented header and the tie row
    let csv = fs::read_to_string(d1.path().join("sweep1d.csv")).unwrap();
    assert!(csv.starts_with("t,count,gap_mid,energy\n"));
    let tie_rows: Vec<&str> = csv.lines().filter(|l| l.split(',').nth(1) == Some("2")).collect();
    assert_eq!(tie_rows.len(), 1, "exactly one multi-minimizer row");
}

#[test]
fn sweep_subcommand_writes_rows_and_jumps() {
    let dir = tempfile::tempdir().unwrap();
    let out = run(&[
        "sweep",
        "--domain",
        r#"{"kind":"interval","params":{"a":0.0,"b":1.0},"dimension":1}"#,
        "--family",
        r#"{"base":{"rule":{"kind":"constant","params":{"value":0.0}}},"kind":"additive-shift","bound":1.0}"#,
        "--tmin",
        "0.2",
        "--tmax",
        "0.3",
        "--tstep",
        "0.05",
        "--h",
        "0.02",
        "--out",
        dir.path().to_str().unwrap(),
    ]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let csv = fs::read_to_string(dir.path().join("sweep.csv")).unwrap();
    assert!(csv.starts_with("t,gap,energy_lower,energy_upper,converged_lower,converged_upper\n"));
    assert_eq!(csv.lines().count(), 1 + 3);
    let jumps: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(dir.path().join("jumps.json")).unwrap()).unwrap();
    assert!(jumps["lower_order_min"].as_f64().unwrap() >= -1e-8);
}

#[test]
fn results_do_not_depend_on_worker_count() {
    let sweep_args = |out: &str| {
        vec![
            "sweep".to_string(),
            "--domain".into(),
            r#"{"kind":"interval","params":{"a":0.0,"b":1.0},"dimension":1}"#.into(),
            "--family".into(),
            r#"{"base":{"rule":{"kind":"constant","params":{"value":0.0}}},"kind":"additive-shift","bound":1.0}"#.into(),
            "--tmin".into(),
            "0.15".into(),
            "--tmax".into(),
            "0.35".into(),
            "--tstep".into(),
            "0.05".into(),
            "--h".into(),
            "0.02".into(),
            "--out".into(),
            out.to_string(),
        ]
    };
    let d1 = tempfile::tempdir().unwrap();
    let d2 = tempfile::tempdir().unwrap();
    let o1 = bin()
        .env("BERNOULLI_LAB_THREADS", "1")
        .args(sweep_args(d1.path().to_str().unwrap()))
        .output()
        .unwrap();
    let o2 = bin()
        .env("BERNOULLI_LAB_THREADS", "2")
        .args(sweep_args(d2.path().to_str().unwrap()))
        .output()
        .unwrap();
    assert!(o1.status.success() && o2.status.success());
    assert_eq!(
        fs::read_to_string(d1.path().join("sweep.csv")).unwrap(),
        fs::read_to_string(d2.path().join("sweep.csv")).unwrap()
    );
}

#[test]
fn check_barrier_reports_largest_rho() {
    let dir = tempfile::tempdir().unwrap();
    let out = run(&[
        "check",
        "--kind",
        "barrier",
        "--domain",
        r#"{"kind":"interval","params":{"a":0.0,"b":1.0},"dimension":1}"#,
        "--datum",
        r#"{"rule":{"kind":"linear","params":{"coeffs":[-20.0,0.0],"offset":2.0,"clamp":true}}}"#,
        "--h",
        "0.01",
        "--level",
        "2.0",
        "--out",
        dir.path().to_str().unwrap(),
    ]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let report: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(dir.path().join("report.json")).unwrap())
            .unwrap();
    assert!(report["largest_passing_rho"].as_f64().unwrap() > 0.0);
}

#[test]
fn check_holder_on_the_disk() {
    let dir = tempfile::tempdir().unwrap();
    let out = run(&[
        "check",
        "--kind",
        "holder",
        "--domain",
        r#"{"kind":"disk","params":{"center":[0.0,0.0],"radius":1.0},"dimension":2}"#,
        "--datum",
        r#"{"rule":{"kind":"power","params":{"center":[1.0,0.0],"exponent":0.75}}}"#,
        "--h",
        "0.0625",
        "--gamma",
        "0.75",
        "--out",
        dir.path().to_str().unwrap(),
    ]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let report: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(dir.path().join("report.json")).unwrap())
            .unwrap();
    let q = report["quotient"].as_f64().unwrap();
    assert!(q > 0.5 && q < 10.0, "quotient {q}");
}
