use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn ccmlab(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_ccmlab"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn ok(args: &[&str]) -> String {
    let out = ccmlab(args);
    assert!(
        out.status.success(),
        "{args:?} failed: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    String::from_utf8(out.stdout).unwrap()
}

fn quick_config(dir: &Path) -> String {
    let p = dir.join("run.json");
    let cfg = r#"{
        "experiment": {
            "axis_values": [30.0],
            "methods": ["maxbeam_hbf", "maxbeam_dbf"],
            "n_trials": 2,
            "seed": 5
        }
    }"#;
    fs::write(&p, cfg).unwrap();
    p.to_str().unwrap().to_owned()
}

fn data_lines(path: &Path) -> Vec<String> {
    fs::read_to_string(path)
        .unwrap()
        .lines()
        .skip(1)
        .map(str::to_owned)
        .collect()
}

#[test]
fn scenario_prints_json_with_taps() {
    let text = ok(&["scenario", "--seed", "3"]);
    let v: serde_json::Value = serde_json::from_str(&text).unwrap();
    let taps = v["taps"].as_array().unwrap();
    assert!(!taps.is_empty());
    assert_eq!(v["config"]["seed"], 3);
    assert_eq!(text, ok(&["scenario", "--seed", "3"]));
}

#[test]
fn eval_aoa_writes_results_and_manifest() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = quick_config(dir.path());
    let out = dir.path().join("res");
    ok(&[
        "eval-aoa",
        "--config",
        &cfg,
        "--out",
        out.to_str().unwrap(),
        "--bins",
        "10",
    ]);

    let header = fs::read_to_string(out.join("aoa.csv")).unwrap();
    assert!(header.starts_with("method,axis,axis_value,metric,value,n,seed"));
    let rows = data_lines(&out.join("aoa.csv"));
    assert_eq!(rows.len(), 4);
    assert!(rows
        .iter()
        .any(|r| r.starts_with("maxbeam_dbf,mean_snr_db,30")));
    assert!(rows
        .iter()
        .any(|r| r.starts_with("maxbeam_hbf,mean_snr_db,30")));

    let manifest: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(out.join("aoa.manifest.json")).unwrap()).unwrap();
    assert_eq!(manifest["command"], "eval-aoa");
    assert_eq!(manifest["seed"], 5);
    assert!(out.join("aoa_hist.csv").exists());
    assert!(!data_lines(&out.join("aoa_errors.csv")).is_empty());
}

#[test]
fn plot_data_filters_rows() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = quick_config(dir.path());
    let out = dir.path().join("res");
    let out_s = out.to_str().unwrap();
    ok(&["eval-aoa", "--config", &cfg, "--out", out_s]);
    let input = out.join("aoa.csv");
    ok(&[
        "plot-data",
        input.to_str().unwrap(),
        "--metric",
        "mse",
        "--out",
        out_s,
    ]);
    let rows = data_lines(&out.join("aoa_tidy.csv"));
    assert_eq!(rows.len(), 2);
    assert!(rows.iter().all(|r| r.contains(",mse,")));
}

#[test]
fn plot_data_rejects_header_only_input() {
    let dir = tempfile::tempdir().unwrap();
    let input = dir.path().join("empty.csv");
    fs::write(&input, "method,axis,axis_value,metric,value,n,seed\n").unwrap();
    let out = ccmlab(&[
        "plot-data",
        input.to_str().unwrap(),
        "--out",
        dir.path().to_str().unwrap(),
    ]);
    assert!(!out.status.success());
    assert!(String::from_utf8_lossy(&out.stderr).contains("no rows"));
}

#[test]
fn bench_flops_reports_nominal_counts() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = quick_config(dir.path());
    let out = dir.path().join("res");
    let stdout = ok(&[
        "bench-flops",
        "--config",
        &cfg,
        "--out",
        out.to_str().unwrap(),
    ]);
    assert!(stdout.contains("untrained architecture"));
    let rows = data_lines(&out.join("flops.csv"));
    // 10 realizations through the 8-16-16-1 network, 400 weights each
    assert!(rows
        .iter()
        .any(|r| r.starts_with("dnn,mean_snr_db,30.0,flops_per_estimate,4000.0,0,")));
    assert!(rows.iter().any(|r| r.starts_with("maxbeam_dbf,")));
}

#[test]
fn dnn_without_models_is_an_error() {
    let dir = tempfile::tempdir().unwrap();
    let out = ccmlab(&[
        "eval-aoa",
        "--trials",
        "1",
        "--out",
        dir.path().to_str().unwrap(),
    ]);
    assert!(!out.status.success());
    assert!(String::from_utf8_lossy(&out.stderr).contains("--models"));
}

#[test]
fn unknown_config_fields_are_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let p = dir.path().join("bad.json");
    fs::write(&p, r#"{"experiment": {"n_trails": 3}}"#).unwrap();
    let out = ccmlab(&["scenario", "--config", p.to_str().unwrap()]);
    assert!(!out.status.success());
}
