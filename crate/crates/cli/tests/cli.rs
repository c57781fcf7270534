//! End-to-end tests of the command-line surface: file formats, JSON
//! outputs, exit codes, and the machine-readable error channel.

use std::path::Path;
use std::process::{Command, Output};

fn edfrand(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_edfrand"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn write_ex1(dir: &Path) -> String {
    let path = dir.join("ex1.json");
    let json = r#"{"tasks": [
        {"wcet": 4, "period": 10},
        {"wcet": 1, "period": 20},
        {"wcet": 1, "period": 5},
        {"wcet": 2, "period": 12}
    ]}"#;
    std::fs::write(&path, json).unwrap();
    path.to_string_lossy().into_owned()
}

#[test]
fn analyze_emits_budget_table_as_json() {
    let dir = tempfile::tempdir().unwrap();
    let taskset = write_ex1(dir.path());
    let out = edfrand(&["analyze", "--taskset", &taskset, "--format", "json"]);
    assert!(out.status.success());
    let v: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    let wcib: Vec<i64> =
        v["tasks"].as_array().unwrap().iter().map(|t| t["wcib"].as_i64().unwrap()).collect();
    assert_eq!(wcib, vec![1, -2, -2, -1]);
    assert_eq!(v["busy_period_bound"].as_u64(), Some(9));
}

#[test]
fn simulate_writes_the_trace_csv() {
    let dir = tempfile::tempdir().unwrap();
    let taskset = write_ex1(dir.path());
    let trace_path = dir.path().join("trace.csv");
    let out = edfrand(&[
        "simulate",
        "--taskset",
        &taskset,
        "--scheme",
        "utr",
        "--seed",
        "3",
        "--hyperperiods",
        "4",
        "--out",
        trace_path.to_str().unwrap(),
    ]);
    assert!(out.status.success());
    let text = std::fs::read_to_string(&trace_path).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("hyperperiod,slot,task_id"));
    // 4 hyperperiods of LCM(10,20,5,12) = 60 slots.
    assert_eq!(lines.count(), 240);
}

#[test]
fn simulate_json_bundle_carries_config_and_decisions() {
    let dir = tempfile::tempdir().unwrap();
    let taskset = write_ex1(dir.path());
    let out = edfrand(&[
        "simulate", "--taskset", &taskset, "--scheme", "base", "--hyperperiods", "2",
        "--format", "json",
    ]);
    assert!(out.status.success());
    let v: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(v["config"]["scheme"].as_str(), Some("base"));
    assert!(v["decisions"].as_array().unwrap().len() > 4);
    assert_eq!(v["trace"].as_array().unwrap().len(), 2);
    assert_eq!(v["analysis"]["wcib"].as_array().unwrap().len(), 4);
}

#[test]
fn entropy_reads_a_trace_file() {
    let dir = tempfile::tempdir().unwrap();
    let taskset = write_ex1(dir.path());
    let trace_path = dir.path().join("trace.csv");
    let sim = edfrand(&[
        "simulate", "--taskset", &taskset, "--scheme", "utr", "--hyperperiods", "30",
        "--out", trace_path.to_str().unwrap(),
    ]);
    assert!(sim.status.success());
    let out = edfrand(&["entropy", "--trace", trace_path.to_str().unwrap()]);
    assert!(out.status.success());
    let v: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert!(v["approx_entropy"].as_f64().unwrap() > 0.0);
    assert!(v["slot_shannon"].as_f64().unwrap() > 0.0);
    assert!(v["true_entropy"].is_null());
    assert_eq!(v["params"]["m"].as_u64(), Some(21));
    assert_eq!(v["params"]["pi"].as_u64(), Some(6));
}

#[test]
fn identical_invocations_reproduce_identical_output() {
    let dir = tempfile::tempdir().unwrap();
    let taskset = write_ex1(dir.path());
    let args = ["simulate", "--taskset", taskset.as_str(), "--scheme", "fg", "--seed", "11",
        "--hyperperiods", "8"];
    let a = edfrand(&args);
    let b = edfrand(&args);
    assert!(a.status.success());
    assert_eq!(a.stdout, b.stdout);
}

#[test]
fn missing_file_yields_error_json_and_nonzero_exit() {
    let out = edfrand(&["analyze", "--taskset", "/nonexistent/ts.json"]);
    assert!(!out.status.success());
    let v: serde_json::Value = serde_json::from_slice(&out.stderr).unwrap();
    assert_eq!(v["error"]["kind"].as_str(), Some("io"));
    assert!(v["error"]["message"].as_str().unwrap().contains("ts.json"));
}

#[test]
fn invalid_taskset_is_rejected_with_all_violations() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("bad.json");
    std::fs::write(&path, r#"{"tasks": [{"wcet": 9, "period": 5}]}"#).unwrap();
    let out = edfrand(&["analyze", "--taskset", path.to_str().unwrap()]);
    assert!(!out.status.success());
    let v: serde_json::Value = serde_json::from_slice(&out.stderr).unwrap();
    assert_eq!(v["error"]["kind"].as_str(), Some("validation"));
}

#[test]
fn gen_grid_produces_loadable_tasksets() {
    let dir = tempfile::tempdir().unwrap();
    let out_dir = dir.path().join("sets");
    let out = edfrand(&[
        "gen", "--grid", "--count", "2", "--seed", "5",
        "--out", out_dir.to_str().unwrap(),
    ]);
    assert!(out.status.success());
    let manifest: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    let files = manifest["tasksets"].as_array().unwrap();
    assert_eq!(files.len(), 18);
    for entry in files {
        let path = out_dir.join(entry["file"].as_str().unwrap());
        let analyzed = edfrand(&["analyze", "--taskset", path.to_str().unwrap()]);
        assert!(analyzed.status.success());
        assert!(entry["utilization"].as_f64().unwrap() <= 1.0);
    }
}

#[test]
fn range_reports_ratios_within_unit_interval() {
    let dir = tempfile::tempdir().unwrap();
    let taskset = write_ex1(dir.path());
    let out = edfrand(&[
        "range", "--taskset", &taskset, "--scheme", "utr", "--hyperperiods", "20",
    ]);
    assert!(out.status.success());
    let v: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    for task in v["tasks"].as_array().unwrap() {
        let ratio = task["ratio"].as_f64().unwrap();
        assert!((0.0..=1.0).contains(&ratio));
    }
    assert!(v["geometric_mean_ratio"].as_f64().is_some());
}

#[test]
fn spectrum_writes_per_task_csv_and_peak_report() {
    let dir = tempfile::tempdir().unwrap();
    let taskset = write_ex1(dir.path());
    let spectra = dir.path().join("spectra");
    let out = edfrand(&[
        "spectrum", "--taskset", &taskset, "--scheme", "edf", "--exec", "wcet",
        "--hyperperiods", "10", "--peaks", "5", "--out", spectra.to_str().unwrap(),
    ]);
    assert!(out.status.success());
    let v: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(v["tasks"].as_array().unwrap().len(), 4);
    for task in v["tasks"].as_array().unwrap() {
        assert!(task["peaks"].as_array().unwrap().len() <= 5);
    }
    for id in 1..=4 {
        let csv = std::fs::read_to_string(spectra.join(format!("spectrum_task{id}.csv"))).unwrap();
        assert!(csv.starts_with("frequency,magnitude\n"));
    }
}

#[test]
fn experiment_writes_manifest_and_rows() {
    let dir = tempfile::tempdir().unwrap();
    let out_dir = dir.path().join("exp");
    let out = edfrand(&[
        "experiment", "--id", "entropy-vs-util", "--schemes", "edf,utr",
        "--tasksets-per-bucket", "2", "--hyperperiods", "10", "--seed", "7",
        "--out", out_dir.to_str().unwrap(),
    ]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let manifest = std::fs::read_to_string(out_dir.join("manifest.json")).unwrap();
    assert!(manifest.contains("\"seed\": 7"));
    let csv = std::fs::read_to_string(out_dir.join("entropy.csv")).unwrap();
    assert!(csv.starts_with("bucket,util_lo,util_hi,scheme,mean_entropy,stddev,n,normalized\n"));
    assert_eq!(csv.lines().count(), 1 + 9 * 2);
}
