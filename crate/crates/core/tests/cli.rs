//! End-to-end runs of the command-line binary.

mod common;

use std::path::Path;
use std::process::{Command, Output};

use common::data_path;
use ruleforge::cli::{load_dataset, load_model, predictions_csv};
use ruleforge::prediction::predict;

fn ruleforge(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_ruleforge")).args(args).output().unwrap()
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

fn write_iris_like(dir: &Path) -> std::path::PathBuf {
    let mut text = String::from("width,shade,kind\n");
    for i in 0..60 {
        let w = f64::from(i % 20) / 2.0;
        let shade = ["dark", "pale", "mid"][i as usize % 3];
        let kind = if w > 5.0 { "big" } else if shade == "dark" { "dim" } else { "small" };
        text.push_str(&format!("{w},{shade},{kind}\n"));
    }
    let path = dir.join("toy.csv");
    std::fs::write(&path, text).unwrap();
    path
}

#[test]
fn train_then_predict_matches_in_memory_predictions() {
    let dir = tempfile::tempdir().unwrap();
    let data = write_iris_like(dir.path());
    let model = dir.path().join("model.json");
    let rules = dir.path().join("rules.txt");
    let out = ruleforge(&[
        "train", "--data", s(&data), "--label", "kind", "--minsupp-new", "2", "--model-out", s(&model), "--report", s(&rules),
    ]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    assert!(std::fs::read_to_string(&rules).unwrap().contains("THEN kind = big"));

    let preds = dir.path().join("preds.csv");
    let out = ruleforge(&["predict", "--model-in", s(&model), "--data", s(&data), "--output", s(&preds)]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));

    let rs = load_model(&model).unwrap();
    let ds = load_dataset(&data, None, "kind", None).unwrap();
    let expected = predictions_csv(&rs, &predict(&rs, &ds).unwrap()).unwrap();
    assert_eq!(std::fs::read_to_string(&preds).unwrap(), expected);
}

#[test]
fn evaluate_writes_a_json_report() {
    let dir = tempfile::tempdir().unwrap();
    let data = write_iris_like(dir.path());
    let model = dir.path().join("model.json");
    assert!(ruleforge(&["train", "--data", s(&data), "--label", "kind", "--model-out", s(&model)]).status.success());
    let out = ruleforge(&["evaluate", "--model-in", s(&model), "--data", s(&data)]);
    assert!(out.status.success());
    let report: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    let bacc = report["balanced_accuracy"].as_f64().unwrap();
    assert!((0.0..=1.0).contains(&bacc));
}

#[test]
fn cross_validation_output_is_reproducible() {
    let gbsg = data_path("gbsg2.arff");
    let run = |jobs: &str| {
        let out = ruleforge(&[
            "--jobs", jobs, "cv", "--data", s(&gbsg), "--label", "cens", "--survival-time", "time", "--folds", "3", "--seed", "7",
        ]);
        assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
        out.stdout
    };
    let first = run("1");
    assert_eq!(first, run("1"));
    assert_eq!(first, run("4"));
    let report: serde_json::Value = serde_json::from_slice(&first).unwrap();
    let ibs = report["aggregate"]["ibs"].as_f64().unwrap();
    assert!((0.0..=1.0).contains(&ibs));
}

#[test]
fn contradictory_flags_exit_with_usage_code() {
    let gbsg = data_path("gbsg2.arff");
    let out = ruleforge(&["cv", "--data", s(&gbsg), "--label", "cens", "--task", "survival"]);
    assert_eq!(out.status.code(), Some(2));
    let out = ruleforge(&["train", "--data", s(&gbsg)]);
    assert_eq!(out.status.code(), Some(2));
    let out = ruleforge(&["--jobs", "0", "cv", "--data", s(&gbsg), "--label", "cens"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn missing_input_is_a_runtime_failure() {
    let out = ruleforge(&["train", "--data", "/nonexistent/x.csv", "--label", "y", "--model-out", "/tmp/never.json"]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("x.csv"));
}

#[test]
fn experiment_writes_reports_and_summary() {
    let dir = tempfile::tempdir().unwrap();
    let data = write_iris_like(dir.path());
    let config = dir.path().join("exp.toml");
    std::fs::write(
        &config,
        format!(
            "version = 1\nreport_directory = \"out\"\n\n[evaluation]\nmode = \"cv\"\nfolds = 10\nseed = 42\n\n\
             [[datasets]]\nname = \"toy\"\npath = \"{}\"\nlabel = \"kind\"\n\n\
             [[parameter_sets]]\nname = \"c2\"\nparams = {{ minsupp_new = 2 }}\n",
            s(&data)
        ),
    )
    .unwrap();
    let out = ruleforge(&["run", "--config", s(&config)]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let mut files: Vec<String> = std::fs::read_dir(dir.path().join("out"))
        .unwrap()
        .map(|e| e.unwrap().file_name().into_string().unwrap())
        .collect();
    files.sort();
    assert_eq!(files, ["summary.json", "toy__c2.metrics.txt", "toy__c2.rules.txt"]);
    let summary: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(dir.path().join("out/summary.json")).unwrap()).unwrap();
    assert_eq!(summary["entries"][0]["status"], "ok");
    assert_eq!(summary["entries"][0]["metric"], "BAcc");
}

#[test]
fn failed_entries_are_recorded_and_reported() {
    let dir = tempfile::tempdir().unwrap();
    let data = write_iris_like(dir.path());
    let config = dir.path().join("exp.toml");
    std::fs::write(
        &config,
        format!(
            "version = 1\nreport_directory = \"out\"\n\n[evaluation]\nmode = \"cv\"\nfolds = 3\n\n\
             [[datasets]]\nname = \"toy\"\npath = \"{}\"\nlabel = \"kind\"\n\n\
             [[datasets]]\nname = \"gone\"\npath = \"missing.csv\"\nlabel = \"kind\"\n\n\
             [[parameter_sets]]\nname = \"default\"\n",
            s(&data)
        ),
    )
    .unwrap();
    let out = ruleforge(&["run", "--config", s(&config)]);
    assert_eq!(out.status.code(), Some(1));
    let summary: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(dir.path().join("out/summary.json")).unwrap()).unwrap();
    assert_eq!(summary["entries"][0]["status"], "ok");
    assert_eq!(summary["entries"][1]["status"], "failed");
    assert!(summary["entries"][1]["error"].as_str().unwrap().contains("missing.csv"));
}

#[test]
fn invalid_config_is_a_usage_error() {
    let dir = tempfile::tempdir().unwrap();
    let config = dir.path().join("bad.toml");
    std::fs::write(&config, "version = 1\nreport_directory = \"out\"\ndatasets = []\nparameter_sets = []\n[evaluation]\nmode = \"cv\"\n").unwrap();
    let out = ruleforge(&["run", "--config", s(&config)]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("datasets"));
}
