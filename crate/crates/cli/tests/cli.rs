use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;
use tempfile::TempDir;
use treeprune::dataio::write_csv;
use treeprune::synth::friedman_like;

fn bin(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_treeprune"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn ok(args: &[&str]) -> String {
    let out = bin(args);
    assert!(
        out.status.success(),
        "{args:?} failed: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    String::from_utf8(out.stdout).unwrap()
}

fn p(path: &Path) -> &str {
    path.to_str().unwrap()
}

/// Trains a small ensemble and returns the temp dir holding `fit/`.
fn trained() -> TempDir {
    let dir = tempfile::tempdir().unwrap();
    let ds = friedman_like(300, 5, 0.5, 7).unwrap();
    let data = dir.path().join("data.csv");
    write_csv(&ds, "y", &data).unwrap();
    let fit = dir.path().join("fit");
    ok(&["train", "--data", p(&data), "--trees", "8", "--depth", "2", "--seed", "7", "--out", p(&fit)]);
    dir
}

fn fit_args(dir: &Path, out: &str) -> Vec<String> {
    let fit = dir.join("fit");
    vec![
        "--ensemble".into(),
        p(&fit.join("ensemble.json")).into(),
        "--data".into(),
        p(&fit.join("train.csv")).into(),
        "--valid".into(),
        p(&fit.join("valid.csv")).into(),
        "--test".into(),
        p(&fit.join("test.csv")).into(),
        "--out".into(),
        p(&dir.join(out)).into(),
    ]
}

fn run_with(cmd: &[&str], dir: &Path, out: &str) -> String {
    let mut args: Vec<String> = cmd.iter().map(|s| s.to_string()).collect();
    args.extend(fit_args(dir, out));
    let refs: Vec<&str> = args.iter().map(String::as_str).collect();
    ok(&refs)
}

fn read_json(path: &Path) -> Value {
    serde_json::from_str(&std::fs::read_to_string(path).unwrap()).unwrap()
}

#[test]
fn train_writes_splits_and_ensemble() {
    let dir = trained();
    let fit = dir.path().join("fit");
    for f in ["ensemble.json", "train.csv", "valid.csv", "test.csv", "metrics.json"] {
        assert!(fit.join(f).exists(), "missing {f}");
    }
    let m = read_json(&fit.join("metrics.json"));
    assert!(m["r2"]["valid"].as_f64().unwrap() > 0.0, "{m}");
}

#[test]
fn zero_budget_gives_empty_model_at_null_objective() {
    let dir = trained();
    run_with(&["prune", "--mode", "exact", "--K", "0"], dir.path(), "k0");
    let model = read_json(&dir.path().join("k0/model.json"));
    assert_eq!(model["rules"].as_array().unwrap().len(), 0);

    let ds = treeprune::dataio::load_csv(dir.path().join("fit/train.csv"), "y")
        .unwrap()
        .dataset;
    let ens = treeprune::dataio::load_ensemble(dir.path().join("fit/ensemble.json")).unwrap();
    let null: f64 = ds.response().iter().map(|y| 0.5 * (y - ens.base_score).powi(2)).sum();
    let metrics = read_json(&dir.path().join("k0/metrics.json"));
    let obj = metrics["objective"].as_f64().unwrap();
    assert!((obj - null).abs() <= 1e-9 * null.max(1.0), "{obj} vs {null}");
}

#[test]
fn path_has_one_row_per_lambda() {
    let dir = trained();
    run_with(&["path"], dir.path(), "path");
    let text = std::fs::read_to_string(dir.path().join("path/path.csv")).unwrap();
    assert_eq!(text.lines().count(), 1 + 50);
}

#[test]
fn render_writes_one_sentence_per_rule() {
    let dir = trained();
    run_with(&["prune", "--mode", "exact", "--K", "3"], dir.path(), "k3");
    let model_path = dir.path().join("k3/model.json");
    let rules = read_json(&model_path)["rules"].as_array().unwrap().len();
    assert!(rules >= 1);
    let text = ok(&["render", "--model", p(&model_path)]);
    assert_eq!(text.lines().filter(|l| l.starts_with("If")).count(), rules);
}

#[test]
fn runs_are_deterministic() {
    let dir = trained();
    run_with(&["prune", "--mode", "cbcd", "--K", "4"], dir.path(), "a");
    run_with(&["prune", "--mode", "cbcd", "--K", "4"], dir.path(), "b");
    let a = std::fs::read_to_string(dir.path().join("a/model.json")).unwrap();
    let b = std::fs::read_to_string(dir.path().join("b/model.json")).unwrap();
    assert_eq!(a, b);
}

#[test]
fn eval_scores_models_and_ensembles() {
    let dir = trained();
    run_with(&["prune", "--mode", "relax", "--lambda", "5"], dir.path(), "rx");
    let test = dir.path().join("fit/test.csv");
    let m: Value = serde_json::from_str(&ok(&[
        "eval",
        "--model",
        p(&dir.path().join("rx/model.json")),
        "--data",
        p(&test),
    ]))
    .unwrap();
    assert!(m["r2"].as_f64().unwrap().is_finite());
    let e: Value = serde_json::from_str(&ok(&[
        "eval",
        "--ensemble",
        "--model",
        p(&dir.path().join("fit/ensemble.json")),
        "--data",
        p(&test),
    ]))
    .unwrap();
    assert!(e["size"]["nodes"].as_u64().unwrap() > 0);
}

#[test]
fn bad_input_exits_nonzero_with_json_error() {
    let dir = trained();
    let mut args: Vec<String> = vec!["prune".into(), "--mode".into(), "exact".into()];
    args.extend(fit_args(dir.path(), "bad"));
    let refs: Vec<&str> = args.iter().map(String::as_str).collect();
    let out = bin(&refs);
    assert!(!out.status.success());
    let err: Value = serde_json::from_slice(&out.stderr).unwrap();
    assert!(err["error"]["kind"].is_string());

    let out = bin(&["render", "--model", p(&dir.path().join("missing.json"))]);
    assert!(!out.status.success());
    let err: Value = serde_json::from_slice(&out.stderr).unwrap();
    assert!(err["error"]["message"].as_str().unwrap().contains("missing.json"));
}
