use std::fs;
use std::path::Path;

use ratdelay::cli::run;
use ratdelay::dataset::{load_csv, ColumnMapping};
use ratdelay::models::{Family, FittedModel};
use serde_json::Value;

fn ratdelay(dir: &Path, args: &[&str]) -> i32 {
    let mut argv = vec!["ratdelay".to_string(), "--out-dir".into(), dir.display().to_string()];
    argv.extend(args.iter().map(|s| s.to_string()));
    run(argv)
}

fn simulate(dir: &Path, n: usize) {
    let n = n.to_string();
    assert_eq!(ratdelay(dir, &["simulate", "--n", &n, "--seed", "4"]), 0);
}

fn json(path: &Path) -> Value {
    serde_json::from_str(&fs::read_to_string(path).unwrap()).unwrap()
}

fn entries(dir: &Path) -> usize {
    fs::read_dir(dir).unwrap().count()
}

#[test]
fn unknown_subcommand_is_a_usage_error_and_writes_nothing() {
    let dir = tempfile::tempdir().unwrap();
    assert_eq!(ratdelay(dir.path(), &["frobnicate"]), 1);
    assert_eq!(entries(dir.path()), 0);
}

#[test]
fn bad_flags_are_usage_errors() {
    let dir = tempfile::tempdir().unwrap();
    assert_eq!(ratdelay(dir.path(), &["fit", "--data", "x.csv"]), 1);
    assert_eq!(ratdelay(dir.path(), &["fit", "--family", "quadratic", "--data", "x.csv"]), 1);
    assert_eq!(ratdelay(dir.path(), &["evaluate", "--model", "m.json", "--data", "x.csv"]), 1);
    assert_eq!(ratdelay(dir.path(), &["cv", "--family", "linear", "--data", "x.csv", "--k", "1"]), 1);
    assert_eq!(entries(dir.path()), 0);
    assert_eq!(run(["ratdelay", "--help"]), 0);
}

#[test]
fn missing_input_is_a_computation_failure() {
    let dir = tempfile::tempdir().unwrap();
    let missing = dir.path().join("missing.csv");
    let code = ratdelay(dir.path(), &["fit", "--family", "linear", "--data", missing.to_str().unwrap()]);
    assert_eq!(code, 2);
}

#[test]
fn simulate_writes_csv_sidecar_and_manifest() {
    let dir = tempfile::tempdir().unwrap();
    simulate(dir.path(), 300);
    let loaded = load_csv(&dir.path().join("telemetry.csv"), &ColumnMapping::default()).unwrap();
    assert_eq!(loaded.samples.len(), 300);
    assert!(loaded.rejected.is_empty());

    let truth = json(&dir.path().join("telemetry.truth.json"));
    assert_eq!(truth["ground_truth"]["noiseless"].as_array().unwrap().len(), 300);
    let manifest = json(&dir.path().join("simulate.manifest.json"));
    assert_eq!(manifest["subcommand"], "simulate");
    assert_eq!(manifest["seeds"][0], 4);
    assert_eq!(manifest["outputs"].as_array().unwrap().len(), 2);
}

#[test]
fn simulate_config_file_is_honoured() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("gen.json");
    fs::write(&cfg, r#"{"n": 40, "seed": 9, "hidden": {"kind": "rational-exp", "a": [0.08, 0.0008, 0.01], "b": [0.2, -0.004, 0.05], "c": 0.1, "d": 0.15}}"#).unwrap();
    assert_eq!(ratdelay(dir.path(), &["simulate", "--config", cfg.to_str().unwrap()]), 0);
    let truth = json(&dir.path().join("telemetry.truth.json"));
    assert_eq!(truth["config"]["n"], 40);
    assert_eq!(truth["ground_truth"]["hidden"]["kind"], "rational-exp");
}

#[test]
fn cv_is_deterministic() {
    let dir = tempfile::tempdir().unwrap();
    simulate(dir.path(), 400);
    let data = dir.path().join("telemetry.csv");
    let data = data.to_str().unwrap();
    let args = ["cv", "--family", "rational-exp", "--data", data, "--k", "5", "--seed", "3"];
    assert_eq!(ratdelay(dir.path(), &[&args[..], &["--out", "a.json", "--folds-csv", "a.csv"]].concat()), 0);
    assert_eq!(ratdelay(dir.path(), &[&args[..], &["--out", "b.json", "--folds-csv", "b.csv"]].concat()), 0);
    let a = fs::read(dir.path().join("a.json")).unwrap();
    assert_eq!(a, fs::read(dir.path().join("b.json")).unwrap());
    assert_eq!(
        fs::read(dir.path().join("a.csv")).unwrap(),
        fs::read(dir.path().join("b.csv")).unwrap()
    );
    let report = json(&dir.path().join("a.json"));
    assert_eq!(report["folds"].as_array().unwrap().len(), 5);
    assert_eq!(report["complete"], true);
}

#[test]
fn fit_evaluate_bench_residuals_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    simulate(dir.path(), 500);
    let data_path = dir.path().join("telemetry.csv");
    let data = data_path.to_str().unwrap();
    let before = fs::read(&data_path).unwrap();

    let fit = ["fit", "--family", "rational-exp", "--data", data, "--split", "holdout", "--seed", "2"];
    assert_eq!(ratdelay(dir.path(), &fit), 0);
    let model = FittedModel::load(&dir.path().join("model.json")).unwrap();
    assert_eq!(model.family(), Family::RationalExp);
    assert_eq!(model.metadata.training_rows, 400);
    assert!(model.metadata.split.as_deref().unwrap().starts_with("holdout"));

    let model_path = dir.path().join("model.json");
    let m = model_path.to_str().unwrap();
    let eval = ["evaluate", "--model", m, "--data", data, "--split", "holdout", "--seed", "2"];
    assert_eq!(ratdelay(dir.path(), &eval), 0);
    let report = json(&dir.path().join("evaluate.json"));
    assert_eq!(report["report"]["n"], 100);
    assert!(report["split"].as_str().unwrap().starts_with("holdout"));
    assert!(report["report"]["r2"].as_f64().unwrap() > 0.9);

    assert_eq!(ratdelay(dir.path(), &["bench", "--model", m, "--data", data, "--n", "50"]), 0);
    assert_eq!(json(&dir.path().join("bench.json"))["timing"]["n"], 50);

    assert_eq!(ratdelay(dir.path(), &["residuals", "--model", m, "--data", data, "--bins", "5"]), 0);
    let csv = fs::read_to_string(dir.path().join("residuals.csv")).unwrap();
    assert_eq!(csv.lines().next(), Some("feature_value,residual"));
    assert_eq!(csv.lines().count(), 501);
    let profile = json(&dir.path().join("residual_profile.json"));
    assert_eq!(profile["bins"].as_array().unwrap().len(), 5);

    assert_eq!(fs::read(&data_path).unwrap(), before, "input was modified");
    for name in ["fit", "evaluate", "bench", "residuals"] {
        assert!(dir.path().join(format!("{name}.manifest.json")).exists());
    }
}

#[test]
fn decide_with_measured_and_predicted_segments() {
    let dir = tempfile::tempdir().unwrap();
    let topo = dir.path().join("topology.json");
    fs::write(
        &topo,
        r#"{
  "alpha": 0.5,
  "delta_max": 0.05,
  "nodes": [
    {"id": "local", "kind": "LOCAL", "processing_delay": 0.5, "reliability": 1.0},
    {"id": "near", "kind": "NEAR", "processing_delay": 0.0, "reliability": 1.0}
  ],
  "segments": {"d_5g": 0.1, "d_edge": []}
}"#,
    )
    .unwrap();
    let t = topo.to_str().unwrap();
    assert_eq!(ratdelay(dir.path(), &["decide", "--topology", t]), 0);
    let doc = json(&dir.path().join("decision.json"));
    assert_eq!(doc["decision"]["selected"], "local");
    assert_eq!(doc["decision"]["fallback"], true);

    // Raising the threshold lets the uplink through.
    assert_eq!(ratdelay(dir.path(), &["decide", "--topology", t, "--delta-max", "0.2"]), 0);
    let doc = json(&dir.path().join("decision.json"));
    assert_eq!(doc["decision"]["selected"], "near");
    assert_eq!(doc["decision"]["candidates"].as_array().unwrap().len(), 2);

    simulate(dir.path(), 300);
    let data = dir.path().join("telemetry.csv");
    assert_eq!(
        ratdelay(dir.path(), &["fit", "--family", "linear", "--data", data.to_str().unwrap()]),
        0
    );
    let sample = r#"{"client_frame_size": 200000, "arrival_rate_cl": 900, "arrival_rate_all": 1500, "utilization": 30}"#;
    fs::write(
        &topo,
        format!(
            r#"{{
  "nodes": [
    {{"id": "local", "kind": "LOCAL", "processing_delay": 0.5, "reliability": 0.9}},
    {{"id": "edge1", "kind": "EDGE", "index": 1, "processing_delay": 0.01, "reliability": 0.9}}
  ],
  "segment_models": {{
    "d_5g": {{"model": "model.json", "telemetry": {sample}}},
    "d_edge": [{{"model": "model.json", "telemetry": {sample}}}]
  }}
}}"#
        ),
    )
    .unwrap();
    assert_eq!(ratdelay(dir.path(), &["decide", "--topology", t]), 1, "delta_max is required");
    assert_eq!(ratdelay(dir.path(), &["decide", "--topology", t, "--delta-max", "1.0"]), 0);
    let doc = json(&dir.path().join("decision.json"));
    assert_eq!(doc["decision"]["selected"], "edge1");
    let d_5g = doc["segments"]["d_5g"].as_f64().unwrap();
    assert_eq!(doc["segments"]["d_edge"][0].as_f64().unwrap(), d_5g);
}

#[test]
fn compare_emits_one_row_per_family() {
    let dir = tempfile::tempdir().unwrap();
    simulate(dir.path(), 400);
    let data = dir.path().join("telemetry.csv");
    let code = ratdelay(
        dir.path(),
        &["compare", "--families", "rational-exp,linear,poly2", "--data", data.to_str().unwrap(), "--k", "3", "--pretty"],
    );
    assert_eq!(code, 0);
    let doc = json(&dir.path().join("compare.json"));
    let rows = doc["rows"].as_array().unwrap();
    assert_eq!(rows.len(), 3);
    assert_eq!(rows[0]["model"], "Rational-Exponential");
    assert_eq!(rows[2]["family"], "poly2");
}

#[test]
fn out_dir_defaults_to_environment() {
    let dir = tempfile::tempdir().unwrap();
    std::env::set_var(ratdelay::cli::OUT_DIR_ENV, dir.path());
    let code = run(["ratdelay", "simulate", "--n", "20"]);
    std::env::remove_var(ratdelay::cli::OUT_DIR_ENV);
    assert_eq!(code, 0);
    assert!(dir.path().join("telemetry.csv").exists());
    assert!(dir.path().join("simulate.manifest.json").exists());
}
