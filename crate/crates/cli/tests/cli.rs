use std::path::Path;
use std::process::{Command, Output};

fn qpdcut(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_qpdcut")).args(args).output().expect("binary runs")
}

fn out(dir: &Path) -> &str {
    dir.to_str().unwrap()
}

#[test]
fn exact_validation_succeeds_and_writes_reports() {
    let dir = tempfile::tempdir().unwrap();
    let o = qpdcut(&["validate", "--exact", "--runs", "2", "--out", out(dir.path())]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    for f in ["validate.json", "validate_ghz.csv", "validate_random.csv"] {
        assert!(dir.path().join(f).exists(), "{f}");
    }
    let csv = std::fs::read_to_string(dir.path().join("validate_ghz.csv")).unwrap();
    assert!(csv.starts_with("bitstring,exact_p,cut_mean,cut_std,uncut_mean,uncut_std"));
    assert_eq!(csv.lines().count(), 5);
}

#[test]
fn train_writes_model_and_plot_data() {
    let dir = tempfile::tempdir().unwrap();
    let o = qpdcut(&["train", "--iterations", "4", "--model", "modulo", "--out", out(dir.path())]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let losses = std::fs::read_to_string(dir.path().join("loss_history.csv")).unwrap();
    assert_eq!(losses.lines().count(), 5);
    let report: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(dir.path().join("train.json")).unwrap()).unwrap();
    assert_eq!(report["schema_version"], 1);
    assert_eq!(report["config"]["args"]["model"], "modulo");
    assert!(report["wall_clock_s"].as_f64().unwrap() >= 0.0);
    let s = &report["metrics"]["test_accuracy"];
    assert_eq!(s["mean"], report["metrics"]["per_run"][0]["test_accuracy"]);

    // Continuing through the cut pipeline keeps the requested loss entries.
    let next = tempfile::tempdir().unwrap();
    let model = dir.path().join("model.json");
    let o = qpdcut(&[
        "train", "--model", "modulo", "--strategy", "cut-then-fit", "--iterations", "1", "--batch-size", "1",
        "--warm-start", model.to_str().unwrap(), "--out", out(next.path()),
    ]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let report: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(next.path().join("train.json")).unwrap()).unwrap();
    assert_eq!(report["metrics"]["per_run"][0]["loss_history"].as_array().unwrap().len(), 1);
    assert_eq!(report["metrics"]["per_run"][0]["evaluations"]["first_backward"], 62208);
}

#[test]
fn warm_start_with_other_head_is_rejected() {
    let dir = tempfile::tempdir().unwrap();
    assert!(qpdcut(&["train", "--iterations", "1", "--out", out(dir.path())]).status.success());
    let model = dir.path().join("model.json");
    let o = qpdcut(&["train", "--model", "expected", "--warm-start", model.to_str().unwrap(), "--out", out(dir.path())]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn failure_classes_have_distinct_exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let missing = dir.path().join("missing.json");
    let o = qpdcut(&["eval-cut", missing.to_str().unwrap(), "--out", out(dir.path())]);
    assert_eq!(o.status.code(), Some(3));

    let bad = dir.path().join("bad.json");
    std::fs::write(&bad, "{ not json").unwrap();
    let o = qpdcut(&["eval-cut", bad.to_str().unwrap(), "--out", out(dir.path())]);
    assert_eq!(o.status.code(), Some(4));

    let o = qpdcut(&["noise-compare", bad.to_str().unwrap(), "--exact", "--out", out(dir.path())]);
    assert_eq!(o.status.code(), Some(2));

    let o = qpdcut(&["validate", "--runs", "0", "--out", out(dir.path())]);
    assert_eq!(o.status.code(), Some(2));

    let o = qpdcut(&["--threads", "0", "validate", "--out", out(dir.path())]);
    assert_eq!(o.status.code(), Some(2));
}
