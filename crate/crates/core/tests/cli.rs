use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use sentikit::experiment::ExperimentConfig;

fn sentikit(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_sentikit"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn p(path: &Path) -> &str {
    path.to_str().unwrap()
}

fn stdout(out: &Output) -> String {
    String::from_utf8(out.stdout.clone()).unwrap()
}

fn synth(dir: &Path, docs: &str) -> PathBuf {
    let out = sentikit(&["synth", "--out", p(dir), "--docs", docs, "--seed", "4"]);
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    dir.join("config.toml")
}

fn write_config(dir: &Path, name: &str, edit: impl FnOnce(&mut ExperimentConfig)) -> PathBuf {
    let mut cfg = ExperimentConfig::load(&dir.join("config.toml")).unwrap();
    edit(&mut cfg);
    let path = dir.join(name);
    fs::write(&path, cfg.to_toml_string()).unwrap();
    path
}

#[test]
fn synth_then_train_one_model() {
    let tmp = tempfile::tempdir().unwrap();
    let config = synth(tmp.path(), "150");
    let out_dir = tmp.path().join("run");
    let out = sentikit(&[
        "train",
        "--config",
        p(&config),
        "--model",
        "logreg",
        "--out",
        p(&out_dir),
    ]);
    assert!(out.status.success());
    let text = stdout(&out);
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines[0], "Model\tAccuracy\tPrecision\tRecall\tF1-score");
    assert!(lines[1].starts_with("Logistic Regression\t"));
    assert_eq!(lines.len(), 2);
    assert_eq!(
        fs::read_to_string(out_dir.join("report.tsv")).unwrap(),
        text
    );
    assert!(out_dir.join("models").join("logreg.json").exists());
}

#[test]
fn json_report_shape() {
    let tmp = tempfile::tempdir().unwrap();
    let config = synth(tmp.path(), "90");
    let out = sentikit(&[
        "train",
        "--config",
        p(&config),
        "--model",
        "gnb",
        "--report",
        "json",
    ]);
    assert!(out.status.success());
    let v: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    let models = v["models"].as_array().unwrap();
    assert_eq!(models.len(), 1);
    let m = &models[0];
    assert_eq!(m["model"], "Gaussian Naive Bayes");
    for key in [
        "accuracy",
        "precision",
        "recall",
        "f1",
        "per_class",
        "confusion_matrix",
    ] {
        assert!(m.get(key).is_some(), "missing {key}");
    }
    assert_eq!(m["per_class"].as_array().unwrap().len(), 3);
}

#[test]
fn cnn_lstm_without_embedding_is_a_config_error() {
    let tmp = tempfile::tempdir().unwrap();
    synth(tmp.path(), "60");
    let config = write_config(tmp.path(), "noemb.toml", |c| c.embedding = None);
    let out_dir = tmp.path().join("never");
    let out = sentikit(&[
        "train",
        "--config",
        p(&config),
        "--model",
        "cnn-lstm",
        "--out",
        p(&out_dir),
    ]);
    assert_eq!(out.status.code(), Some(2));
    assert!(!out_dir.exists());
    assert!(String::from_utf8_lossy(&out.stderr).contains("embedding"));
}

#[test]
fn unknown_config_key_is_a_config_error() {
    let tmp = tempfile::tempdir().unwrap();
    let config = tmp.path().join("bad.toml");
    fs::write(&config, "dataset = \"x.csv\"\nepoch = 3\n").unwrap();
    let out = sentikit(&["train", "--config", p(&config)]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn usage_errors_exit_2() {
    assert_eq!(
        sentikit(&["train", "--report", "xml"]).status.code(),
        Some(2)
    );
    assert_eq!(sentikit(&["frobnicate"]).status.code(), Some(2));
}

#[test]
fn malformed_datasets_exit_3() {
    let tmp = tempfile::tempdir().unwrap();
    let ragged = tmp.path().join("ragged.csv");
    fs::write(&ragged, "text,label\nok,pos\nmissing label\n").unwrap();
    let out = sentikit(&["preprocess", "--input", p(&ragged)]);
    assert_eq!(out.status.code(), Some(3));
    assert!(String::from_utf8_lossy(&out.stderr).contains("ragged.csv:3:"));

    let header_only = tmp.path().join("empty.csv");
    fs::write(&header_only, "text,label\n").unwrap();
    let config = tmp.path().join("c.toml");
    fs::write(&config, "dataset = \"empty.csv\"\nmodel = \"gnb\"\n").unwrap();
    assert_eq!(
        sentikit(&["train", "--config", p(&config)]).status.code(),
        Some(3)
    );
}

#[test]
fn preprocess_keeps_empty_documents_as_empty_lines() {
    let tmp = tempfile::tempdir().unwrap();
    let input = tmp.path().join("in.csv");
    fs::write(
        &input,
        "text,label\n\"خوووووب\",a\n\"\",b\n<b>hi</b> there,a\n",
    )
    .unwrap();
    let out = sentikit(&["preprocess", "--input", p(&input), "--out", p(tmp.path())]);
    assert!(out.status.success());
    let tokens = fs::read_to_string(tmp.path().join("tokens.txt")).unwrap();
    assert_eq!(tokens, "خوب\n\nhi there\n");
}

#[test]
fn evaluate_reproduces_the_training_report() {
    let tmp = tempfile::tempdir().unwrap();
    synth(tmp.path(), "120");
    let config = write_config(tmp.path(), "quick.toml", |c| c.cnn_lstm.epochs = 2);
    let run = tmp.path().join("run");
    let train = sentikit(&["train", "--config", p(&config), "--out", p(&run)]);
    assert!(train.status.success());
    let models = run.join("models");
    let out = sentikit(&[
        "evaluate",
        "--config",
        p(&config),
        "--bundle",
        p(&models.join("tree.json")),
        "--bundle",
        p(&models.join("cnn-lstm.json")),
    ]);
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    let train_report = stdout(&train);
    let rows: Vec<&str> = train_report.lines().collect();
    let expected = format!("{}\n{}\n{}\n", rows[0], rows[2], rows[6]);
    assert_eq!(stdout(&out), expected);
}

#[test]
fn evaluate_rejects_foreign_bundles_and_labels() {
    let tmp = tempfile::tempdir().unwrap();
    let config = synth(tmp.path(), "60");
    let run = tmp.path().join("run");
    assert!(sentikit(&[
        "train",
        "--config",
        p(&config),
        "--model",
        "gnb",
        "--out",
        p(&run)
    ])
    .status
    .success());
    let bundle = run.join("models").join("gnb.json");

    let stale = tmp.path().join("stale.json");
    fs::write(
        &stale,
        fs::read_to_string(&bundle)
            .unwrap()
            .replace("\"version\":1", "\"version\":7"),
    )
    .unwrap();
    let out = sentikit(&["evaluate", "--config", p(&config), "--bundle", p(&stale)]);
    assert_eq!(out.status.code(), Some(3));

    let other = tmp.path().join("other.csv");
    fs::write(&other, "text,label\nsomething,surprised\n").unwrap();
    let out = sentikit(&[
        "evaluate",
        "--config",
        p(&config),
        "--bundle",
        p(&bundle),
        "--input",
        p(&other),
    ]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn search_writes_trace_and_best_config() {
    let tmp = tempfile::tempdir().unwrap();
    synth(tmp.path(), "120");
    let config = write_config(tmp.path(), "search.toml", |c| {
        c.model = "cnn-lstm".parse().unwrap();
        c.search.grid.epochs = vec![1, 2];
        c.search.grid.batch_size = vec![16];
        c.search.grid.learning_rate = vec![0.01, 0.002];
        c.search.grid.optimizer = vec!["adam".parse().unwrap()];
    });
    let run = tmp.path().join("run");
    let out = sentikit(&["search", "--config", p(&config), "--out", p(&run)]);
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    let report = stdout(&out);
    assert_eq!(report.lines().count(), 2);
    assert!(report.lines().nth(1).unwrap().starts_with("CNN-LSTM\t"));

    let trace: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(run.join("trace.json")).unwrap()).unwrap();
    let entries = trace.as_array().expect("trace is a list");
    assert!(!entries.is_empty() && entries.len() <= 3 * 5);
    let best: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(run.join("best_config.json")).unwrap()).unwrap();
    assert!(
        [1, 2].contains(&best["config"]["epochs"].as_u64().unwrap()),
        "{best}"
    );
    assert!(run.join("models").join("cnn-lstm.json").exists());
}

#[test]
fn search_requires_the_neural_model() {
    let tmp = tempfile::tempdir().unwrap();
    let config = synth(tmp.path(), "60");
    assert_eq!(
        sentikit(&["search", "--config", p(&config)]).status.code(),
        Some(2)
    );
}
