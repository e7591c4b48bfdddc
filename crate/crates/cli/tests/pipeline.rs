use std::path::{Path, PathBuf};
use std::process::{Command, Output};
use std::time::{Duration, Instant};

const STAGES: [&str; 6] = [
    "gen-data",
    "train-extractor",
    "build-pools",
    "train-agent",
    "evaluate",
    "baselines",
];

fn tiny_config() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("configs/tiny.toml")
}

fn rlie(out: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_rlie"))
        .arg("--config")
        .arg(tiny_config())
        .arg("--out-dir")
        .arg(out)
        .args(args)
        .output()
        .expect("binary runs")
}

fn run_all(out: &Path) {
    for stage in STAGES {
        let o = rlie(out, &[stage]);
        assert!(
            o.status.success(),
            "{stage} failed: {}",
            String::from_utf8_lossy(&o.stderr)
        );
    }
}

fn sorted_files(dir: &Path) -> Vec<(String, Vec<u8>)> {
    let mut files: Vec<_> = std::fs::read_dir(dir)
        .unwrap()
        .map(|e| {
            let e = e.unwrap();
            (
                e.file_name().to_string_lossy().into_owned(),
                std::fs::read(e.path()).unwrap(),
            )
        })
        .collect();
    files.sort();
    files
}

#[test]
fn tiny_pipeline_completes_and_reruns_identically() {
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    let start = Instant::now();
    run_all(a.path());
    assert!(start.elapsed() < Duration::from_secs(300));
    run_all(b.path());

    let fa = sorted_files(a.path());
    let fb = sorted_files(b.path());
    assert_eq!(fa.len(), fb.len());
    for ((na, ba), (nb, bb)) in fa.iter().zip(&fb) {
        assert_eq!(na, nb);
        assert!(ba == bb, "{na} differs between identical runs");
    }

    let report: serde_json::Value = serde_json::from_str(
        std::fs::read_to_string(a.path().join("report.jsonl"))
            .unwrap()
            .trim(),
    )
    .unwrap();
    assert_eq!(report["system"], "RL-Extract");
    assert_eq!(report["n_events"], 20);
    assert_eq!(report["accuracy"].as_array().unwrap().len(), 4);

    let metrics = std::fs::read_to_string(a.path().join("metrics.jsonl")).unwrap();
    let lines: Vec<serde_json::Value> = metrics
        .lines()
        .map(|l| serde_json::from_str(l).unwrap())
        .collect();
    assert_eq!(lines.len(), 2);
    assert!(lines
        .iter()
        .all(|m| m["mean_episode_reward"].is_number() && m["eval"]["accuracy"].is_array()));

    let traces = std::fs::read_to_string(a.path().join("traces.jsonl")).unwrap();
    assert_eq!(traces.lines().count(), 20);

    let manifest: serde_json::Value = serde_json::from_str(
        &std::fs::read_to_string(a.path().join("evaluate.manifest.json")).unwrap(),
    )
    .unwrap();
    for input in [
        "corpus.jsonl",
        "extractor.json",
        "pools.jsonl",
        "checkpoint.json",
    ] {
        assert_eq!(
            manifest["inputs"][input].as_str().unwrap().len(),
            64,
            "{input}"
        );
    }

    // A changed training config invalidates the checkpoint for evaluation.
    let o = rlie(a.path(), &["--set", "train.epochs=3", "evaluate"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("rlie train-agent"));
    let o = rlie(
        a.path(),
        &["--set", "train.epochs=3", "--force", "evaluate"],
    );
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));

    // Unrelated sections leave upstream artifacts usable.
    let o = rlie(a.path(), &["--set", "train.epochs=3", "baselines"]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
}

#[test]
fn missing_upstream_artifacts_name_the_producing_command() {
    let dir = tempfile::tempdir().unwrap();
    let o = rlie(dir.path(), &["evaluate"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("rlie gen-data"));

    for stage in &STAGES[..3] {
        assert!(rlie(dir.path(), &[stage]).status.success());
    }
    let o = rlie(dir.path(), &["evaluate"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("rlie train-agent"));
}

#[test]
fn tampered_artifacts_are_refused() {
    let dir = tempfile::tempdir().unwrap();
    assert!(rlie(dir.path(), &["gen-data"]).status.success());
    let corpus = dir.path().join("corpus.jsonl");
    let mut text = std::fs::read_to_string(&corpus).unwrap();
    text.push('\n');
    std::fs::write(&corpus, text).unwrap();
    let o = rlie(dir.path(), &["train-extractor"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("digest"));
}

#[test]
fn usage_errors_exit_with_one() {
    let dir = tempfile::tempdir().unwrap();
    assert_eq!(rlie(dir.path(), &["no-such-stage"]).status.code(), Some(1));
    assert_eq!(
        rlie(dir.path(), &["--set", "train.nope=1", "gen-data"])
            .status
            .code(),
        Some(1)
    );
    assert_eq!(
        rlie(dir.path(), &["--set", "eval.taus=[2.0]", "gen-data"])
            .status
            .code(),
        Some(1)
    );
    let o = rlie(
        dir.path(),
        &["--set", "data.corpus=\"missing.jsonl\"", "train-extractor"],
    );
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn numerical_divergence_exits_with_three() {
    let dir = tempfile::tempdir().unwrap();
    for stage in &STAGES[..3] {
        assert!(rlie(dir.path(), &[stage]).status.success());
    }
    let o = rlie(
        dir.path(),
        &[
            "--set",
            "train.learning_rate=1e300",
            "--set",
            "train.epochs=1",
            "train-agent",
        ],
    );
    assert_eq!(
        o.status.code(),
        Some(3),
        "{}",
        String::from_utf8_lossy(&o.stderr)
    );
}

#[test]
fn show_config_round_trips() {
    let dir = tempfile::tempdir().unwrap();
    let o = rlie(dir.path(), &["--set", "seed=11", "show-config"]);
    assert!(o.status.success());
    let text = String::from_utf8(o.stdout).unwrap();
    let path = dir.path().join("effective.toml");
    std::fs::write(&path, &text).unwrap();
    let o = Command::new(env!("CARGO_BIN_EXE_rlie"))
        .arg("--config")
        .arg(&path)
        .arg("show-config")
        .output()
        .unwrap();
    assert_eq!(String::from_utf8(o.stdout).unwrap(), text);
    assert!(text.contains("seed = 11"));
}
