use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};
use std::time::SystemTime;

use labelhot::consensus::SamplingParams;
use labelhot::experiment::{ExperimentConfig, GridSpec};
use labelhot::synth::{DatasetPlan, SynthConfig};

fn labelhot(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_labelhot"))
        .args(args)
        .env_remove("LABELHOT_OUT")
        .output()
        .expect("run labelhot")
}

fn ok(args: &[&str]) -> String {
    let out = labelhot(args);
    assert!(
        out.status.success(),
        "labelhot {args:?} failed:\n{}",
        String::from_utf8_lossy(&out.stderr)
    );
    String::from_utf8(out.stdout).unwrap()
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

fn small_plan() -> DatasetPlan {
    DatasetPlan {
        recording: SynthConfig {
            duration_s: 60.0,
            n_channels: 8,
            event_rate_per_min: 40.0,
            ..SynthConfig::default()
        },
        n_train: 6,
        n_test: 2,
        train_blocks: 6,
        test_blocks: 3,
        block_s: 5.0,
        extra_labeled_test_recordings: 1,
        ..DatasetPlan::default()
    }
}

/// Writes the small plan and synthesizes it; returns (train, test) manifests.
fn synth(dir: &Path, seed: u64) -> (PathBuf, PathBuf) {
    let plan = dir.join("plan.json");
    fs::write(&plan, serde_json::to_string(&small_plan()).unwrap()).unwrap();
    let out = dir.join(format!("data{seed}"));
    let stdout = ok(&["synth", "--config", s(&plan), "--seed", &seed.to_string(), "--out", s(&out)]);
    let paths: Vec<PathBuf> = stdout.lines().map(PathBuf::from).collect();
    assert_eq!(paths.len(), 2);
    (paths[0].clone(), paths[1].clone())
}

fn small_experiment(dir: &Path, train: &Path, test: &Path) -> PathBuf {
    let mut cfg = ExperimentConfig::new(train, test, "unused");
    cfg.schemes = vec![labelhot::encoding::SchemeKind::V1];
    cfg.grid = GridSpec {
        n_trees: vec![20],
        ..GridSpec::reduced()
    };
    cfg.sampling = SamplingParams {
        k: 3,
        n_rec: 2,
        n_pos: 10,
        n_neg: 10,
    };
    cfg.recording_seeds = vec![1];
    cfg.event_seeds = vec![11, 12];
    let path = dir.join("experiment.json");
    fs::write(&path, serde_json::to_string_pretty(&cfg).unwrap()).unwrap();
    path
}

fn dir_bytes(dir: &Path) -> Vec<(PathBuf, Vec<u8>)> {
    let mut out = Vec::new();
    let mut stack = vec![dir.to_path_buf()];
    while let Some(d) = stack.pop() {
        for e in fs::read_dir(&d).unwrap() {
            let p = e.unwrap().path();
            if p.is_dir() {
                stack.push(p);
            } else {
                out.push((p.strip_prefix(dir).unwrap().to_path_buf(), fs::read(&p).unwrap()));
            }
        }
    }
    out.sort();
    out
}

#[test]
fn synth_is_reproducible() {
    let dir = tempfile::tempdir().unwrap();
    let (train, _) = synth(dir.path(), 5);
    let first = dir_bytes(train.parent().unwrap());
    fs::remove_dir_all(train.parent().unwrap()).unwrap();
    synth(dir.path(), 5);
    assert_eq!(first, dir_bytes(train.parent().unwrap()));
    assert!(first.iter().any(|(p, _)| p.ends_with("train_annotations.jsonl")));
}

#[test]
fn invalid_plan_is_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let mut plan = small_plan();
    plan.recording.fs = 0;
    let path = dir.path().join("bad.json");
    fs::write(&path, serde_json::to_string(&plan).unwrap()).unwrap();
    let out = labelhot(&["synth", "--config", s(&path), "--out", s(&dir.path().join("o"))]);
    assert!(!out.status.success());
    assert!(String::from_utf8_lossy(&out.stderr).contains("error"));
}

#[test]
fn train_eval_and_labeler_report() {
    let dir = tempfile::tempdir().unwrap();
    let (train, test) = synth(dir.path(), 1);
    let model = dir.path().join("m.json");
    ok(&[
        "train", "--manifest", s(&train), "--scenario", "C", "--scheme", "v1", "--n-rec", "2", "--n-pos", "10",
        "--n-neg", "10", "--out", s(&model),
    ]);
    assert!(model.exists());
    assert!(dir.path().join("m.spec.json").exists());
    let text = fs::read_to_string(&model).unwrap();
    assert!(text.contains("\"v1\""));

    let csv = dir.path().join("eval.csv");
    ok(&["eval", "--model", s(&model), "--manifest", s(&test), "--mode", "agnostic,voting", "--out", s(&csv)]);
    let rows: Vec<String> = fs::read_to_string(&csv).unwrap().lines().map(String::from).collect();
    assert_eq!(rows.len(), 3);
    assert!(rows[1].contains(",agnostic,") && rows[2].contains(",voting,"));
    assert!(dir.path().join("eval.json").exists());

    let report = dir.path().join("quality.csv");
    ok(&["labeler-report", "--manifest", s(&test), "--out", s(&report)]);
    let q = fs::read_to_string(&report).unwrap();
    assert!(q.starts_with("recording,labeler,precision,recall"));
    // one recording carries 4 labelers
    assert_eq!(q.lines().count(), 1 + 4);
}

fn mtimes(dir: &Path) -> Vec<(PathBuf, SystemTime)> {
    let mut v: Vec<_> = fs::read_dir(dir)
        .unwrap()
        .map(|e| {
            let p = e.unwrap().path();
            let t = fs::metadata(&p).unwrap().modified().unwrap();
            (p, t)
        })
        .collect();
    v.sort();
    v
}

#[test]
fn experiment_resumes_from_markers() {
    let dir = tempfile::tempdir().unwrap();
    let (train, test) = synth(dir.path(), 2);
    let cfg = small_experiment(dir.path(), &train, &test);
    let out = dir.path().join("exp");
    let table = ok(&["experiment", "--config", s(&cfg), "--out", s(&out)]);
    assert!(table.starts_with("scenario\tscheme\tmode"));
    let cells = out.join("cells");
    let before = mtimes(&cells);
    // A, B, C, D with one scheme, one recording seed, two event seeds
    assert_eq!(before.len(), 4 * 2);
    let report = fs::read(out.join("report.csv")).unwrap();

    std::thread::sleep(std::time::Duration::from_millis(20));
    ok(&["experiment", "--config", s(&cfg), "--out", s(&out)]);
    assert_eq!(mtimes(&cells), before);
    assert_eq!(fs::read(out.join("report.csv")).unwrap(), report);
    assert!(out.join("best.csv").exists());
    assert!(out.join("report.json").exists());
}

#[test]
fn sweep_reports_each_count() {
    let dir = tempfile::tempdir().unwrap();
    let (train, test) = synth(dir.path(), 3);
    let cfg = small_experiment(dir.path(), &train, &test);
    let out = dir.path().join("sweep");
    let stdout = ok(&[
        "sweep-volume", "--config", s(&cfg), "--scenario", "A,D", "--mode", "agnostic", "--counts", "5,10", "--out",
        s(&out),
    ]);
    assert!(stdout.starts_with("count\tscenario"));
    let csv = fs::read_to_string(out.join("sweep.csv")).unwrap();
    let body: Vec<&str> = csv.lines().skip(1).collect();
    // two counts times (A, D v1), agnostic only
    assert_eq!(body.len(), 4, "{csv}");
    assert!(out.join("n5").join("report.csv").exists());
    assert!(out.join("n10").join("report.csv").exists());
}
