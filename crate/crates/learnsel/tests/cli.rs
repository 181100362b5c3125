use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use learnsel::formats::{format_history, HistoryMeta};
use learnsel::report::load_report;
use learnsel_core::bayesopt::{Observation, ObservationSet};

fn learnsel(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_learnsel")).args(args).output().unwrap()
}

fn ok(args: &[&str]) -> String {
    let out = learnsel(args);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    String::from_utf8(out.stdout).unwrap()
}

fn synth(dir: &Path) -> PathBuf {
    ok(&["synth", "--task", "sentiment", "--out", dir.to_str().unwrap(), "--runs", "2"]);
    dir.join("manifest.toml")
}

#[test]
fn ingest_populates_and_then_hits_the_cache() {
    let dir = tempfile::tempdir().unwrap();
    let m = synth(dir.path());
    let m = m.to_str().unwrap();
    let first = ok(&["ingest", m]);
    assert!(first.starts_with("ingested"), "{first}");
    let cache = dir.path().join("out/cache");
    let entries: Vec<_> = fs::read_dir(&cache).unwrap().collect();
    assert_eq!(entries.len(), 1);
    let second = ok(&["ingest", m]);
    assert!(second.starts_with("cached"), "{second}");

    // editing a data file changes the key
    let near = dir.path().join("near.tsv");
    let mut text = fs::read_to_string(&near).unwrap();
    text.push_str("1\textra line\n");
    fs::write(&near, text).unwrap();
    assert!(ok(&["ingest", m]).starts_with("ingested"));
}

#[test]
fn missing_file_exits_1_and_names_it() {
    let dir = tempfile::tempdir().unwrap();
    let m = synth(dir.path());
    fs::remove_file(dir.path().join("mid.txt")).unwrap();
    let out = learnsel(&["ingest", m.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("mid.txt"));
}

#[test]
fn malformed_manifest_is_an_error() {
    let dir = tempfile::tempdir().unwrap();
    let m = dir.path().join("m.toml");
    fs::write(&m, "task = \"sentiment\"\n[[domain]]\nid = \"a\"\nlabeled = \"a.tsv\"\n").unwrap();
    let out = learnsel(&["ingest", m.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn random_with_ten_seeds() {
    let dir = tempfile::tempdir().unwrap();
    let m = synth(dir.path());
    ok(&["select", m.to_str().unwrap(), "--method", "random", "--seed", "0,1,2,3,4,5,6,7,8,9"]);
    let r = load_report(&dir.path().join("out/reports/target.random.json")).unwrap();
    assert_eq!(r.runs.len(), 10);
    assert!(r.variance.is_some());
    let rows = fs::read_to_string(dir.path().join("out/reports/target.random.jsonl")).unwrap();
    assert_eq!(rows.lines().count(), 10);
    let table = fs::read_to_string(dir.path().join("out/reports/target.random.txt")).unwrap();
    assert!(table.contains("mean") && table.contains("variance"));
}

#[test]
fn learned_writes_weights_history_and_matches_jobs() {
    let dir = tempfile::tempdir().unwrap();
    let m = synth(dir.path());
    let m = m.to_str().unwrap();
    let args = ["select", m, "--method", "learned", "--iterations", "4", "--n", "100", "--dump-features"];
    ok(&args);
    let out = dir.path().join("out");
    for seed in 0..2 {
        assert!(out.join(format!("weights/target.term+diversity.seed{seed}.json")).exists());
        assert!(out.join(format!("history/target.term+diversity.seed{seed}.tsv")).exists());
    }
    assert!(out.join("features/target.term+diversity.tsv").exists());
    let report = out.join("reports/target.learned.term+diversity.json");
    let single = fs::read(&report).unwrap();
    let mut with_jobs = args.to_vec();
    with_jobs.extend(["--jobs", "2"]);
    ok(&with_jobs);
    assert_eq!(fs::read(&report).unwrap(), single);
}

#[test]
fn transfer_without_weights_is_a_usage_error() {
    let dir = tempfile::tempdir().unwrap();
    let m = synth(dir.path());
    let out = learnsel(&["select", m.to_str().unwrap(), "--method", "transfer"]);
    assert_eq!(out.status.code(), Some(2));
    let out = learnsel(&["select", m.to_str().unwrap(), "--method", "bogus"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn transfer_rejects_mismatched_features() {
    let dir = tempfile::tempdir().unwrap();
    let m = synth(dir.path());
    let m = m.to_str().unwrap();
    ok(&["select", m, "--method", "learned", "--iterations", "2", "--seed", "0", "--n", "50"]);
    let w = dir.path().join("out/weights/target.term+diversity.seed0.json");
    let out = learnsel(&["select", m, "--method", "transfer", "--weights", w.to_str().unwrap(), "--features", "term"]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("mismatch"));
}

#[test]
fn external_evaluator_from_manifest() {
    let dir = tempfile::tempdir().unwrap();
    let m = synth(dir.path());
    let mut text = fs::read_to_string(&m).unwrap();
    text = text.replacen("[bo]", "[external]\ncommand = \"echo 0.5\"\n\n[bo]", 1);
    fs::write(&m, text).unwrap();
    ok(&["select", m.to_str().unwrap(), "--method", "all-source"]);
    let r = load_report(&dir.path().join("out/reports/target.all-source.json")).unwrap();
    assert!(r.runs.iter().all(|run| run.value == 0.5));
}

fn write_history(path: &Path, features: &str, ys: impl IntoIterator<Item = f64>) {
    let mut h = ObservationSet::new();
    for y in ys {
        h.push(Observation::new(vec![0.1, -0.2], y));
    }
    let meta = HistoryMeta {
        features: features.into(),
        target: "t".into(),
        seed: 0,
    };
    fs::write(path, format_history(&meta, &h)).unwrap();
}

#[test]
fn curve_tables() {
    let dir = tempfile::tempdir().unwrap();
    let a = dir.path().join("a.tsv");
    let b = dir.path().join("b.tsv");
    write_history(&a, "term", (0..300).map(|i| ((i * 37) % 101) as f64 / 100.0));
    write_history(&b, "topic+diversity", (0..300).map(|i| ((i * 13) % 89) as f64 / 100.0));

    let one = ok(&["curve", a.to_str().unwrap()]);
    let lines: Vec<&str> = one.lines().collect();
    assert_eq!(lines.len(), 301);
    let best: Vec<f64> = lines[1..]
        .iter()
        .map(|l| l.split('\t').nth(1).unwrap().parse().unwrap())
        .collect();
    assert!(best.windows(2).all(|w| w[0] <= w[1]));

    let out = dir.path().join("curve.tsv");
    ok(&["curve", a.to_str().unwrap(), b.to_str().unwrap(), "--out", out.to_str().unwrap()]);
    let two = fs::read_to_string(out).unwrap();
    let header: Vec<&str> = two.lines().next().unwrap().split('\t').collect();
    assert_eq!(header.len(), 7);
    assert!(header.contains(&"term.mean") && header.contains(&"topic+diversity.max"));

    let out = learnsel(&["curve", dir.path().join("missing.tsv").to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(1));
}
