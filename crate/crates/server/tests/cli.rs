use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;

const BIN: &str = env!("CARGO_BIN_EXE_tagbrowse");

fn spanish_art_doc() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../core/data/spanish-art.json")
}

fn tagbrowse(args: &[&str]) -> Output {
    Command::new(BIN).args(args).output().expect("binary runs")
}

fn ok(args: &[&str]) -> String {
    let out = tagbrowse(args);
    assert!(
        out.status.success(),
        "{args:?} failed: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    String::from_utf8(out.stdout).unwrap()
}

fn path(p: &Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn ingest_reports_counts_and_writes_index() {
    let dir = tempfile::tempdir().unwrap();
    let index = dir.path().join("index.json");
    let stdout = ok(&["ingest", path(&spanish_art_doc()), "--out", path(&index)]);
    assert_eq!(stdout.trim(), "6 resources, 11 tags");

    let index: Value = serde_json::from_str(&std::fs::read_to_string(index).unwrap()).unwrap();
    let tags = index["tags"].as_array().unwrap();
    assert_eq!(tags.len(), 11);
    let levant = tags.iter().find(|t| t["label"] == "Levant").unwrap();
    let keys: Vec<&str> = levant["resources"]
        .as_array()
        .unwrap()
        .iter()
        .map(|r| index["resources"][r.as_u64().unwrap() as usize]["key"].as_str().unwrap())
        .collect();
    assert_eq!(keys, ["r2", "r6"]);
}

#[test]
fn gen_then_replay_digests_agree_across_strategies() {
    let dir = tempfile::tempdir().unwrap();
    let doc = dir.path().join("synth.json");
    let trace = dir.path().join("trace.jsonl");
    ok(&[
        "synth", "--resources", "400", "--tags", "50", "--mean-tags", "4", "--seed", "3", "--out", path(&doc),
    ]);
    assert_eq!(ok(&["gen", "--collection", path(&doc), "--seed", "11", "--actions", "300", "--out", path(&trace)]).trim(), "300 actions");

    let mut files = Vec::new();
    for strategy in ["none", "query", "resource"] {
        let digests = dir.path().join(format!("{strategy}.txt"));
        let stdout = ok(&[
            "replay", "--collection", path(&doc), "--trace", path(&trace), "--strategy", strategy, "--digests", path(&digests),
        ]);
        assert!(stdout.starts_with("300 actions, strategy "), "{stdout}");
        files.push(std::fs::read_to_string(digests).unwrap());
    }
    assert_eq!(files[0].lines().count(), 301);
    assert_eq!(files[0], files[1]);
    assert_eq!(files[0], files[2]);
}

#[test]
fn bench_writes_one_row_per_seed_and_strategy() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("bench");
    ok(&[
        "bench", "--collection", path(&spanish_art_doc()), "--seeds", "0..7", "--actions", "50", "--strategies", "q,r,none",
        "--out", path(&out),
    ]);
    let csv = std::fs::read_to_string(out.join("bench.csv")).unwrap();
    assert_eq!(csv.lines().count(), 1 + 7 * 3);
    assert!(csv.lines().next().unwrap().starts_with("seed,strategy,actions,cumulative_us"));
    let report: Value = serde_json::from_str(&std::fs::read_to_string(out.join("report.json")).unwrap()).unwrap();
    assert_eq!(report["sessions"].as_array().unwrap().len(), 7);
    assert!(out.join("cumulative.csv").exists());
}

#[test]
fn failures_exit_nonzero_with_diagnostic() {
    let missing = tagbrowse(&["ingest", "/nonexistent/collection.json"]);
    assert!(!missing.status.success());
    assert!(String::from_utf8_lossy(&missing.stderr).contains("error"));

    let unknown = tagbrowse(&["ingest", path(&spanish_art_doc()), "--frobnicate"]);
    assert!(!unknown.status.success());

    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.json");
    std::fs::write(&bad, r#"{"name": "x", "resources": [{"id": "a", "label": "A", "tags": [""]}]}"#).unwrap();
    let schema = tagbrowse(&["ingest", path(&bad)]);
    assert!(!schema.status.success());

    let trace = dir.path().join("trace.jsonl");
    std::fs::write(&trace, "{\"collection\":\"0000\",\"seed\":1,\"n\":1}\n").unwrap();
    let foreign = tagbrowse(&["replay", "--collection", path(&spanish_art_doc()), "--trace", path(&trace)]);
    assert!(!foreign.status.success());
}
