use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use factcheck_core::bundled;

fn factcheck(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_factcheck"))
        .args(args)
        .env_remove("FAKTA_CONFIG")
        .env_remove("FAKTA_SEARCH_KEY")
        .output()
        .unwrap()
}

fn ok(args: &[&str]) -> String {
    let out = factcheck(args);
    assert!(out.status.success(), "{args:?}: {}", String::from_utf8_lossy(&out.stderr));
    String::from_utf8(out.stdout).unwrap()
}

fn synthetic(file: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../core/data/synthetic").join(file)
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn index_and_search() {
    let dir = tempfile::tempdir().unwrap();
    let corpus = dir.path().join("corpus.jsonl");
    std::fs::write(
        &corpus,
        concat!(
            r#"{"doc_id":"d1","title":"One","body":"the cat sat"}"#,
            "\n",
            r#"{"doc_id":"d2","title":"Two","body":"the dog sat"}"#,
            "\n",
            r#"{"doc_id":"d3","title":"Three","body":"cat cat cat"}"#,
            "\n"
        ),
    )
    .unwrap();
    let index = dir.path().join("index");
    let stats = ok(&["index", "build", s(&corpus), s(&index)]);
    assert!(stats.starts_with("documents 3"), "{stats}");
    assert_eq!(ok(&["index", "stats", s(&index)]), stats);

    let out = ok(&["search", s(&index), "cat", "--model", "bm25"]);
    let hits: Vec<&str> = out.lines().skip(1).collect();
    assert_eq!(out.lines().next(), Some("query: cat"));
    assert_eq!(hits.len(), 2, "{out}");
    assert!(hits[0].contains("d3"));

    let out = ok(&["search", s(&index), "cat", "--k", "1", "--rerank"]);
    assert_eq!(out.lines().count(), 2);

    assert!(!factcheck(&["search", s(&index), "cat", "--model", "okapi"]).status.success());
    assert!(!factcheck(&["search", s(&index), "the", "--k", "3"]).status.success());
}

#[test]
fn check_requires_a_config() {
    let out = factcheck(&["check", bundled::SUPPORTED_CLAIM]);
    assert_eq!(out.status.code(), Some(2));

    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("factcheck.toml");
    std::fs::write(&cfg, "k = 5\n").unwrap();
    let json = ok(&["check", bundled::SUPPORTED_CLAIM, "--config", s(&cfg), "--json"]);
    let v: serde_json::Value = serde_json::from_str(&json).unwrap();
    assert_eq!(v["verdict"]["label"], "SUP");
    assert!(v.get("timing").is_none());
    assert_eq!(ok(&["check", bundled::SUPPORTED_CLAIM, "--config", s(&cfg), "--json"]), json);

    let out = Command::new(env!("CARGO_BIN_EXE_factcheck"))
        .args(["check", bundled::NO_OVERLAP_CLAIM])
        .env("FAKTA_CONFIG", &cfg)
        .output()
        .unwrap();
    assert!(out.status.success());
    assert!(String::from_utf8_lossy(&out.stdout).contains("verdict: NEI"));

    let missing = dir.path().join("absent.toml");
    let out = factcheck(&["check", "x", "--config", s(&missing)]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).starts_with("error:"));
}

#[test]
fn stance_training_is_deterministic() {
    let dir = tempfile::tempdir().unwrap();
    let data = dir.path().join("toy.jsonl");
    ok(&["stance", "toy-data", "--out", s(&data), "--per-label", "20"]);
    assert_eq!(std::fs::read_to_string(&data).unwrap().lines().count(), 80);

    let a = dir.path().join("a.bin");
    let b = dir.path().join("b.bin");
    let report = ok(&["stance", "train", s(&data), "--out", s(&a), "--seed", "0", "--epochs", "5"]);
    assert!(report.contains("trained on 80 examples"), "{report}");
    ok(&["stance", "train", s(&data), "--out", s(&b), "--seed", "0", "--epochs", "5"]);
    assert_eq!(std::fs::read(&a).unwrap(), std::fs::read(&b).unwrap());
}

#[test]
fn synth_matches_shipped_data() {
    let dir = tempfile::tempdir().unwrap();
    ok(&["synth", "--out", s(dir.path())]);
    for f in ["corpus.jsonl", "claims.jsonl"] {
        assert!(std::fs::read(dir.path().join(f)).unwrap() == std::fs::read(synthetic(f)).unwrap(), "{f}");
    }
}

#[test]
fn retrieval_evaluation() {
    let dir = tempfile::tempdir().unwrap();
    let csv = dir.path().join("table.csv");
    let out = ok(&[
        "eval",
        "retrieval",
        "--corpus",
        s(&synthetic("corpus.jsonl")),
        "--claims",
        s(&synthetic("claims.jsonl")),
        "--models",
        "bm25,classic",
        "--ks",
        "1,5",
        "--csv",
        s(&csv),
    ]);
    assert!(out.contains("claims"), "{out}");
    let table = std::fs::read_to_string(&csv).unwrap();
    // header plus 2 models x 3 variants
    assert_eq!(table.lines().count(), 7, "{table}");
}

#[test]
fn pipeline_evaluation() {
    let dir = tempfile::tempdir().unwrap();
    let claims = dir.path().join("claims.jsonl");
    let lines = [
        (bundled::SUPPORTED_CLAIM, "SUPPORTS", vec!["https://en.wikipedia.org/wiki/Eiffel_Tower"]),
        (bundled::REFUTED_CLAIM, "REFUTES", vec!["https://en.wikipedia.org/wiki/Great_Wall_of_China"]),
        (bundled::NO_OVERLAP_CLAIM, "NOT ENOUGH INFO", vec![]),
    ]
    .iter()
    .enumerate()
    .map(|(i, (c, l, ev))| serde_json::json!({ "id": i, "claim": c, "label": l, "evidence": ev }).to_string())
    .collect::<Vec<_>>()
    .join("\n");
    std::fs::write(&claims, lines).unwrap();

    let report = dir.path().join("report.json");
    let out = ok(&["eval", "pipeline", "--claims", s(&claims), "--json", s(&report)]);
    assert!(out.starts_with("3lbl"), "{out}");
    let v: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(&report).unwrap()).unwrap();
    assert_eq!(v["predictions"].as_array().unwrap().len(), 3);

    let out = ok(&["eval", "pipeline", "--claims", s(&claims), "--label-mode", "2lbl"]);
    assert!(out.contains("1 NEI claims skipped"), "{out}");

    let out = ok(&["eval", "pipeline", "--claims", s(&claims), "--dev", s(&claims), "--grid", "1,2"]);
    assert!(out.starts_with("tuned NEI threshold"), "{out}");
}
