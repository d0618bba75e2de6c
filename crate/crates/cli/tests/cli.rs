use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use evarena::corpus::read_corpus;
use evarena::eval::{qa_accuracy, EvidenceSource};
use evarena::judges::{JudgeConfig, JudgeKind};

fn fixture(rel: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../core/fixtures").join(rel)
}

fn evarena(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_evarena")).args(args).output().unwrap()
}

fn ok(args: &[&str]) -> String {
    let out = evarena(args);
    assert!(out.status.success(), "{args:?}: {}", String::from_utf8_lossy(&out.stderr));
    String::from_utf8(out.stdout).unwrap()
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

fn ingest(dir: &Path) -> (PathBuf, PathBuf) {
    let race = dir.join("race.jsonl");
    let dream = dir.join("dream.jsonl");
    ok(&["ingest", "race", "--input", s(&fixture("race")), "--out", s(&race)]);
    ok(&["ingest", "dream", "--input", s(&fixture("dream/test.json")), "--out", s(&dream)]);
    (race, dream)
}

#[test]
fn matrix_is_byte_identical() {
    let dir = tempfile::tempdir().unwrap();
    let (race, _) = ingest(dir.path());
    let args = ["matrix", "--corpus", s(&race), "--judge", "tfidf-sa", "--agent", "search", "--seed", "7"];
    let first = ok(&args);
    assert_eq!(first, ok(&args));
    let mut parallel = args.to_vec();
    parallel.extend(["--jobs", "3"]);
    assert_eq!(first, ok(&parallel));
    let lines: Vec<&str> = first.lines().collect();
    assert_eq!(lines[0], "agent_id,judge_id,rate,count,hits,failures");
    assert!(lines[1].starts_with("no-evidence,tfidf-sa,0.25,88,22,0"));
    assert!(lines[2].starts_with("search:tfidf-sa,tfidf-sa,"));
}

#[test]
fn generalize_sweeps_turns() {
    let dir = tempfile::tempdir().unwrap();
    let (race, _) = ingest(dir.path());
    let report = dir.path().join("gen.json");
    let csv = ok(&[
        "generalize", "--corpus", s(&race), "--train-max-sentences", "12", "--eval-min-sentences", "27",
        "--turns", "3..6", "--out", s(&report),
    ]);
    let header: Vec<&str> = csv.lines().next().unwrap().split(',').collect();
    let (mode, turns) = (
        header.iter().position(|h| *h == "mode").unwrap(),
        header.iter().position(|h| *h == "turns").unwrap(),
    );
    let rr: Vec<String> = csv
        .lines()
        .skip(1)
        .map(|l| l.split(',').collect::<Vec<_>>())
        .filter(|c| c[mode] == "round-robin")
        .map(|c| c[turns].to_string())
        .collect();
    assert_eq!(rr, ["3", "4", "5", "6"]);
    let json: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(report).unwrap()).unwrap();
    assert_eq!(json["provenance"]["idf_document_count"], 2);
}

#[test]
fn accuracy_none_matches_module() {
    let dir = tempfile::tempdir().unwrap();
    let (race, dream) = ingest(dir.path());
    for corpus_path in [race, dream] {
        let csv = ok(&["accuracy", "--corpus", s(&corpus_path), "--judge", "tfidf-sqa", "--mode", "none"]);
        let mut reader = csv::Reader::from_reader(csv.as_bytes());
        let row: std::collections::HashMap<String, String> = reader.deserialize().next().unwrap().unwrap();

        let corpus = read_corpus(&corpus_path).unwrap();
        let idf = evarena::corpus::build_idf(&corpus.passages, None, "x").unwrap();
        let judge = JudgeConfig::new(JudgeKind::TfidfSqa).with_idf(idf.into()).build().unwrap();
        let direct = qa_accuracy(judge.as_ref(), &corpus, &EvidenceSource::None, 1);
        assert_eq!(row["mode"], "none");
        assert_eq!(row["accuracy"].parse::<f64>().unwrap(), direct.accuracy);
        assert_eq!(row["correct"].parse::<usize>().unwrap(), direct.correct);
        assert_eq!(row["evaluated"].parse::<usize>().unwrap(), direct.evaluated);
        assert_eq!(row["mean_sentences"].parse::<f64>().unwrap(), 0.0);
    }
}

#[test]
fn usage_errors_exit_two() {
    let unknown = evarena(&["matrix", "--no-such-flag"]);
    assert_eq!(unknown.status.code(), Some(2));
    let missing = evarena(&["accuracy", "--corpus", "/nonexistent/corpus.jsonl"]);
    assert_eq!(missing.status.code(), Some(2));
    let stderr = String::from_utf8(missing.stderr).unwrap();
    assert!(stderr.lines().next().unwrap().starts_with("error[usage]: missing input"));
    assert_eq!(evarena(&["generalize", "--corpus", "x", "--turns", "6..3"]).status.code(), Some(2));
    assert_eq!(evarena(&[]).status.code(), Some(2));
}

#[test]
fn runtime_errors_are_one_line() {
    let dir = tempfile::tempdir().unwrap();
    let (race, _) = ingest(dir.path());
    // embedding judge without vectors
    let out = evarena(&["accuracy", "--corpus", s(&race), "--judge", "embedding-sa"]);
    assert_eq!(out.status.code(), Some(1));
    let stderr = String::from_utf8(out.stderr).unwrap();
    assert_eq!(stderr.lines().count(), 1, "{stderr}");
    assert!(stderr.starts_with("error[judge]:"));
}

#[test]
fn learned_pipeline() {
    let dir = tempfile::tempdir().unwrap();
    let (race, _) = ingest(dir.path());
    let p = |name: &str| dir.path().join(name);
    let emb = fixture("embeddings.txt");
    let idf = p("idf.json");
    ok(&["build-idf", "--corpus", s(&race), "--out", s(&idf)]);
    let common = ["--corpus", s(&race), "--idf", s(&idf), "--embeddings", s(&emb)];
    let with = |head: &[&str], tail: &[&str]| -> Vec<String> {
        head.iter().chain(common.iter()).chain(tail.iter()).map(|x| x.to_string()).collect()
    };
    let run = |v: Vec<String>| ok(&v.iter().map(String::as_str).collect::<Vec<_>>());
    run(with(&["precompute-targets"], &["--judge", "tfidf-sa", "--out", s(&p("t.jsonl"))]));
    let targets = evarena::agents::read_targets(&p("t.jsonl")).unwrap();
    assert_eq!(targets.len(), 88);
    run(with(
        &["train-scorer"],
        &["--targets", s(&p("t.jsonl")), "--objective", "search-ce", "--out", s(&p("m.txt")), "--report", s(&p("r.json"))],
    ));
    let report: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(p("r.json")).unwrap()).unwrap();
    assert_eq!(report["objective"], "search-ce");
    let buckets = run(with(&["report", "buckets"], &["--model", s(&p("m.txt")), "--targets", s(&p("t.jsonl"))]));
    assert_eq!(buckets.lines().count(), 1 + 4);

    let selected = run(with(&["select"], &["--agent", "learned", "--model", s(&p("m.txt")), "--turns", "2"]));
    assert_eq!(selected.lines().count(), 88);
    let row: serde_json::Value = serde_json::from_str(selected.lines().next().unwrap()).unwrap();
    assert_eq!(row["agent_id"], "learned:search-ce");
    assert!(row["sentence_indices"].as_array().unwrap().len() == 2);

    run(with(&["compete"], &["--protocol", "rr", "--turns", "2", "--out", s(&p("rr.jsonl"))]));
    let log = evarena::arena::read_arena_log(&p("rr.jsonl")).unwrap();
    assert_eq!(log.len(), 22);
    let ffa = run(with(&["compete"], &["--protocol", "ffa", "--agent", "answer-free:first-n"]));
    assert_eq!(ffa.lines().count(), 22);

    let pool = run(with(&["accuracy"], &["--mode", "agent-pool", "--agent", "search:embedding-sa", "--turns", "2"]));
    assert!(pool.contains("agent-pool") && pool.contains("search:embedding-sa"));
}

#[test]
fn human_agreement_report() {
    let dir = tempfile::tempdir().unwrap();
    let (_, dream) = ingest(dir.path());
    let responses = dir.path().join("h.jsonl");
    std::fs::write(
        &responses,
        "{\"example_id\":\"test/1-101#0\",\"answer_index\":0,\"choice\":0}\n{\"example_id\":\"test/1-101#0\",\"answer_index\":0,\"choice\":2}\n",
    )
    .unwrap();
    let csv = ok(&["report", "human", "--corpus", s(&dream), "--responses", s(&responses)]);
    let lines: Vec<&str> = csv.lines().collect();
    assert_eq!(lines.len(), 2, "{csv}");
    assert!(lines[1].starts_with("test/1-101#0,0,"));
    assert!(lines[1].ends_with(",0.5,2"));
}
