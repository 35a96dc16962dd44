use std::path::{Path, PathBuf};

use reqrag_cli::commands::{self, EvalArgs};
use reqrag_cli::{load_config, CliError};
use reqrag_core::config::SystemConfig;
use reqrag_core::pipeline::QueryFlags;

struct Demo {
    dir: tempfile::TempDir,
    cfg: SystemConfig,
}

impl Demo {
    fn path(&self, name: &str) -> PathBuf {
        self.dir.path().join(name)
    }
}

fn demo(indexed: bool) -> Demo {
    let dir = tempfile::tempdir().unwrap();
    let mut sink = Vec::new();
    commands::demo_data(dir.path(), 50, 7, &mut sink).unwrap();
    let cfg = load_config(Some(&dir.path().join("reqrag.toml"))).unwrap();
    assert_eq!(cfg.paths.data_dir, dir.path().join("data"));
    let stats = commands::ingest(&cfg, &dir.path().join("corpus.jsonl"), false, &mut sink).unwrap();
    assert_eq!((stats.documents, stats.chunks, stats.errors.len()), (50, 250, 0));
    if indexed {
        commands::index(&cfg, false, &mut sink).unwrap();
    }
    Demo { dir, cfg }
}

fn text(buf: Vec<u8>) -> String {
    String::from_utf8(buf).unwrap()
}

fn batch_and_eval(d: &Demo, name: &str, flags: QueryFlags) -> commands::EvalReport {
    let run = d.path(&format!("{name}.run"));
    let timings = d.path(&format!("{name}.timings.jsonl"));
    let mut out = Vec::new();
    let n = commands::batch(d.cfg.clone(), &d.path("queries.tsv"), &run, Some(&timings), flags, &mut out).unwrap();
    assert_eq!(n, 40);
    let qrels = d.path("qrels.tsv");
    let args = EvalArgs { timings: Some(&timings), ..EvalArgs::new(&run, &qrels) };
    commands::eval(&args, &mut Vec::new()).unwrap()
}

#[test]
fn query_answers_and_records_provenance() {
    let d = demo(true);
    let mut out = Vec::new();
    let outcome = commands::query(d.cfg.clone(), "which mover frame grip", QueryFlags::default(), false, &mut out).unwrap();
    let printed = text(out);
    let answer = outcome.answer.unwrap();
    assert!(printed.contains(&answer.provenance_id), "{printed}");
    assert!(printed.contains("SYN-"), "{printed}");

    let mut out = Vec::new();
    assert!(commands::provenance(&d.cfg, &answer.provenance_id, true, &mut out).unwrap());
    let report: serde_json::Value = serde_json::from_slice(&out).unwrap();
    assert_eq!(report["failures"].as_array().unwrap().len(), 0);
    assert_eq!(report["checked"].as_u64().unwrap() as usize, outcome.sources.len());

    let summary = commands::ledger(&d.cfg, false, &mut Vec::new()).unwrap();
    assert_eq!(summary.entries, 1);
    assert_eq!(summary.total, answer.cost);
}

#[test]
fn json_query_output_parses() {
    let d = demo(true);
    let mut out = Vec::new();
    let flags = QueryFlags { dry_run: true, ..Default::default() };
    commands::query(d.cfg.clone(), "relay limit", flags, true, &mut out).unwrap();
    let v: serde_json::Value = serde_json::from_slice(&out).unwrap();
    assert!(v["answer"].is_null());
    assert_eq!(v["sources"].as_array().unwrap().len(), d.cfg.fusion.final_k);
    assert!(v["sources"][0]["rrf_score"].is_number());
}

#[test]
fn hybrid_beats_sparse_only_on_the_demo_set() {
    let d = demo(true);
    let sparse = batch_and_eval(&d, "sparse", QueryFlags { sparse_only: true, no_rerank: true, ..Default::default() });
    let hybrid = batch_and_eval(&d, "hybrid", QueryFlags::default());
    assert_eq!((sparse.metrics.queries, hybrid.metrics.queries), (40, 40));
    assert!(hybrid.metrics.mrr > sparse.metrics.mrr, "{} vs {}", hybrid.metrics.mrr, sparse.metrics.mrr);
    assert!(hybrid.metrics.ndcg_at_10 > sparse.metrics.ndcg_at_10);
    let latency = hybrid.latency.unwrap();
    assert_eq!(latency.count, 40);

    let (run, base, qrels) = (d.path("hybrid.run"), d.path("sparse.run"), d.path("qrels.tsv"));
    let args = EvalArgs { baseline: Some(&base), ..EvalArgs::new(&run, &qrels) };
    let mut out = Vec::new();
    let report = commands::eval(&args, &mut out).unwrap();
    let cmp = report.comparison.unwrap();
    assert_eq!((cmp.test.n_a, cmp.test.n_b), (40, 40));
    assert_eq!(cmp.baseline.mrr, sparse.metrics.mrr);
    assert!(cmp.test.p_value < 0.05, "p = {}", cmp.test.p_value);
    assert!(text(out).contains("Mann-Whitney"));
}

#[test]
fn eval_rejects_run_queries_without_judgments() {
    let d = demo(false);
    let run = d.path("stray.run");
    std::fs::write(&run, "q99\tSYN-0000#0000\t1\t0.5\t-\t-\t0.5\t-\n").unwrap();
    let qrels = d.path("qrels.tsv");
    let err = commands::eval(&EvalArgs::new(&run, &qrels), &mut Vec::new()).unwrap_err();
    assert_eq!(err.code, CliError::USAGE);
    assert!(err.to_string().contains("q99"), "{err}");
}

#[test]
fn missing_index_is_operational() {
    let d = demo(false);
    let err = commands::query(d.cfg.clone(), "relay", QueryFlags::default(), false, &mut Vec::new()).unwrap_err();
    assert_eq!(err.code, CliError::OPERATIONAL);
    assert!(err.to_string().contains("reqrag index"), "{err}");
}

#[test]
fn dense_only_index_refuses_sparse_only_queries() {
    let d = demo(false);
    let mut out = Vec::new();
    let m = commands::index(&d.cfg, true, &mut out).unwrap();
    assert!(!m.lexical);
    assert!(text(out).contains("skipped"));
    let flags = QueryFlags { sparse_only: true, dry_run: true, ..Default::default() };
    let err = commands::query(d.cfg.clone(), "relay", flags, false, &mut Vec::new()).unwrap_err();
    assert_eq!(err.code, CliError::OPERATIONAL);
    let flags = QueryFlags { dry_run: true, ..Default::default() };
    assert!(!commands::query(d.cfg.clone(), "relay", flags, false, &mut Vec::new()).unwrap().sources.is_empty());
}

#[test]
fn ingest_reports_bad_lines_and_keeps_good_ones() {
    let dir = tempfile::tempdir().unwrap();
    let mut cfg = SystemConfig::default();
    cfg.paths.data_dir = dir.path().join("data");
    let corpus = dir.path().join("c.jsonl");
    let good = r#"{"doc_id":"A","version_timestamp":"2020-01-01","blocks":[{"kind":"paragraph","text":"Valve shall close."}]}"#;
    std::fs::write(&corpus, format!("{good}\n{{broken\n")).unwrap();
    let mut out = Vec::new();
    let stats = commands::ingest(&cfg, &corpus, false, &mut out).unwrap();
    assert_eq!((stats.documents, stats.errors.len()), (1, 1));
    assert!(text(out).contains("line 2"));

    std::fs::write(&corpus, "{broken\n").unwrap();
    let err = commands::ingest(&cfg, &corpus, true, &mut Vec::new()).unwrap_err();
    assert_eq!(err.code, CliError::OPERATIONAL);
    let err = commands::ingest(&cfg, Path::new("/nonexistent/corpus.jsonl"), false, &mut Vec::new()).unwrap_err();
    assert_eq!(err.code, CliError::USAGE);
}

#[test]
fn batch_rejects_malformed_query_lines() {
    let d = demo(true);
    let queries = d.path("bad.tsv");
    std::fs::write(&queries, "q1 no tab here\n").unwrap();
    let err = commands::batch(d.cfg.clone(), &queries, &d.path("x.run"), None, QueryFlags::default(), &mut Vec::new())
        .unwrap_err();
    assert_eq!(err.code, CliError::USAGE);
}

#[test]
fn bad_config_is_a_usage_error() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("reqrag.toml");
    std::fs::write(&path, "[fusion]\nk_rrf = 0.0\n").unwrap();
    assert_eq!(load_config(Some(&path)).unwrap_err().code, CliError::USAGE);
    std::fs::write(&path, "[nonsense]\n").unwrap();
    assert_eq!(load_config(Some(&path)).unwrap_err().code, CliError::USAGE);
}
