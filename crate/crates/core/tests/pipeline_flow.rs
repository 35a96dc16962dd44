use std::fs;
use std::sync::Arc;

use reqrag_core::config::SystemConfig;
use reqrag_core::ingest::ChunkStore;
use reqrag_core::lexical::Analyzer;
use reqrag_core::orchestrator::CostEntry;
use reqrag_core::pipeline::{build_indexes, ingest_file, Pipeline, PipelineError, QueryFlags};
use reqrag_core::provenance::ProvenanceStore;
use reqrag_core::synthetic::{documents_jsonl, paraphrase_benchmark, Benchmark};

struct Workspace {
    _dir: tempfile::TempDir,
    cfg: SystemConfig,
    bench: Benchmark,
}

fn workspace(n_docs: usize) -> Workspace {
    let dir = tempfile::tempdir().unwrap();
    let bench = paraphrase_benchmark(n_docs, 7, &Analyzer::default());
    let corpus = dir.path().join("corpus.jsonl");
    fs::write(&corpus, documents_jsonl(&bench.documents)).unwrap();
    let mut cfg = SystemConfig::default();
    cfg.paths.data_dir = dir.path().join("data");
    cfg.lexicon = bench.dense_lexicon().into_iter().collect();
    let stats = ingest_file(&corpus, &cfg).unwrap();
    assert_eq!((stats.documents, stats.chunks), (n_docs, 5 * n_docs));
    Workspace { _dir: dir, cfg, bench }
}

const NEW_DOC: &str = r#"{"doc_id":"NEW-1","version_timestamp":"2024-06-01","blocks":[{"kind":"heading","level":1,"text":"Scope"},{"kind":"paragraph","text":"The staged relay shall close within 5 ms."}]}"#;

#[test]
fn open_requires_an_index() {
    let ws = workspace(3);
    assert!(matches!(Pipeline::open(ws.cfg.clone()), Err(PipelineError::MissingIndex(_))));
    build_indexes(&ws.cfg, false).unwrap();
    assert_eq!(Pipeline::open(ws.cfg).unwrap().chunks().len(), 15);
}

#[test]
fn answers_persist_provenance_and_cost_before_returning() {
    let ws = workspace(10);
    build_indexes(&ws.cfg, false).unwrap();
    let p = Pipeline::open(ws.cfg.clone()).unwrap();
    let out = p.query(&ws.bench.queries[0].text, &QueryFlags::default()).unwrap();
    let answer = out.answer.unwrap();

    let on_disk = ProvenanceStore::open(&ws.cfg.paths.provenance_store()).unwrap();
    assert_eq!(on_disk.get(&answer.provenance_id).unwrap().query, ws.bench.queries[0].text);
    let ledger = fs::read_to_string(ws.cfg.paths.ledger_file()).unwrap();
    let entries: Vec<CostEntry> = ledger.lines().map(|l| serde_json::from_str(l).unwrap()).collect();
    assert_eq!(entries.len(), 1);
    assert_eq!(entries[0].query_id, answer.provenance_id);
    assert_eq!(entries[0].cost, answer.cost);
    assert_eq!(p.ledger().total(), answer.cost);
}

#[test]
fn dry_runs_do_not_generate_or_charge() {
    let ws = workspace(5);
    build_indexes(&ws.cfg, false).unwrap();
    let p = Pipeline::open(ws.cfg).unwrap();
    let flags = QueryFlags { dry_run: true, ..Default::default() };
    let out = p.query("relay", &flags).unwrap();
    assert!(out.answer.is_none());
    let m = p.metrics();
    assert_eq!((m.queries_served, m.dry_runs, p.ledger().len(), p.provenance().len()), (0, 1, 0, 0));
}

#[test]
fn dense_only_build_falls_back_and_rejects_sparse_only() {
    let ws = workspace(5);
    let manifest = build_indexes(&ws.cfg, true).unwrap();
    assert!(!manifest.lexical && manifest.vectors);
    assert!(!ws.cfg.paths.lexical_snapshot().exists());
    let p = Pipeline::open(ws.cfg).unwrap();
    assert!(p.lexical().is_none());
    let out = p.query(&ws.bench.queries.last().unwrap().text, &QueryFlags { dry_run: true, ..Default::default() }).unwrap();
    assert!(!out.sources.is_empty());
    assert!(out.sources.iter().all(|s| s.candidate.sparse_rank.is_none()));
    let err = p.query("relay", &QueryFlags { sparse_only: true, ..Default::default() }).unwrap_err();
    assert!(matches!(err, PipelineError::MissingIndex(_)));
}

#[test]
fn conflicting_flags_are_input_errors() {
    let ws = workspace(2);
    build_indexes(&ws.cfg, false).unwrap();
    let p = Pipeline::open(ws.cfg).unwrap();
    let err = p.query("relay", &QueryFlags { sparse_only: true, dense_only: true, ..Default::default() }).unwrap_err();
    assert!(matches!(err, PipelineError::Input(_)));
}

#[test]
fn staged_records_merge_on_next_build() {
    let ws = workspace(4);
    build_indexes(&ws.cfg, false).unwrap();
    let p = Pipeline::open(ws.cfg.clone()).unwrap();
    let ids = p.stage_record(NEW_DOC).unwrap();
    assert_eq!(ids, vec!["NEW-1#0000".to_string()]);
    assert!(matches!(p.stage_record(NEW_DOC), Err(PipelineError::Input(_))), "restaging accepted");
    let existing = NEW_DOC.replace("NEW-1", "SYN-0000");
    assert!(matches!(p.stage_record(&existing), Err(PipelineError::Input(_))), "live id accepted");
    assert!(matches!(p.stage_record("{"), Err(PipelineError::Input(_))));
    // live indexes are unchanged until a rebuild
    assert!(p.chunks().get("NEW-1#0000").is_none());
    drop(p);

    assert_eq!(build_indexes(&ws.cfg, false).unwrap().chunk_count, 21);
    assert!(!ws.cfg.paths.pending().exists());
    let p = Pipeline::open(ws.cfg).unwrap();
    let out = p.query("staged relay", &QueryFlags { dry_run: true, ..Default::default() }).unwrap();
    assert_eq!(out.sources[0].candidate.chunk_id, "NEW-1#0000");
}

#[test]
fn rebuild_is_byte_identical() {
    let ws = workspace(20);
    build_indexes(&ws.cfg, false).unwrap();
    let vec1 = fs::read(ws.cfg.paths.vector_snapshot()).unwrap();
    let lex1 = fs::read(ws.cfg.paths.lexical_snapshot()).unwrap();
    build_indexes(&ws.cfg, false).unwrap();
    assert!(vec1 == fs::read(ws.cfg.paths.vector_snapshot()).unwrap());
    assert!(lex1 == fs::read(ws.cfg.paths.lexical_snapshot()).unwrap());
}

#[test]
fn loaded_snapshots_rank_like_in_memory_indexes() {
    let ws = workspace(20);
    build_indexes(&ws.cfg, false).unwrap();
    let loaded = Pipeline::open(ws.cfg.clone()).unwrap();
    let fresh = Pipeline::in_memory(ws.cfg.clone(), ChunkStore::from_chunks(ws.bench.chunks.clone()).unwrap()).unwrap();
    let flags = QueryFlags { dry_run: true, ..Default::default() };
    for q in &ws.bench.queries {
        let a = loaded.query(&q.text, &flags).unwrap().sources;
        let b = fresh.query(&q.text, &flags).unwrap().sources;
        let ids = |s: &[reqrag_core::pipeline::Source]| s.iter().map(|s| s.candidate.chunk_id.clone()).collect::<Vec<_>>();
        assert_eq!(ids(&a), ids(&b), "{}", q.text);
    }
}

#[test]
fn concurrent_queries_keep_counters_consistent() {
    let ws = workspace(10);
    build_indexes(&ws.cfg, false).unwrap();
    let p = Arc::new(Pipeline::open(ws.cfg.clone()).unwrap());
    let queries: Vec<String> = ws.bench.queries.iter().map(|q| q.text.clone()).collect();
    std::thread::scope(|s| {
        for t in 0..4 {
            let p = Arc::clone(&p);
            let queries = &queries;
            s.spawn(move || {
                for q in queries.iter().skip(t).step_by(4) {
                    p.query(q, &QueryFlags::default()).unwrap();
                }
            });
        }
    });
    let m = p.metrics();
    assert_eq!(m.queries_served, queries.len() as u64);
    assert_eq!(m.per_tier.iter().sum::<u64>(), m.queries_served);
    assert_eq!(p.ledger().len(), queries.len());
    assert_eq!(m.ledger_total, m.ledger_by_tier.values().copied().sum());
    assert_eq!(ProvenanceStore::open(&ws.cfg.paths.provenance_store()).unwrap().len(), queries.len());
    assert_eq!(fs::read_to_string(ws.cfg.paths.ledger_file()).unwrap().lines().count(), queries.len());
}
