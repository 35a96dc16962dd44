//! One function per subcommand. Each writes its report to `out` so tests can
//! capture it.

use std::fs;
use std::io::Write;
use std::path::Path;

use anyhow::{anyhow, Context};
use reqrag_core::config::SystemConfig;
use reqrag_core::eval::{
    latency_stats, mann_whitney_u, parse_qrels, parse_run, query_ndcg, LatencySummary, MannWhitney, MetricsReport,
    Qrels, RunFile, DEFAULT_RELEVANCE_THRESHOLD,
};
use reqrag_core::fusion::{write_run, StageTimings};
use reqrag_core::ingest::{ChunkStore, IngestStats};
use reqrag_core::lexical::Analyzer;
use reqrag_core::money::Money;
use reqrag_core::orchestrator::CostEntry;
use reqrag_core::pipeline::{self, IndexManifest, Pipeline, QueryFlags, QueryOutcome};
use reqrag_core::provenance::verify_record;
use reqrag_core::synthetic;
use serde::Serialize;

use crate::{CliError, CliResult};

fn emit_json<T: Serialize>(out: &mut dyn Write, value: &T) -> CliResult<()> {
    serde_json::to_writer_pretty(&mut *out, value).map_err(CliError::operational)?;
    writeln!(out).map_err(CliError::operational)
}

fn w(out: &mut dyn Write, text: impl AsRef<str>) -> CliResult<()> {
    writeln!(out, "{}", text.as_ref()).map_err(CliError::operational)
}

fn require_file(path: &Path) -> CliResult<()> {
    if path.is_file() {
        Ok(())
    } else {
        Err(CliError::usage(anyhow!("file not found: {}", path.display())))
    }
}

fn read_file(path: &Path) -> CliResult<String> {
    require_file(path)?;
    fs::read_to_string(path).with_context(|| format!("reading {}", path.display())).map_err(CliError::operational)
}

pub fn ingest(cfg: &SystemConfig, corpus: &Path, json: bool, out: &mut dyn Write) -> CliResult<IngestStats> {
    require_file(corpus)?;
    let stats = pipeline::ingest_file(corpus, cfg)?;
    if json {
        emit_json(out, &stats)?;
    } else {
        w(out, format!("documents  {}", stats.documents))?;
        w(out, format!("chunks     {}", stats.chunks))?;
        w(out, format!("errors     {}", stats.errors.len()))?;
        let t = &stats.tokens;
        w(out, format!("tokens     min {} / mean {:.1} / sd {:.1} / max {}", t.min, t.mean, t.std_dev, t.max))?;
        for e in &stats.errors {
            let doc = e.doc_id.as_deref().map(|d| format!(" [{d}]")).unwrap_or_default();
            w(out, format!("  line {}{doc}: {}", e.line, e.message))?;
        }
        if stats.documents > 0 {
            w(out, format!("wrote {}", cfg.paths.chunks().display()))?;
        }
    }
    if stats.documents == 0 && !stats.errors.is_empty() {
        return Err(CliError::operational(anyhow!("every record failed; nothing ingested")));
    }
    Ok(stats)
}

pub fn index(cfg: &SystemConfig, dense_only: bool, out: &mut dyn Write) -> CliResult<IndexManifest> {
    let m = pipeline::build_indexes(cfg, dense_only)?;
    w(out, format!("indexed {} chunks", m.chunk_count))?;
    if m.lexical {
        w(out, format!("  lexical  {}", cfg.paths.lexical_snapshot().display()))?;
    } else {
        w(out, "  lexical  skipped (--dense-only)")?;
    }
    w(out, format!("  vectors  {} ({}/{})", cfg.paths.vector_snapshot().display(), m.embedding_provider, m.embedding_model))?;
    Ok(m)
}

fn score(v: Option<f64>) -> String {
    v.map_or_else(|| "-".into(), |s| format!("{s:.4}"))
}

pub fn render_outcome(o: &QueryOutcome, out: &mut dyn Write) -> CliResult<()> {
    w(out, format!("{:<3} {:>8} {:>8} {:>8} {:>8} {:>7}  source", "#", "final", "dense", "sparse", "rrf", "rerank"))?;
    for s in &o.sources {
        let c = &s.candidate;
        w(
            out,
            format!(
                "{:<3} {:>8.4} {:>8} {:>8} {:>8.4} {:>7}  {} ({} / {})",
                s.rank,
                c.final_score(),
                score(c.dense_score),
                score(c.sparse_score),
                c.rrf_score,
                score(c.rerank_score),
                c.chunk_id,
                s.doc_id,
                s.section_path.join(" > ")
            ),
        )?;
    }
    if o.sources.is_empty() {
        w(out, "(no sources)")?;
    }
    if let Some(a) = &o.answer {
        w(out, "")?;
        w(out, &a.text)?;
        w(out, "")?;
        w(
            out,
            format!(
                "provider {} / {} (tier {}, complexity {:.3}, attempts {}), cost ${}",
                a.provider_id, a.model_id, a.tier_id, a.complexity_score, a.attempts, a.cost
            ),
        )?;
        w(out, format!("provenance {}", a.provenance_id))?;
    }
    let t = &o.timings;
    w(
        out,
        format!(
            "timings ms: dense {:.2}, sparse {:.2}, fuse {:.2}, rerank {:.2}, total {:.2}",
            t.dense_ms, t.sparse_ms, t.fuse_ms, t.rerank_ms, t.total_ms
        ),
    )
}

pub fn query(cfg: SystemConfig, text: &str, flags: QueryFlags, json: bool, out: &mut dyn Write) -> CliResult<QueryOutcome> {
    let p = Pipeline::open(cfg)?;
    let outcome = p.query(text, &flags).map_err(|e| match e {
        pipeline::PipelineError::Fusion(_) => CliError::usage(e),
        other => other.into(),
    })?;
    if json {
        emit_json(out, &outcome)?;
    } else {
        render_outcome(&outcome, out)?;
    }
    Ok(outcome)
}

/// Retrieve for every `query_id<TAB>text` line and write a run file plus
/// per-query timings as JSONL.
pub fn batch(
    cfg: SystemConfig,
    queries: &Path,
    run_out: &Path,
    timings_out: Option<&Path>,
    flags: QueryFlags,
    out: &mut dyn Write,
) -> CliResult<usize> {
    let text = read_file(queries)?;
    let mut parsed = Vec::new();
    for (i, line) in text.lines().enumerate() {
        if line.trim().is_empty() || line.starts_with('#') {
            continue;
        }
        let (id, q) = line
            .split_once('\t')
            .ok_or_else(|| CliError::usage(anyhow!("{}:{}: expected `query_id<TAB>query`", queries.display(), i + 1)))?;
        parsed.push((id.trim().to_string(), q.trim().to_string()));
    }
    let p = Pipeline::open(cfg)?;
    let flags = QueryFlags { dry_run: true, ..flags };
    let mut run = Vec::new();
    let mut timings = Vec::new();
    for (id, q) in &parsed {
        let o = p.query(q, &flags)?;
        let cands: Vec<_> = o.sources.into_iter().map(|s| s.candidate).collect();
        write_run(&mut run, id, &cands).map_err(CliError::operational)?;
        timings.push(o.timings);
    }
    fs::write(run_out, run).with_context(|| format!("writing {}", run_out.display())).map_err(CliError::operational)?;
    if let Some(path) = timings_out {
        let body: String = timings.iter().map(|t| serde_json::to_string(t).expect("timings serialise") + "\n").collect();
        fs::write(path, body).with_context(|| format!("writing {}", path.display())).map_err(CliError::operational)?;
    }
    w(out, format!("wrote {} queries to {}", parsed.len(), run_out.display()))?;
    Ok(parsed.len())
}

#[derive(Debug, Clone, Serialize)]
pub struct Comparison {
    pub metric: &'static str,
    pub baseline: MetricsReport,
    pub test: MannWhitney,
}

#[derive(Debug, Clone, Serialize)]
pub struct EvalReport {
    pub metrics: MetricsReport,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub latency: Option<LatencySummary>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub comparison: Option<Comparison>,
}

/// NDCG@10 for every judged query, in qrels order; judged queries the run
/// skipped score 0.
fn per_query_ndcg(run: &RunFile, qrels: &Qrels) -> CliResult<Vec<f64>> {
    for q in run.rankings.keys() {
        qrels.query(q).map_err(CliError::usage)?;
    }
    Ok(qrels
        .judgments
        .iter()
        .map(|(q, grades)| run.rankings.get(q).map_or(0.0, |r| query_ndcg(r, grades, 10)))
        .collect())
}

fn load_run(path: &Path) -> CliResult<RunFile> {
    parse_run(&read_file(path)?).map_err(|e| CliError::usage(anyhow!("{}: {e}", path.display())))
}

pub fn read_timings(path: &Path) -> CliResult<Vec<StageTimings>> {
    read_file(path)?
        .lines()
        .enumerate()
        .filter(|(_, l)| !l.trim().is_empty())
        .map(|(i, l)| {
            serde_json::from_str(l).map_err(|e| CliError::usage(anyhow!("{}: line {}: {e}", path.display(), i + 1)))
        })
        .collect()
}

pub struct EvalArgs<'a> {
    pub run: &'a Path,
    pub qrels: &'a Path,
    pub baseline: Option<&'a Path>,
    pub timings: Option<&'a Path>,
    pub threshold: u8,
    pub json: bool,
}

impl<'a> EvalArgs<'a> {
    pub fn new(run: &'a Path, qrels: &'a Path) -> Self {
        Self { run, qrels, baseline: None, timings: None, threshold: DEFAULT_RELEVANCE_THRESHOLD, json: false }
    }
}

pub fn eval(args: &EvalArgs<'_>, out: &mut dyn Write) -> CliResult<EvalReport> {
    let run = load_run(args.run)?;
    let qrels = parse_qrels(&read_file(args.qrels)?)
        .map_err(|e| CliError::usage(anyhow!("{}: {e}", args.qrels.display())))?;
    let metrics = MetricsReport::compute(&run, &qrels, args.threshold).map_err(CliError::usage)?;
    let latency = match args.timings {
        Some(p) => Some(latency_stats(&read_timings(p)?).map_err(CliError::usage)?),
        None => None,
    };
    let comparison = match args.baseline {
        Some(p) => {
            let base = load_run(p)?;
            let baseline = MetricsReport::compute(&base, &qrels, args.threshold).map_err(CliError::usage)?;
            let test = mann_whitney_u(&per_query_ndcg(&run, &qrels)?, &per_query_ndcg(&base, &qrels)?)
                .map_err(CliError::usage)?;
            Some(Comparison { metric: "ndcg@10", baseline, test })
        }
        None => None,
    };
    let report = EvalReport { metrics, latency, comparison };
    if args.json {
        emit_json(out, &report)?;
        return Ok(report);
    }
    let m = &report.metrics;
    w(out, format!("queries   {}", m.queries))?;
    w(out, format!("MRR       {:.4}", m.mrr))?;
    w(out, format!("P@5       {:.4}", m.p_at_5))?;
    w(out, format!("NDCG@10   {:.4}", m.ndcg_at_10))?;
    if let Some(l) = &report.latency {
        w(out, "")?;
        w(out, format!("latency over {} queries (ms)   mean      p50      p95", l.count))?;
        for (name, s) in
            [("dense", l.dense_ms), ("sparse", l.sparse_ms), ("fuse", l.fuse_ms), ("rerank", l.rerank_ms), ("total", l.total_ms)]
        {
            w(out, format!("  {name:<26} {:>8.2} {:>8.2} {:>8.2}", s.mean, s.p50, s.p95))?;
        }
    }
    if let Some(c) = &report.comparison {
        w(out, "")?;
        w(out, "comparison against baseline run (per-query NDCG@10, Mann-Whitney U)")?;
        w(out, format!("  baseline  MRR {:.4}  P@5 {:.4}  NDCG@10 {:.4}", c.baseline.mrr, c.baseline.p_at_5, c.baseline.ndcg_at_10))?;
        w(
            out,
            format!(
                "  U = {}  p = {:.4}  ({:?}, n = {} vs {})",
                c.test.u, c.test.p_value, c.test.method, c.test.n_a, c.test.n_b
            ),
        )?;
    }
    Ok(report)
}

pub fn provenance(cfg: &SystemConfig, id: &str, verify: bool, out: &mut dyn Write) -> CliResult<bool> {
    let path = cfg.paths.provenance_store();
    require_file(&path)?;
    let store = reqrag_core::provenance::ProvenanceStore::open(&path).map_err(CliError::operational)?;
    let record = store.get(id).ok_or_else(|| CliError::operational(anyhow!("no provenance record {id:?}")))?;
    if !verify {
        emit_json(out, &record)?;
        return Ok(true);
    }
    let chunks = ChunkStore::load(&cfg.paths.chunks()).context("loading chunk store").map_err(CliError::operational)?;
    let report = verify_record(&record, &chunks);
    emit_json(out, &report)?;
    Ok(report.is_verified())
}

#[derive(Debug, Clone, Serialize)]
pub struct LedgerSummary {
    pub entries: usize,
    pub total: Money,
    pub mean_per_query: Option<Money>,
    pub by_tier: std::collections::BTreeMap<u8, Money>,
}

pub fn ledger(cfg: &SystemConfig, json: bool, out: &mut dyn Write) -> CliResult<LedgerSummary> {
    let path = cfg.paths.ledger_file();
    let text = if path.exists() { read_file(&path)? } else { String::new() };
    let mut entries = Vec::new();
    for (i, l) in text.lines().enumerate().filter(|(_, l)| !l.trim().is_empty()) {
        let e: CostEntry = serde_json::from_str(l)
            .map_err(|e| CliError::operational(anyhow!("{}: line {}: {e}", path.display(), i + 1)))?;
        entries.push(e);
    }
    let total: Money = entries.iter().map(|e| e.cost).sum();
    let mut by_tier = std::collections::BTreeMap::new();
    for e in &entries {
        *by_tier.entry(e.tier_id).or_insert(Money::ZERO) += e.cost;
    }
    let mean_per_query = (!entries.is_empty()).then(|| total.mul_div(1, entries.len() as i128));
    let summary = LedgerSummary { entries: entries.len(), total, mean_per_query, by_tier };
    if json {
        emit_json(out, &summary)?;
    } else {
        w(out, format!("entries  {}", summary.entries))?;
        w(out, format!("total    ${}", summary.total))?;
        if let Some(m) = summary.mean_per_query {
            w(out, format!("mean     ${m}"))?;
        }
        for (tier, cost) in &summary.by_tier {
            w(out, format!("tier {tier}   ${cost}"))?;
        }
    }
    Ok(summary)
}

/// Write the synthetic paraphrase benchmark as a ready-to-run project:
/// corpus, queries, qrels and a config carrying the synonym lexicon.
pub fn demo_data(dir: &Path, docs: usize, seed: u64, out: &mut dyn Write) -> CliResult<()> {
    fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display())).map_err(CliError::operational)?;
    let bench = synthetic::paraphrase_benchmark(docs, seed, &Analyzer::default());
    let write = |name: &str, body: String| -> CliResult<()> {
        let p = dir.join(name);
        fs::write(&p, body).with_context(|| format!("writing {}", p.display())).map_err(CliError::operational)
    };
    write("corpus.jsonl", synthetic::documents_jsonl(&bench.documents))?;
    write("queries.tsv", bench.queries.iter().map(|q| format!("{}\t{}\n", q.query_id, q.text)).collect())?;
    let mut qrels = String::from("# query_id\tchunk_id\tgrade\n");
    for q in &bench.queries {
        qrels.push_str(&format!("{}\t{}\t4\n", q.query_id, q.target));
    }
    write("qrels.tsv", qrels)?;
    let mut lexicon: Vec<_> = bench.synonym_lexicon().into_iter().collect();
    lexicon.sort();
    let mut config = String::from("[paths]\ndata_dir = \"data\"\n\n[lexicon]\n");
    for (k, v) in lexicon {
        config.push_str(&format!("{k} = \"{v}\"\n"));
    }
    write("reqrag.toml", config)?;
    w(out, format!("wrote {} documents and {} queries to {}", bench.documents.len(), bench.queries.len(), dir.display()))
}
