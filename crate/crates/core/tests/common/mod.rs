#![allow(dead_code)]

use std::collections::HashMap;

use reqrag_core::embedding::HashedBagProvider;
use reqrag_core::eval::{MetricsReport, RunFile};
use reqrag_core::fusion::{hybrid_search, FusionConfig, SearchContext, StageTimings, TokenOverlapScorer};
use reqrag_core::ingest::ChunkStore;
use reqrag_core::lexical::{Analyzer, Bm25Params, InvertedIndex};
use reqrag_core::synthetic::{paraphrase_benchmark, Benchmark, QueryKind};
use reqrag_core::vector::{HnswGraph, HnswParams};
use reqrag_core::embedding::EmbeddingProvider;

/// Indexes over the paraphrase benchmark: a dense side that folds synonyms and
/// codes, a lexical side on raw tokens, and an overlap reranker that folds
/// synonyms only.
pub struct BenchmarkRig {
    pub bench: Benchmark,
    pub analyzer: Analyzer,
    pub store: ChunkStore,
    pub lexical: InvertedIndex,
    pub graph: HnswGraph,
    pub provider: HashedBagProvider,
    pub scorer: TokenOverlapScorer,
    pub bm25: Bm25Params,
}

impl BenchmarkRig {
    pub fn new(n_docs: usize, seed: u64) -> Self {
        let analyzer = Analyzer::default();
        let bench = paraphrase_benchmark(n_docs, seed, &analyzer);
        let store = ChunkStore::from_chunks(bench.chunks.clone()).unwrap();
        let lexical =
            InvertedIndex::build(store.iter().map(|c| (c.chunk_id.as_str(), c.text.as_str())), &analyzer).unwrap();
        let provider = HashedBagProvider::new(analyzer.clone()).with_lexicon(bench.dense_lexicon());
        let mut graph = HnswGraph::new(HnswParams::default()).unwrap();
        for c in store.iter() {
            graph.insert(c.chunk_id.clone(), provider.embed(&c.text).unwrap()).unwrap();
        }
        let scorer = TokenOverlapScorer::new(analyzer.clone()).with_lexicon(bench.synonym_lexicon());
        Self { bench, analyzer, store, lexical, graph, provider, scorer, bm25: Bm25Params::default() }
    }

    pub fn context(&self) -> SearchContext<'_> {
        SearchContext {
            lexical: Some(&self.lexical),
            analyzer: &self.analyzer,
            bm25: &self.bm25,
            vectors: Some(&self.graph),
            provider: &self.provider,
            scorer: Some(&self.scorer),
            chunks: &self.store,
        }
    }

    pub fn run(&self, cfg: &FusionConfig, kind: Option<QueryKind>) -> (RunFile, Vec<StageTimings>) {
        let ctx = self.context();
        let mut rankings = Vec::new();
        let mut timings = Vec::new();
        for q in self.bench.queries.iter().filter(|q| kind.is_none_or(|k| q.kind == k)) {
            let (cands, t) = hybrid_search(&q.text, &ctx, cfg).unwrap();
            rankings.push((q.query_id.clone(), cands.into_iter().map(|c| (c.chunk_id.clone(), c.final_score())).collect::<Vec<_>>()));
            timings.push(t);
        }
        (RunFile::from_rankings(rankings), timings)
    }

    pub fn mrr(&self, cfg: &FusionConfig, kind: Option<QueryKind>) -> f64 {
        let (run, _) = self.run(cfg, kind);
        let mut qrels = self.bench.qrels.clone();
        qrels.judgments.retain(|q, _| run.rankings.contains_key(q));
        MetricsReport::compute(&run, &qrels, 3).unwrap().mrr
    }
}

pub fn sparse_only() -> FusionConfig {
    FusionConfig { dense_enabled: false, rerank_enabled: false, ..FusionConfig::default() }
}

pub fn dense_only() -> FusionConfig {
    FusionConfig { sparse_enabled: false, rerank_enabled: false, ..FusionConfig::default() }
}

pub fn hybrid_rerank() -> FusionConfig {
    FusionConfig::default()
}

pub fn lexicon(pairs: &[(&str, &str)]) -> HashMap<String, String> {
    pairs.iter().map(|(a, b)| (a.to_string(), b.to_string())).collect()
}
