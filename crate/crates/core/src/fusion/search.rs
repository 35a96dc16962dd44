use std::collections::HashMap;
use std::time::Instant;

use serde::{Deserialize, Serialize};

use super::{rerank, rrf_fuse, FusionConfig, FusionError, RelevanceScorer, RetrievalCandidate};
use crate::embedding::EmbeddingProvider;
use crate::ingest::ChunkStore;
use crate::lexical::{Analyzer, Bm25Params, InvertedIndex};
use crate::vector::HnswGraph;

/// Wall-clock milliseconds per stage. Disabled stages report 0.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct StageTimings {
    pub dense_ms: f64,
    pub sparse_ms: f64,
    pub fuse_ms: f64,
    pub rerank_ms: f64,
    pub total_ms: f64,
}

/// Everything a hybrid query reads. All borrows are immutable, so one context
/// can serve concurrent queries.
#[derive(Clone, Copy)]
pub struct SearchContext<'a> {
    /// `None` when no lexical index was built; sparse retrieval is then an error.
    pub lexical: Option<&'a InvertedIndex>,
    pub analyzer: &'a Analyzer,
    pub bm25: &'a Bm25Params,
    pub vectors: Option<&'a HnswGraph>,
    pub provider: &'a dyn EmbeddingProvider,
    pub scorer: Option<&'a dyn RelevanceScorer>,
    pub chunks: &'a ChunkStore,
}

fn ms(since: Instant) -> f64 {
    since.elapsed().as_secs_f64() * 1e3
}

/// Dense and sparse retrieval of `candidate_pool` each, weighted RRF, optional
/// rerank, then the top `final_k`.
pub fn hybrid_search(
    query: &str,
    ctx: &SearchContext<'_>,
    cfg: &FusionConfig,
) -> Result<(Vec<RetrievalCandidate>, StageTimings), FusionError> {
    let start = Instant::now();
    cfg.validate()?;
    if query.trim().is_empty() {
        return Err(FusionError::EmptyQuery);
    }
    let mut t = StageTimings::default();

    let mut dense = Vec::new();
    if cfg.dense_enabled {
        let s = Instant::now();
        let vectors = ctx.vectors.ok_or_else(|| FusionError::Config("dense retrieval enabled but no vector index loaded".into()))?;
        let q = ctx.provider.embed(query).map_err(|e| FusionError::Embedding(e.to_string()))?;
        dense = vectors.search_knn(&q, cfg.candidate_pool);
        t.dense_ms = ms(s);
    }
    let mut sparse = Vec::new();
    if cfg.sparse_enabled {
        let s = Instant::now();
        let lexical = ctx.lexical.ok_or_else(|| FusionError::Config("sparse retrieval enabled but no lexical index loaded".into()))?;
        sparse = lexical.search(query, ctx.analyzer, ctx.bm25, cfg.candidate_pool);
        t.sparse_ms = ms(s);
    }

    let s = Instant::now();
    let dense_ids: Vec<&str> = dense.iter().map(|h| h.0.as_str()).collect();
    let sparse_ids: Vec<&str> = sparse.iter().map(|h| h.0.as_str()).collect();
    let mut fused = rrf_fuse(&dense_ids, &sparse_ids, cfg)?;
    let dense_scores: HashMap<&str, f64> = dense.iter().map(|(id, s)| (id.as_str(), *s)).collect();
    let sparse_scores: HashMap<&str, f64> = sparse.iter().map(|(id, s)| (id.as_str(), *s)).collect();
    for c in &mut fused {
        c.dense_score = dense_scores.get(c.chunk_id.as_str()).copied();
        c.sparse_score = sparse_scores.get(c.chunk_id.as_str()).copied();
    }
    t.fuse_ms = ms(s);

    if let (true, Some(scorer)) = (cfg.rerank_enabled, ctx.scorer) {
        let s = Instant::now();
        let prior = fused.clone();
        fused = match rerank(fused, query, scorer, |id| ctx.chunks.text(id)) {
            Ok(r) => r,
            Err(_) if cfg.rerank_fallback => prior,
            Err(e) => return Err(e),
        };
        t.rerank_ms = ms(s);
    }
    fused.truncate(cfg.final_k);
    t.total_ms = ms(start);
    Ok((fused, t))
}
