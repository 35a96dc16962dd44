//! Weighted reciprocal rank fusion, re-ranking and the hybrid query path.

mod rerank;
mod runfile;
mod search;

use std::collections::{HashMap, HashSet};

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use rerank::{rerank, RelevanceScorer, TokenOverlapScorer};
pub use runfile::{format_run_line, write_run};
pub use search::{hybrid_search, SearchContext, StageTimings};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum FusionError {
    #[error("invalid fusion config: {0}")]
    Config(String),
    #[error("duplicate id {id:?} in {list} ranking")]
    DuplicateId { list: &'static str, id: String },
    #[error("query is empty")]
    EmptyQuery,
    #[error("reranker failed on {chunk_id:?}: {message}")]
    Rerank { chunk_id: String, message: String },
    #[error("embedding the query failed: {0}")]
    Embedding(String),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct FusionConfig {
    pub alpha_dense: f64,
    pub alpha_sparse: f64,
    pub k_rrf: f64,
    pub candidate_pool: usize,
    pub final_k: usize,
    pub rerank_enabled: bool,
    /// Keep RRF order when the scorer fails instead of returning an error.
    pub rerank_fallback: bool,
    pub dense_enabled: bool,
    pub sparse_enabled: bool,
}

impl Default for FusionConfig {
    fn default() -> Self {
        Self {
            alpha_dense: 0.7,
            alpha_sparse: 0.3,
            k_rrf: 60.0,
            candidate_pool: 20,
            final_k: 5,
            rerank_enabled: true,
            rerank_fallback: true,
            dense_enabled: true,
            sparse_enabled: true,
        }
    }
}

impl FusionConfig {
    pub fn validate(&self) -> Result<(), FusionError> {
        let bad = |m: String| Err(FusionError::Config(m));
        if !(self.alpha_dense >= 0.0 && self.alpha_sparse >= 0.0) {
            return bad(format!("negative weight ({}, {})", self.alpha_dense, self.alpha_sparse));
        }
        if self.alpha_dense == 0.0 && self.alpha_sparse == 0.0 {
            return bad("alpha_dense and alpha_sparse are both 0".into());
        }
        if !(self.k_rrf > 0.0 && self.k_rrf.is_finite()) {
            return bad(format!("k_rrf must be > 0, got {}", self.k_rrf));
        }
        if self.final_k == 0 || self.final_k > self.candidate_pool {
            return bad(format!("need 0 < final_k ({}) <= candidate_pool ({})", self.final_k, self.candidate_pool));
        }
        if !self.dense_enabled && !self.sparse_enabled {
            return bad("both dense and sparse retrieval are disabled".into());
        }
        Ok(())
    }

    pub fn hybrid(&self) -> bool {
        self.dense_enabled && self.sparse_enabled
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RetrievalCandidate {
    pub chunk_id: String,
    pub dense_rank: Option<u32>,
    pub sparse_rank: Option<u32>,
    pub dense_score: Option<f64>,
    pub sparse_score: Option<f64>,
    pub rrf_score: f64,
    pub rerank_score: Option<f64>,
}

impl RetrievalCandidate {
    /// The score that determined the final position.
    pub fn final_score(&self) -> f64 {
        self.rerank_score.unwrap_or(self.rrf_score)
    }
}

fn rank_map<'a>(ids: &[&'a str], list: &'static str) -> Result<HashMap<&'a str, u32>, FusionError> {
    let mut map = HashMap::with_capacity(ids.len());
    for (i, &id) in ids.iter().enumerate() {
        if map.insert(id, i as u32 + 1).is_some() {
            return Err(FusionError::DuplicateId { list, id: id.to_string() });
        }
    }
    Ok(map)
}

/// Fuse two rankings: `alpha_dense/(k + r_dense) + alpha_sparse/(k + r_sparse)`,
/// where an absent rank contributes nothing. Output is sorted by fused score
/// descending, ties by chunk id, and truncated to `candidate_pool`.
pub fn rrf_fuse(dense: &[&str], sparse: &[&str], cfg: &FusionConfig) -> Result<Vec<RetrievalCandidate>, FusionError> {
    cfg.validate()?;
    let dense_ranks = rank_map(dense, "dense")?;
    let sparse_ranks = rank_map(sparse, "sparse")?;
    let mut seen = HashSet::new();
    let mut out: Vec<RetrievalCandidate> = dense
        .iter()
        .chain(sparse)
        .filter(|id| seen.insert(**id))
        .map(|&id| {
            let dr = dense_ranks.get(id).copied();
            let sr = sparse_ranks.get(id).copied();
            let term = |alpha: f64, r: Option<u32>| r.map_or(0.0, |r| alpha / (cfg.k_rrf + r as f64));
            RetrievalCandidate {
                chunk_id: id.to_string(),
                dense_rank: dr,
                sparse_rank: sr,
                dense_score: None,
                sparse_score: None,
                rrf_score: term(cfg.alpha_dense, dr) + term(cfg.alpha_sparse, sr),
                rerank_score: None,
            }
        })
        .collect();
    out.sort_by(|a, b| b.rrf_score.total_cmp(&a.rrf_score).then_with(|| a.chunk_id.cmp(&b.chunk_id)));
    out.truncate(cfg.candidate_pool);
    Ok(out)
}
