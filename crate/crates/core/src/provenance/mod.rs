//! Per-answer provenance: attributions, score breakdowns, generation metadata
//! and confidence signals, plus an append-only store and a verifier.

mod confidence;
mod store;
mod verify;

use chrono::{DateTime, NaiveDate, Utc};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use thiserror::Error;
use uuid::Uuid;

use crate::fusion::RetrievalCandidate;
use crate::ingest::{BlockRange, ChunkStore};
use crate::lexical::Analyzer;
use crate::orchestrator::{GenerationResult, RoutingDecision};

pub use confidence::{multi_attempt_consistency, retrieval_coverage, split_sentences, DEFAULT_COVERAGE_THRESHOLD};
pub use store::ProvenanceStore;
pub use verify::{verify_record, AttributionFailure, AttributionIssue, VerificationReport};

#[derive(Debug, Error)]
pub enum ProvenanceError {
    #[error("candidate {0:?} is not in the chunk store")]
    UnknownChunk(String),
    #[error("record id {0} already stored")]
    DuplicateRecord(String),
    #[error("provenance store I/O: {0}")]
    Io(#[from] std::io::Error),
    #[error("provenance store line {line}: {message}")]
    Corrupt { line: usize, message: String },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SourceAttribution {
    pub doc_id: String,
    pub version_timestamp: NaiveDate,
    pub section_path: Vec<String>,
    pub chunk_id: String,
    pub block_range: BlockRange,
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct ScoreQuadruple {
    pub dense_score: Option<f64>,
    pub sparse_score: Option<f64>,
    pub rrf_score: Option<f64>,
    pub rerank_score: Option<f64>,
}

impl From<&RetrievalCandidate> for ScoreQuadruple {
    fn from(c: &RetrievalCandidate) -> Self {
        Self {
            dense_score: c.dense_score,
            sparse_score: c.sparse_score,
            rrf_score: Some(c.rrf_score),
            rerank_score: c.rerank_score,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct ConfidenceMetrics {
    pub self_assessed_confidence: Option<f64>,
    pub retrieval_coverage: f64,
    pub multi_attempt_consistency: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProvenanceRecord {
    pub record_id: String,
    pub query: String,
    pub created_at: DateTime<Utc>,
    pub attributions: Vec<SourceAttribution>,
    /// Aligned with `attributions`.
    pub retrieval_scores: Vec<ScoreQuadruple>,
    pub generation: GenerationResult,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub routing: Option<RoutingDecision>,
    /// SHA-256 of the prompt, hex encoded.
    pub prompt_digest: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub prompt: Option<String>,
    pub confidence: ConfidenceMetrics,
    /// Set when the answer had no retrieval support at all.
    pub ungrounded: bool,
}

#[derive(Debug, Clone, Copy)]
pub struct AssembleOptions {
    pub store_prompt: bool,
    pub coverage_threshold: f64,
}

impl Default for AssembleOptions {
    fn default() -> Self {
        Self { store_prompt: false, coverage_threshold: DEFAULT_COVERAGE_THRESHOLD }
    }
}

pub fn prompt_digest(prompt: &str) -> String {
    hex::encode(Sha256::digest(prompt.as_bytes()))
}

/// Build the record for one answer: one attribution per candidate with its
/// scores copied unchanged.
#[allow(clippy::too_many_arguments)]
pub fn assemble_provenance(
    query: &str,
    candidates: &[RetrievalCandidate],
    chunks: &ChunkStore,
    generation: &GenerationResult,
    routing: Option<&RoutingDecision>,
    prompt: &str,
    analyzer: &Analyzer,
    opts: &AssembleOptions,
) -> Result<ProvenanceRecord, ProvenanceError> {
    let mut attributions = Vec::with_capacity(candidates.len());
    let mut texts = Vec::with_capacity(candidates.len());
    for c in candidates {
        let chunk = chunks.get(&c.chunk_id).ok_or_else(|| ProvenanceError::UnknownChunk(c.chunk_id.clone()))?;
        attributions.push(SourceAttribution {
            doc_id: chunk.doc_id.clone(),
            version_timestamp: chunk.metadata.version,
            section_path: chunk.section_path.clone(),
            chunk_id: chunk.chunk_id.clone(),
            block_range: chunk.block_range,
        });
        texts.push(chunk.text.as_str());
    }
    let coverage = retrieval_coverage(&generation.text, &texts, analyzer, opts.coverage_threshold);
    Ok(ProvenanceRecord {
        record_id: Uuid::new_v4().to_string(),
        query: query.to_string(),
        created_at: Utc::now(),
        ungrounded: attributions.is_empty(),
        attributions,
        retrieval_scores: candidates.iter().map(ScoreQuadruple::from).collect(),
        generation: generation.clone(),
        routing: routing.cloned(),
        prompt_digest: prompt_digest(prompt),
        prompt: opts.store_prompt.then(|| prompt.to_string()),
        confidence: ConfidenceMetrics {
            self_assessed_confidence: generation.confidence.map(|c| c.clamp(0.0, 1.0)),
            retrieval_coverage: coverage,
            multi_attempt_consistency: None,
        },
    })
}
