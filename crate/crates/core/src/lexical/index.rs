//! BM25 inverted index over chunks.
//!
//! Chunk ids are kept in a sorted table and postings reference positions in
//! it, so every postings list is sorted by chunk id by construction.

use std::collections::{BTreeMap, HashMap};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::tokenizer::Analyzer;

#[derive(Debug, Error, PartialEq)]
pub enum LexicalError {
    #[error("duplicate chunk id {0:?}")]
    DuplicateChunk(String),
    #[error("unknown chunk id {0:?}")]
    UnknownChunk(String),
    #[error("invalid BM25 parameters: k1={k1}, b={b}")]
    InvalidParams { k1: f64, b: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Bm25Params {
    pub k1: f64,
    pub b: f64,
}

impl Default for Bm25Params {
    fn default() -> Self {
        Self { k1: 1.5, b: 0.75 }
    }
}

impl Bm25Params {
    pub fn validate(&self) -> Result<(), LexicalError> {
        if !(self.k1 >= 0.0 && self.k1.is_finite() && (0.0..=1.0).contains(&self.b)) {
            return Err(LexicalError::InvalidParams { k1: self.k1, b: self.b });
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Posting {
    /// Position in [`InvertedIndex::chunk_ids`].
    pub doc: u32,
    pub tf: u32,
}

#[derive(Debug, Clone, PartialEq)]
pub struct InvertedIndex {
    pub(crate) chunk_ids: Vec<String>,
    pub(crate) doc_lengths: Vec<u32>,
    pub(crate) postings: BTreeMap<String, Vec<Posting>>,
    pub(crate) avg_doc_length: f64,
}

/// Smoothed, always non-negative IDF.
pub fn idf(n: usize, df: usize) -> f64 {
    let (n, df) = (n as f64, df as f64);
    (1.0 + (n - df + 0.5) / (df + 0.5)).ln()
}

/// Per-term saturation factor `tf (k1+1) / (tf + k1 (1 - b + b dl/avgdl))`.
pub fn term_weight(tf: f64, dl: f64, avgdl: f64, params: &Bm25Params) -> f64 {
    if tf <= 0.0 {
        return 0.0;
    }
    let norm = if avgdl > 0.0 { dl / avgdl } else { 1.0 };
    tf * (params.k1 + 1.0) / (tf + params.k1 * (1.0 - params.b + params.b * norm))
}

impl InvertedIndex {
    /// Build from `(chunk_id, text)` pairs.
    pub fn build<'a, I>(chunks: I, analyzer: &Analyzer) -> Result<Self, LexicalError>
    where
        I: IntoIterator<Item = (&'a str, &'a str)>,
    {
        let mut per_chunk: BTreeMap<String, Vec<String>> = BTreeMap::new();
        for (id, text) in chunks {
            if per_chunk.insert(id.to_string(), analyzer.tokenize(text)).is_some() {
                return Err(LexicalError::DuplicateChunk(id.to_string()));
            }
        }

        let mut chunk_ids = Vec::with_capacity(per_chunk.len());
        let mut doc_lengths = Vec::with_capacity(per_chunk.len());
        let mut postings: BTreeMap<String, Vec<Posting>> = BTreeMap::new();
        for (doc, (id, tokens)) in per_chunk.into_iter().enumerate() {
            let mut tf: BTreeMap<String, u32> = BTreeMap::new();
            for t in &tokens {
                *tf.entry(t.clone()).or_default() += 1;
            }
            for (term, count) in tf {
                postings.entry(term).or_default().push(Posting { doc: doc as u32, tf: count });
            }
            chunk_ids.push(id);
            doc_lengths.push(tokens.len() as u32);
        }
        let avg_doc_length = if doc_lengths.is_empty() {
            0.0
        } else {
            doc_lengths.iter().map(|&l| l as f64).sum::<f64>() / doc_lengths.len() as f64
        };
        Ok(Self { chunk_ids, doc_lengths, postings, avg_doc_length })
    }

    pub fn len(&self) -> usize {
        self.chunk_ids.len()
    }

    pub fn is_empty(&self) -> bool {
        self.chunk_ids.is_empty()
    }

    pub fn avg_doc_length(&self) -> f64 {
        self.avg_doc_length
    }

    pub fn chunk_ids(&self) -> &[String] {
        &self.chunk_ids
    }

    pub fn doc_length(&self, chunk_id: &str) -> Option<u32> {
        self.position(chunk_id).map(|p| self.doc_lengths[p])
    }

    pub fn document_frequency(&self, term: &str) -> usize {
        self.postings.get(term).map_or(0, Vec::len)
    }

    /// Postings for `term` as `(chunk_id, tf)`, sorted by chunk id.
    pub fn postings(&self, term: &str) -> Vec<(&str, u32)> {
        self.postings
            .get(term)
            .map(|list| {
                list.iter()
                    .map(|p| (self.chunk_ids[p.doc as usize].as_str(), p.tf))
                    .collect()
            })
            .unwrap_or_default()
    }

    pub fn vocabulary_size(&self) -> usize {
        self.postings.len()
    }

    fn position(&self, chunk_id: &str) -> Option<usize> {
        self.chunk_ids
            .binary_search_by(|probe| probe.as_str().cmp(chunk_id))
            .ok()
    }

    fn term_frequency(&self, term: &str, doc: u32) -> u32 {
        self.postings
            .get(term)
            .and_then(|list| list.binary_search_by_key(&doc, |p| p.doc).ok().map(|i| list[i].tf))
            .unwrap_or(0)
    }

    /// BM25 score of one chunk. Repeated query terms are counted once.
    pub fn bm25_score(
        &self,
        query_tokens: &[String],
        chunk_id: &str,
        params: &Bm25Params,
    ) -> Result<f64, LexicalError> {
        let doc = self
            .position(chunk_id)
            .ok_or_else(|| LexicalError::UnknownChunk(chunk_id.to_string()))?;
        let dl = self.doc_lengths[doc] as f64;
        let mut terms: Vec<&String> = query_tokens.iter().collect();
        terms.sort();
        terms.dedup();
        let score = terms
            .into_iter()
            .map(|term| {
                let tf = self.term_frequency(term, doc as u32);
                if tf == 0 {
                    return 0.0;
                }
                idf(self.len(), self.document_frequency(term))
                    * term_weight(tf as f64, dl, self.avg_doc_length, params)
            })
            .sum();
        Ok(score)
    }

    /// Top-`top_k` chunks by BM25, descending, ties by ascending chunk id.
    pub fn search_tokens(
        &self,
        query_tokens: &[String],
        params: &Bm25Params,
        top_k: usize,
    ) -> Vec<(String, f64)> {
        let mut terms: Vec<&String> = query_tokens.iter().collect();
        terms.sort();
        terms.dedup();
        let mut acc: HashMap<u32, f64> = HashMap::new();
        for term in terms {
            let Some(list) = self.postings.get(term) else { continue };
            let w = idf(self.len(), list.len());
            for p in list {
                let dl = self.doc_lengths[p.doc as usize] as f64;
                *acc.entry(p.doc).or_default() +=
                    w * term_weight(p.tf as f64, dl, self.avg_doc_length, params);
            }
        }
        let mut hits: Vec<(u32, f64)> = acc.into_iter().collect();
        // doc positions follow chunk-id order, so comparing them breaks ties by id
        hits.sort_by(|a, b| b.1.total_cmp(&a.1).then(a.0.cmp(&b.0)));
        hits.truncate(top_k);
        hits.into_iter()
            .map(|(doc, s)| (self.chunk_ids[doc as usize].clone(), s))
            .collect()
    }

    pub fn search(
        &self,
        query: &str,
        analyzer: &Analyzer,
        params: &Bm25Params,
        top_k: usize,
    ) -> Vec<(String, f64)> {
        self.search_tokens(&analyzer.tokenize(query), params, top_k)
    }
}
