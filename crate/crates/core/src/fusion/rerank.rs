use std::collections::{HashMap, HashSet};

use super::{FusionError, RetrievalCandidate};
use crate::lexical::Analyzer;

/// Scores a (query, chunk text) pair; higher is more relevant.
pub trait RelevanceScorer: Send + Sync {
    fn score(&self, query: &str, text: &str) -> Result<f64, String>;
}

impl<F> RelevanceScorer for F
where
    F: Fn(&str, &str) -> Result<f64, String> + Send + Sync,
{
    fn score(&self, query: &str, text: &str) -> Result<f64, String> {
        self(query, text)
    }
}

/// Number of distinct query terms that also occur in the chunk.
///
/// An optional lexicon maps surface terms to a shared concept key so that
/// synonyms count as overlap.
#[derive(Debug, Clone)]
pub struct TokenOverlapScorer {
    analyzer: Analyzer,
    lexicon: HashMap<String, String>,
}

impl TokenOverlapScorer {
    pub fn new(analyzer: Analyzer) -> Self {
        Self { analyzer, lexicon: HashMap::new() }
    }

    pub fn with_lexicon(mut self, lexicon: HashMap<String, String>) -> Self {
        self.lexicon = lexicon;
        self
    }

    fn terms(&self, text: &str) -> HashSet<String> {
        self.analyzer
            .tokenize(text)
            .into_iter()
            .map(|t| self.lexicon.get(&t).cloned().unwrap_or(t))
            .collect()
    }
}

impl RelevanceScorer for TokenOverlapScorer {
    fn score(&self, query: &str, text: &str) -> Result<f64, String> {
        let chunk = self.terms(text);
        Ok(self.terms(query).iter().filter(|t| chunk.contains(*t)).count() as f64)
    }
}

/// Reorder by descending scorer output; equal scores keep their incoming
/// (RRF) order.
pub fn rerank<'t, F>(
    mut candidates: Vec<RetrievalCandidate>,
    query: &str,
    scorer: &dyn RelevanceScorer,
    text_of: F,
) -> Result<Vec<RetrievalCandidate>, FusionError>
where
    F: Fn(&str) -> Option<&'t str>,
{
    for c in &mut candidates {
        let fail = |message: String| FusionError::Rerank { chunk_id: c.chunk_id.clone(), message };
        let text = text_of(&c.chunk_id).ok_or_else(|| fail("chunk text unavailable".into()))?;
        let s = scorer.score(query, text).map_err(fail)?;
        if s.is_nan() {
            return Err(FusionError::Rerank { chunk_id: c.chunk_id.clone(), message: "scorer returned NaN".into() });
        }
        c.rerank_score = Some(s);
    }
    candidates.sort_by(|a, b| b.rerank_score.unwrap().total_cmp(&a.rerank_score.unwrap()));
    Ok(candidates)
}
