//! Query complexity features and the default scoring rule.

use regex::Regex;
use serde::{Deserialize, Serialize};

use crate::lexical::Analyzer;

#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct ComplexityFeatures {
    pub query_token_count: usize,
    pub entity_count: usize,
    pub cross_reference_count: usize,
    pub expected_verbosity: f64,
    pub context_chunk_count: usize,
}

/// Default cross-reference patterns: `§7.2`, `section 5.2`, `clause 7`,
/// and standard identifiers such as `MBN 9666-1` or `ISO 26262`.
pub const DEFAULT_REFERENCE_PATTERNS: &[&str] = &[
    r"§\s*\d+(?:\.\d+)*",
    r"(?i)\b(?:section|clause|chapter|annex|appendix)\s+[A-Z]?\d+(?:\.\d+)*",
    r"\b[A-Z]{2,5}[ -]?\d{3,5}(?:-\d+)*\b",
];

/// Intent keywords and the verbosity they imply. The highest match wins;
/// a query with no match gets [`NEUTRAL_VERBOSITY`].
pub const VERBOSITY_KEYWORDS: &[(&str, f64)] = &[
    ("analyze", 0.9),
    ("analyse", 0.9),
    ("compare", 0.9),
    ("describe", 0.9),
    ("discuss", 0.9),
    ("evaluate", 0.9),
    ("explain", 0.9),
    ("justify", 0.9),
    ("summarize", 0.9),
    ("summarise", 0.9),
    ("why", 0.9),
    ("enumerate", 0.5),
    ("how", 0.5),
    ("list", 0.5),
    ("outline", 0.5),
    ("which", 0.5),
    ("define", 0.1),
    ("what", 0.1),
    ("value", 0.1),
    ("does", 0.1),
    ("find", 0.1),
];

pub const NEUTRAL_VERBOSITY: f64 = 0.3;

#[derive(Debug, Clone)]
pub struct FeatureExtractor {
    analyzer: Analyzer,
    references: Vec<Regex>,
}

impl FeatureExtractor {
    pub fn new(analyzer: Analyzer) -> Self {
        let references = DEFAULT_REFERENCE_PATTERNS.iter().map(|p| Regex::new(p).expect("static pattern")).collect();
        Self { analyzer, references }
    }

    pub fn with_patterns<I, S>(analyzer: Analyzer, patterns: I) -> Result<Self, regex::Error>
    where
        I: IntoIterator<Item = S>,
        S: AsRef<str>,
    {
        let references = patterns.into_iter().map(|p| Regex::new(p.as_ref())).collect::<Result<_, _>>()?;
        Ok(Self { analyzer, references })
    }

    /// Non-overlapping reference matches, counted across all patterns after
    /// removing spans already claimed by an earlier pattern.
    pub fn cross_references(&self, query: &str) -> usize {
        let mut spans: Vec<(usize, usize)> = Vec::new();
        for re in &self.references {
            for m in re.find_iter(query) {
                if !spans.iter().any(|&(s, e)| m.start() < e && s < m.end()) {
                    spans.push((m.start(), m.end()));
                }
            }
        }
        spans.len()
    }

    pub fn verbosity(&self, query: &str) -> f64 {
        let words: Vec<String> = query
            .split(|c: char| !c.is_alphanumeric())
            .filter(|w| !w.is_empty())
            .map(str::to_lowercase)
            .collect();
        VERBOSITY_KEYWORDS
            .iter()
            .filter(|(k, _)| words.iter().any(|w| w == k))
            .map(|&(_, v)| v)
            .fold(None, |acc: Option<f64>, v| Some(acc.map_or(v, |a| a.max(v))))
            .unwrap_or(NEUTRAL_VERBOSITY)
    }

    pub fn extract(&self, query: &str, context_chunk_count: usize) -> ComplexityFeatures {
        ComplexityFeatures {
            query_token_count: self.analyzer.count_tokens(query),
            entity_count: self.analyzer.dictionary_matches(query).len(),
            cross_reference_count: self.cross_references(query),
            expected_verbosity: self.verbosity(query),
            context_chunk_count,
        }
    }
}

pub trait ComplexityClassifier: Send + Sync {
    /// Score in `[0, 1]`.
    fn score(&self, f: &ComplexityFeatures) -> f64;
}

/// Clipped weighted sum with non-negative weights.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct WeightedRule {
    pub per_token: f64,
    pub per_entity: f64,
    pub per_cross_reference: f64,
    pub verbosity: f64,
    pub per_context_chunk: f64,
}

impl Default for WeightedRule {
    fn default() -> Self {
        Self { per_token: 0.008, per_entity: 0.05, per_cross_reference: 0.07, verbosity: 0.3, per_context_chunk: 0.01 }
    }
}

impl WeightedRule {
    pub fn validate(&self) -> Result<(), String> {
        let w = [self.per_token, self.per_entity, self.per_cross_reference, self.verbosity, self.per_context_chunk];
        if w.iter().all(|x| x.is_finite() && *x >= 0.0) {
            Ok(())
        } else {
            Err(format!("complexity weights must be finite and >= 0: {w:?}"))
        }
    }
}

impl ComplexityClassifier for WeightedRule {
    fn score(&self, f: &ComplexityFeatures) -> f64 {
        let raw = self.per_token * f.query_token_count as f64
            + self.per_entity * f.entity_count as f64
            + self.per_cross_reference * f.cross_reference_count as f64
            + self.verbosity * f.expected_verbosity.clamp(0.0, 1.0)
            + self.per_context_chunk * f.context_chunk_count as f64;
        raw.clamp(0.0, 1.0)
    }
}
