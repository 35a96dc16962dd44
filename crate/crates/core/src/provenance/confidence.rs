use std::collections::HashSet;

use crate::lexical::Analyzer;

pub const DEFAULT_COVERAGE_THRESHOLD: f64 = 0.3;

/// Split on `.`, `!`, `?` followed by whitespace or end of text, and on line
/// breaks. Fragments without alphanumerics are dropped.
pub fn split_sentences(text: &str) -> Vec<&str> {
    let mut out = Vec::new();
    let mut start = 0;
    let bytes = text.as_bytes();
    for (i, ch) in text.char_indices() {
        let end = match ch {
            '\n' => Some(i),
            '.' | '!' | '?' if bytes.get(i + 1).is_none_or(|b| b.is_ascii_whitespace()) => Some(i + 1),
            _ => None,
        };
        if let Some(end) = end {
            out.push(&text[start..end]);
            start = i + ch.len_utf8();
        }
    }
    out.push(&text[start..]);
    out.into_iter().map(str::trim).filter(|s| s.chars().any(char::is_alphanumeric)).collect()
}

fn terms(analyzer: &Analyzer, text: &str) -> HashSet<String> {
    analyzer.tokenize(text).into_iter().collect()
}

/// Fraction of answer sentences whose best overlap with any source exceeds
/// `threshold`. Overlap is the share of the sentence's distinct terms that
/// occur in the source. No sentences or no sources gives 0.
pub fn retrieval_coverage(answer: &str, sources: &[&str], analyzer: &Analyzer, threshold: f64) -> f64 {
    let sentences = split_sentences(answer);
    if sentences.is_empty() || sources.is_empty() {
        return 0.0;
    }
    let source_terms: Vec<HashSet<String>> = sources.iter().map(|s| terms(analyzer, s)).collect();
    let covered = sentences
        .iter()
        .filter(|s| {
            let st = terms(analyzer, s);
            if st.is_empty() {
                return false;
            }
            source_terms
                .iter()
                .map(|src| st.iter().filter(|t| src.contains(*t)).count() as f64 / st.len() as f64)
                .any(|o| o > threshold)
        })
        .count();
    covered as f64 / sentences.len() as f64
}

/// Mean pairwise Jaccard similarity of the term sets of repeated generations.
/// Needs at least two texts.
pub fn multi_attempt_consistency(texts: &[&str], analyzer: &Analyzer) -> Option<f64> {
    if texts.len() < 2 {
        return None;
    }
    let sets: Vec<HashSet<String>> = texts.iter().map(|t| terms(analyzer, t)).collect();
    let mut sum = 0.0;
    let mut pairs = 0usize;
    for i in 0..sets.len() {
        for j in i + 1..sets.len() {
            let union = sets[i].union(&sets[j]).count();
            sum += if union == 0 { 1.0 } else { sets[i].intersection(&sets[j]).count() as f64 / union as f64 };
            pairs += 1;
        }
    }
    Some(sum / pairs as f64)
}
