use std::collections::HashMap;

use serde::{Deserialize, Serialize};

use super::{EvalError, Qrels, RunFile};

/// Grades at or above this count as relevant for MRR and P@k.
pub const DEFAULT_RELEVANCE_THRESHOLD: u8 = 3;

fn per_query<F>(run: &RunFile, qrels: &Qrels, f: F) -> Result<f64, EvalError>
where
    F: Fn(&[(String, f64)], &HashMap<String, u8>) -> f64,
{
    if run.rankings.is_empty() {
        return Err(EvalError::EmptyRun);
    }
    for q in run.rankings.keys() {
        qrels.query(q)?;
    }
    // judged queries the run returned nothing for score 0
    let mut sum = 0.0;
    for (q, grades) in &qrels.judgments {
        sum += f(run.rankings.get(q).map_or(&[][..], Vec::as_slice), grades);
    }
    Ok(sum / qrels.judgments.len() as f64)
}

/// Mean reciprocal rank of the first result graded `>= threshold`; a query
/// with no such result contributes 0.
pub fn mrr(run: &RunFile, qrels: &Qrels, threshold: u8) -> Result<f64, EvalError> {
    per_query(run, qrels, |ranking, grades| {
        ranking
            .iter()
            .position(|(id, _)| grades.get(id).is_some_and(|&g| g >= threshold))
            .map_or(0.0, |i| 1.0 / (i + 1) as f64)
    })
}

/// Relevant results in the top `k`, divided by `k` even when fewer than `k`
/// results were returned.
pub fn precision_at_k(run: &RunFile, qrels: &Qrels, k: usize, threshold: u8) -> Result<f64, EvalError> {
    assert!(k > 0, "k must be positive");
    per_query(run, qrels, |ranking, grades| {
        let hits = ranking.iter().take(k).filter(|(id, _)| grades.get(id).is_some_and(|&g| g >= threshold)).count();
        hits as f64 / k as f64
    })
}

fn dcg(grades: impl Iterator<Item = u8>) -> f64 {
    grades
        .enumerate()
        .map(|(i, g)| (2f64.powi(g as i32) - 1.0) / ((i + 2) as f64).log2())
        .sum()
}

/// NDCG@k for one ranking with exponential gain; 0 when every judged grade is 0.
pub fn query_ndcg(ranking: &[(String, f64)], grades: &HashMap<String, u8>, k: usize) -> f64 {
    let mut ideal: Vec<u8> = grades.values().copied().collect();
    ideal.sort_unstable_by(|a, b| b.cmp(a));
    let idcg = dcg(ideal.into_iter().take(k));
    if idcg == 0.0 {
        return 0.0;
    }
    dcg(ranking.iter().take(k).map(|(id, _)| grades.get(id).copied().unwrap_or(0))) / idcg
}

pub fn ndcg_at_k(run: &RunFile, qrels: &Qrels, k: usize) -> Result<f64, EvalError> {
    per_query(run, qrels, |ranking, grades| query_ndcg(ranking, grades, k))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MetricsReport {
    pub queries: usize,
    pub mrr: f64,
    pub p_at_5: f64,
    pub ndcg_at_10: f64,
}

impl MetricsReport {
    pub fn compute(run: &RunFile, qrels: &Qrels, threshold: u8) -> Result<Self, EvalError> {
        Ok(Self {
            queries: qrels.judgments.len(),
            mrr: mrr(run, qrels, threshold)?,
            p_at_5: precision_at_k(run, qrels, 5, threshold)?,
            ndcg_at_10: ndcg_at_k(run, qrels, 10)?,
        })
    }
}
