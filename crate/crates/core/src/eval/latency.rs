use serde::Serialize;

use super::EvalError;
use crate::fusion::StageTimings;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct StageSummary {
    pub mean: f64,
    pub p50: f64,
    pub p95: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LatencySummary {
    pub count: usize,
    pub dense_ms: StageSummary,
    pub sparse_ms: StageSummary,
    pub fuse_ms: StageSummary,
    pub rerank_ms: StageSummary,
    pub total_ms: StageSummary,
}

/// Smallest value with at least `p`% of the sample at or below it.
/// `sorted` must be ascending and non-empty.
pub fn percentile_nearest_rank(sorted: &[f64], p: f64) -> f64 {
    let n = sorted.len();
    let rank = ((p / 100.0) * n as f64).ceil() as usize;
    sorted[rank.clamp(1, n) - 1]
}

fn summarize(values: impl Iterator<Item = f64>) -> StageSummary {
    let mut v: Vec<f64> = values.collect();
    v.sort_by(f64::total_cmp);
    StageSummary {
        mean: v.iter().sum::<f64>() / v.len() as f64,
        p50: percentile_nearest_rank(&v, 50.0),
        p95: percentile_nearest_rank(&v, 95.0),
    }
}

pub fn latency_stats(timings: &[StageTimings]) -> Result<LatencySummary, EvalError> {
    if timings.is_empty() {
        return Err(EvalError::EmptyTimings);
    }
    Ok(LatencySummary {
        count: timings.len(),
        dense_ms: summarize(timings.iter().map(|t| t.dense_ms)),
        sparse_ms: summarize(timings.iter().map(|t| t.sparse_ms)),
        fuse_ms: summarize(timings.iter().map(|t| t.fuse_ms)),
        rerank_ms: summarize(timings.iter().map(|t| t.rerank_ms)),
        total_ms: summarize(timings.iter().map(|t| t.total_ms)),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn t(total: f64) -> StageTimings {
        StageTimings { total_ms: total, dense_ms: total / 2.0, ..Default::default() }
    }

    #[test]
    fn single_value() {
        let s = latency_stats(&[t(12.5)]).unwrap();
        assert_eq!(s.total_ms, StageSummary { mean: 12.5, p50: 12.5, p95: 12.5 });
    }

    #[test]
    fn one_to_hundred() {
        let ts: Vec<_> = (1..=100).rev().map(|i| t(i as f64)).collect();
        let s = latency_stats(&ts).unwrap();
        assert_eq!(s.total_ms.p95, 95.0);
        assert_eq!(s.total_ms.p50, 50.0);
        assert_eq!(s.total_ms.mean, 50.5);
    }

    #[test]
    fn empty_is_error() {
        assert_eq!(latency_stats(&[]).unwrap_err(), EvalError::EmptyTimings);
    }
}
