//! Offline evaluation: ranking metrics, run comparison, latency summaries and
//! the year-over-year requirement evolution table.

mod evolution;
mod files;
mod latency;
mod metrics;
mod mwu;

use thiserror::Error;

pub use evolution::{evolution_report, format_count, Change, EvolutionRow, EvolutionTable, RequirementRecord};
pub use files::{parse_qrels, parse_run, Qrels, RunFile};
pub use latency::{latency_stats, percentile_nearest_rank, LatencySummary, StageSummary};
pub use metrics::{mrr, ndcg_at_k, precision_at_k, query_ndcg, MetricsReport, DEFAULT_RELEVANCE_THRESHOLD};
pub use mwu::{mann_whitney_u, MannWhitney, PValueMethod, EXACT_MAX_N, EXACT_MAX_TOTAL};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum EvalError {
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("query {0:?} has no relevance judgments")]
    MissingQuery(String),
    #[error("run contains no queries")]
    EmptyRun,
    #[error("sample {0} is empty")]
    EmptySample(&'static str),
    #[error("samples must be finite")]
    NonFinite,
    #[error("no timings to summarise")]
    EmptyTimings,
    #[error("no records for year {0}")]
    NoRecords(i32),
}
