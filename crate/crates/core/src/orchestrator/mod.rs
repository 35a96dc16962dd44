//! Complexity-based routing across cost tiers, fault-tolerant execution and
//! cost accounting.

mod breaker;
mod cost;
mod execute;
mod features;
mod provider;
mod retry;
mod routing;

use thiserror::Error;

pub use breaker::{Admission, BreakerConfig, BreakerSnapshot, BreakerState, CircuitBreaker};
pub use cost::{CostEntry, CostLedger};
pub use execute::{GenerationResult, Orchestrator, ProviderFailure};
pub use features::{
    ComplexityClassifier, ComplexityFeatures, FeatureExtractor, WeightedRule, DEFAULT_REFERENCE_PATTERNS,
    NEUTRAL_VERBOSITY, VERBOSITY_KEYWORDS,
};
pub use provider::{
    ErrorKind, GenerationProvider, GenerationRequest, GenerationResponse, HttpGenerationProvider, MockProvider,
    MockStep, ProviderError,
};
pub use retry::{Clock, ManualClock, RetryPolicy, SystemClock};
pub use routing::{route, ProviderTier, RoutingDecision, RoutingPolicy};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum OrchestratorError {
    #[error("invalid orchestrator config: {0}")]
    Config(String),
    #[error("all providers failed after {attempts} attempts: {}", describe(causes))]
    Exhausted { attempts: u32, causes: Vec<(String, ProviderFailure)> },
}

fn describe(causes: &[(String, ProviderFailure)]) -> String {
    causes
        .iter()
        .map(|(id, f)| match f {
            ProviderFailure::BreakerOpen => format!("{id}: circuit open"),
            ProviderFailure::NotRegistered => format!("{id}: not configured"),
            ProviderFailure::Failed { attempts, last } => format!("{id}: {last} after {attempts} attempt(s)"),
        })
        .collect::<Vec<_>>()
        .join("; ")
}

/// Features, score and routing decision for one query.
pub fn plan(
    query: &str,
    context_chunks: usize,
    extractor: &FeatureExtractor,
    classifier: &dyn ComplexityClassifier,
    policy: &RoutingPolicy,
) -> (ComplexityFeatures, RoutingDecision) {
    let f = extractor.extract(query, context_chunks);
    let score = classifier.score(&f);
    (f, route(score, policy))
}
