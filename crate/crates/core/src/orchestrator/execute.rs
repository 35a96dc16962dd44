use std::collections::{BTreeMap, HashMap};
use std::sync::Arc;

use chrono::{DateTime, Utc};
use serde::{Deserialize, Serialize};

use super::breaker::{Admission, BreakerConfig, BreakerSnapshot, CircuitBreaker};
use super::provider::{GenerationProvider, GenerationRequest, ProviderError};
use super::retry::{Clock, RetryPolicy};
use super::routing::RoutingDecision;
use super::OrchestratorError;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GenerationResult {
    pub text: String,
    pub provider_id: String,
    pub model_id: String,
    pub tokens_in: u64,
    pub tokens_out: u64,
    pub attempts: u32,
    pub started_at: DateTime<Utc>,
    pub finished_at: DateTime<Utc>,
    /// Providers passed over because their breaker was open.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub skipped: Vec<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub confidence: Option<f64>,
}

/// Why one provider in the chain did not answer.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum ProviderFailure {
    BreakerOpen,
    NotRegistered,
    Failed { attempts: u32, last: ProviderError },
}

/// Routes calls through per-provider breakers with retry and fallback.
/// Shared across threads; breakers are the only mutable state.
pub struct Orchestrator {
    providers: HashMap<String, Arc<dyn GenerationProvider>>,
    breakers: HashMap<String, CircuitBreaker>,
    retry: RetryPolicy,
    clock: Arc<dyn Clock>,
}

impl Orchestrator {
    pub fn new(
        providers: Vec<Arc<dyn GenerationProvider>>,
        retry: RetryPolicy,
        breaker: BreakerConfig,
        clock: Arc<dyn Clock>,
    ) -> Result<Self, OrchestratorError> {
        retry.validate()?;
        let mut map = HashMap::new();
        let mut breakers = HashMap::new();
        for p in providers {
            let id = p.provider_id().to_string();
            if map.contains_key(&id) {
                return Err(OrchestratorError::Config(format!("provider {id:?} registered twice")));
            }
            breakers.insert(id.clone(), CircuitBreaker::new(breaker));
            map.insert(id, p);
        }
        Ok(Self { providers: map, breakers, retry, clock })
    }

    pub fn breaker(&self, provider_id: &str) -> Option<BreakerSnapshot> {
        self.breakers.get(provider_id).map(CircuitBreaker::snapshot)
    }

    pub fn breakers(&self) -> BTreeMap<String, BreakerSnapshot> {
        self.breakers.iter().map(|(k, b)| (k.clone(), b.snapshot())).collect()
    }

    pub fn has_provider(&self, provider_id: &str) -> bool {
        self.providers.contains_key(provider_id)
    }

    /// Try the decision's provider, then each fallback in order. Each provider
    /// gets up to `max_attempts` calls with backoff between them; a provider
    /// whose breaker is open is skipped without being called.
    pub fn execute_with_fallback(
        &self,
        request: &GenerationRequest,
        decision: &RoutingDecision,
    ) -> Result<GenerationResult, OrchestratorError> {
        let started_at = Utc::now();
        let mut chain: Vec<(&str, Option<&str>)> = vec![(&decision.provider_id, Some(&decision.model_id))];
        for p in &decision.fallback_chain {
            if !chain.iter().any(|(c, _)| c == p) {
                chain.push((p, None));
            }
        }
        let mut attempts = 0u32;
        let mut skipped = Vec::new();
        let mut causes = Vec::new();

        for (provider_id, model) in chain {
            let (Some(provider), Some(breaker)) = (self.providers.get(provider_id), self.breakers.get(provider_id))
            else {
                causes.push((provider_id.to_string(), ProviderFailure::NotRegistered));
                continue;
            };
            let model = model.unwrap_or_else(|| provider.default_model()).to_string();
            let mut tried = 0u32;
            let mut last = None;
            while tried < self.retry.max_attempts {
                if tried > 0 {
                    self.clock.sleep(self.retry.delay(tried - 1));
                }
                if breaker.try_acquire(self.clock.now()) == Admission::Rejected {
                    break;
                }
                tried += 1;
                attempts += 1;
                match provider.generate(&model, request) {
                    Ok(resp) => {
                        breaker.on_success();
                        return Ok(GenerationResult {
                            text: resp.text,
                            provider_id: provider_id.to_string(),
                            model_id: model,
                            tokens_in: resp.tokens_in,
                            tokens_out: resp.tokens_out,
                            attempts,
                            started_at,
                            finished_at: Utc::now(),
                            skipped,
                            confidence: resp.confidence,
                        });
                    }
                    Err(e) => {
                        breaker.on_failure(self.clock.now());
                        let retry = e.kind.is_retryable();
                        last = Some(e);
                        if !retry {
                            break;
                        }
                    }
                }
            }
            match last {
                Some(last) => causes.push((provider_id.to_string(), ProviderFailure::Failed { attempts: tried, last })),
                None => {
                    skipped.push(provider_id.to_string());
                    causes.push((provider_id.to_string(), ProviderFailure::BreakerOpen));
                }
            }
        }
        Err(OrchestratorError::Exhausted { attempts, causes })
    }
}
