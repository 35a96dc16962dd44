use serde::{Deserialize, Serialize};

use super::OrchestratorError;
use crate::money::Money;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProviderTier {
    pub tier_id: u8,
    pub provider_id: String,
    pub model_id: String,
    pub rate_per_1k_tokens: Money,
    pub fallback_chain: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RoutingPolicy {
    pub t_low: f64,
    pub t_high: f64,
    pub tiers: [ProviderTier; 3],
}

impl Default for RoutingPolicy {
    fn default() -> Self {
        let tier = |id: u8, provider: &str, model: &str, rate: &str, chain: &[&str]| ProviderTier {
            tier_id: id,
            provider_id: provider.into(),
            model_id: model.into(),
            rate_per_1k_tokens: rate.parse().expect("static rate"),
            fallback_chain: chain.iter().map(|s| s.to_string()).collect(),
        };
        Self {
            t_low: 0.4,
            t_high: 0.7,
            tiers: [
                tier(1, "economy", "economy-small", "0.002", &["standard"]),
                tier(2, "standard", "standard-large", "0.01", &["premium", "economy"]),
                tier(3, "premium", "premium-xl", "0.03", &["standard"]),
            ],
        }
    }
}

impl RoutingPolicy {
    pub fn validate(&self) -> Result<(), OrchestratorError> {
        let bad = |m: String| Err(OrchestratorError::Config(m));
        if !(0.0 < self.t_low && self.t_low < self.t_high && self.t_high < 1.0) {
            return bad(format!("need 0 < t_low ({}) < t_high ({}) < 1", self.t_low, self.t_high));
        }
        for (i, t) in self.tiers.iter().enumerate() {
            if t.tier_id as usize != i + 1 {
                return bad(format!("tier at position {} has tier_id {}", i + 1, t.tier_id));
            }
            if t.rate_per_1k_tokens <= Money::ZERO {
                return bad(format!("tier {} rate must be > 0", t.tier_id));
            }
            if t.fallback_chain.is_empty() {
                return bad(format!("tier {} has an empty fallback chain", t.tier_id));
            }
        }
        if !self.tiers.windows(2).all(|w| w[0].rate_per_1k_tokens < w[1].rate_per_1k_tokens) {
            return bad("tier rates must strictly increase".into());
        }
        Ok(())
    }

    pub fn tier_for(&self, score: f64) -> &ProviderTier {
        if score < self.t_low {
            &self.tiers[0]
        } else if score < self.t_high {
            &self.tiers[1]
        } else {
            &self.tiers[2]
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RoutingDecision {
    pub complexity_score: f64,
    pub tier_id: u8,
    pub provider_id: String,
    pub model_id: String,
    pub rate_per_1k_tokens: Money,
    pub fallback_chain: Vec<String>,
}

/// `score < t_low` → tier 1, `t_low <= score < t_high` → tier 2, else tier 3.
pub fn route(score: f64, policy: &RoutingPolicy) -> RoutingDecision {
    let t = policy.tier_for(score);
    RoutingDecision {
        complexity_score: score,
        tier_id: t.tier_id,
        provider_id: t.provider_id.clone(),
        model_id: t.model_id.clone(),
        rate_per_1k_tokens: t.rate_per_1k_tokens,
        fallback_chain: t.fallback_chain.clone(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn boundaries() {
        let p = RoutingPolicy::default();
        let d = route(0.39, &p);
        assert_eq!((d.tier_id, d.rate_per_1k_tokens.to_string()), (1, "0.002".to_string()));
        let d = route(0.40, &p);
        assert_eq!((d.tier_id, d.rate_per_1k_tokens.to_string()), (2, "0.01".to_string()));
        let d = route(0.70, &p);
        assert_eq!((d.tier_id, d.rate_per_1k_tokens.to_string()), (3, "0.03".to_string()));
        assert_eq!(route(0.0, &p).tier_id, 1);
        assert_eq!(route(1.0, &p).tier_id, 3);
    }

    #[test]
    fn default_policy_valid() {
        assert!(RoutingPolicy::default().validate().is_ok());
        let p = RoutingPolicy { t_low: 0.8, ..RoutingPolicy::default() };
        assert!(p.validate().is_err());
        let mut p = RoutingPolicy::default();
        p.tiers[0].fallback_chain.clear();
        assert!(p.validate().is_err());
        let mut p = RoutingPolicy::default();
        p.tiers[2].rate_per_1k_tokens = "0.005".parse().unwrap();
        assert!(p.validate().is_err());
    }
}
