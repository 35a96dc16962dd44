use std::collections::BTreeMap;
use std::io::{self, Write};

use parking_lot::Mutex;
use serde::{Deserialize, Serialize};

use super::execute::GenerationResult;
use super::routing::RoutingDecision;
use crate::money::Money;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CostEntry {
    pub query_id: String,
    pub tier_id: u8,
    pub provider_id: String,
    pub tokens_in: u64,
    pub tokens_out: u64,
    pub unit_rate: Money,
    pub cost: Money,
}

#[derive(Debug, Default)]
struct LedgerInner {
    entries: Vec<CostEntry>,
    totals: BTreeMap<u8, Money>,
}

/// Append-only cost ledger; safe to record into from many threads.
#[derive(Debug, Default)]
pub struct CostLedger {
    inner: Mutex<LedgerInner>,
}

impl CostLedger {
    pub fn new() -> Self {
        Self::default()
    }

    /// Charge `(tokens_in + tokens_out) / 1000 * rate` at the routed tier's
    /// rate, whichever provider in the chain answered.
    pub fn record_cost(&self, query_id: &str, result: &GenerationResult, decision: &RoutingDecision) -> CostEntry {
        let tokens = result.tokens_in + result.tokens_out;
        let entry = CostEntry {
            query_id: query_id.to_string(),
            tier_id: decision.tier_id,
            provider_id: result.provider_id.clone(),
            tokens_in: result.tokens_in,
            tokens_out: result.tokens_out,
            unit_rate: decision.rate_per_1k_tokens,
            cost: decision.rate_per_1k_tokens.per_thousand(tokens),
        };
        let mut g = self.inner.lock();
        *g.totals.entry(entry.tier_id).or_default() += entry.cost;
        g.entries.push(entry.clone());
        entry
    }

    pub fn entries(&self) -> Vec<CostEntry> {
        self.inner.lock().entries.clone()
    }

    pub fn len(&self) -> usize {
        self.inner.lock().entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn totals_by_tier(&self) -> BTreeMap<u8, Money> {
        self.inner.lock().totals.clone()
    }

    pub fn total(&self) -> Money {
        self.inner.lock().totals.values().copied().sum()
    }

    /// Mean cost per recorded entry; `None` when empty.
    pub fn mean_per_query(&self) -> Option<Money> {
        let g = self.inner.lock();
        let n = g.entries.len() as i128;
        (n > 0).then(|| g.totals.values().copied().sum::<Money>().mul_div(1, n))
    }

    pub fn export_jsonl<W: Write>(&self, mut w: W) -> io::Result<()> {
        for e in self.inner.lock().entries.iter() {
            serde_json::to_writer(&mut w, e)?;
            w.write_all(b"\n")?;
        }
        w.flush()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::orchestrator::routing::{route, RoutingPolicy};
    use chrono::Utc;

    fn result(tokens_in: u64, tokens_out: u64) -> GenerationResult {
        GenerationResult {
            text: String::new(),
            provider_id: "p".into(),
            model_id: "m".into(),
            tokens_in,
            tokens_out,
            attempts: 1,
            started_at: Utc::now(),
            finished_at: Utc::now(),
            skipped: vec![],
            confidence: None,
        }
    }

    #[test]
    fn tier_two_fifteen_hundred_tokens() {
        let l = CostLedger::new();
        let d = route(0.5, &RoutingPolicy::default());
        let e = l.record_cost("q", &result(1000, 500), &d);
        assert_eq!(e.cost, "0.015".parse().unwrap());
        let z = l.record_cost("q2", &result(0, 0), &d);
        assert_eq!(z.cost, Money::ZERO);
        assert_eq!(l.total(), "0.015".parse().unwrap());
    }

    #[test]
    fn export_lines() {
        let l = CostLedger::new();
        l.record_cost("q", &result(1, 2), &route(0.9, &RoutingPolicy::default()));
        let mut buf = Vec::new();
        l.export_jsonl(&mut buf).unwrap();
        let back: CostEntry = serde_json::from_slice(buf.strip_suffix(b"\n").unwrap()).unwrap();
        assert_eq!(back, l.entries()[0]);
    }
}
