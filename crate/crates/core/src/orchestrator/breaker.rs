//! Per-provider circuit breaker.
//!
//! ```text
//! closed --(failures reach threshold)--> open
//! open --(cooldown elapsed, one caller admitted)--> half_open
//! half_open --probe ok--> closed
//! half_open --probe fails--> open (cooldown restarts)
//! ```

use std::time::Duration;

use parking_lot::Mutex;
use serde::{Deserialize, Serialize};

use super::retry::secs;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct BreakerConfig {
    pub failure_threshold: u32,
    #[serde(with = "secs")]
    pub open_cooldown: Duration,
}

impl Default for BreakerConfig {
    fn default() -> Self {
        Self { failure_threshold: 5, open_cooldown: Duration::from_secs(60) }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BreakerState {
    Closed,
    Open,
    HalfOpen,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Admission {
    /// Normal call in the closed state.
    Allowed,
    /// The single trial call after cooldown.
    Probe,
    Rejected,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BreakerSnapshot {
    pub state: BreakerState,
    pub consecutive_failures: u32,
    pub opened_at: Option<Duration>,
}

#[derive(Debug)]
pub struct CircuitBreaker {
    cfg: BreakerConfig,
    inner: Mutex<BreakerSnapshot>,
}

impl CircuitBreaker {
    pub fn new(cfg: BreakerConfig) -> Self {
        Self {
            cfg,
            inner: Mutex::new(BreakerSnapshot { state: BreakerState::Closed, consecutive_failures: 0, opened_at: None }),
        }
    }

    pub fn snapshot(&self) -> BreakerSnapshot {
        *self.inner.lock()
    }

    pub fn state(&self) -> BreakerState {
        self.inner.lock().state
    }

    pub fn try_acquire(&self, now: Duration) -> Admission {
        let mut s = self.inner.lock();
        match s.state {
            BreakerState::Closed => Admission::Allowed,
            BreakerState::HalfOpen => Admission::Rejected,
            BreakerState::Open => {
                let opened = s.opened_at.unwrap_or_default();
                if now.saturating_sub(opened) >= self.cfg.open_cooldown {
                    s.state = BreakerState::HalfOpen;
                    Admission::Probe
                } else {
                    Admission::Rejected
                }
            }
        }
    }

    pub fn on_success(&self) {
        let mut s = self.inner.lock();
        s.state = BreakerState::Closed;
        s.consecutive_failures = 0;
        s.opened_at = None;
    }

    pub fn on_failure(&self, now: Duration) {
        let mut s = self.inner.lock();
        s.consecutive_failures = s.consecutive_failures.saturating_add(1);
        let trip = match s.state {
            BreakerState::HalfOpen => true,
            BreakerState::Closed => s.consecutive_failures >= self.cfg.failure_threshold,
            // a call admitted before another thread tripped the breaker
            BreakerState::Open => false,
        };
        if trip {
            s.state = BreakerState::Open;
            s.opened_at = Some(now);
        }
    }
}
