use std::sync::Arc;
use std::time::{Duration, Instant};

use parking_lot::Mutex;
use serde::{Deserialize, Serialize};

use super::OrchestratorError;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RetryPolicy {
    #[serde(with = "secs")]
    pub initial_delay: Duration,
    pub multiplier: f64,
    #[serde(with = "secs")]
    pub max_delay: Duration,
    pub max_attempts: u32,
}

impl Default for RetryPolicy {
    fn default() -> Self {
        Self {
            initial_delay: Duration::from_secs(1),
            multiplier: 2.0,
            max_delay: Duration::from_secs(30),
            max_attempts: 4,
        }
    }
}

impl RetryPolicy {
    pub fn validate(&self) -> Result<(), OrchestratorError> {
        if self.initial_delay > self.max_delay {
            return Err(OrchestratorError::Config("initial_delay exceeds max_delay".into()));
        }
        if !(self.multiplier > 1.0 && self.multiplier.is_finite()) {
            return Err(OrchestratorError::Config(format!("multiplier must be > 1, got {}", self.multiplier)));
        }
        if self.max_attempts == 0 {
            return Err(OrchestratorError::Config("max_attempts must be >= 1".into()));
        }
        Ok(())
    }

    /// Wait before retry number `retry` (0-based): `initial * multiplier^retry`,
    /// capped at `max_delay`.
    pub fn delay(&self, retry: u32) -> Duration {
        let secs = self.initial_delay.as_secs_f64() * self.multiplier.powi(retry.min(i32::MAX as u32) as i32);
        if !secs.is_finite() || secs >= self.max_delay.as_secs_f64() {
            self.max_delay
        } else {
            Duration::from_secs_f64(secs)
        }
    }
}

pub(crate) mod secs {
    use std::time::Duration;

    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(d: &Duration, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_f64(d.as_secs_f64())
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Duration, D::Error> {
        let v = f64::deserialize(d)?;
        Duration::try_from_secs_f64(v).map_err(serde::de::Error::custom)
    }
}

/// Monotonic time source; `now` is measured from an arbitrary origin.
pub trait Clock: Send + Sync {
    fn now(&self) -> Duration;
    fn sleep(&self, d: Duration);
}

#[derive(Debug)]
pub struct SystemClock {
    origin: Instant,
}

impl Default for SystemClock {
    fn default() -> Self {
        Self { origin: Instant::now() }
    }
}

impl Clock for SystemClock {
    fn now(&self) -> Duration {
        self.origin.elapsed()
    }

    fn sleep(&self, d: Duration) {
        std::thread::sleep(d);
    }
}

/// Test clock: `sleep` advances time instantly and is recorded.
#[derive(Debug, Default, Clone)]
pub struct ManualClock {
    inner: Arc<Mutex<(Duration, Vec<Duration>)>>,
}

impl ManualClock {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn advance(&self, d: Duration) {
        self.inner.lock().0 += d;
    }

    pub fn sleeps(&self) -> Vec<Duration> {
        self.inner.lock().1.clone()
    }
}

impl Clock for ManualClock {
    fn now(&self) -> Duration {
        self.inner.lock().0
    }

    fn sleep(&self, d: Duration) {
        let mut g = self.inner.lock();
        g.0 += d;
        g.1.push(d);
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn default_sequence() {
        let p = RetryPolicy::default();
        let got: Vec<u64> = (0..7).map(|i| p.delay(i).as_secs()).collect();
        assert_eq!(got, [1, 2, 4, 8, 16, 30, 30]);
        assert_eq!(p.delay(500), Duration::from_secs(30));
    }

    #[test]
    fn validation() {
        assert!(RetryPolicy::default().validate().is_ok());
        assert!(RetryPolicy { multiplier: 1.0, ..Default::default() }.validate().is_err());
        assert!(RetryPolicy { max_attempts: 0, ..Default::default() }.validate().is_err());
        assert!(RetryPolicy { initial_delay: Duration::from_secs(60), ..Default::default() }.validate().is_err());
    }

    #[test]
    fn manual_clock_records() {
        let c = ManualClock::new();
        c.sleep(Duration::from_secs(2));
        c.advance(Duration::from_secs(1));
        assert_eq!(c.now(), Duration::from_secs(3));
        assert_eq!(c.sleeps(), [Duration::from_secs(2)]);
    }
}
