use std::sync::Arc;
use std::time::Duration;

use reqrag_core::orchestrator::{
    route, Admission, BreakerConfig, Clock, BreakerState, CircuitBreaker, ErrorKind, GenerationProvider, GenerationRequest,
    ManualClock, MockProvider, MockStep, Orchestrator, OrchestratorError, ProviderFailure, RetryPolicy, RoutingPolicy,
};

const S: fn(u64) -> Duration = Duration::from_secs;

#[test]
fn backoff_sequence_doubles_then_caps() {
    let p = RetryPolicy::default();
    let delays: Vec<u64> = (0..7).map(|i| p.delay(i).as_secs()).collect();
    assert_eq!(delays, [1, 2, 4, 8, 16, 30, 30]);
    assert_eq!(p.max_attempts, 4);
}

#[test]
fn orchestrator_sleeps_follow_the_backoff_sequence() {
    let clock = ManualClock::new();
    let flaky = Arc::new(MockProvider::new("flaky").with_script(vec![MockStep::Fail(ErrorKind::Server); 7]));
    let retry = RetryPolicy { max_attempts: 8, ..RetryPolicy::default() };
    let breaker = BreakerConfig { failure_threshold: 100, ..BreakerConfig::default() };
    let orch = Orchestrator::new(vec![flaky.clone()], retry, breaker, Arc::new(clock.clone())).unwrap();
    let mut d = route(0.1, &RoutingPolicy::default());
    d.provider_id = "flaky".into();
    d.fallback_chain.clear();
    let req = GenerationRequest { query_id: "q".into(), prompt: "p".into(), context: vec!["Some context.".into()] };
    let r = orch.execute_with_fallback(&req, &d).unwrap();
    assert_eq!(r.attempts, 8);
    assert_eq!(clock.sleeps(), [1, 2, 4, 8, 16, 30, 30].map(S));
    assert_eq!(clock.now(), S(91));
}

#[test]
fn non_retryable_errors_move_straight_to_the_fallback() {
    let clock = ManualClock::new();
    let a = Arc::new(MockProvider::new("a").with_script([MockStep::Fail(ErrorKind::Auth)]));
    let b = Arc::new(MockProvider::new("b"));
    let orch = Orchestrator::new(vec![a.clone(), b.clone()], RetryPolicy::default(), BreakerConfig::default(), Arc::new(clock.clone()))
        .unwrap();
    let mut d = route(0.1, &RoutingPolicy::default());
    d.provider_id = "a".into();
    d.fallback_chain = vec!["b".into()];
    let req = GenerationRequest { query_id: "q".into(), prompt: "p".into(), context: vec![] };
    let r = orch.execute_with_fallback(&req, &d).unwrap();
    assert_eq!((r.provider_id.as_str(), a.calls(), b.calls()), ("b", 1, 1));
    assert!(clock.sleeps().is_empty());
}

mod state_machine {
    use super::*;

    fn breaker() -> CircuitBreaker {
        CircuitBreaker::new(BreakerConfig::default())
    }

    fn fail(b: &CircuitBreaker, n: u32, at: Duration) {
        for _ in 0..n {
            assert_eq!(b.try_acquire(at), Admission::Allowed);
            b.on_failure(at);
        }
    }

    #[test]
    fn closed_stays_closed_below_threshold() {
        let b = breaker();
        fail(&b, 4, S(0));
        assert_eq!(b.state(), BreakerState::Closed);
        assert_eq!(b.snapshot().consecutive_failures, 4);
    }

    #[test]
    fn success_resets_the_consecutive_count() {
        let b = breaker();
        fail(&b, 4, S(0));
        b.on_success();
        fail(&b, 4, S(1));
        assert_eq!(b.state(), BreakerState::Closed);
    }

    #[test]
    fn fifth_consecutive_failure_opens() {
        let b = breaker();
        fail(&b, 5, S(10));
        let s = b.snapshot();
        assert_eq!((s.state, s.opened_at), (BreakerState::Open, Some(S(10))));
    }

    #[test]
    fn open_rejects_until_cooldown_elapses() {
        let b = breaker();
        fail(&b, 5, S(10));
        for t in [10, 30, 69] {
            assert_eq!(b.try_acquire(S(t)), Admission::Rejected, "t={t}");
        }
        assert_eq!(b.state(), BreakerState::Open);
        assert_eq!(b.try_acquire(S(70)), Admission::Probe);
        assert_eq!(b.state(), BreakerState::HalfOpen);
    }

    #[test]
    fn half_open_admits_exactly_one_probe() {
        let b = breaker();
        fail(&b, 5, S(0));
        assert_eq!(b.try_acquire(S(60)), Admission::Probe);
        for t in [60, 61, 500] {
            assert_eq!(b.try_acquire(S(t)), Admission::Rejected);
        }
    }

    #[test]
    fn successful_probe_closes() {
        let b = breaker();
        fail(&b, 5, S(0));
        assert_eq!(b.try_acquire(S(60)), Admission::Probe);
        b.on_success();
        let s = b.snapshot();
        assert_eq!((s.state, s.consecutive_failures, s.opened_at), (BreakerState::Closed, 0, None));
        assert_eq!(b.try_acquire(S(61)), Admission::Allowed);
    }

    #[test]
    fn failed_probe_reopens_with_a_fresh_cooldown() {
        let b = breaker();
        fail(&b, 5, S(0));
        assert_eq!(b.try_acquire(S(100)), Admission::Probe);
        b.on_failure(S(100));
        assert_eq!(b.snapshot().opened_at, Some(S(100)));
        assert_eq!(b.try_acquire(S(159)), Admission::Rejected);
        assert_eq!(b.try_acquire(S(160)), Admission::Probe);
    }

    #[test]
    fn late_failure_while_open_keeps_original_opening_time() {
        let b = breaker();
        fail(&b, 5, S(0));
        b.on_failure(S(30));
        let s = b.snapshot();
        assert_eq!((s.state, s.opened_at), (BreakerState::Open, Some(S(0))));
    }
}

#[test]
fn open_breaker_blocks_calls_then_recovers_through_a_probe() {
    let clock = ManualClock::new();
    let primary = Arc::new(MockProvider::new("primary").with_script(vec![MockStep::Fail(ErrorKind::Timeout); 5]));
    let backup = Arc::new(MockProvider::new("backup"));
    let orch = Orchestrator::new(
        vec![primary.clone(), backup.clone()],
        RetryPolicy::default(),
        BreakerConfig::default(),
        Arc::new(clock.clone()),
    )
    .unwrap();
    let mut d = route(0.5, &RoutingPolicy::default());
    d.provider_id = "primary".into();
    d.fallback_chain = vec!["backup".into()];
    let req = GenerationRequest { query_id: "q".into(), prompt: "p".into(), context: vec![] };

    // 4 failed attempts, answered by the backup
    assert_eq!(orch.execute_with_fallback(&req, &d).unwrap().provider_id, "backup");
    assert_eq!(primary.calls(), 4);
    // fifth failure trips the breaker
    assert_eq!(orch.execute_with_fallback(&req, &d).unwrap().provider_id, "backup");
    assert_eq!(primary.calls(), 5);
    assert_eq!(orch.breaker("primary").unwrap().state, BreakerState::Open);

    // while open the primary is not called at all
    let r = orch.execute_with_fallback(&req, &d).unwrap();
    assert_eq!((r.provider_id.as_str(), primary.calls()), ("backup", 5));
    assert_eq!(r.skipped, ["primary"]);

    clock.advance(S(60));
    let r = orch.execute_with_fallback(&req, &d).unwrap();
    assert_eq!((r.provider_id.as_str(), primary.calls()), ("primary", 6));
    assert_eq!(orch.breaker("primary").unwrap().state, BreakerState::Closed);
}

#[test]
fn exhaustion_reports_every_cause() {
    let clock = ManualClock::new();
    let a = Arc::new(MockProvider::new("a").with_script(vec![MockStep::Fail(ErrorKind::BadRequest)]));
    let orch = Orchestrator::new(vec![a as Arc<dyn GenerationProvider>], RetryPolicy::default(), BreakerConfig::default(), Arc::new(clock)).unwrap();
    let mut d = route(0.5, &RoutingPolicy::default());
    d.provider_id = "a".into();
    d.fallback_chain = vec!["ghost".into()];
    let req = GenerationRequest { query_id: "q".into(), prompt: "p".into(), context: vec![] };
    let Err(OrchestratorError::Exhausted { attempts, causes }) = orch.execute_with_fallback(&req, &d) else {
        panic!("expected exhaustion");
    };
    assert_eq!(attempts, 1);
    assert!(matches!(causes[0], (ref id, ProviderFailure::Failed { attempts: 1, .. }) if id == "a"));
    assert_eq!(causes[1], ("ghost".to_string(), ProviderFailure::NotRegistered));
}
