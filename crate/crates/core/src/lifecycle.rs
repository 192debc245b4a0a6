//! Function container sessions.
//!
//! A container is deployed by the first request (a cold start) and then
//! serves later requests warm, keeping its in-memory globals. When the gap
//! since the previous request exceeds the idle timeout the container is
//! suspended and its memory is discarded; the next request cold-starts a
//! fresh session.

use std::collections::HashMap;

use thiserror::Error;

use crate::latency::{LatencyDistribution, RngStream};

pub const DEFAULT_IDLE_TIMEOUT_MS: f64 = 300_000.0;
pub const DEFAULT_COLD_START_MS: f64 = 200.0;

/// Opaque cached value. Only identity matters to the simulator.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct CacheToken(pub u64);

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StoredValue {
    pub token: CacheToken,
    pub inserted_at_ms: f64,
}

/// Unbounded key-value store with no eviction.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct KvStore {
    entries: HashMap<String, StoredValue>,
}

impl KvStore {
    pub fn get(&self, key: &str) -> Option<&StoredValue> {
        self.entries.get(key)
    }

    pub fn put(&mut self, key: impl Into<String>, token: CacheToken, now_ms: f64) {
        self.entries.insert(
            key.into(),
            StoredValue {
                token,
                inserted_at_ms: now_ms,
            },
        );
    }

    pub fn contains(&self, key: &str) -> bool {
        self.entries.contains_key(key)
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn clear(&mut self) {
        self.entries.clear();
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum SessionState {
    NeverStarted,
    Warm { last_request_ms: f64 },
    Suspended,
}

#[derive(Debug, Clone, Copy, PartialEq, Error)]
pub enum LifecycleError {
    #[error("request at {now_ms} ms precedes the previous request at {last_ms} ms")]
    TimeRegression { now_ms: f64, last_ms: f64 },
    #[error("session store accessed while the container is not warm")]
    NotWarm,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ContainerSession {
    function_id: String,
    state: SessionState,
    idle_timeout_ms: f64,
    cold_start_delay: LatencyDistribution,
    last_seen_ms: Option<f64>,
    store: KvStore,
    cold_starts: u64,
}

impl ContainerSession {
    pub fn new(
        function_id: impl Into<String>,
        idle_timeout_ms: f64,
        cold_start_delay: LatencyDistribution,
    ) -> Self {
        Self {
            function_id: function_id.into(),
            state: SessionState::NeverStarted,
            idle_timeout_ms,
            cold_start_delay,
            last_seen_ms: None,
            store: KvStore::default(),
            cold_starts: 0,
        }
    }

    /// Session with the default 300 s idle timeout and constant 200 ms cold start.
    pub fn with_defaults(function_id: impl Into<String>) -> Self {
        Self::new(
            function_id,
            DEFAULT_IDLE_TIMEOUT_MS,
            LatencyDistribution::constant(DEFAULT_COLD_START_MS).expect("valid constant"),
        )
    }

    pub fn function_id(&self) -> &str {
        &self.function_id
    }

    pub fn state(&self) -> SessionState {
        self.state
    }

    pub fn idle_timeout_ms(&self) -> f64 {
        self.idle_timeout_ms
    }

    pub fn cold_starts(&self) -> u64 {
        self.cold_starts
    }

    pub fn is_warm(&self) -> bool {
        matches!(self.state, SessionState::Warm { .. })
    }

    /// Suspends a warm container that has been idle longer than the timeout
    /// at `now_ms`, discarding its store. Returns whether it was suspended.
    pub fn suspend_if_idle(&mut self, now_ms: f64) -> bool {
        match self.state {
            SessionState::Warm { last_request_ms }
                if now_ms - last_request_ms > self.idle_timeout_ms =>
            {
                self.state = SessionState::Suspended;
                self.store.clear();
                true
            }
            _ => false,
        }
    }

    /// Admits a request arriving at `now_ms`. Returns the start-up penalty:
    /// a cold-start draw if a new session had to be started, else 0.
    pub fn on_request(&mut self, now_ms: f64, rng: &mut RngStream) -> Result<f64, LifecycleError> {
        if let Some(last_ms) = self.last_seen_ms {
            if now_ms < last_ms {
                return Err(LifecycleError::TimeRegression { now_ms, last_ms });
            }
        }
        self.suspend_if_idle(now_ms);
        let penalty = match self.state {
            SessionState::Warm { .. } => 0.0,
            SessionState::NeverStarted | SessionState::Suspended => {
                self.store.clear();
                self.cold_starts += 1;
                self.cold_start_delay.sample(rng)
            }
        };
        self.state = SessionState::Warm {
            last_request_ms: now_ms,
        };
        self.last_seen_ms = Some(now_ms);
        Ok(penalty)
    }

    pub fn store_get(&self, key: &str) -> Result<Option<&StoredValue>, LifecycleError> {
        if !self.is_warm() {
            return Err(LifecycleError::NotWarm);
        }
        Ok(self.store.get(key))
    }

    pub fn store_put(
        &mut self,
        key: impl Into<String>,
        token: CacheToken,
    ) -> Result<(), LifecycleError> {
        let SessionState::Warm { last_request_ms } = self.state else {
            return Err(LifecycleError::NotWarm);
        };
        self.store.put(key, token, last_request_ms);
        Ok(())
    }

    pub fn store(&self) -> &KvStore {
        &self.store
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn session(idle: f64) -> ContainerSession {
        ContainerSession::new("f1", idle, LatencyDistribution::constant(200.0).unwrap())
    }

    #[test]
    fn first_request_is_cold() {
        let mut s = session(DEFAULT_IDLE_TIMEOUT_MS);
        let mut rng = RngStream::new(1, 0);
        assert_eq!(s.on_request(0.0, &mut rng).unwrap(), 200.0);
        assert_eq!(
            s.state(),
            SessionState::Warm {
                last_request_ms: 0.0
            }
        );
        assert!(s.store().is_empty());
    }

    #[test]
    fn warm_request_keeps_store() {
        let mut s = session(300_000.0);
        let mut rng = RngStream::new(1, 0);
        s.on_request(1000.0, &mut rng).unwrap();
        s.store_put("k", CacheToken(7)).unwrap();
        assert_eq!(s.on_request(11_000.0, &mut rng).unwrap(), 0.0);
        assert_eq!(
            s.state(),
            SessionState::Warm {
                last_request_ms: 11_000.0
            }
        );
        assert_eq!(s.store_get("k").unwrap().unwrap().token, CacheToken(7));
    }

    #[test]
    fn idle_gap_suspends_and_clears() {
        let mut s = session(300_000.0);
        let mut rng = RngStream::new(1, 0);
        s.on_request(0.0, &mut rng).unwrap();
        s.store_put("k", CacheToken(1)).unwrap();
        assert_eq!(s.on_request(600_000.0, &mut rng).unwrap(), 200.0);
        assert_eq!(s.store_get("k").unwrap(), None);
        assert_eq!(s.cold_starts(), 2);
    }

    #[test]
    fn gap_equal_to_timeout_stays_warm() {
        let mut s = session(1000.0);
        let mut rng = RngStream::new(1, 0);
        s.on_request(0.0, &mut rng).unwrap();
        assert_eq!(s.on_request(1000.0, &mut rng).unwrap(), 0.0);
    }

    #[test]
    fn time_regression_rejected() {
        let mut s = session(1000.0);
        let mut rng = RngStream::new(1, 0);
        s.on_request(50.0, &mut rng).unwrap();
        assert!(matches!(
            s.on_request(10.0, &mut rng),
            Err(LifecycleError::TimeRegression { .. })
        ));
    }

    #[test]
    fn store_requires_warm_session() {
        let mut s = session(1000.0);
        assert_eq!(s.store_get("k"), Err(LifecycleError::NotWarm));
        assert_eq!(
            s.store_put("k", CacheToken(0)),
            Err(LifecycleError::NotWarm)
        );
        let mut rng = RngStream::new(1, 0);
        s.on_request(0.0, &mut rng).unwrap();
        assert_eq!(s.store_get("missing").unwrap(), None);
        assert!(s.suspend_if_idle(5000.0));
        assert_eq!(s.state(), SessionState::Suspended);
        assert_eq!(s.store_get("k"), Err(LifecycleError::NotWarm));
    }

    #[test]
    fn fixed_interval_cold_start_counts() {
        let mut rng = RngStream::new(1, 0);
        for (interval, expected) in [(1000.0, 1), (1000.5, 20), (999.0, 1)] {
            let mut s = session(1000.0);
            for k in 0..20 {
                s.on_request(f64::from(k) * interval, &mut rng).unwrap();
            }
            assert_eq!(s.cold_starts(), expected, "interval {interval}");
        }
    }

    #[derive(Debug, Clone)]
    enum Op {
        Put(u8),
        Get(u8),
        Gap(u32),
    }

    fn op() -> impl Strategy<Value = Op> {
        prop_oneof![
            any::<u8>().prop_map(|k| Op::Put(k % 8)),
            any::<u8>().prop_map(|k| Op::Get(k % 8)),
            (0u32..2000).prop_map(Op::Gap),
        ]
    }

    proptest! {
        #[test]
        fn store_never_survives_cold_start(ops in proptest::collection::vec(op(), 1..80)) {
            let mut s = session(1000.0);
            let mut rng = RngStream::new(2, 0);
            let mut now = 0.0;
            s.on_request(now, &mut rng).unwrap();
            // Model of what the current session should hold.
            let mut model = std::collections::HashSet::new();
            for op in ops {
                match op {
                    Op::Put(k) => {
                        s.store_put(k.to_string(), CacheToken(k.into())).unwrap();
                        model.insert(k);
                    }
                    Op::Get(k) => {
                        let got = s.store_get(&k.to_string()).unwrap().is_some();
                        prop_assert_eq!(got, model.contains(&k));
                    }
                    Op::Gap(gap) => {
                        now += f64::from(gap);
                        let before = s.cold_starts();
                        let penalty = s.on_request(now, &mut rng).unwrap();
                        if s.cold_starts() > before {
                            prop_assert!(f64::from(gap) > 1000.0);
                            prop_assert!(s.store().is_empty());
                            model.clear();
                        } else {
                            prop_assert!(f64::from(gap) <= 1000.0);
                            prop_assert_eq!(penalty, 0.0);
                        }
                    }
                }
            }
        }
    }
}
