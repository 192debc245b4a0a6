//! Read strategies, write policies and synthetic request keys.
//!
//! Reads go through one of three strategies:
//!
//! - `NoCache`: every read pays the backend access.
//! - `External`: a network-attached cache. Every access pays a network
//!   round trip; misses additionally pay the backend and populate the cache
//!   (read-through). Its store lives outside the container and survives
//!   cold starts.
//! - `Internal`: a store held in the function container's memory. Hits are
//!   in-process, misses pay the backend and populate the session store.
//!   Everything is lost when the container is suspended.
//!
//! Writes are either synchronous or write-behind; a write-behind response
//! only pays for preprocessing and the backend write completes off the
//! response path.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::latency::{LatencyDistribution, RngStream};
use crate::lifecycle::{CacheToken, ContainerSession, KvStore, LifecycleError};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CacheOutcome {
    Hit,
    Miss,
    NotApplicable,
}

impl CacheOutcome {
    pub fn as_str(self) -> &'static str {
        match self {
            CacheOutcome::Hit => "hit",
            CacheOutcome::Miss => "miss",
            CacheOutcome::NotApplicable => "n/a",
        }
    }
}

/// Cost of reaching the backing database: the network hop plus the
/// database's own service time.
#[derive(Debug, Clone, PartialEq)]
pub struct BackendAccess {
    pub db_access_delay: LatencyDistribution,
    pub db_service_time: LatencyDistribution,
}

impl BackendAccess {
    pub fn new(db_access_delay: LatencyDistribution) -> Self {
        Self {
            db_access_delay,
            db_service_time: LatencyDistribution::zero(),
        }
    }

    pub fn sample(&self, rng: &mut RngStream) -> f64 {
        let hop = self.db_access_delay.sample(rng);
        hop + self.db_service_time.sample(rng)
    }

    pub fn mean(&self) -> f64 {
        self.db_access_delay.mean() + self.db_service_time.mean()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum CacheStrategy {
    NoCache,
    External {
        access_delay: LatencyDistribution,
        store: KvStore,
    },
    Internal {
        /// Lookup cost of a hit; 0 unless configured otherwise.
        hit_cost_ms: f64,
    },
}

impl CacheStrategy {
    pub fn external(access_delay: LatencyDistribution) -> Self {
        CacheStrategy::External {
            access_delay,
            store: KvStore::default(),
        }
    }

    pub fn internal() -> Self {
        CacheStrategy::Internal { hit_cost_ms: 0.0 }
    }

    pub fn name(&self) -> &'static str {
        match self {
            CacheStrategy::NoCache => "none",
            CacheStrategy::External { .. } => "external",
            CacheStrategy::Internal { .. } => "internal",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum WritePolicy {
    SyncWrite,
    WriteBehind { preprocess: LatencyDistribution },
}

impl WritePolicy {
    pub fn name(&self) -> &'static str {
        match self {
            WritePolicy::SyncWrite => "sync",
            WritePolicy::WriteBehind { .. } => "write_behind",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Error)]
pub enum CachingError {
    #[error("internal cache read without a function container session")]
    NoSession,
    #[error(transparent)]
    Lifecycle(#[from] LifecycleError),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ReadResult {
    pub latency_ms: f64,
    pub outcome: CacheOutcome,
}

/// Value the backend returns for `key` (FNV-1a of the key bytes).
fn backend_value(key: &str) -> CacheToken {
    let mut h: u64 = 0xcbf2_9ce4_8422_2325;
    for b in key.bytes() {
        h ^= u64::from(b);
        h = h.wrapping_mul(0x0000_0100_0000_01b3);
    }
    CacheToken(h)
}

/// Serves one read of `key` at `now_ms`.
///
/// Cache access delays are drawn from `cache_rng`, backend accesses from
/// `db_rng`. For `Internal`, `session` must be the warm container that
/// issues the read.
pub fn read(
    strategy: &mut CacheStrategy,
    session: Option<&mut ContainerSession>,
    backend: &BackendAccess,
    key: &str,
    now_ms: f64,
    cache_rng: &mut RngStream,
    db_rng: &mut RngStream,
) -> Result<ReadResult, CachingError> {
    match strategy {
        CacheStrategy::NoCache => Ok(ReadResult {
            latency_ms: backend.sample(db_rng),
            outcome: CacheOutcome::Miss,
        }),
        CacheStrategy::External {
            access_delay,
            store,
        } => {
            let access = access_delay.sample(cache_rng);
            if store.contains(key) {
                Ok(ReadResult {
                    latency_ms: access,
                    outcome: CacheOutcome::Hit,
                })
            } else {
                let latency_ms = access + backend.sample(db_rng);
                store.put(key, backend_value(key), now_ms);
                Ok(ReadResult {
                    latency_ms,
                    outcome: CacheOutcome::Miss,
                })
            }
        }
        CacheStrategy::Internal { hit_cost_ms } => {
            let session = session.ok_or(CachingError::NoSession)?;
            if session.store_get(key)?.is_some() {
                Ok(ReadResult {
                    latency_ms: *hit_cost_ms,
                    outcome: CacheOutcome::Hit,
                })
            } else {
                let latency_ms = backend.sample(db_rng);
                session.store_put(key, backend_value(key))?;
                Ok(ReadResult {
                    latency_ms,
                    outcome: CacheOutcome::Miss,
                })
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WriteResult {
    /// Contribution to the response latency.
    pub latency_ms: f64,
    /// Duration of the backend write that runs off the response path, if
    /// the write was deferred.
    pub deferred_ms: Option<f64>,
}

impl WriteResult {
    pub fn is_deferred(&self) -> bool {
        self.deferred_ms.is_some()
    }
}

/// Serves one write. Preprocessing is drawn from `write_rng`, backend
/// writes (synchronous or deferred) from `db_rng`.
pub fn write(
    policy: &WritePolicy,
    backend: &BackendAccess,
    write_rng: &mut RngStream,
    db_rng: &mut RngStream,
) -> WriteResult {
    match policy {
        WritePolicy::SyncWrite => WriteResult {
            latency_ms: backend.sample(db_rng),
            deferred_ms: None,
        },
        WritePolicy::WriteBehind { preprocess } => WriteResult {
            latency_ms: preprocess.sample(write_rng),
            deferred_ms: Some(backend.sample(db_rng)),
        },
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum KeyStreamError {
    #[error("hit ratio target must lie in [0, 1], got {0}")]
    HitRatio(f64),
    #[error("key stream needs at least one request")]
    Empty,
    #[error("key space must hold at least one key")]
    EmptyKeySpace,
}

/// Builds `n` request keys whose expected repeat fraction is
/// `hit_ratio_target`.
///
/// The first key is fresh. Each later key repeats a uniformly chosen
/// earlier key with probability `hit_ratio_target`, otherwise it is a new
/// key; once `key_space` distinct keys exist every draw is a repeat.
pub fn synthesize_key_stream(
    hit_ratio_target: f64,
    n: usize,
    key_space: usize,
    rng: &mut RngStream,
) -> Result<Vec<String>, KeyStreamError> {
    if !(0.0..=1.0).contains(&hit_ratio_target) {
        return Err(KeyStreamError::HitRatio(hit_ratio_target));
    }
    if n < 1 {
        return Err(KeyStreamError::Empty);
    }
    if key_space < 1 {
        return Err(KeyStreamError::EmptyKeySpace);
    }
    let key = |i: usize| format!("key-{i}");
    let mut distinct = 1;
    let mut keys = Vec::with_capacity(n);
    keys.push(key(0));
    for _ in 1..n {
        let repeat = rng.unit() < hit_ratio_target || distinct >= key_space;
        if repeat {
            keys.push(key(rng.index(distinct)));
        } else {
            keys.push(key(distinct));
            distinct += 1;
        }
    }
    Ok(keys)
}
