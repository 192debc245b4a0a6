//! Discrete-event core: workloads, the event queue and per-request
//! simulation along the critical path.

use std::cmp::Ordering;
use std::collections::{BTreeMap, BinaryHeap};
use std::sync::Arc;

use rand_distr::{Distribution, Exp};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::caching::{
    self, BackendAccess, CacheOutcome, CacheStrategy, CachingError, KeyStreamError, WritePolicy,
};
use crate::graph::{critical_path, ComponentKind, InvalidGraph, WorkflowGraph};
use crate::latency::{LatencyDistribution, RngStream};
use crate::lifecycle::{ContainerSession, LifecycleError};

/// Stream ids derived from the master seed, one per source of randomness.
pub mod streams {
    pub const ARRIVALS: u64 = 1;
    pub const KEYS: u64 = 2;
    pub const COMPUTE: u64 = 3;
    pub const HOPS: u64 = 4;
    pub const BACKEND: u64 = 5;
    pub const CACHE: u64 = 6;
    pub const COLD_START: u64 = 7;
    pub const WRITE: u64 = 8;
}

/// Independent random streams for one experiment.
#[derive(Debug, Clone)]
pub struct Streams {
    pub arrivals: RngStream,
    pub keys: RngStream,
    pub compute: RngStream,
    pub hops: RngStream,
    pub backend: RngStream,
    pub cache: RngStream,
    pub cold_start: RngStream,
    pub write: RngStream,
}

impl Streams {
    pub fn new(seed: u64) -> Self {
        Self {
            arrivals: RngStream::new(seed, streams::ARRIVALS),
            keys: RngStream::new(seed, streams::KEYS),
            compute: RngStream::new(seed, streams::COMPUTE),
            hops: RngStream::new(seed, streams::HOPS),
            backend: RngStream::new(seed, streams::BACKEND),
            cache: RngStream::new(seed, streams::CACHE),
            cold_start: RngStream::new(seed, streams::COLD_START),
            write: RngStream::new(seed, streams::WRITE),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Workload {
    FixedInterval { interval_ms: f64 },
    Poisson { rate_per_s: f64 },
    Trace { arrivals_ms: Vec<f64> },
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum WorkloadError {
    #[error("n_requests must be at least 1")]
    NoRequests,
    #[error("interval must be finite and positive, got {0}")]
    Interval(f64),
    #[error("rate must be finite and positive, got {0}")]
    Rate(f64),
    #[error("trace has {len} arrivals but {n} requests were asked for")]
    TraceTooShort { len: usize, n: usize },
    #[error(
        "trace arrival {index} ({value} ms) is negative, not finite or not after its predecessor"
    )]
    TraceOrder { index: usize, value: f64 },
}

impl Workload {
    pub fn check(&self, n_requests: usize) -> Result<(), WorkloadError> {
        if n_requests < 1 {
            return Err(WorkloadError::NoRequests);
        }
        match self {
            Workload::FixedInterval { interval_ms } => {
                if !(interval_ms.is_finite() && *interval_ms > 0.0) {
                    return Err(WorkloadError::Interval(*interval_ms));
                }
            }
            Workload::Poisson { rate_per_s } => {
                if !(rate_per_s.is_finite() && *rate_per_s > 0.0) {
                    return Err(WorkloadError::Rate(*rate_per_s));
                }
            }
            Workload::Trace { arrivals_ms } => {
                if arrivals_ms.len() < n_requests {
                    return Err(WorkloadError::TraceTooShort {
                        len: arrivals_ms.len(),
                        n: n_requests,
                    });
                }
                let mut prev = None;
                for (index, &value) in arrivals_ms.iter().take(n_requests).enumerate() {
                    let ordered = prev.is_none_or(|p| value > p);
                    if !value.is_finite() || value < 0.0 || !ordered {
                        return Err(WorkloadError::TraceOrder { index, value });
                    }
                    prev = Some(value);
                }
            }
        }
        Ok(())
    }
}

/// Arrival times for `n` requests, strictly increasing.
///
/// Fixed intervals start at 0; a Poisson process starts at its first
/// exponential inter-arrival.
pub fn generate_arrivals(
    workload: &Workload,
    n: usize,
    rng: &mut RngStream,
) -> Result<Vec<f64>, WorkloadError> {
    workload.check(n)?;
    Ok(match workload {
        Workload::FixedInterval { interval_ms } => (0..n).map(|k| k as f64 * interval_ms).collect(),
        Workload::Poisson { rate_per_s } => {
            let exp = Exp::new(rate_per_s / 1000.0).expect("rate checked positive");
            let mut t = 0.0;
            let mut out = Vec::with_capacity(n);
            while out.len() < n {
                let gap: f64 = exp.sample(rng.rng());
                if t + gap > t {
                    t += gap;
                    out.push(t);
                }
            }
            out
        }
        Workload::Trace { arrivals_ms } => arrivals_ms[..n].to_vec(),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RequestKind {
    Read,
    Write,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum EventKind {
    Arrival(u64),
    DeferredWriteComplete(u64),
}

impl EventKind {
    fn rank(self) -> (u8, u64) {
        match self {
            EventKind::Arrival(id) => (0, id),
            EventKind::DeferredWriteComplete(id) => (1, id),
        }
    }
}

/// Scheduled event. Ordered by time, then arrivals before deferred-write
/// completions, then request id.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Event {
    pub time_ms: f64,
    pub kind: EventKind,
}

impl Eq for Event {}

impl Ord for Event {
    fn cmp(&self, other: &Self) -> Ordering {
        self.time_ms
            .total_cmp(&other.time_ms)
            .then_with(|| self.kind.rank().cmp(&other.kind.rank()))
    }
}

impl PartialOrd for Event {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// Min-ordered event queue.
#[derive(Debug, Default)]
pub struct EventQueue {
    heap: BinaryHeap<std::cmp::Reverse<Event>>,
}

impl EventQueue {
    pub fn push(&mut self, event: Event) {
        self.heap.push(std::cmp::Reverse(event));
    }

    pub fn pop(&mut self) -> Option<Event> {
        self.heap.pop().map(|r| r.0)
    }

    pub fn len(&self) -> usize {
        self.heap.len()
    }

    pub fn is_empty(&self) -> bool {
        self.heap.is_empty()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RequestRecord {
    pub request_id: u64,
    pub arrival_ms: f64,
    pub latency_ms: f64,
    pub cold_start: bool,
    pub cache_outcome: CacheOutcome,
    pub path: Arc<[String]>,
    /// Part of `latency_ms` spent on the terminal data access (cache and/or
    /// database, or write preprocessing).
    pub backend_ms: f64,
    /// Completion time of a deferred write, if this request issued one.
    pub deferred_write_complete_ms: Option<f64>,
}

/// Per-function container settings.
#[derive(Debug, Clone, PartialEq)]
pub struct FunctionSettings {
    pub idle_timeout_ms: f64,
    pub cold_start_delay: LatencyDistribution,
}

impl Default for FunctionSettings {
    fn default() -> Self {
        Self {
            idle_timeout_ms: crate::lifecycle::DEFAULT_IDLE_TIMEOUT_MS,
            cold_start_delay: LatencyDistribution::constant(
                crate::lifecycle::DEFAULT_COLD_START_MS,
            )
            .expect("valid constant"),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
struct Hop {
    component: String,
    kind: ComponentKind,
    delay: LatencyDistribution,
    compute: LatencyDistribution,
}

/// How requests traverse a graph: its critical path, unrolled into hops.
#[derive(Debug, Clone, PartialEq)]
pub struct RequestPlan {
    path: Arc<[String]>,
    entry_compute: LatencyDistribution,
    /// Hops up to, but excluding, a terminal database.
    hops: Vec<Hop>,
    /// Access to the database the path ends in, if it ends in one.
    backend: Option<BackendAccess>,
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum PlanError {
    #[error(transparent)]
    Graph(#[from] InvalidGraph),
    #[error("{0} requires the critical path to end at a database, but it ends at {1}")]
    NoDatabase(&'static str, String),
    #[error("internal cache requires a function to call the database, but {0} does")]
    NoCacheOwner(String),
}

impl RequestPlan {
    pub fn new(graph: &WorkflowGraph) -> Result<Self, PlanError> {
        let cp = critical_path(graph)?;
        let component = |id: &str| graph.component(id).expect("path ids exist");
        let entry_compute = component(&cp.ids[0]).compute.clone();
        let mut hops: Vec<Hop> = cp
            .ids
            .windows(2)
            .map(|pair| {
                let callee = component(&pair[1]);
                Hop {
                    component: callee.id.clone(),
                    kind: callee.kind,
                    delay: graph
                        .edge(&pair[0], &pair[1])
                        .expect("path edges exist")
                        .network_delay
                        .clone(),
                    compute: callee.compute.clone(),
                }
            })
            .collect();
        let backend = match hops.last() {
            Some(last) if last.kind == ComponentKind::Database => {
                let last = hops.pop().expect("non-empty");
                Some(BackendAccess {
                    db_access_delay: last.delay,
                    db_service_time: last.compute,
                })
            }
            _ => None,
        };
        Ok(Self {
            path: cp.ids.into(),
            entry_compute,
            hops,
            backend,
        })
    }

    pub fn path(&self) -> &Arc<[String]> {
        &self.path
    }

    pub fn backend(&self) -> Option<&BackendAccess> {
        self.backend.as_ref()
    }

    /// Function that calls the terminal database, if any.
    pub fn cache_owner(&self) -> Option<&str> {
        self.backend.as_ref()?;
        self.hops
            .last()
            .filter(|h| h.kind == ComponentKind::Function)
            .map(|h| h.component.as_str())
    }

    pub fn functions(&self) -> impl Iterator<Item = &str> {
        self.hops
            .iter()
            .filter(|h| h.kind == ComponentKind::Function)
            .map(|h| h.component.as_str())
    }

    /// Checks that the strategy and request kind can run on this path.
    pub fn check(&self, strategy: &CacheStrategy, kind: RequestKind) -> Result<(), PlanError> {
        let end = || self.path.last().cloned().unwrap_or_default();
        if self.backend.is_none() {
            if kind == RequestKind::Write {
                return Err(PlanError::NoDatabase("a write workload", end()));
            }
            if !matches!(strategy, CacheStrategy::NoCache) {
                return Err(PlanError::NoDatabase("a cache strategy", end()));
            }
        }
        if matches!(strategy, CacheStrategy::Internal { .. }) && self.cache_owner().is_none() {
            let caller = self.path.len().checked_sub(2).map(|i| self.path[i].clone());
            return Err(PlanError::NoCacheOwner(caller.unwrap_or_default()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SimError {
    #[error(transparent)]
    Plan(#[from] PlanError),
    #[error(transparent)]
    Lifecycle(#[from] LifecycleError),
    #[error(transparent)]
    Caching(#[from] CachingError),
    #[error(transparent)]
    Workload(#[from] WorkloadError),
    #[error(transparent)]
    Keys(#[from] KeyStreamError),
    #[error("no container session for function {0}")]
    MissingSession(String),
}

/// Container sessions keyed by function id.
pub type Sessions = BTreeMap<String, ContainerSession>;

/// Fresh sessions for every function on the plan's path.
pub fn sessions_for(plan: &RequestPlan, settings: &BTreeMap<String, FunctionSettings>) -> Sessions {
    plan.functions()
        .map(|f| {
            let s = settings.get(f).cloned().unwrap_or_default();
            (
                f.to_string(),
                ContainerSession::new(f, s.idle_timeout_ms, s.cold_start_delay),
            )
        })
        .collect()
}

/// Mutable state threaded through successive requests.
pub struct RequestContext<'a> {
    pub sessions: &'a mut Sessions,
    pub strategy: &'a mut CacheStrategy,
    pub policy: &'a WritePolicy,
    pub kind: RequestKind,
    pub streams: &'a mut Streams,
}

/// Runs one request arriving at `now_ms` along the plan's path.
///
/// Latency accumulates front to back: entry compute, then for every hop its
/// network delay, any cold-start penalty and the callee's compute. A
/// terminal database hop is replaced by the cache read or write policy.
/// Containers are stamped with the request's arrival time.
pub fn simulate_request(
    plan: &RequestPlan,
    ctx: &mut RequestContext<'_>,
    request_id: u64,
    key: &str,
    now_ms: f64,
) -> Result<RequestRecord, SimError> {
    let streams = &mut *ctx.streams;
    let mut latency = plan.entry_compute.sample(&mut streams.compute);
    let mut cold_start = false;
    for hop in &plan.hops {
        latency += hop.delay.sample(&mut streams.hops);
        if hop.kind == ComponentKind::Function {
            let session = ctx
                .sessions
                .get_mut(&hop.component)
                .ok_or_else(|| SimError::MissingSession(hop.component.clone()))?;
            let before = session.cold_starts();
            latency += session.on_request(now_ms, &mut streams.cold_start)?;
            cold_start |= session.cold_starts() > before;
        }
        latency += hop.compute.sample(&mut streams.compute);
    }

    let mut record = RequestRecord {
        request_id,
        arrival_ms: now_ms,
        latency_ms: latency,
        cold_start,
        cache_outcome: CacheOutcome::NotApplicable,
        path: plan.path.clone(),
        backend_ms: 0.0,
        deferred_write_complete_ms: None,
    };
    let Some(backend) = &plan.backend else {
        return Ok(record);
    };

    match ctx.kind {
        RequestKind::Read => {
            let session = match plan.cache_owner() {
                Some(owner) => ctx.sessions.get_mut(owner),
                None => None,
            };
            let r = caching::read(
                ctx.strategy,
                session,
                backend,
                key,
                now_ms,
                &mut streams.cache,
                &mut streams.backend,
            )?;
            record.backend_ms = r.latency_ms;
            record.cache_outcome = r.outcome;
        }
        RequestKind::Write => {
            let w = caching::write(
                ctx.policy,
                backend,
                &mut streams.write,
                &mut streams.backend,
            );
            record.backend_ms = w.latency_ms;
            record.deferred_write_complete_ms =
                w.deferred_ms.map(|d| now_ms + latency + w.latency_ms + d);
        }
    }
    record.latency_ms = latency + record.backend_ms;
    Ok(record)
}

/// A validated experiment, ready to run.
#[derive(Debug, Clone, PartialEq)]
pub struct Experiment {
    pub name: String,
    pub graph: WorkflowGraph,
    pub functions: BTreeMap<String, FunctionSettings>,
    pub strategy: CacheStrategy,
    pub write_policy: WritePolicy,
    pub request_kind: RequestKind,
    pub hit_ratio_target: f64,
    pub key_space: usize,
    pub workload: Workload,
    pub n_requests: usize,
    pub seed: u64,
    pub exclude_cold: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SimulationOutput {
    pub records: Vec<RequestRecord>,
    pub deferred_writes_outstanding_max: u64,
    pub events_processed: u64,
}

/// Runs the event loop for one experiment. Deterministic given the seed.
pub fn simulate(experiment: &Experiment) -> Result<SimulationOutput, SimError> {
    let plan = RequestPlan::new(&experiment.graph)?;
    plan.check(&experiment.strategy, experiment.request_kind)?;

    let mut streams = Streams::new(experiment.seed);
    let arrivals = generate_arrivals(
        &experiment.workload,
        experiment.n_requests,
        &mut streams.arrivals,
    )?;
    let keys = caching::synthesize_key_stream(
        experiment.hit_ratio_target,
        experiment.n_requests,
        experiment.key_space,
        &mut streams.keys,
    )?;

    let mut sessions = sessions_for(&plan, &experiment.functions);
    let mut strategy = experiment.strategy.clone();
    let mut queue = EventQueue::default();
    for (id, &time_ms) in arrivals.iter().enumerate() {
        queue.push(Event {
            time_ms,
            kind: EventKind::Arrival(id as u64),
        });
    }

    let mut records = Vec::with_capacity(experiment.n_requests);
    let mut clock = 0.0_f64;
    let mut outstanding = 0u64;
    let mut outstanding_max = 0u64;
    let mut events_processed = 0u64;
    let mut ctx = RequestContext {
        sessions: &mut sessions,
        strategy: &mut strategy,
        policy: &experiment.write_policy,
        kind: experiment.request_kind,
        streams: &mut streams,
    };
    while let Some(event) = queue.pop() {
        debug_assert!(event.time_ms >= clock, "virtual clock went backwards");
        clock = event.time_ms;
        events_processed += 1;
        match event.kind {
            EventKind::Arrival(id) => {
                let record = simulate_request(&plan, &mut ctx, id, &keys[id as usize], clock)?;
                if let Some(done) = record.deferred_write_complete_ms {
                    outstanding += 1;
                    outstanding_max = outstanding_max.max(outstanding);
                    queue.push(Event {
                        time_ms: done,
                        kind: EventKind::DeferredWriteComplete(id),
                    });
                }
                records.push(record);
            }
            EventKind::DeferredWriteComplete(_) => outstanding -= 1,
        }
    }

    Ok(SimulationOutput {
        records,
        deferred_writes_outstanding_max: outstanding_max,
        events_processed,
    })
}
