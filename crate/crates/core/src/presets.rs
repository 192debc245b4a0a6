//! Built-in experiments.
//!
//! | preset                 | configs                                   |
//! |------------------------|-------------------------------------------|
//! | `simple-db-serverless` | function reading a remote database        |
//! | `simple-db-vm`         | same app with a co-located database       |
//! | `chain-1` .. `chain-5` | chain of L functions ending at a database |
//! | `chain-sweep`          | `chain-1` .. `chain-5`                    |
//! | `cache-compare`        | no cache, external cache, internal cache  |
//! | `write-compare`        | synchronous vs write-behind writes        |
//!
//! Chain delays come from fitting the linear chain model to a mean of
//! 50 ms at one function and 430 ms at five, with 5 ms of compute per
//! function: 90 ms per extra hop, 45 ms to reach the database. Stochastic
//! parameters are clamped normals with a standard deviation of 20% of the
//! mean. Requests arrive every second, which keeps containers warm, and
//! the initial cold start is excluded from statistics.

use crate::config::{
    CacheKind, ComponentConfig, EdgeConfig, ExperimentConfig, OutputPaths, WritePolicyKind,
};
use crate::engine::{RequestKind, Workload};
use crate::graph::ComponentKind;
use crate::latency::{
    fit_chain_model, ChainCalibration, ChainFit, DistributionSpec, DEFAULT_SPREAD,
};

pub const PRESET_NAMES: &[&str] = &[
    "simple-db-serverless",
    "simple-db-vm",
    "chain-1",
    "chain-2",
    "chain-3",
    "chain-4",
    "chain-5",
    "chain-sweep",
    "cache-compare",
    "write-compare",
];

/// Endpoints the chain presets are calibrated to.
pub const CHAIN_CALIBRATION: ChainCalibration = ChainCalibration {
    length_a: 1,
    mean_a: 50.0,
    length_b: 5,
    mean_b: 430.0,
    per_function_compute: 5.0,
};

/// Database access from a function is this many times slower than from a
/// co-located VM application.
pub const SERVERLESS_TO_VM_DB_RATIO: f64 = 14.0;

pub const CACHE_COMPARE_DB_MEAN_MS: f64 = 50.0;
pub const EXTERNAL_CACHE_MEAN_MS: f64 = 10.0;
pub const CACHE_HIT_RATIO: f64 = 0.9;
pub const WRITE_PREPROCESS_MEAN_MS: f64 = 2.0;
pub const DEFAULT_REQUESTS: usize = 100;
pub const DEFAULT_INTERVAL_MS: f64 = 1000.0;

pub fn chain_fit() -> ChainFit {
    fit_chain_model(&CHAIN_CALIBRATION).expect("built-in calibration is consistent")
}

/// Clamped normal with the default relative spread.
pub fn spread(mean: f64) -> DistributionSpec {
    DistributionSpec::Normal {
        mean,
        stddev: mean * DEFAULT_SPREAD,
    }
}

fn constant(value: f64) -> DistributionSpec {
    DistributionSpec::Constant { value }
}

fn node(id: &str, kind: ComponentKind, compute: Option<DistributionSpec>) -> ComponentConfig {
    ComponentConfig {
        id: id.into(),
        kind,
        compute,
        idle_timeout_ms: None,
        cold_start_delay: None,
    }
}

fn edge(caller: &str, callee: &str, delay: DistributionSpec) -> EdgeConfig {
    EdgeConfig {
        caller: caller.into(),
        callee: callee.into(),
        network_delay: delay,
    }
}

fn base(name: &str, components: Vec<ComponentConfig>, edges: Vec<EdgeConfig>) -> ExperimentConfig {
    ExperimentConfig {
        name: name.into(),
        components,
        edges,
        workload: Workload::FixedInterval {
            interval_ms: DEFAULT_INTERVAL_MS,
        },
        n_requests: DEFAULT_REQUESTS,
        request_kind: RequestKind::Read,
        cache: CacheKind::None,
        external_access_delay: None,
        internal_hit_cost_ms: 0.0,
        write_policy: WritePolicyKind::Sync,
        write_preprocess: None,
        hit_ratio_target: CACHE_HIT_RATIO,
        key_space: None,
        seed: 1,
        exclude_cold: true,
        output: OutputPaths::default(),
    }
}

/// Gateway, one function and a database.
fn single_function(name: &str, db_mean: f64) -> ExperimentConfig {
    let fit = chain_fit();
    base(
        name,
        vec![
            node("gateway", ComponentKind::Gateway, None),
            node(
                "f1",
                ComponentKind::Function,
                Some(spread(fit.per_function_compute)),
            ),
            node("db", ComponentKind::Database, None),
        ],
        vec![
            edge("gateway", "f1", constant(0.0)),
            edge("f1", "db", spread(db_mean)),
        ],
    )
}

pub fn simple_db_serverless() -> ExperimentConfig {
    single_function("simple-db-serverless", chain_fit().terminal_delay)
}

/// VM baseline: the application and database share a host, so database
/// access is 14 times faster and there are no inter-component hops.
pub fn simple_db_vm() -> ExperimentConfig {
    let mut cfg = single_function(
        "simple-db-vm",
        chain_fit().terminal_delay / SERVERLESS_TO_VM_DB_RATIO,
    );
    cfg.components[1].cold_start_delay = Some(constant(0.0));
    cfg
}

/// Chain of `length` functions: the gateway calls `f1`, each `fi` calls
/// `f(i+1)`, and the last function reads the database.
pub fn chain(length: usize) -> ExperimentConfig {
    assert!(length >= 1, "a chain has at least one function");
    let fit = chain_fit();
    let mut components = vec![node("gateway", ComponentKind::Gateway, None)];
    let mut edges = Vec::new();
    let mut prev = "gateway".to_string();
    for i in 1..=length {
        let id = format!("f{i}");
        components.push(node(
            &id,
            ComponentKind::Function,
            Some(spread(fit.per_function_compute)),
        ));
        let delay = if i == 1 {
            constant(0.0)
        } else {
            spread(fit.per_hop_delay)
        };
        edges.push(edge(&prev, &id, delay));
        prev = id;
    }
    components.push(node("db", ComponentKind::Database, None));
    edges.push(edge(&prev, "db", spread(fit.terminal_delay)));
    base(&format!("chain-{length}"), components, edges)
}

pub fn chain_sweep() -> Vec<ExperimentConfig> {
    (1..=5).map(chain).collect()
}

/// One function reading a database with a 50 ms mean, under each cache
/// strategy, with a 0.9-hit key stream.
pub fn cache_compare() -> Vec<ExperimentConfig> {
    [CacheKind::None, CacheKind::External, CacheKind::Internal]
        .into_iter()
        .map(|kind| {
            let name = match kind {
                CacheKind::None => "cache-none",
                CacheKind::External => "cache-external",
                CacheKind::Internal => "cache-internal",
            };
            let mut cfg = single_function(name, CACHE_COMPARE_DB_MEAN_MS);
            cfg.cache = kind;
            if kind == CacheKind::External {
                cfg.external_access_delay = Some(spread(EXTERNAL_CACHE_MEAN_MS));
            }
            cfg
        })
        .collect()
}

/// Writes through one function, synchronous and write-behind.
pub fn write_compare() -> Vec<ExperimentConfig> {
    [WritePolicyKind::Sync, WritePolicyKind::WriteBehind]
        .into_iter()
        .map(|policy| {
            let name = match policy {
                WritePolicyKind::Sync => "write-sync",
                WritePolicyKind::WriteBehind => "write-behind",
            };
            let mut cfg = single_function(name, chain_fit().terminal_delay);
            cfg.request_kind = RequestKind::Write;
            cfg.write_policy = policy;
            if policy == WritePolicyKind::WriteBehind {
                cfg.write_preprocess = Some(spread(WRITE_PREPROCESS_MEAN_MS));
            }
            cfg
        })
        .collect()
}

/// Configs of a named preset, or `None` if the name is unknown.
pub fn preset(name: &str) -> Option<Vec<ExperimentConfig>> {
    Some(match name {
        "simple-db-serverless" => vec![simple_db_serverless()],
        "simple-db-vm" => vec![simple_db_vm()],
        "chain-sweep" => chain_sweep(),
        "cache-compare" => cache_compare(),
        "write-compare" => write_compare(),
        _ => {
            let l: usize = name.strip_prefix("chain-")?.parse().ok()?;
            if !(1..=5).contains(&l) {
                return None;
            }
            vec![chain(l)]
        }
    })
}
