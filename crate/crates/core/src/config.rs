//! Experiment configuration documents (JSON).
//!
//! A document is parsed into [`ExperimentConfig`] and then validated into an
//! [`Experiment`]. Validation collects every problem with the JSON path of
//! the offending field, e.g. `edges[2].network_delay.mean`.

use std::collections::BTreeMap;
use std::fmt;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::caching::{CacheStrategy, WritePolicy};
use crate::engine::{
    Experiment, FunctionSettings, RequestKind, RequestPlan, Workload, WorkloadError,
};
use crate::graph::{validate_graph, Component, ComponentKind, Edge, Violation, WorkflowGraph};
use crate::latency::{DistributionSpec, LatencyDistribution};
use crate::lifecycle::{DEFAULT_COLD_START_MS, DEFAULT_IDLE_TIMEOUT_MS};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ComponentConfig {
    pub id: String,
    pub kind: ComponentKind,
    /// Defaults to zero.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub compute: Option<DistributionSpec>,
    /// Functions only. Defaults to 300000 ms.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub idle_timeout_ms: Option<f64>,
    /// Functions only. Defaults to a constant 200 ms.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub cold_start_delay: Option<DistributionSpec>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EdgeConfig {
    pub caller: String,
    pub callee: String,
    pub network_delay: DistributionSpec,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CacheKind {
    #[default]
    None,
    External,
    Internal,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum WritePolicyKind {
    #[default]
    Sync,
    WriteBehind,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputPaths {
    pub records: PathBuf,
    pub report: PathBuf,
}

impl Default for OutputPaths {
    fn default() -> Self {
        Self {
            records: PathBuf::from("records.csv"),
            report: PathBuf::from("report.json"),
        }
    }
}

fn default_request_kind() -> RequestKind {
    RequestKind::Read
}

fn default_hit_ratio() -> f64 {
    0.9
}

fn default_seed() -> u64 {
    1
}

fn is_default<T: Default + PartialEq>(v: &T) -> bool {
    *v == T::default()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub name: String,
    pub components: Vec<ComponentConfig>,
    pub edges: Vec<EdgeConfig>,
    pub workload: Workload,
    pub n_requests: usize,
    #[serde(default = "default_request_kind")]
    pub request_kind: RequestKind,
    #[serde(default)]
    pub cache: CacheKind,
    /// Required when `cache` is `external`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub external_access_delay: Option<DistributionSpec>,
    #[serde(default, skip_serializing_if = "is_default")]
    pub internal_hit_cost_ms: f64,
    #[serde(default)]
    pub write_policy: WritePolicyKind,
    /// Write-behind preprocessing time. Defaults to zero.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub write_preprocess: Option<DistributionSpec>,
    #[serde(default = "default_hit_ratio")]
    pub hit_ratio_target: f64,
    /// Upper bound on distinct keys. Defaults to `n_requests`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub key_space: Option<usize>,
    #[serde(default = "default_seed")]
    pub seed: u64,
    #[serde(default)]
    pub exclude_cold: bool,
    #[serde(default)]
    pub output: OutputPaths,
}

/// One invalid field.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ConfigViolation {
    pub path: String,
    pub message: String,
}

impl ConfigViolation {
    fn new(path: impl Into<String>, message: impl Into<String>) -> Self {
        Self {
            path: path.into(),
            message: message.into(),
        }
    }
}

impl fmt::Display for ConfigViolation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: {}", self.path, self.message)
    }
}

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("cannot read config {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("malformed config {path}: {source}")]
    Malformed {
        path: PathBuf,
        #[source]
        source: serde_json::Error,
    },
    #[error("invalid config:\n  {}", .0.iter().map(ToString::to_string).collect::<Vec<_>>().join("\n  "))]
    Invalid(Vec<ConfigViolation>),
}

impl ConfigError {
    pub fn violations(&self) -> &[ConfigViolation] {
        match self {
            ConfigError::Invalid(v) => v,
            _ => &[],
        }
    }
}

/// Reads and validates a config document.
pub fn load_config(path: impl AsRef<Path>) -> Result<ExperimentConfig, ConfigError> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|source| ConfigError::Io {
        path: path.to_path_buf(),
        source,
    })?;
    let config: ExperimentConfig =
        serde_json::from_str(&text).map_err(|source| ConfigError::Malformed {
            path: path.to_path_buf(),
            source,
        })?;
    config.validate().map_err(ConfigError::Invalid)?;
    Ok(config)
}

fn distribution(
    out: &mut Vec<ConfigViolation>,
    path: &str,
    spec: &DistributionSpec,
) -> Option<LatencyDistribution> {
    match LatencyDistribution::new(spec.clone()) {
        Ok(d) => Some(d),
        Err(e) => {
            out.extend(
                e.0.into_iter()
                    .map(|p| ConfigViolation::new(format!("{path}.{}", p.param), p.message)),
            );
            None
        }
    }
}

fn optional_distribution(
    out: &mut Vec<ConfigViolation>,
    path: &str,
    spec: Option<&DistributionSpec>,
    default: LatencyDistribution,
) -> LatencyDistribution {
    spec.and_then(|s| distribution(out, path, s))
        .unwrap_or(default)
}

impl ExperimentConfig {
    /// Validates without building.
    pub fn validate(&self) -> Result<(), Vec<ConfigViolation>> {
        self.to_experiment().map(|_| ())
    }

    /// Builds the validated experiment, or lists every violation.
    pub fn to_experiment(&self) -> Result<Experiment, Vec<ConfigViolation>> {
        let mut out = Vec::new();

        let mut components = Vec::with_capacity(self.components.len());
        let mut functions = BTreeMap::new();
        for (i, c) in self.components.iter().enumerate() {
            let base = format!("components[{i}]");
            let compute = optional_distribution(
                &mut out,
                &format!("{base}.compute"),
                c.compute.as_ref(),
                LatencyDistribution::zero(),
            );
            if c.kind == ComponentKind::Function {
                let idle_timeout_ms = c.idle_timeout_ms.unwrap_or(DEFAULT_IDLE_TIMEOUT_MS);
                if !idle_timeout_ms.is_finite() || idle_timeout_ms < 0.0 {
                    out.push(ConfigViolation::new(
                        format!("{base}.idle_timeout_ms"),
                        format!("must be finite and non-negative, got {idle_timeout_ms}"),
                    ));
                }
                let cold_start_delay = optional_distribution(
                    &mut out,
                    &format!("{base}.cold_start_delay"),
                    c.cold_start_delay.as_ref(),
                    LatencyDistribution::constant(DEFAULT_COLD_START_MS).expect("valid constant"),
                );
                functions.insert(
                    c.id.clone(),
                    FunctionSettings {
                        idle_timeout_ms,
                        cold_start_delay,
                    },
                );
            } else {
                if c.idle_timeout_ms.is_some() {
                    out.push(ConfigViolation::new(
                        format!("{base}.idle_timeout_ms"),
                        "only functions have containers",
                    ));
                }
                if c.cold_start_delay.is_some() {
                    out.push(ConfigViolation::new(
                        format!("{base}.cold_start_delay"),
                        "only functions have containers",
                    ));
                }
            }
            components.push(Component::new(c.id.clone(), c.kind, compute));
        }

        let mut edges = Vec::with_capacity(self.edges.len());
        for (i, e) in self.edges.iter().enumerate() {
            let delay = distribution(
                &mut out,
                &format!("edges[{i}].network_delay"),
                &e.network_delay,
            )
            .unwrap_or_else(LatencyDistribution::zero);
            edges.push(Edge::new(e.caller.clone(), e.callee.clone(), delay));
        }
        let graph = WorkflowGraph { components, edges };
        let graph_violations = validate_graph(&graph);
        out.extend(graph_violations.iter().map(|v| self.locate(v)));

        if let Err(e) = self.workload.check(self.n_requests) {
            out.push(workload_violation(&e));
        }

        if !(0.0..=1.0).contains(&self.hit_ratio_target) {
            out.push(ConfigViolation::new(
                "hit_ratio_target",
                format!("must lie in [0, 1], got {}", self.hit_ratio_target),
            ));
        }
        let key_space = self.key_space.unwrap_or(self.n_requests);
        if key_space < 1 {
            out.push(ConfigViolation::new("key_space", "must be at least 1"));
        }

        let strategy = match self.cache {
            CacheKind::None => CacheStrategy::NoCache,
            CacheKind::External => match &self.external_access_delay {
                Some(spec) => CacheStrategy::external(
                    distribution(&mut out, "external_access_delay", spec)
                        .unwrap_or_else(LatencyDistribution::zero),
                ),
                None => {
                    out.push(ConfigViolation::new(
                        "external_access_delay",
                        "required when cache is \"external\"",
                    ));
                    CacheStrategy::NoCache
                }
            },
            CacheKind::Internal => CacheStrategy::Internal {
                hit_cost_ms: self.internal_hit_cost_ms,
            },
        };
        if !self.internal_hit_cost_ms.is_finite() || self.internal_hit_cost_ms < 0.0 {
            out.push(ConfigViolation::new(
                "internal_hit_cost_ms",
                format!(
                    "must be finite and non-negative, got {}",
                    self.internal_hit_cost_ms
                ),
            ));
        }

        let write_policy = match self.write_policy {
            WritePolicyKind::Sync => WritePolicy::SyncWrite,
            WritePolicyKind::WriteBehind => WritePolicy::WriteBehind {
                preprocess: optional_distribution(
                    &mut out,
                    "write_preprocess",
                    self.write_preprocess.as_ref(),
                    LatencyDistribution::zero(),
                ),
            },
        };

        if graph_violations.is_empty() {
            match RequestPlan::new(&graph) {
                Ok(plan) => {
                    if let Err(e) = plan.check(&strategy, self.request_kind) {
                        let path = if self.request_kind == RequestKind::Write {
                            "request_kind"
                        } else {
                            "cache"
                        };
                        out.push(ConfigViolation::new(path, e.to_string()));
                    }
                }
                Err(e) => out.push(ConfigViolation::new("components", e.to_string())),
            }
        }

        if !out.is_empty() {
            return Err(out);
        }
        Ok(Experiment {
            name: self.name.clone(),
            graph,
            functions,
            strategy,
            write_policy,
            request_kind: self.request_kind,
            hit_ratio_target: self.hit_ratio_target,
            key_space,
            workload: self.workload.clone(),
            n_requests: self.n_requests,
            seed: self.seed,
            exclude_cold: self.exclude_cold,
        })
    }

    fn component_index(&self, id: &str) -> Option<usize> {
        self.components.iter().position(|c| c.id == id)
    }

    fn locate(&self, v: &Violation) -> ConfigViolation {
        let path = match v {
            Violation::DuplicateId { id } => self
                .components
                .iter()
                .enumerate()
                .filter(|(_, c)| &c.id == id)
                .nth(1)
                .map(|(i, _)| format!("components[{i}].id")),
            Violation::Unreachable { id } => {
                self.component_index(id).map(|i| format!("components[{i}]"))
            }
            Violation::UnknownCaller { edge, .. } | Violation::SinkWithOutgoing { edge, .. } => {
                Some(format!("edges[{edge}].caller"))
            }
            Violation::UnknownCallee { edge, .. } | Violation::EdgeIntoGateway { edge, .. } => {
                Some(format!("edges[{edge}].callee"))
            }
            Violation::SelfLoop { edge, .. } | Violation::DuplicateEdge { edge, .. } => {
                Some(format!("edges[{edge}]"))
            }
            Violation::MissingGateway
            | Violation::MultipleGateways { .. }
            | Violation::Cycle { .. } => None,
        };
        ConfigViolation::new(path.unwrap_or_else(|| "components".into()), v.to_string())
    }
}

fn workload_violation(e: &WorkloadError) -> ConfigViolation {
    let path = match e {
        WorkloadError::NoRequests => "n_requests".to_string(),
        WorkloadError::Interval(_) => "workload.interval_ms".into(),
        WorkloadError::Rate(_) => "workload.rate_per_s".into(),
        WorkloadError::TraceTooShort { .. } => "workload.arrivals_ms".into(),
        WorkloadError::TraceOrder { index, .. } => format!("workload.arrivals_ms[{index}]"),
    };
    ConfigViolation::new(path, e.to_string())
}
