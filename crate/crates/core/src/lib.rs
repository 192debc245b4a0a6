//! Deterministic discrete-event simulation of serverless function chains.
//!
//! Requests enter through a gateway and follow the critical path of a
//! workflow graph of functions and data stores. Each function runs in a
//! container that cold-starts on first use and after idling too long. The
//! terminal database access can be served by no cache, an external
//! network cache or a cache held in the container's memory, and writes can
//! be synchronous or write-behind.
//!
//! ```
//! use faassim::{presets, run_experiment};
//!
//! let out = run_experiment(&presets::chain(1)).unwrap();
//! assert!((out.report.mean - 50.0).abs() < 5.0);
//! ```

pub mod caching;
pub mod config;
pub mod engine;
pub mod experiment;
pub mod graph;
pub mod latency;
pub mod lifecycle;
pub mod metrics;
pub mod presets;

pub use config::{load_config, ConfigError, ExperimentConfig};
pub use engine::{simulate, Experiment, RequestRecord};
pub use experiment::{run_experiment, write_outputs, ExperimentError, ExperimentOutput};
pub use graph::{critical_path, validate_graph, WorkflowGraph};
pub use latency::{LatencyDistribution, RngStream};
pub use metrics::{compare, summarize, MetricsReport};
