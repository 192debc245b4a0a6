//! Running configured experiments and writing their outputs.

use std::fmt::Write as _;
use std::io;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::config::{ConfigViolation, ExperimentConfig};
use crate::engine::{simulate, RequestPlan, RequestRecord, SimError};
use crate::metrics::{summarize, summarize_by, Measure, MetricsError, MetricsReport};

pub const RECORDS_HEADER: &str = "request_id,arrival_ms,latency_ms,cold_start,cache_outcome";

#[derive(Debug, Error)]
pub enum ExperimentError {
    #[error("invalid config:\n  {}", .0.iter().map(ToString::to_string).collect::<Vec<_>>().join("\n  "))]
    Config(Vec<ConfigViolation>),
    #[error("simulation failed: {0}")]
    Sim(#[from] SimError),
    #[error(transparent)]
    Metrics(#[from] MetricsError),
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentOutput {
    pub config: ExperimentConfig,
    pub records: Vec<RequestRecord>,
    pub report: MetricsReport,
    /// Summary of the terminal data-access time, when the critical path
    /// ends at a database.
    pub backend_access: Option<MetricsReport>,
}

/// Validates `config`, runs it and summarizes the records.
pub fn run_experiment(config: &ExperimentConfig) -> Result<ExperimentOutput, ExperimentError> {
    let experiment = config.to_experiment().map_err(ExperimentError::Config)?;
    let sim = simulate(&experiment)?;
    let report = summarize(&sim.records, experiment.exclude_cold)?;
    debug_assert_eq!(
        report.deferred_writes_outstanding_max,
        sim.deferred_writes_outstanding_max
    );
    let has_backend = RequestPlan::new(&experiment.graph)
        .map(|p| p.backend().is_some())
        .unwrap_or(false);
    let backend_access = if has_backend {
        Some(summarize_by(
            &sim.records,
            experiment.exclude_cold,
            Measure::Backend,
        )?)
    } else {
        None
    };
    Ok(ExperimentOutput {
        config: config.clone(),
        records: sim.records,
        report,
        backend_access,
    })
}

/// `records.csv` contents: fixed header, one row per request.
pub fn records_csv(records: &[RequestRecord]) -> String {
    let mut out = String::with_capacity(32 * (records.len() + 1));
    out.push_str(RECORDS_HEADER);
    out.push('\n');
    for r in records {
        let _ = writeln!(
            out,
            "{},{},{},{},{}",
            r.request_id,
            r.arrival_ms,
            r.latency_ms,
            r.cold_start,
            r.cache_outcome.as_str()
        );
    }
    out
}

/// Contents of `report.json`: the metrics report fields at top level, plus
/// the data-access summary, the critical path and the config echo.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReportDocument {
    pub name: String,
    pub seed: u64,
    #[serde(flatten)]
    pub report: MetricsReport,
    pub backend_access: Option<MetricsReport>,
    pub critical_path: Vec<String>,
    pub config: ExperimentConfig,
}

impl ReportDocument {
    pub fn new(output: &ExperimentOutput) -> Self {
        Self {
            name: output.config.name.clone(),
            seed: output.config.seed,
            report: output.report.clone(),
            backend_access: output.backend_access.clone(),
            critical_path: output
                .records
                .first()
                .map(|r| r.path.to_vec())
                .unwrap_or_default(),
            config: output.config.clone(),
        }
    }
}

pub fn report_json(output: &ExperimentOutput) -> String {
    let mut s =
        serde_json::to_string_pretty(&ReportDocument::new(output)).expect("report serializes");
    s.push('\n');
    s
}

/// Writes the records and report into `dir`, at the file names given by
/// the config's output paths. Returns the two paths written.
pub fn write_outputs(output: &ExperimentOutput, dir: &Path) -> io::Result<(PathBuf, PathBuf)> {
    let records_path = dir.join(&output.config.output.records);
    let report_path = dir.join(&output.config.output.report);
    for p in [&records_path, &report_path] {
        if let Some(parent) = p.parent() {
            std::fs::create_dir_all(parent)?;
        }
    }
    std::fs::write(&records_path, records_csv(&output.records))?;
    std::fs::write(&report_path, report_json(output))?;
    Ok((records_path, report_path))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::presets;

    #[test]
    fn csv_layout() {
        let mut cfg = presets::simple_db_serverless();
        cfg.n_requests = 3;
        let out = run_experiment(&cfg).unwrap();
        let csv = records_csv(&out.records);
        let lines: Vec<&str> = csv.lines().collect();
        assert_eq!(lines[0], RECORDS_HEADER);
        assert_eq!(lines.len(), 4);
        assert!(lines[1].starts_with("0,0,"));
        assert!(lines[1].ends_with(",true,miss"));
        assert!(lines[2].starts_with("1,1000,"));
        assert!(lines[2].ends_with(",false,miss"));
    }

    #[test]
    fn report_round_trips() {
        let out = run_experiment(&presets::cache_compare()[2]).unwrap();
        let json = report_json(&out);
        let doc: ReportDocument = serde_json::from_str(&json).unwrap();
        assert_eq!(doc, ReportDocument::new(&out));
        assert_eq!(doc.critical_path, ["gateway", "f1", "db"]);
        let v: serde_json::Value = serde_json::from_str(&json).unwrap();
        for field in [
            "count",
            "mean",
            "p95",
            "five_number",
            "hit_ratio",
            "cold_start_count",
            "seed",
            "config",
        ] {
            assert!(v.get(field).is_some(), "missing {field}");
        }
    }

    #[test]
    fn invalid_config_is_reported() {
        let mut cfg = presets::chain(2);
        cfg.edges[1].network_delay = crate::latency::DistributionSpec::Constant { value: -1.0 };
        match run_experiment(&cfg) {
            Err(ExperimentError::Config(v)) => {
                assert_eq!(v[0].path, "edges[1].network_delay.value")
            }
            other => panic!("unexpected {other:?}"),
        }
    }
}
