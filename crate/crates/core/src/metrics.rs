//! Summary statistics over request records.
//!
//! Percentiles use the nearest-rank method: the p-th percentile of `n`
//! sorted values is the value at 1-based rank `ceil(p·n/100)`. The rank is
//! computed in integer arithmetic so results are exact for any `n`.

use serde::{Deserialize, Serialize, Serializer};
use thiserror::Error;

use crate::caching::CacheOutcome;
use crate::engine::RequestRecord;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FiveNumber {
    pub min: f64,
    pub q1: f64,
    pub median: f64,
    pub q3: f64,
    pub max: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricsReport {
    pub count: usize,
    pub mean: f64,
    pub min: f64,
    pub max: f64,
    pub p50: f64,
    pub p95: f64,
    pub p99: f64,
    pub five_number: FiveNumber,
    pub hit_ratio: Option<f64>,
    /// Cold starts across all records, including excluded ones.
    pub cold_start_count: usize,
    pub deferred_writes_outstanding_max: u64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Error)]
pub enum MetricsError {
    #[error("no records to summarize")]
    NoRecords,
    #[error("every record was a cold start and cold starts are excluded")]
    AllExcluded,
}

/// Which per-record duration a summary is computed over.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Measure {
    /// End-to-end response latency.
    Response,
    /// Time spent on the terminal data access.
    Backend,
}

impl Measure {
    fn of(self, r: &RequestRecord) -> f64 {
        match self {
            Measure::Response => r.latency_ms,
            Measure::Backend => r.backend_ms,
        }
    }
}

/// Nearest-rank percentile of an ascending, non-empty slice.
pub fn nearest_rank(sorted: &[f64], percent: u32) -> f64 {
    assert!(!sorted.is_empty(), "percentile of an empty sample");
    let n = sorted.len() as u64;
    let rank = (u64::from(percent) * n).div_ceil(100).clamp(1, n);
    sorted[(rank - 1) as usize]
}

/// Largest number of deferred writes in flight at any arrival. A write
/// completing at the same instant as an arrival still counts.
fn outstanding_max(records: &[RequestRecord]) -> u64 {
    // (time, 0 = start / 1 = end)
    let mut events: Vec<(f64, u8)> = Vec::new();
    for r in records {
        if let Some(done) = r.deferred_write_complete_ms {
            events.push((r.arrival_ms, 0));
            events.push((done, 1));
        }
    }
    events.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
    let (mut cur, mut max) = (0u64, 0u64);
    for (_, kind) in events {
        if kind == 0 {
            cur += 1;
            max = max.max(cur);
        } else {
            cur -= 1;
        }
    }
    max
}

/// Summarizes response latency. See [`summarize_by`].
pub fn summarize(
    records: &[RequestRecord],
    exclude_cold: bool,
) -> Result<MetricsReport, MetricsError> {
    summarize_by(records, exclude_cold, Measure::Response)
}

/// Summarizes one measure over `records`, optionally dropping cold-start
/// requests first. Cold-start and deferred-write counts always cover every
/// record.
pub fn summarize_by(
    records: &[RequestRecord],
    exclude_cold: bool,
    measure: Measure,
) -> Result<MetricsReport, MetricsError> {
    if records.is_empty() {
        return Err(MetricsError::NoRecords);
    }
    let kept: Vec<&RequestRecord> = records
        .iter()
        .filter(|r| !(exclude_cold && r.cold_start))
        .collect();
    if kept.is_empty() {
        return Err(MetricsError::AllExcluded);
    }

    // Mean in request-id order, so the result does not depend on the order
    // records were handed in.
    let mut by_id = kept.clone();
    by_id.sort_by_key(|r| r.request_id);
    let mean = by_id.iter().map(|r| measure.of(r)).sum::<f64>() / by_id.len() as f64;

    let mut sorted: Vec<f64> = kept.iter().map(|r| measure.of(r)).collect();
    sorted.sort_by(f64::total_cmp);
    let pct = |p| nearest_rank(&sorted, p);
    let five_number = FiveNumber {
        min: sorted[0],
        q1: pct(25),
        median: pct(50),
        q3: pct(75),
        max: sorted[sorted.len() - 1],
    };

    let hits = kept
        .iter()
        .filter(|r| r.cache_outcome == CacheOutcome::Hit)
        .count();
    let misses = kept
        .iter()
        .filter(|r| r.cache_outcome == CacheOutcome::Miss)
        .count();
    let hit_ratio = (hits + misses > 0).then(|| hits as f64 / (hits + misses) as f64);

    Ok(MetricsReport {
        count: kept.len(),
        mean,
        min: five_number.min,
        max: five_number.max,
        p50: five_number.median,
        p95: pct(95),
        p99: pct(99),
        five_number,
        hit_ratio,
        cold_start_count: records.iter().filter(|r| r.cold_start).count(),
        deferred_writes_outstanding_max: outstanding_max(records),
    })
}

/// A quotient that may be undefined (zero denominator).
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Ratio {
    Value(f64),
    Undefined,
}

impl Ratio {
    pub fn of(num: f64, den: f64) -> Self {
        if den == 0.0 {
            Ratio::Undefined
        } else {
            Ratio::Value(num / den)
        }
    }

    pub fn value(self) -> Option<f64> {
        match self {
            Ratio::Value(v) => Some(v),
            Ratio::Undefined => None,
        }
    }
}

impl Serialize for Ratio {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        match self {
            Ratio::Value(v) => s.serialize_f64(*v),
            Ratio::Undefined => s.serialize_str("undefined"),
        }
    }
}

/// `a` relative to `b`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Comparison {
    /// `a.mean / b.mean`.
    pub mean_ratio: Ratio,
    /// `(a.mean − b.mean) / b.mean`.
    pub mean_relative_increase: Ratio,
    pub mean_difference: f64,
    pub p50_ratio: Ratio,
    pub p95_ratio: Ratio,
    pub p99_ratio: Ratio,
    pub q1_ratio: Ratio,
    pub q3_ratio: Ratio,
    pub min_ratio: Ratio,
    pub max_ratio: Ratio,
}

pub fn compare(a: &MetricsReport, b: &MetricsReport) -> Comparison {
    Comparison {
        mean_ratio: Ratio::of(a.mean, b.mean),
        mean_relative_increase: Ratio::of(a.mean - b.mean, b.mean),
        mean_difference: a.mean - b.mean,
        p50_ratio: Ratio::of(a.p50, b.p50),
        p95_ratio: Ratio::of(a.p95, b.p95),
        p99_ratio: Ratio::of(a.p99, b.p99),
        q1_ratio: Ratio::of(a.five_number.q1, b.five_number.q1),
        q3_ratio: Ratio::of(a.five_number.q3, b.five_number.q3),
        min_ratio: Ratio::of(a.min, b.min),
        max_ratio: Ratio::of(a.max, b.max),
    }
}
