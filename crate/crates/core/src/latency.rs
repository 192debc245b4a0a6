//! Latency distributions, seeded random streams and chain calibration.
//!
//! All durations are milliseconds held in `f64`. Random draws come from
//! ChaCha8 (`rand_chacha::ChaCha8Rng`), seeded through `seed_from_u64` and
//! split into independent streams with `set_stream`. ChaCha8 output is
//! specified bit-for-bit, so a `(seed, stream id)` pair yields the same
//! sequence on every platform.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};
use statrs::function::erf::erfc;
use thiserror::Error;

/// Relative standard deviation used when only a mean is known.
pub const DEFAULT_SPREAD: f64 = 0.2;

/// Unvalidated distribution literal, as it appears in config documents.
///
/// `{"kind":"normal","mean":90,"stddev":18}` and friends.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum DistributionSpec {
    Constant {
        value: f64,
    },
    Uniform {
        lo: f64,
        hi: f64,
    },
    /// Normal clamped at zero: negative draws become 0.
    Normal {
        mean: f64,
        stddev: f64,
    },
    /// Parameters of the underlying normal, result in milliseconds.
    #[serde(rename = "lognormal")]
    LogNormal {
        mu: f64,
        sigma: f64,
    },
    Empirical {
        samples: Vec<f64>,
    },
}

/// A single invalid parameter of a [`DistributionSpec`].
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ParamViolation {
    /// Parameter name (`"mean"`, `"samples[3]"`, ...).
    pub param: String,
    pub message: String,
}

impl ParamViolation {
    fn new(param: impl Into<String>, message: impl Into<String>) -> Self {
        Self {
            param: param.into(),
            message: message.into(),
        }
    }
}

impl std::fmt::Display for ParamViolation {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}: {}", self.param, self.message)
    }
}

fn check_non_negative(out: &mut Vec<ParamViolation>, param: &str, v: f64) {
    if !v.is_finite() {
        out.push(ParamViolation::new(param, "must be finite"));
    } else if v < 0.0 {
        out.push(ParamViolation::new(
            param,
            format!("must be non-negative, got {v}"),
        ));
    }
}

fn check_finite(out: &mut Vec<ParamViolation>, param: &str, v: f64) {
    if !v.is_finite() {
        out.push(ParamViolation::new(param, "must be finite"));
    }
}

impl DistributionSpec {
    /// Every parameter violation, in declaration order. Empty means valid.
    pub fn violations(&self) -> Vec<ParamViolation> {
        let mut out = Vec::new();
        match self {
            DistributionSpec::Constant { value } => check_non_negative(&mut out, "value", *value),
            DistributionSpec::Uniform { lo, hi } => {
                check_non_negative(&mut out, "lo", *lo);
                check_non_negative(&mut out, "hi", *hi);
                if lo.is_finite() && hi.is_finite() && lo > hi {
                    out.push(ParamViolation::new(
                        "hi",
                        format!("must be >= lo ({lo}), got {hi}"),
                    ));
                }
            }
            DistributionSpec::Normal { mean, stddev } => {
                check_non_negative(&mut out, "mean", *mean);
                check_non_negative(&mut out, "stddev", *stddev);
            }
            DistributionSpec::LogNormal { mu, sigma } => {
                check_finite(&mut out, "mu", *mu);
                check_non_negative(&mut out, "sigma", *sigma);
            }
            DistributionSpec::Empirical { samples } => {
                if samples.is_empty() {
                    out.push(ParamViolation::new("samples", "must not be empty"));
                }
                for (i, s) in samples.iter().enumerate() {
                    check_non_negative(&mut out, &format!("samples[{i}]"), *s);
                }
            }
        }
        out
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
#[error("invalid latency distribution: {}", .0.iter().map(ToString::to_string).collect::<Vec<_>>().join("; "))]
pub struct DistributionError(pub Vec<ParamViolation>);

/// A validated, non-negative latency distribution in milliseconds.
///
/// Invalid parameters are rejected here, so sampling never fails.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "DistributionSpec", into = "DistributionSpec")]
pub struct LatencyDistribution(DistributionSpec);

impl TryFrom<DistributionSpec> for LatencyDistribution {
    type Error = DistributionError;

    fn try_from(spec: DistributionSpec) -> Result<Self, Self::Error> {
        let violations = spec.violations();
        if violations.is_empty() {
            Ok(Self(spec))
        } else {
            Err(DistributionError(violations))
        }
    }
}

impl From<LatencyDistribution> for DistributionSpec {
    fn from(d: LatencyDistribution) -> Self {
        d.0
    }
}

impl LatencyDistribution {
    pub fn new(spec: DistributionSpec) -> Result<Self, DistributionError> {
        spec.try_into()
    }

    pub fn constant(value: f64) -> Result<Self, DistributionError> {
        Self::new(DistributionSpec::Constant { value })
    }

    /// Zero-latency distribution.
    pub fn zero() -> Self {
        Self(DistributionSpec::Constant { value: 0.0 })
    }

    pub fn uniform(lo: f64, hi: f64) -> Result<Self, DistributionError> {
        Self::new(DistributionSpec::Uniform { lo, hi })
    }

    pub fn normal(mean: f64, stddev: f64) -> Result<Self, DistributionError> {
        Self::new(DistributionSpec::Normal { mean, stddev })
    }

    /// Clamped normal whose standard deviation is `spread * mean`.
    pub fn normal_with_spread(mean: f64, spread: f64) -> Result<Self, DistributionError> {
        Self::normal(mean, mean * spread)
    }

    pub fn log_normal(mu: f64, sigma: f64) -> Result<Self, DistributionError> {
        Self::new(DistributionSpec::LogNormal { mu, sigma })
    }

    pub fn empirical(samples: Vec<f64>) -> Result<Self, DistributionError> {
        Self::new(DistributionSpec::Empirical { samples })
    }

    pub fn spec(&self) -> &DistributionSpec {
        &self.0
    }

    /// True when every draw returns the same value without consuming randomness.
    pub fn is_constant(&self) -> bool {
        match &self.0 {
            DistributionSpec::Constant { .. } => true,
            DistributionSpec::Uniform { lo, hi } => lo == hi,
            DistributionSpec::Normal { stddev, .. } => *stddev == 0.0,
            DistributionSpec::LogNormal { sigma, .. } => *sigma == 0.0,
            DistributionSpec::Empirical { samples } => samples.len() == 1,
        }
    }

    /// Draws one duration. Always `>= 0`.
    ///
    /// Degenerate distributions (see [`is_constant`](Self::is_constant))
    /// return their value without advancing the stream.
    pub fn sample(&self, rng: &mut RngStream) -> f64 {
        match &self.0 {
            DistributionSpec::Constant { value } => *value,
            DistributionSpec::Uniform { lo, hi } => {
                if lo == hi {
                    *lo
                } else {
                    let u: f64 = rng.inner.random();
                    lo + (hi - lo) * u
                }
            }
            DistributionSpec::Normal { mean, stddev } => {
                if *stddev == 0.0 {
                    *mean
                } else {
                    let z: f64 = rng.inner.sample(StandardNormal);
                    (mean + stddev * z).max(0.0)
                }
            }
            DistributionSpec::LogNormal { mu, sigma } => {
                if *sigma == 0.0 {
                    mu.exp()
                } else {
                    let z: f64 = rng.inner.sample(StandardNormal);
                    (mu + sigma * z).exp()
                }
            }
            DistributionSpec::Empirical { samples } => {
                if samples.len() == 1 {
                    samples[0]
                } else {
                    samples[rng.inner.random_range(0..samples.len())]
                }
            }
        }
    }

    /// Analytic mean of the distribution as sampled.
    ///
    /// For the clamped normal this is `E[max(X, 0)] = m·Φ(m/s) + s·φ(m/s)`.
    pub fn mean(&self) -> f64 {
        match &self.0 {
            DistributionSpec::Constant { value } => *value,
            DistributionSpec::Uniform { lo, hi } => (lo + hi) / 2.0,
            DistributionSpec::Normal { mean, stddev } => clamped_normal_mean(*mean, *stddev),
            DistributionSpec::LogNormal { mu, sigma } => (mu + sigma * sigma / 2.0).exp(),
            DistributionSpec::Empirical { samples } => {
                samples.iter().sum::<f64>() / samples.len() as f64
            }
        }
    }
}

fn clamped_normal_mean(mean: f64, stddev: f64) -> f64 {
    if stddev == 0.0 {
        return mean.max(0.0);
    }
    let z = mean / stddev;
    let cdf = 0.5 * erfc(-z / std::f64::consts::SQRT_2);
    let pdf = (-0.5 * z * z).exp() / (2.0 * std::f64::consts::PI).sqrt();
    mean * cdf + stddev * pdf
}

/// A reproducible random stream identified by `(seed, stream id)`.
#[derive(Debug, Clone)]
pub struct RngStream {
    seed: u64,
    stream_id: u64,
    inner: ChaCha8Rng,
}

impl RngStream {
    pub fn new(seed: u64, stream_id: u64) -> Self {
        let mut inner = ChaCha8Rng::seed_from_u64(seed);
        inner.set_stream(stream_id);
        Self {
            seed,
            stream_id,
            inner,
        }
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn stream_id(&self) -> u64 {
        self.stream_id
    }

    /// Uniform draw in `[0, 1)`.
    pub fn unit(&mut self) -> f64 {
        self.inner.random()
    }

    /// Uniform index in `0..n`. `n` must be positive.
    pub fn index(&mut self, n: usize) -> usize {
        self.inner.random_range(0..n)
    }

    pub(crate) fn rng(&mut self) -> &mut ChaCha8Rng {
        &mut self.inner
    }
}

/// Two measured points of mean latency versus chain length, plus the
/// per-function compute time assumed at every function.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ChainCalibration {
    pub length_a: u32,
    pub mean_a: f64,
    pub length_b: u32,
    pub mean_b: f64,
    pub per_function_compute: f64,
}

/// Result of a chain calibration.
///
/// The deterministic chain model is
/// `mean(L) = L·compute + (L − 1)·per_hop_delay + terminal_delay`:
/// each function adds one compute, each function after the first adds one
/// network hop, and the last function pays `terminal_delay` to reach the
/// data store.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ChainFit {
    pub per_function_compute: f64,
    pub per_hop_delay: f64,
    pub terminal_delay: f64,
}

impl ChainFit {
    pub fn chain_mean(&self, length: u32) -> f64 {
        let l = f64::from(length);
        l * self.per_function_compute + (l - 1.0) * self.per_hop_delay + self.terminal_delay
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum CalibrationError {
    #[error(
        "calibration lengths must satisfy length_b > length_a >= 1 (got {length_a}, {length_b})"
    )]
    Lengths { length_a: u32, length_b: u32 },
    #[error("calibration means must satisfy mean_b > mean_a (got {mean_a}, {mean_b})")]
    Means { mean_a: f64, mean_b: f64 },
    #[error("per-function compute must be finite and non-negative, got {0}")]
    Compute(f64),
    #[error("per-hop delay {0} is not positive: endpoints are inconsistent with the compute time")]
    NonPositiveHop(f64),
    #[error("terminal delay {0} is negative: endpoints are inconsistent with the compute time")]
    NegativeTerminal(f64),
}

fn check_calibration(cal: &ChainCalibration) -> Result<(), CalibrationError> {
    if cal.length_a < 1 || cal.length_b <= cal.length_a {
        return Err(CalibrationError::Lengths {
            length_a: cal.length_a,
            length_b: cal.length_b,
        });
    }
    if !(cal.mean_a.is_finite() && cal.mean_b.is_finite()) || cal.mean_b <= cal.mean_a {
        return Err(CalibrationError::Means {
            mean_a: cal.mean_a,
            mean_b: cal.mean_b,
        });
    }
    if !cal.per_function_compute.is_finite() || cal.per_function_compute < 0.0 {
        return Err(CalibrationError::Compute(cal.per_function_compute));
    }
    Ok(())
}

/// Per-hop network delay implied by two chain-length endpoints:
/// `(mean_b − mean_a) / (length_b − length_a) − compute`.
pub fn fit_chain(cal: &ChainCalibration) -> Result<f64, CalibrationError> {
    check_calibration(cal)?;
    let slope = (cal.mean_b - cal.mean_a) / f64::from(cal.length_b - cal.length_a);
    let hop = slope - cal.per_function_compute;
    if hop <= 0.0 {
        return Err(CalibrationError::NonPositiveHop(hop));
    }
    Ok(hop)
}

/// Full chain model: per-hop delay from [`fit_chain`] plus the terminal
/// delay that pins the model to the first endpoint.
pub fn fit_chain_model(cal: &ChainCalibration) -> Result<ChainFit, CalibrationError> {
    let per_hop_delay = fit_chain(cal)?;
    let la = f64::from(cal.length_a);
    let terminal_delay = cal.mean_a - la * cal.per_function_compute - (la - 1.0) * per_hop_delay;
    if terminal_delay < 0.0 {
        return Err(CalibrationError::NegativeTerminal(terminal_delay));
    }
    Ok(ChainFit {
        per_function_compute: cal.per_function_compute,
        per_hop_delay,
        terminal_delay,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn draw_mean(dist: &LatencyDistribution, n: usize, seed: u64) -> (f64, f64) {
        let mut rng = RngStream::new(seed, 0);
        let mut sum = 0.0;
        let mut sum_sq = 0.0;
        for _ in 0..n {
            let x = dist.sample(&mut rng);
            sum += x;
            sum_sq += x * x;
        }
        let mean = sum / n as f64;
        let var = (sum_sq / n as f64 - mean * mean) * n as f64 / (n as f64 - 1.0);
        (mean, (var / n as f64).sqrt())
    }

    #[test]
    fn degenerate_samples() {
        let mut rng = RngStream::new(1, 1);
        assert_eq!(
            LatencyDistribution::constant(5.0).unwrap().sample(&mut rng),
            5.0
        );
        assert_eq!(
            LatencyDistribution::uniform(90.0, 90.0)
                .unwrap()
                .sample(&mut rng),
            90.0
        );
    }

    #[test]
    fn analytic_means() {
        assert_eq!(LatencyDistribution::constant(45.0).unwrap().mean(), 45.0);
        assert_eq!(
            LatencyDistribution::uniform(80.0, 100.0).unwrap().mean(),
            90.0
        );
        assert_eq!(
            LatencyDistribution::empirical(vec![10.0, 20.0, 30.0])
                .unwrap()
                .mean(),
            20.0
        );
    }

    #[test]
    fn empirical_sample_mean_converges() {
        let d = LatencyDistribution::empirical(vec![10.0, 20.0, 30.0]).unwrap();
        let (m, _) = draw_mean(&d, 1_000_000, 7);
        assert!((m - 20.0).abs() <= 0.5, "mean {m}");
    }

    #[test]
    fn clamped_normal_mean_matches_monte_carlo() {
        // Monte-Carlo estimate is the oracle for the closed form.
        let d = LatencyDistribution::normal(90.0, 20.0).unwrap();
        let (mc, _) = draw_mean(&d, 1_000_000, 11);
        assert!(
            (d.mean() - mc).abs() <= 0.5,
            "analytic {} mc {mc}",
            d.mean()
        );

        // Heavy truncation, where the bias is large.
        let d = LatencyDistribution::normal(2.0, 10.0).unwrap();
        let (mc, se) = draw_mean(&d, 1_000_000, 12);
        assert!(d.mean() > 2.0);
        assert!(
            (d.mean() - mc).abs() <= 3.0 * se,
            "analytic {} mc {mc}",
            d.mean()
        );
    }

    #[test]
    fn every_family_converges_within_three_standard_errors() {
        let families = [
            LatencyDistribution::constant(3.0).unwrap(),
            LatencyDistribution::uniform(80.0, 100.0).unwrap(),
            LatencyDistribution::normal(45.0, 9.0).unwrap(),
            LatencyDistribution::normal(1.0, 3.0).unwrap(),
            LatencyDistribution::log_normal(3.0, 0.5).unwrap(),
            LatencyDistribution::empirical(vec![1.0, 4.0, 4.0, 50.0]).unwrap(),
        ];
        for (i, d) in families.iter().enumerate() {
            let (m, se) = draw_mean(d, 1_000_000, 100 + i as u64);
            assert!(
                (m - d.mean()).abs() <= 3.0 * se + 1e-12,
                "{:?}: sample {m} analytic {} se {se}",
                d.spec(),
                d.mean()
            );
        }
    }

    #[test]
    fn samples_are_non_negative() {
        let d = LatencyDistribution::normal(1.0, 5.0).unwrap();
        let mut rng = RngStream::new(3, 9);
        assert!((0..10_000).all(|_| d.sample(&mut rng) >= 0.0));
    }

    #[test]
    fn invalid_parameters_rejected_at_construction() {
        assert!(LatencyDistribution::constant(-1.0).is_err());
        assert!(LatencyDistribution::uniform(5.0, 4.0).is_err());
        assert!(LatencyDistribution::normal(10.0, -1.0).is_err());
        assert!(LatencyDistribution::normal(f64::NAN, 1.0).is_err());
        assert!(LatencyDistribution::log_normal(f64::INFINITY, 1.0).is_err());
        assert!(LatencyDistribution::empirical(vec![]).is_err());
        let err = LatencyDistribution::empirical(vec![1.0, -2.0]).unwrap_err();
        assert_eq!(err.0[0].param, "samples[1]");
    }

    #[test]
    fn distribution_json_literal() {
        let d: LatencyDistribution =
            serde_json::from_str(r#"{"kind":"normal","mean":90,"stddev":18}"#).unwrap();
        assert_eq!(d, LatencyDistribution::normal(90.0, 18.0).unwrap());
        assert!(
            serde_json::from_str::<LatencyDistribution>(r#"{"kind":"constant","value":-3}"#)
                .is_err()
        );
        let json = serde_json::to_string(&d).unwrap();
        assert_eq!(json, r#"{"kind":"normal","mean":90.0,"stddev":18.0}"#);
    }

    #[test]
    fn streams_are_reproducible_and_distinct() {
        let draw = |seed, id| {
            let mut r = RngStream::new(seed, id);
            (0..64).map(|_| r.unit()).collect::<Vec<_>>()
        };
        assert_eq!(draw(42, 3), draw(42, 3));
        assert_ne!(draw(42, 3), draw(42, 4));
        assert_ne!(draw(42, 3), draw(43, 3));
    }

    #[test]
    fn fit_chain_examples() {
        let measured = ChainCalibration {
            length_a: 1,
            mean_a: 50.0,
            length_b: 5,
            mean_b: 430.0,
            per_function_compute: 5.0,
        };
        // ((430 - 50) / 4) - 5
        assert_eq!(fit_chain(&measured).unwrap(), 90.0);

        let pure_hop = ChainCalibration {
            length_a: 1,
            mean_a: 10.0,
            length_b: 2,
            mean_b: 20.0,
            per_function_compute: 0.0,
        };
        assert_eq!(fit_chain(&pure_hop).unwrap(), 10.0);

        let too_slow = ChainCalibration {
            per_function_compute: 95.0,
            ..measured
        };
        assert!(matches!(
            fit_chain(&too_slow),
            Err(CalibrationError::NonPositiveHop(_))
        ));
    }

    #[test]
    fn fit_chain_rejects_bad_endpoints() {
        let base = ChainCalibration {
            length_a: 1,
            mean_a: 50.0,
            length_b: 5,
            mean_b: 430.0,
            per_function_compute: 5.0,
        };
        assert!(fit_chain(&ChainCalibration {
            length_a: 0,
            ..base
        })
        .is_err());
        assert!(fit_chain(&ChainCalibration {
            length_b: 1,
            ..base
        })
        .is_err());
        assert!(fit_chain(&ChainCalibration {
            mean_b: 50.0,
            ..base
        })
        .is_err());
        assert!(fit_chain(&ChainCalibration {
            per_function_compute: -1.0,
            ..base
        })
        .is_err());
    }

    #[test]
    fn fitted_model_reproduces_endpoints() {
        let cal = ChainCalibration {
            length_a: 1,
            mean_a: 50.0,
            length_b: 5,
            mean_b: 430.0,
            per_function_compute: 5.0,
        };
        let fit = fit_chain_model(&cal).unwrap();
        assert_eq!(fit.terminal_delay, 45.0);
        assert_eq!(fit.chain_mean(1), 50.0);
        assert_eq!(fit.chain_mean(5), 430.0);
    }

    proptest::proptest! {
        #[test]
        fn fitted_model_round_trips(
            la in 1u32..5, extra in 1u32..6,
            mean_a in 10.0f64..200.0, slope in 1.0f64..200.0,
            compute_frac in 0.0f64..0.9,
        ) {
            let lb = la + extra;
            let mean_b = mean_a + slope * f64::from(extra);
            let cal = ChainCalibration {
                length_a: la, mean_a, length_b: lb, mean_b,
                per_function_compute: slope * compute_frac,
            };
            if let Ok(fit) = fit_chain_model(&cal) {
                proptest::prop_assert!((fit.chain_mean(la) - mean_a).abs() <= 1e-9 * mean_b);
                proptest::prop_assert!((fit.chain_mean(lb) - mean_b).abs() <= 1e-9 * mean_b);
            }
        }
    }
}
