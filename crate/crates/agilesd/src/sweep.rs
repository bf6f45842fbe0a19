//! Sweep orchestration: evaluate the model and/or the simulator across a
//! grid of network or algorithm settings, and cross-validate the two.
//!
//! Every sweep point is evaluated for both Agile-SD and the NewReno
//! baseline (`lambda_max = 1`) so comparison figures come out of a single
//! run. Points are independent and evaluated in parallel; output rows are
//! sorted by sweep value, then CCA, then source, so files are reproducible.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::config::{CcaParams, NetworkConfig};
use crate::error::{Error, Result};
use crate::markov::average_throughput;
use crate::sim::run_flow;

/// Which knob a sweep varies.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SweepVariable {
    /// Buffer size in packets.
    Buffer,
    /// Per-packet random loss rate.
    LossRate,
    /// Round-trip time in milliseconds.
    Rtt,
    /// Agility-factor cap (Agile-SD rows only; NewReno stays at 1).
    LambdaMax,
    /// Multiplicative decrease factor, applied to both CCAs.
    Beta,
}

impl SweepVariable {
    pub fn as_str(&self) -> &'static str {
        match self {
            SweepVariable::Buffer => "buffer",
            SweepVariable::LossRate => "loss_rate",
            SweepVariable::Rtt => "rtt",
            SweepVariable::LambdaMax => "lambda_max",
            SweepVariable::Beta => "beta",
        }
    }
}

impl std::fmt::Display for SweepVariable {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

impl std::str::FromStr for SweepVariable {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "buffer" => Ok(SweepVariable::Buffer),
            "loss_rate" => Ok(SweepVariable::LossRate),
            "rtt" => Ok(SweepVariable::Rtt),
            "lambda_max" => Ok(SweepVariable::LambdaMax),
            "beta" => Ok(SweepVariable::Beta),
            other => Err(Error::InvalidParameter(format!(
                "unknown sweep variable `{other}` (expected buffer, loss_rate, rtt, lambda_max or beta)"
            ))),
        }
    }
}

/// Whether a sweep runs the model, the simulator, or both.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RunMode {
    Model,
    Simulate,
    Both,
}

impl RunMode {
    pub fn includes_model(&self) -> bool {
        matches!(self, RunMode::Model | RunMode::Both)
    }

    pub fn includes_sim(&self) -> bool {
        matches!(self, RunMode::Simulate | RunMode::Both)
    }
}

impl std::str::FromStr for RunMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "model" => Ok(RunMode::Model),
            "simulate" => Ok(RunMode::Simulate),
            "both" => Ok(RunMode::Both),
            other => Err(Error::InvalidParameter(format!(
                "unknown mode `{other}` (expected model, simulate or both)"
            ))),
        }
    }
}

/// Congestion control algorithm of a result row.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Cca {
    Agile,
    Newreno,
}

impl Cca {
    pub fn as_str(&self) -> &'static str {
        match self {
            Cca::Agile => "agile",
            Cca::Newreno => "newreno",
        }
    }
}

impl std::fmt::Display for Cca {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

impl std::str::FromStr for Cca {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "agile" => Ok(Cca::Agile),
            "newreno" => Ok(Cca::Newreno),
            other => Err(Error::InvalidParameter(format!("unknown cca `{other}`"))),
        }
    }
}

/// Where a result row came from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Source {
    Model,
    Sim,
}

impl Source {
    pub fn as_str(&self) -> &'static str {
        match self {
            Source::Model => "model",
            Source::Sim => "sim",
        }
    }
}

impl std::fmt::Display for Source {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

impl std::str::FromStr for Source {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "model" => Ok(Source::Model),
            "sim" => Ok(Source::Sim),
            other => Err(Error::InvalidParameter(format!("unknown source `{other}`"))),
        }
    }
}

/// One sweep: a variable, its values, and the base point they perturb.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SweepSpec {
    pub variable: SweepVariable,
    pub values: Vec<f64>,
    pub base_config: NetworkConfig,
    pub base_params: CcaParams,
    pub mode: RunMode,
    /// Simulation seeds; results are averaged across them.
    pub seeds: Vec<u64>,
    /// Simulated seconds per run.
    pub duration_s: f64,
    /// Model iterations per evaluation.
    pub iterations: usize,
}

impl SweepSpec {
    pub fn validate(&self) -> Result<()> {
        if self.values.is_empty() {
            return Err(Error::InvalidParameter("sweep has no values".into()));
        }
        if self.mode.includes_sim() {
            if self.seeds.is_empty() {
                return Err(Error::InvalidParameter(
                    "simulation sweeps need at least one seed".into(),
                ));
            }
            if !(self.duration_s > 0.0) {
                return Err(Error::InvalidParameter(format!(
                    "duration must be positive, got {}",
                    self.duration_s
                )));
            }
        }
        self.base_config.validate()?;
        self.base_params.validate()?;
        for &v in &self.values {
            self.apply(v, Cca::Agile)?;
        }
        Ok(())
    }

    /// The `(config, params)` pair at one sweep value for one CCA.
    pub fn apply(&self, value: f64, cca: Cca) -> Result<(NetworkConfig, CcaParams)> {
        let mut config = self.base_config.clone();
        let mut params = self.base_params.clone();
        match self.variable {
            SweepVariable::Buffer => {
                if value < 0.0 || value.fract() != 0.0 || value > f64::from(u32::MAX) {
                    return Err(Error::InvalidParameter(format!(
                        "buffer size must be a non-negative integer, got {value}"
                    )));
                }
                config.buffer_packets = value as u32;
            }
            SweepVariable::LossRate => {
                if value < 0.0 {
                    return Err(Error::InvalidParameter(format!(
                        "loss rate must be non-negative, got {value}"
                    )));
                }
                config.loss_rate = value;
            }
            SweepVariable::Rtt => {
                if !(value > 0.0) {
                    return Err(Error::InvalidParameter(format!(
                        "RTT must be positive milliseconds, got {value}"
                    )));
                }
                config.rtt_s = value / 1000.0;
            }
            SweepVariable::LambdaMax => {
                if !(value >= 1.0) {
                    return Err(Error::InvalidParameter(format!(
                        "lambda_max must be at least 1, got {value}"
                    )));
                }
                params.lambda_max = value;
                params.lambda_min = params.lambda_min.min(value);
            }
            SweepVariable::Beta => {
                if !(value > 0.0 && value < 1.0) {
                    return Err(Error::InvalidParameter(format!(
                        "beta must lie strictly inside (0, 1), got {value}"
                    )));
                }
                params.beta = value;
            }
        }
        if cca == Cca::Newreno {
            params = CcaParams::newreno(params.beta);
        }
        config.validate()?;
        params.validate()?;
        Ok((config, params))
    }
}

/// One output row of a sweep.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub sweep_variable: SweepVariable,
    pub sweep_value: f64,
    pub cca: Cca,
    pub beta: f64,
    pub lambda_max: f64,
    pub buffer_packets: u32,
    pub loss_rate: f64,
    pub rtt_ms: f64,
    /// Model ATh or seed-averaged simulator TATr, in Kbps.
    pub ath_kbps: f64,
    /// Rate divided by link capacity.
    pub normalized: f64,
    /// Seed-averaged mean epoch duration; absent for model rows.
    pub mean_epoch_s: Option<f64>,
    pub source: Source,
    /// Number of seeds aggregated; 0 for model rows.
    pub seed_count: usize,
}

/// Runs a sweep; returns rows sorted by value, CCA, then source.
pub fn run_sweep(spec: &SweepSpec) -> Result<Vec<SweepRow>> {
    spec.validate()?;

    let points: Vec<(f64, Cca)> = spec
        .values
        .iter()
        .flat_map(|&v| [(v, Cca::Agile), (v, Cca::Newreno)])
        .collect();

    let mut rows: Vec<SweepRow> = points
        .par_iter()
        .map(|&(value, cca)| point_rows(spec, value, cca))
        .collect::<Result<Vec<Vec<SweepRow>>>>()?
        .into_iter()
        .flatten()
        .collect();

    rows.sort_by(|a, b| {
        a.sweep_value
            .total_cmp(&b.sweep_value)
            .then(a.cca.cmp(&b.cca))
            .then(a.source.cmp(&b.source))
    });

    for row in &rows {
        if !(row.normalized >= 0.0 && row.normalized <= 1.0 + 1e-9) {
            return Err(Error::Inconsistency(format!(
                "normalized throughput {} at {} = {} ({} {}) escapes [0, 1]",
                row.normalized, row.sweep_variable, row.sweep_value, row.cca, row.source
            )));
        }
    }
    Ok(rows)
}

fn point_rows(spec: &SweepSpec, value: f64, cca: Cca) -> Result<Vec<SweepRow>> {
    let (config, params) = spec.apply(value, cca)?;
    let mut rows = Vec::new();
    let template = |source, ath_kbps: f64, mean_epoch_s, seed_count| SweepRow {
        sweep_variable: spec.variable,
        sweep_value: value,
        cca,
        beta: params.beta,
        lambda_max: params.lambda_max,
        buffer_packets: config.buffer_packets,
        loss_rate: config.loss_rate,
        rtt_ms: config.rtt_s * 1000.0,
        ath_kbps,
        normalized: ath_kbps / config.capacity_kbps,
        mean_epoch_s,
        source,
        seed_count,
    };

    if spec.mode.includes_model() {
        let report = average_throughput(&config, &params, spec.iterations)?;
        rows.push(template(Source::Model, report.ath_kbps, None, 0));
    }
    if spec.mode.includes_sim() {
        let mut rates = Vec::with_capacity(spec.seeds.len());
        let mut epoch_means = Vec::with_capacity(spec.seeds.len());
        for &seed in &spec.seeds {
            let report = run_flow(&config, &params, spec.duration_s, seed)?;
            rates.push(report.tatr_kbps);
            epoch_means.push(report.mean_epoch_duration_s);
        }
        rows.push(template(
            Source::Sim,
            mean(&rates),
            Some(mean(&epoch_means)),
            spec.seeds.len(),
        ));
    }
    Ok(rows)
}

/// Model-vs-simulator comparison at one sweep point.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PointComparison {
    pub sweep_value: f64,
    pub cca: Cca,
    pub model_normalized: f64,
    pub sim_mean_normalized: f64,
    /// Sample standard deviation of the normalized rate across seeds.
    pub sim_stddev: f64,
    /// `|sim - model| / model`.
    pub relative_error: f64,
}

/// Cross-validation summary over a sweep.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ValidationReport {
    pub variable: SweepVariable,
    pub points: Vec<PointComparison>,
    pub median_relative_error: f64,
    pub max_relative_error: f64,
}

/// Runs model and simulator at every sweep point (both CCAs) and reports
/// per-point and summary relative errors.
pub fn compare_model_vs_sim(spec: &SweepSpec) -> Result<ValidationReport> {
    if spec.mode != RunMode::Both {
        return Err(Error::InvalidParameter(
            "validation requires mode = both".into(),
        ));
    }
    spec.validate()?;

    let tasks: Vec<(f64, Cca)> = spec
        .values
        .iter()
        .flat_map(|&v| [(v, Cca::Agile), (v, Cca::Newreno)])
        .collect();

    let points: Vec<PointComparison> = tasks
        .par_iter()
        .map(|&(value, cca)| {
            let (config, params) = spec.apply(value, cca)?;
            let model = average_throughput(&config, &params, spec.iterations)?;
            let normalized: Vec<f64> = spec
                .seeds
                .iter()
                .map(|&seed| {
                    run_flow(&config, &params, spec.duration_s, seed).map(|r| r.normalized)
                })
                .collect::<Result<_>>()?;
            let sim_mean = mean(&normalized);
            Ok(PointComparison {
                sweep_value: value,
                cca,
                model_normalized: model.normalized_ath,
                sim_mean_normalized: sim_mean,
                sim_stddev: sample_stddev(&normalized),
                relative_error: (sim_mean - model.normalized_ath).abs() / model.normalized_ath,
            })
        })
        .collect::<Result<_>>()?;

    let errors: Vec<f64> = points.iter().map(|p| p.relative_error).collect();
    Ok(ValidationReport {
        variable: spec.variable,
        median_relative_error: median(&errors),
        max_relative_error: errors.iter().copied().fold(0.0, f64::max),
        points,
    })
}

pub(crate) fn mean(xs: &[f64]) -> f64 {
    xs.iter().sum::<f64>() / xs.len() as f64
}

pub(crate) fn sample_stddev(xs: &[f64]) -> f64 {
    if xs.len() < 2 {
        return 0.0;
    }
    let m = mean(xs);
    (xs.iter().map(|x| (x - m).powi(2)).sum::<f64>() / (xs.len() - 1) as f64).sqrt()
}

pub(crate) fn median(xs: &[f64]) -> f64 {
    let mut sorted = xs.to_vec();
    sorted.sort_by(f64::total_cmp);
    let n = sorted.len();
    if n % 2 == 1 {
        sorted[n / 2]
    } else {
        0.5 * (sorted[n / 2 - 1] + sorted[n / 2])
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small_spec() -> SweepSpec {
        SweepSpec {
            variable: SweepVariable::LossRate,
            values: vec![1e-5, 1e-4, 1e-3],
            base_config: NetworkConfig {
                capacity_kbps: 80_000.0, // W = 104
                ..NetworkConfig::default()
            },
            base_params: CcaParams::default(),
            mode: RunMode::Model,
            seeds: vec![1, 2, 3],
            duration_s: 20.0,
            iterations: 2_000,
        }
    }

    #[test]
    fn model_sweep_produces_ordered_rows() {
        let rows = run_sweep(&small_spec()).unwrap();
        // 3 values x 2 CCAs x 1 source.
        assert_eq!(rows.len(), 6);
        for pair in rows.windows(2) {
            assert!(pair[0].sweep_value <= pair[1].sweep_value);
        }
        for row in &rows {
            assert_eq!(row.source, Source::Model);
            assert_eq!(row.seed_count, 0);
            assert!(row.mean_epoch_s.is_none());
            assert!(row.normalized <= 1.0 + 1e-9);
        }
    }

    #[test]
    fn throughput_is_non_increasing_in_loss_rate() {
        let rows = run_sweep(&small_spec()).unwrap();
        let agile: Vec<f64> = rows
            .iter()
            .filter(|r| r.cca == Cca::Agile)
            .map(|r| r.normalized)
            .collect();
        for pair in agile.windows(2) {
            assert!(pair[1] <= pair[0] + 1e-6);
        }
    }

    #[test]
    fn both_mode_adds_seed_averaged_sim_rows() {
        let mut spec = small_spec();
        spec.mode = RunMode::Both;
        spec.values = vec![1e-4];
        let rows = run_sweep(&spec).unwrap();
        assert_eq!(rows.len(), 4);
        let sim_rows: Vec<_> = rows.iter().filter(|r| r.source == Source::Sim).collect();
        assert_eq!(sim_rows.len(), 2);
        for row in sim_rows {
            assert_eq!(row.seed_count, 3);
            assert!(row.mean_epoch_s.unwrap() > 0.0);
        }
    }

    #[test]
    fn lambda_sweep_keeps_newreno_at_one() {
        let mut spec = small_spec();
        spec.variable = SweepVariable::LambdaMax;
        spec.values = vec![1.0, 3.0, 5.0];
        let rows = run_sweep(&spec).unwrap();
        for row in rows.iter().filter(|r| r.cca == Cca::Newreno) {
            assert_eq!(row.lambda_max, 1.0);
        }
        let agile_caps: Vec<f64> = rows
            .iter()
            .filter(|r| r.cca == Cca::Agile)
            .map(|r| r.lambda_max)
            .collect();
        assert_eq!(agile_caps, vec![1.0, 3.0, 5.0]);
    }

    #[test]
    fn agile_with_unit_cap_equals_newreno_rows() {
        let mut spec = small_spec();
        spec.base_params = CcaParams::agile(0.5, 1.0);
        let rows = run_sweep(&spec).unwrap();
        for value in &spec.values {
            let pair: Vec<_> = rows
                .iter()
                .filter(|r| r.sweep_value == *value)
                .collect();
            assert_eq!(pair.len(), 2);
            assert_eq!(pair[0].ath_kbps, pair[1].ath_kbps);
            assert_eq!(pair[0].normalized, pair[1].normalized);
        }
    }

    #[test]
    fn agile_at_least_newreno_across_rtts() {
        let mut spec = small_spec();
        // Zero buffer keeps W at the BDP even for millisecond RTTs.
        spec.base_config.buffer_packets = 0;
        spec.base_config.loss_rate = 1e-8;
        spec.variable = SweepVariable::Rtt;
        spec.values = vec![1.0, 5.0, 10.0];
        let rows = run_sweep(&spec).unwrap();
        for value in &spec.values {
            let at = |cca| {
                rows.iter()
                    .find(|r| r.sweep_value == *value && r.cca == cca)
                    .unwrap()
                    .normalized
            };
            assert!(at(Cca::Agile) >= at(Cca::Newreno));
        }
    }

    #[test]
    fn invalid_sweeps_are_rejected() {
        let mut spec = small_spec();
        spec.values.clear();
        assert!(run_sweep(&spec).is_err());

        let mut spec = small_spec();
        spec.mode = RunMode::Simulate;
        spec.seeds.clear();
        assert!(run_sweep(&spec).is_err());

        let mut spec = small_spec();
        spec.variable = SweepVariable::Beta;
        spec.values = vec![1.2];
        assert!(run_sweep(&spec).is_err());

        let mut spec = small_spec();
        spec.variable = SweepVariable::Buffer;
        spec.values = vec![4.5];
        assert!(run_sweep(&spec).is_err());
    }

    #[test]
    fn validation_report_is_deterministic() {
        let mut spec = small_spec();
        spec.mode = RunMode::Both;
        spec.values = vec![1e-4, 1e-3];
        let a = compare_model_vs_sim(&spec).unwrap();
        let b = compare_model_vs_sim(&spec).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.points.len(), 4);
        assert!(a.median_relative_error <= a.max_relative_error);
    }

    #[test]
    fn validation_requires_both_mode() {
        let spec = small_spec();
        assert!(compare_model_vs_sim(&spec).is_err());
    }

    #[test]
    fn median_and_stddev_helpers() {
        assert_eq!(median(&[3.0, 1.0, 2.0]), 2.0);
        assert_eq!(median(&[4.0, 1.0, 2.0, 3.0]), 2.5);
        assert_eq!(sample_stddev(&[1.0]), 0.0);
        assert!((sample_stddev(&[1.0, 3.0]) - f64::sqrt(2.0)).abs() < 1e-12);
    }
}
