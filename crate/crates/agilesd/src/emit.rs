//! CSV and JSON emission for sweep tables, traces and tuning surfaces.
//!
//! Floats are written with Rust's shortest round-trip formatting, so parsing
//! an emitted file reproduces the original values exactly.

use std::io;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::sim::{CycleRecord, EpochEnd, EpochRecord, SimReport};
use crate::sweep::{SweepRow, ValidationReport};
use crate::tuner::{LineFit, TuningResult, OPT_RELATIVE_TOLERANCE};

/// Column order of sweep CSV files.
pub const SWEEP_COLUMNS: [&str; 13] = [
    "sweep_variable",
    "sweep_value",
    "cca",
    "beta",
    "lambda_max",
    "buffer_packets",
    "loss_rate",
    "rtt_ms",
    "ath_kbps",
    "normalized",
    "mean_epoch_s",
    "source",
    "seed_count",
];

fn num(v: f64) -> String {
    format!("{v}")
}

/// Writes sweep rows as CSV in the fixed column order.
pub fn write_sweep_csv<W: io::Write>(rows: &[SweepRow], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(SWEEP_COLUMNS)?;
    for r in rows {
        w.write_record([
            r.sweep_variable.to_string(),
            num(r.sweep_value),
            r.cca.to_string(),
            num(r.beta),
            num(r.lambda_max),
            r.buffer_packets.to_string(),
            num(r.loss_rate),
            num(r.rtt_ms),
            num(r.ath_kbps),
            num(r.normalized),
            r.mean_epoch_s.map(num).unwrap_or_default(),
            r.source.to_string(),
            r.seed_count.to_string(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

/// Reads sweep rows back from CSV.
pub fn read_sweep_csv<R: io::Read>(input: R) -> Result<Vec<SweepRow>> {
    let mut reader = csv::Reader::from_reader(input);
    let headers = reader.headers()?.clone();
    if headers.iter().ne(SWEEP_COLUMNS) {
        return Err(Error::InvalidParameter(format!(
            "unexpected sweep CSV header: {headers:?}"
        )));
    }
    let mut rows = Vec::new();
    for record in reader.records() {
        let r = record?;
        let field = |i: usize| r.get(i).unwrap_or("");
        rows.push(SweepRow {
            sweep_variable: field(0).parse()?,
            sweep_value: parse_f64(field(1))?,
            cca: field(2).parse()?,
            beta: parse_f64(field(3))?,
            lambda_max: parse_f64(field(4))?,
            buffer_packets: field(5)
                .parse()
                .map_err(|_| bad_field("buffer_packets", field(5)))?,
            loss_rate: parse_f64(field(6))?,
            rtt_ms: parse_f64(field(7))?,
            ath_kbps: parse_f64(field(8))?,
            normalized: parse_f64(field(9))?,
            mean_epoch_s: if field(10).is_empty() {
                None
            } else {
                Some(parse_f64(field(10))?)
            },
            source: field(11).parse()?,
            seed_count: field(12)
                .parse()
                .map_err(|_| bad_field("seed_count", field(12)))?,
        });
    }
    Ok(rows)
}

/// Writes sweep rows as pretty JSON.
pub fn write_sweep_json<W: io::Write>(rows: &[SweepRow], out: W) -> Result<()> {
    serde_json::to_writer_pretty(out, rows)?;
    Ok(())
}

/// Per-cycle trace of a simulated flow. `end_cause` is set on the last
/// cycle of each epoch and empty elsewhere.
pub const TRACE_COLUMNS: [&str; 8] = [
    "epoch",
    "cycle",
    "start_s",
    "cwnd",
    "lambda",
    "duration_s",
    "packets_sent",
    "end_cause",
];

pub fn write_trace_csv<W: io::Write>(report: &SimReport, out: W) -> Result<()> {
    if report.epochs.iter().all(|e| e.cycles.is_empty()) {
        return Err(Error::InvalidParameter(
            "report contains no cycles to trace".into(),
        ));
    }
    let mut w = csv::Writer::from_writer(out);
    w.write_record(TRACE_COLUMNS)?;
    let mut clock = 0.0;
    for (ei, epoch) in report.epochs.iter().enumerate() {
        let last = epoch.cycles.len().saturating_sub(1);
        for (ci, c) in epoch.cycles.iter().enumerate() {
            let cause = if ci == last {
                epoch.end_cause.to_string()
            } else {
                String::new()
            };
            w.write_record([
                (ei + 1).to_string(),
                (ci + 1).to_string(),
                num(clock),
                num(c.w),
                num(c.lambda),
                num(c.duration_s),
                num(c.packets_sent),
                cause,
            ])?;
            clock += c.duration_s;
        }
    }
    w.flush()?;
    Ok(())
}

/// Rebuilds epoch records from a trace CSV, e.g. to recompute rates.
pub fn read_trace_epochs<R: io::Read>(input: R) -> Result<Vec<EpochRecord>> {
    let mut reader = csv::Reader::from_reader(input);
    let headers = reader.headers()?.clone();
    if headers.iter().ne(TRACE_COLUMNS) {
        return Err(Error::InvalidParameter(format!(
            "unexpected trace CSV header: {headers:?}"
        )));
    }
    let mut epochs = Vec::new();
    let mut cycles: Vec<CycleRecord> = Vec::new();
    for record in reader.records() {
        let r = record?;
        let field = |i: usize| r.get(i).unwrap_or("");
        cycles.push(CycleRecord {
            w: parse_f64(field(3))?,
            lambda: parse_f64(field(4))?,
            duration_s: parse_f64(field(5))?,
            packets_sent: parse_f64(field(6))?,
        });
        match field(7) {
            "" => {}
            "random_loss" => close(&mut epochs, &mut cycles, EpochEnd::RandomLoss),
            "congestion_loss" => close(&mut epochs, &mut cycles, EpochEnd::CongestionLoss),
            "simulation_end" => close(&mut epochs, &mut cycles, EpochEnd::SimulationEnd),
            other => return Err(bad_field("end_cause", other)),
        }
    }
    if !cycles.is_empty() {
        return Err(Error::InvalidParameter(
            "trace ends inside an epoch (missing end_cause)".into(),
        ));
    }
    Ok(epochs)
}

fn close(epochs: &mut Vec<EpochRecord>, cycles: &mut Vec<CycleRecord>, cause: EpochEnd) {
    epochs.push(EpochRecord {
        cycles: std::mem::take(cycles),
        end_cause: cause,
    });
}

/// Per-point model-vs-simulator comparison table.
pub const VALIDATION_COLUMNS: [&str; 6] = [
    "sweep_value",
    "cca",
    "model_normalized",
    "sim_mean_normalized",
    "sim_stddev",
    "relative_error",
];

pub fn write_validation_csv<W: io::Write>(report: &ValidationReport, out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(VALIDATION_COLUMNS)?;
    for p in &report.points {
        w.write_record([
            num(p.sweep_value),
            p.cca.to_string(),
            num(p.model_normalized),
            num(p.sim_mean_normalized),
            num(p.sim_stddev),
            num(p.relative_error),
        ])?;
    }
    w.flush()?;
    Ok(())
}

/// Tuning surface: header row of lambda candidates, one row per beta.
pub fn write_at_matrix_csv<W: io::Write>(result: &TuningResult, out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    let mut header = vec!["beta".to_string()];
    header.extend(result.lambdas.iter().map(|&l| num(l)));
    w.write_record(&header)?;
    for (beta, row) in result.betas.iter().zip(&result.at_matrix) {
        let mut record = vec![num(*beta)];
        record.extend(row.iter().map(|&at| num(at)));
        w.write_record(&record)?;
    }
    w.flush()?;
    Ok(())
}

/// Selected cap per beta alongside the closed-form value.
pub fn write_lambda_opt_csv<W: io::Write>(result: &TuningResult, out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["beta", "lambda_opt", "formula_lambda"])?;
    for i in 0..result.betas.len() {
        w.write_record([
            num(result.betas[i]),
            num(result.lambda_opt[i]),
            result.formula_lambda[i].to_string(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

/// Contents of `fit.json`: the fitted line plus enough metadata to
/// reproduce the surface.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct FitFile {
    pub slope: f64,
    pub intercept: f64,
    /// Relative tolerance used to pick each row's smallest near-optimal cap.
    pub opt_relative_tolerance: f64,
    pub betas: Vec<f64>,
    pub lambda_opt: Vec<f64>,
    pub formula_lambda: Vec<u32>,
    pub base_config: crate::config::NetworkConfig,
    pub iterations: usize,
}

pub fn write_fit_json<W: io::Write>(result: &TuningResult, fit: &LineFit, out: W) -> Result<()> {
    let file = FitFile {
        slope: fit.slope,
        intercept: fit.intercept,
        opt_relative_tolerance: OPT_RELATIVE_TOLERANCE,
        betas: result.betas.clone(),
        lambda_opt: result.lambda_opt.clone(),
        formula_lambda: result.formula_lambda.clone(),
        base_config: result.base_config.clone(),
        iterations: result.iterations,
    };
    serde_json::to_writer_pretty(out, &file)?;
    Ok(())
}

fn parse_f64(s: &str) -> Result<f64> {
    s.parse().map_err(|_| bad_field("number", s))
}

fn bad_field(what: &str, value: &str) -> Error {
    Error::InvalidParameter(format!("cannot parse {what} from `{value}`"))
}
