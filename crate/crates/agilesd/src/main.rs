//! Command-line front end; all real work lives in the library.

use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};

use anyhow::{bail, Context};
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use agilesd::{
    cfgfile::Settings,
    emit, run_aacpt, run_flow,
    sweep::{compare_model_vs_sim, run_sweep, Cca, RunMode},
    tuner::{fit_optimal_line, TuningGrid},
    markov::average_throughput,
    CcaParams, SimReport, SweepVariable, ThroughputReport,
};

#[derive(Parser)]
#[command(
    name = "agilesd",
    version,
    about = "Throughput model, flow simulator and agility-factor tuner for Agile-SD / NewReno TCP"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Evaluate the Markov throughput model at the configured point.
    Model(CommonArgs),
    /// Simulate one flow at the configured point.
    Simulate(CommonArgs),
    /// Sweep `sweep_variable` across `sweep_values`; model and/or simulator.
    Sweep(CommonArgs),
    /// Compare model against seed-averaged simulation per sweep point.
    Validate(CommonArgs),
    /// Grid-search (beta, lambda') and fit a line through the optima.
    ///
    /// Writes at_matrix.csv, lambda_opt.csv and fit.json into --out
    /// (a directory, default `.`).
    Aacpt(CommonArgs),
    /// Dump a per-cycle trace of one simulated flow.
    Trace(CommonArgs),
}

#[derive(Args)]
struct CommonArgs {
    /// Config file (`key = value` lines); defaults apply when omitted.
    #[arg(long)]
    config: Option<PathBuf>,

    /// Output path; stdout when omitted (`aacpt`: output directory).
    #[arg(long)]
    out: Option<PathBuf>,

    /// Output format.
    #[arg(long, value_enum, default_value_t = Format::Csv)]
    format: Format,

    /// Simulation seed (simulate/trace); first configured seed when omitted.
    #[arg(long)]
    seed: Option<u64>,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Csv,
    Json,
}

fn main() -> anyhow::Result<()> {
    match Cli::parse().command {
        Command::Model(args) => cmd_model(&args),
        Command::Simulate(args) => cmd_simulate(&args),
        Command::Sweep(args) => cmd_sweep(&args),
        Command::Validate(args) => cmd_validate(&args),
        Command::Aacpt(args) => cmd_aacpt(&args),
        Command::Trace(args) => cmd_trace(&args),
    }
}

fn load_settings(args: &CommonArgs) -> anyhow::Result<Settings> {
    match &args.config {
        Some(path) => {
            let text = fs::read_to_string(path)
                .with_context(|| format!("reading config {}", path.display()))?;
            Ok(Settings::parse(&text)?)
        }
        None => Ok(Settings::default()),
    }
}

/// Opens `--out` or falls back to stdout.
fn open_output(args: &CommonArgs) -> anyhow::Result<Box<dyn Write>> {
    match &args.out {
        Some(path) => {
            let file = fs::File::create(path)
                .with_context(|| format!("creating output {}", path.display()))?;
            Ok(Box::new(file))
        }
        None => Ok(Box::new(io::stdout().lock())),
    }
}

#[derive(Serialize)]
struct ModelRow {
    cca: Cca,
    beta: f64,
    lambda_min: f64,
    lambda_max: f64,
    #[serde(flatten)]
    report: ThroughputReport,
}

fn cmd_model(args: &CommonArgs) -> anyhow::Result<()> {
    let settings = load_settings(args)?;
    let ccas = [
        (Cca::Agile, settings.cca.clone()),
        (Cca::Newreno, CcaParams::newreno(settings.cca.beta)),
    ];
    let rows: Vec<ModelRow> = ccas
        .into_iter()
        .map(|(cca, params)| {
            let report = average_throughput(&settings.network, &params, settings.iterations)?;
            Ok(ModelRow {
                cca,
                beta: params.beta,
                lambda_min: params.lambda_min,
                lambda_max: params.lambda_max,
                report,
            })
        })
        .collect::<agilesd::Result<_>>()?;

    let mut out = open_output(args)?;
    match args.format {
        Format::Json => serde_json::to_writer_pretty(&mut out, &rows)?,
        Format::Csv => {
            let mut w = csv::Writer::from_writer(&mut out);
            w.write_record([
                "cca",
                "beta",
                "lambda_min",
                "lambda_max",
                "ath_kbps",
                "normalized",
                "iterations",
                "mean_window",
                "mean_lambda",
            ])?;
            for r in &rows {
                w.write_record([
                    r.cca.to_string(),
                    format!("{}", r.beta),
                    format!("{}", r.lambda_min),
                    format!("{}", r.lambda_max),
                    format!("{}", r.report.ath_kbps),
                    format!("{}", r.report.normalized_ath),
                    r.report.iterations.to_string(),
                    format!("{}", r.report.mean_window),
                    format!("{}", r.report.mean_lambda),
                ])?;
            }
            w.flush()?;
        }
    }
    writeln!(out)?;
    Ok(())
}

#[derive(Serialize)]
struct SimSummary {
    seed: u64,
    duration_s: f64,
    tatr_kbps: f64,
    normalized: f64,
    mean_epoch_s: f64,
    epochs: usize,
    random_losses: u64,
    congestion_losses: u64,
}

impl From<&SimReport> for SimSummary {
    fn from(r: &SimReport) -> Self {
        Self {
            seed: r.seed,
            duration_s: r.duration_s,
            tatr_kbps: r.tatr_kbps,
            normalized: r.normalized,
            mean_epoch_s: r.mean_epoch_duration_s,
            epochs: r.epochs.len(),
            random_losses: r.loss_counts.random,
            congestion_losses: r.loss_counts.congestion,
        }
    }
}

fn run_configured_flow(args: &CommonArgs, settings: &Settings) -> anyhow::Result<SimReport> {
    let seed = args
        .seed
        .or_else(|| settings.seeds.first().copied())
        .unwrap_or(1);
    Ok(run_flow(
        &settings.network,
        &settings.cca,
        settings.duration_s,
        seed,
    )?)
}

fn cmd_simulate(args: &CommonArgs) -> anyhow::Result<()> {
    let settings = load_settings(args)?;
    let report = run_configured_flow(args, &settings)?;
    let summary = SimSummary::from(&report);

    let mut out = open_output(args)?;
    match args.format {
        Format::Json => serde_json::to_writer_pretty(&mut out, &summary)?,
        Format::Csv => {
            let mut w = csv::Writer::from_writer(&mut out);
            w.write_record([
                "seed",
                "duration_s",
                "tatr_kbps",
                "normalized",
                "mean_epoch_s",
                "epochs",
                "random_losses",
                "congestion_losses",
            ])?;
            w.write_record([
                summary.seed.to_string(),
                format!("{}", summary.duration_s),
                format!("{}", summary.tatr_kbps),
                format!("{}", summary.normalized),
                format!("{}", summary.mean_epoch_s),
                summary.epochs.to_string(),
                summary.random_losses.to_string(),
                summary.congestion_losses.to_string(),
            ])?;
            w.flush()?;
        }
    }
    writeln!(out)?;
    Ok(())
}

fn cmd_sweep(args: &CommonArgs) -> anyhow::Result<()> {
    let settings = load_settings(args)?;
    let spec = settings.sweep_spec()?;
    let rows = run_sweep(&spec)?;
    let mut out = open_output(args)?;
    match args.format {
        Format::Csv => emit::write_sweep_csv(&rows, &mut out)?,
        Format::Json => {
            emit::write_sweep_json(&rows, &mut out)?;
            writeln!(out)?;
        }
    }
    Ok(())
}

fn cmd_validate(args: &CommonArgs) -> anyhow::Result<()> {
    let settings = load_settings(args)?;
    if settings.mode != RunMode::Both {
        bail!("validate requires `mode = both`");
    }
    let spec = settings.sweep_spec()?;
    let report = compare_model_vs_sim(&spec)?;
    let mut out = open_output(args)?;
    match args.format {
        Format::Csv => {
            emit::write_validation_csv(&report, &mut out)?;
            writeln!(
                out,
                "# median_relative_error={} max_relative_error={}",
                report.median_relative_error, report.max_relative_error
            )?;
        }
        Format::Json => {
            serde_json::to_writer_pretty(&mut out, &report)?;
            writeln!(out)?;
        }
    }
    Ok(())
}

fn cmd_aacpt(args: &CommonArgs) -> anyhow::Result<()> {
    let settings = load_settings(args)?;
    let mut grid = TuningGrid::with_default_ranges(settings.network.clone());
    grid.iterations = settings.iterations;
    // The flat config has no dedicated grid keys; a lambda_max or beta sweep
    // overrides the matching axis.
    match settings.sweep_variable {
        Some(SweepVariable::LambdaMax) => grid.lambdas = settings.sweep_values.clone(),
        Some(SweepVariable::Beta) => grid.betas = settings.sweep_values.clone(),
        _ => {}
    }

    let result = run_aacpt(&grid)?;
    let fit = fit_optimal_line(&result.betas, &result.lambda_opt)?;

    let dir = args.out.clone().unwrap_or_else(|| PathBuf::from("."));
    fs::create_dir_all(&dir)?;
    write_file(&dir.join("at_matrix.csv"), |w| {
        emit::write_at_matrix_csv(&result, w)
    })?;
    write_file(&dir.join("lambda_opt.csv"), |w| {
        emit::write_lambda_opt_csv(&result, w)
    })?;
    write_file(&dir.join("fit.json"), |w| {
        emit::write_fit_json(&result, &fit, w)
    })?;
    println!(
        "wrote {}/at_matrix.csv, lambda_opt.csv, fit.json (fit: lambda' = {:.4} + {:.4} beta)",
        dir.display(),
        fit.intercept,
        fit.slope
    );
    Ok(())
}

fn write_file<F>(path: &Path, write: F) -> anyhow::Result<()>
where
    F: FnOnce(fs::File) -> agilesd::Result<()>,
{
    let file =
        fs::File::create(path).with_context(|| format!("creating {}", path.display()))?;
    write(file).with_context(|| format!("writing {}", path.display()))?;
    Ok(())
}

fn cmd_trace(args: &CommonArgs) -> anyhow::Result<()> {
    let settings = load_settings(args)?;
    let report = run_configured_flow(args, &settings)?;
    let mut out = open_output(args)?;
    match args.format {
        Format::Csv => emit::write_trace_csv(&report, &mut out)?,
        Format::Json => {
            serde_json::to_writer_pretty(&mut out, &report)?;
            writeln!(out)?;
        }
    }
    Ok(())
}
