//! Dump a per-cycle congestion-window trace as CSV, suitable for plotting
//! cwnd evolution and the agility factor's decay within each epoch.
//!
//! Run with: `cargo run --example cwnd_trace > trace.csv`

use std::io;

use agilesd::{emit, run_flow, CcaParams, NetworkConfig};

fn main() -> anyhow::Result<()> {
    // A small link keeps the trace short enough to eyeball.
    let config = NetworkConfig {
        capacity_kbps: 80_000.0, // W = 104
        loss_rate: 1e-5,
        ..NetworkConfig::default()
    };
    let report = run_flow(&config, &CcaParams::agile(0.5, 5.0), 5.0, 1)?;
    emit::write_trace_csv(&report, io::stdout().lock())?;
    Ok(())
}
