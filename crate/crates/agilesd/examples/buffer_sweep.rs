//! Sweep the bottleneck buffer from 4 to 128 packets and emit the sweep
//! table as CSV: Agile-SD and NewReno, model and simulator columns.
//!
//! Throughput grows with buffer size for both algorithms because the buffer
//! extends the usable window beyond the bandwidth-delay product.
//!
//! Run with: `cargo run --release --example buffer_sweep`

use std::io;

use agilesd::{emit, run_sweep, CcaParams, NetworkConfig, RunMode, SweepSpec, SweepVariable};

fn main() -> anyhow::Result<()> {
    let spec = SweepSpec {
        variable: SweepVariable::Buffer,
        values: vec![4.0, 8.0, 16.0, 32.0, 64.0, 128.0],
        base_config: NetworkConfig::default(),
        base_params: CcaParams::agile(0.5, 5.0),
        mode: RunMode::Both,
        // Three seeds and 30 s keep the example snappy; the full protocol is
        // ten seeds at 100 s (see the acceptance suite).
        seeds: vec![1, 2, 3],
        duration_s: 30.0,
        iterations: 10_000,
    };
    let rows = run_sweep(&spec)?;
    emit::write_sweep_csv(&rows, io::stdout().lock())?;
    Ok(())
}
