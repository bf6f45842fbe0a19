//! Simulate a single 100-second Agile-SD flow and summarize its epochs.
//!
//! Run with: `cargo run --example simulate_flow [seed]`

use agilesd::{epoch_average_rate, run_flow, CcaParams, NetworkConfig};

fn main() -> anyhow::Result<()> {
    let seed: u64 = std::env::args()
        .nth(1)
        .map(|s| s.parse())
        .transpose()?
        .unwrap_or(1);

    let config = NetworkConfig {
        loss_rate: 1e-6,
        ..NetworkConfig::default()
    };
    let params = CcaParams::agile(0.5, 5.0);
    let report = run_flow(&config, &params, 100.0, seed)?;

    println!(
        "seed {} | TATr = {:.1} Kbps (normalized {:.4}) | {} epochs | mean epoch {:.3} s",
        report.seed,
        report.tatr_kbps,
        report.normalized,
        report.epochs.len(),
        report.mean_epoch_duration_s
    );
    println!(
        "losses: {} random, {} congestion\n",
        report.loss_counts.random, report.loss_counts.congestion
    );

    println!("first epochs:");
    for (i, epoch) in report.epochs.iter().take(8).enumerate() {
        let first = epoch.cycles.first().expect("epochs are non-empty");
        let last = epoch.cycles.last().expect("epochs are non-empty");
        println!(
            "  epoch {:>2}: {:>5} cycles, w {:>6.1} -> {:>6.1}, {:>7.3} s, EATr {:>9.1} Kbps, ends by {}",
            i + 1,
            epoch.cycles.len(),
            first.w,
            last.w,
            epoch.duration_s(),
            epoch_average_rate(epoch, config.packet_size_kbits)?,
            epoch.end_cause
        );
    }
    Ok(())
}
