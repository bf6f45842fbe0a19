//! Evaluate the Markov throughput model at the reference operating point
//! (1 Gbps, 10 ms RTT, 4-packet buffer, loss rate 1e-8) for Agile-SD and
//! the NewReno baseline.
//!
//! Run with: `cargo run --example model_throughput`

use agilesd::{average_throughput, CcaParams, NetworkConfig, DEFAULT_ITERATIONS};

fn main() -> anyhow::Result<()> {
    let config = NetworkConfig::default();
    println!(
        "link: {} Kbps, RTT {} ms, packet {} Kbits, buffer {} packets, loss rate {:e}",
        config.capacity_kbps,
        config.rtt_s * 1000.0,
        config.packet_size_kbits,
        config.buffer_packets,
        config.loss_rate
    );
    println!(
        "derived: BDP {} packets, W = {}, {} chain states\n",
        config.bdp_packets(),
        config.max_window(),
        config.state_count()?
    );

    for (name, params) in [
        ("Agile-SD", CcaParams::agile(0.5, 5.0)),
        ("NewReno ", CcaParams::newreno(0.5)),
    ] {
        let report = average_throughput(&config, &params, DEFAULT_ITERATIONS)?;
        println!(
            "{name}  ATh = {:>10.1} Kbps  normalized = {:.4}  mean window = {:.1}  mean lambda = {:.3}",
            report.ath_kbps, report.normalized_ath, report.mean_window, report.mean_lambda
        );
    }
    Ok(())
}
