//! Grid-search the (beta, lambda') space, pick the smallest near-optimal
//! cap per beta, and fit a line through the optima.
//!
//! The example tunes on a scaled-down 100 Mbps link so a debug build
//! finishes in seconds; `agilesd aacpt` runs the same search at full scale.
//!
//! Run with: `cargo run --example tune_lambda`

use agilesd::{fit_optimal_line, run_aacpt, NetworkConfig, TuningGrid};

fn main() -> anyhow::Result<()> {
    // Zero buffer keeps W at the bandwidth-delay product, so normalized
    // throughput cannot top 1 even at high beta.
    let base = NetworkConfig {
        capacity_kbps: 100_000.0, // 125 window states
        buffer_packets: 0,
        ..NetworkConfig::default()
    };
    let grid = TuningGrid::with_default_ranges(base);
    let result = run_aacpt(&grid)?;

    print!("{:>6}", "beta");
    for l in &result.lambdas {
        print!("{l:>8}");
    }
    println!("{:>8}{:>9}", "opt", "formula");
    for (i, beta) in result.betas.iter().enumerate() {
        print!("{beta:>6.2}");
        for at in &result.at_matrix[i] {
            print!("{at:>8.4}");
        }
        println!(
            "{:>8}{:>9}",
            result.lambda_opt[i], result.formula_lambda[i]
        );
    }

    let fit = fit_optimal_line(&result.betas, &result.lambda_opt)?;
    println!(
        "\nleast-squares line through the optima: lambda' = {:.3} {} {:.3} * beta",
        fit.intercept,
        if fit.slope < 0.0 { "-" } else { "+" },
        fit.slope.abs()
    );
    Ok(())
}
