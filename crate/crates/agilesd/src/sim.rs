//! Cycle-level single-flow simulator for Agile-SD and NewReno congestion
//! avoidance.
//!
//! The simulation advances one cycle at a time: a cycle lasts `RTT / lambda`
//! seconds, transmits `floor(cwnd) / lambda` packets, and ends with the
//! window one packet larger. Random loss hits each transmitted packet
//! independently with probability `loss_rate`; congestion loss fires when
//! the window cannot grow past `W`. Either loss closes the epoch and the
//! window drops to `max(beta * cwnd, w_min)`.
//!
//! An epoch is the stretch between two consecutive losses; its cycle records
//! carry everything needed to recompute the epoch and total transmission
//! rates after the fact.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::config::{CcaParams, NetworkConfig};
use crate::error::{Error, Result};

/// Per-ACK NewReno growth: `w + 1/w`. A full window of ACKs adds one packet
/// per RTT.
pub fn next_window_newreno(w: f64) -> f64 {
    w + 1.0 / w
}

/// Per-ACK Agile-SD growth: `w + lambda/w`, i.e. one packet per `RTT/lambda`.
pub fn next_window_agile(w: f64, lambda: f64) -> f64 {
    w + lambda / w
}

/// Agility factor of the running flow:
/// `clamp(lambda_max * (prev_peak - w) / (prev_peak - epoch_start), ...)`.
///
/// At the epoch start (`w == epoch_start`) this is `lambda_max`; once the
/// window regains the previous peak the lower clamp pins it to `lambda_min`.
pub fn agility_factor_afm(
    prev_peak: f64,
    epoch_start_w: f64,
    current_w: f64,
    params: &CcaParams,
) -> Result<f64> {
    if !(prev_peak > epoch_start_w) {
        return Err(Error::InvalidState(format!(
            "previous peak {prev_peak} must exceed epoch start window {epoch_start_w}"
        )));
    }
    let ratio = (prev_peak - current_w) / (prev_peak - epoch_start_w);
    Ok((params.lambda_max * ratio)
        .max(params.lambda_min)
        .min(params.lambda_max))
}

/// Agility factor with the degenerate case resolved instead of rejected.
///
/// A reduction clamped at the window floor can leave
/// `prev_peak == epoch_start_w`; the first cycle of any epoch still runs at
/// `lambda_max` and anything past the old peak at `lambda_min`.
fn cycle_lambda(prev_peak: f64, epoch_start_w: f64, current_w: f64, params: &CcaParams) -> f64 {
    if prev_peak > epoch_start_w {
        let ratio = (prev_peak - current_w) / (prev_peak - epoch_start_w);
        (params.lambda_max * ratio)
            .max(params.lambda_min)
            .min(params.lambda_max)
    } else if current_w <= epoch_start_w {
        params.lambda_max
    } else {
        params.lambda_min
    }
}

/// One congestion-avoidance cycle: one unit of window growth.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CycleRecord {
    /// Window at the start of the cycle, in packets.
    pub w: f64,
    /// Agility factor during the cycle.
    pub lambda: f64,
    /// Cycle length `RTT / lambda` in seconds.
    pub duration_s: f64,
    /// Packets transmitted: `floor(w) / lambda`.
    pub packets_sent: f64,
}

/// What terminated an epoch.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EpochEnd {
    RandomLoss,
    CongestionLoss,
    SimulationEnd,
}

impl std::fmt::Display for EpochEnd {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            EpochEnd::RandomLoss => write!(f, "random_loss"),
            EpochEnd::CongestionLoss => write!(f, "congestion_loss"),
            EpochEnd::SimulationEnd => write!(f, "simulation_end"),
        }
    }
}

/// The cycles between two consecutive losses.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EpochRecord {
    pub cycles: Vec<CycleRecord>,
    pub end_cause: EpochEnd,
}

impl EpochRecord {
    pub fn duration_s(&self) -> f64 {
        self.cycles.iter().map(|c| c.duration_s).sum()
    }

    pub fn packets_sent(&self) -> f64 {
        self.cycles.iter().map(|c| c.packets_sent).sum()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct LossCounts {
    pub random: u64,
    pub congestion: u64,
}

/// Full outcome of one simulated flow.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimReport {
    /// Total average transmission rate in Kbps.
    pub tatr_kbps: f64,
    /// `tatr_kbps` divided by link capacity.
    pub normalized: f64,
    pub epochs: Vec<EpochRecord>,
    /// Mean duration of loss-terminated epochs (all epochs if none ended in
    /// a loss).
    pub mean_epoch_duration_s: f64,
    pub loss_counts: LossCounts,
    /// Requested simulation length in seconds.
    pub duration_s: f64,
    pub seed: u64,
}

/// Epoch average transmission rate:
/// `theta * sum(floor(w)/lambda) / sum(RTT/lambda)` over the epoch's cycles.
pub fn epoch_average_rate(epoch: &EpochRecord, theta: f64) -> Result<f64> {
    if epoch.cycles.is_empty() {
        return Err(Error::InvalidParameter(
            "epoch has no cycles to average".into(),
        ));
    }
    Ok(theta * epoch.packets_sent() / epoch.duration_s())
}

/// Total average transmission rate across epochs; time-weighted, not a mean
/// of per-epoch rates.
pub fn total_average_rate(epochs: &[EpochRecord], theta: f64) -> Result<f64> {
    if epochs.is_empty() || epochs.iter().all(|e| e.cycles.is_empty()) {
        return Err(Error::InvalidParameter(
            "no cycles to average over".into(),
        ));
    }
    let packets: f64 = epochs.iter().map(EpochRecord::packets_sent).sum();
    let time: f64 = epochs.iter().map(EpochRecord::duration_s).sum();
    Ok(theta * packets / time)
}

/// Simulates a single flow for `duration_s` seconds.
///
/// The flow starts as if a congestion loss just occurred at `W`: the window
/// opens at `max(beta * W, w_min)` with the previous peak pinned to `W`, so
/// the agility factor is defined from time zero. Losses take effect at cycle
/// boundaries; growth is capped at `W` and the cycle that runs at `W` ends
/// in a congestion loss (unless a random loss gets there first).
pub fn run_flow(
    config: &NetworkConfig,
    params: &CcaParams,
    duration_s: f64,
    seed: u64,
) -> Result<SimReport> {
    config.validate()?;
    params.validate()?;
    if !(duration_s > 0.0) || !duration_s.is_finite() {
        return Err(Error::InvalidParameter(format!(
            "duration must be positive, got {duration_s}"
        )));
    }
    if config.loss_rate >= 1.0 {
        return Err(Error::InvalidParameter(format!(
            "per-packet loss probability must be below 1, got {}",
            config.loss_rate
        )));
    }
    // The first cycle runs at lambda_max and lasts RTT / lambda_max.
    if duration_s < config.rtt_s / params.lambda_max {
        return Err(Error::InvalidParameter(format!(
            "duration {duration_s} s is shorter than one cycle"
        )));
    }

    let max_window = f64::from(config.max_window());
    let min_window = f64::from(config.min_window);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    // Per-cycle survival exponent: (1 - R)^packets == exp(packets * ln(1 - R)).
    let ln_keep = (-config.loss_rate).ln_1p();

    let mut cwnd = (params.beta * max_window).max(min_window);
    let mut prev_peak = max_window;
    let mut epoch_start = cwnd;

    let mut epochs: Vec<EpochRecord> = Vec::new();
    let mut cycles: Vec<CycleRecord> = Vec::new();
    let mut clock = 0.0;
    let mut losses = LossCounts {
        random: 0,
        congestion: 0,
    };
    let mut total_packets = 0.0;
    let mut total_time = 0.0;

    loop {
        let lambda = cycle_lambda(prev_peak, epoch_start, cwnd, params);
        let duration = config.rtt_s / lambda;
        let packets = cwnd.floor() / lambda;
        cycles.push(CycleRecord {
            w: cwnd,
            lambda,
            duration_s: duration,
            packets_sent: packets,
        });
        total_packets += packets;
        total_time += duration;
        clock += duration;

        if clock >= duration_s {
            epochs.push(EpochRecord {
                cycles: std::mem::take(&mut cycles),
                end_cause: EpochEnd::SimulationEnd,
            });
            break;
        }

        let random_loss = config.loss_rate > 0.0 && {
            let p_loss = -(packets * ln_keep).exp_m1();
            rng.gen::<f64>() < p_loss
        };

        if random_loss {
            losses.random += 1;
            epochs.push(EpochRecord {
                cycles: std::mem::take(&mut cycles),
                end_cause: EpochEnd::RandomLoss,
            });
            prev_peak = cwnd;
            cwnd = (params.beta * cwnd).max(min_window);
            epoch_start = cwnd;
        } else if cwnd >= max_window {
            losses.congestion += 1;
            epochs.push(EpochRecord {
                cycles: std::mem::take(&mut cycles),
                end_cause: EpochEnd::CongestionLoss,
            });
            prev_peak = cwnd;
            cwnd = (params.beta * cwnd).max(min_window);
            epoch_start = cwnd;
        } else {
            cwnd = (cwnd + 1.0).min(max_window);
        }
    }

    let loss_durations: Vec<f64> = epochs
        .iter()
        .filter(|e| e.end_cause != EpochEnd::SimulationEnd)
        .map(EpochRecord::duration_s)
        .collect();
    let mean_epoch_duration_s = if loss_durations.is_empty() {
        total_time / epochs.len() as f64
    } else {
        loss_durations.iter().sum::<f64>() / loss_durations.len() as f64
    };

    let tatr_kbps = config.packet_size_kbits * total_packets / total_time;

    Ok(SimReport {
        tatr_kbps,
        normalized: tatr_kbps / config.capacity_kbps,
        epochs,
        mean_epoch_duration_s,
        loss_counts: losses,
        duration_s,
        seed,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::markov::average_throughput;

    fn small_config(bdp_packets: f64) -> NetworkConfig {
        NetworkConfig {
            capacity_kbps: bdp_packets * 8.0 / 0.010,
            rtt_s: 0.010,
            packet_size_kbits: 8.0,
            buffer_packets: 0,
            loss_rate: 0.0,
            min_window: 2,
        }
    }

    #[test]
    fn newreno_growth_examples() {
        assert_eq!(next_window_newreno(1.0), 2.0);
        assert!((next_window_newreno(10.0) - 10.1).abs() < 1e-12);
        // A full window of per-ACK increments adds one packet.
        let w: f64 = 10.0;
        let mut grown = w;
        for _ in 0..10 {
            grown += 1.0 / w;
        }
        assert!((grown - (w + 1.0)).abs() < 1e-12);
    }

    #[test]
    fn agile_growth_examples() {
        assert_eq!(next_window_agile(10.0, 1.0), next_window_newreno(10.0));
        assert!((next_window_agile(10.0, 5.0) - 10.5).abs() < 1e-12);
    }

    #[test]
    fn afm_boundary_values() {
        let params = CcaParams::agile(0.5, 5.0);
        assert_eq!(agility_factor_afm(20.0, 10.0, 10.0, &params).unwrap(), 5.0);
        assert_eq!(agility_factor_afm(20.0, 10.0, 20.0, &params).unwrap(), 1.0);
        // Growth past the old peak clamps at lambda_min.
        assert_eq!(agility_factor_afm(20.0, 10.0, 25.0, &params).unwrap(), 1.0);
        assert!(agility_factor_afm(10.0, 10.0, 10.0, &params).is_err());
    }

    #[test]
    fn zero_loss_newreno_is_a_stable_sawtooth() {
        let config = small_config(20.0); // W = 20
        let report = run_flow(&config, &CcaParams::newreno(0.5), 30.0, 7).unwrap();
        assert_eq!(report.loss_counts.random, 0);
        assert!(report.loss_counts.congestion > 0);

        // Every loss-terminated epoch covers windows 10..=20: eleven cycles,
        // one unit of degradation per cycle plus the post-reduction cycle
        // and the capped cycle at W.
        for epoch in report
            .epochs
            .iter()
            .filter(|e| e.end_cause != EpochEnd::SimulationEnd)
        {
            assert_eq!(epoch.end_cause, EpochEnd::CongestionLoss);
            assert_eq!(epoch.cycles.len(), 11);
            assert_eq!(epoch.cycles.first().unwrap().w, 10.0);
            assert_eq!(epoch.cycles.last().unwrap().w, 20.0);
            for c in &epoch.cycles {
                assert_eq!(c.lambda, 1.0);
                assert_eq!(c.duration_s, config.rtt_s);
            }
        }
    }

    #[test]
    fn window_stays_within_bounds() {
        let mut config = small_config(50.0);
        config.loss_rate = 2e-3;
        let w_max = f64::from(config.max_window());
        let w_min = f64::from(config.min_window);
        for seed in 0..5 {
            let report = run_flow(&config, &CcaParams::default(), 20.0, seed).unwrap();
            for epoch in &report.epochs {
                for c in &epoch.cycles {
                    assert!(c.w >= w_min && c.w <= w_max, "w = {} out of range", c.w);
                    assert!(c.lambda >= 1.0 && c.lambda <= 5.0);
                }
            }
        }
    }

    #[test]
    fn lambda_is_non_increasing_within_epochs() {
        let config = small_config(100.0);
        let report = run_flow(&config, &CcaParams::agile(0.5, 5.0), 20.0, 1).unwrap();
        for epoch in &report.epochs {
            for pair in epoch.cycles.windows(2) {
                assert!(pair[1].lambda <= pair[0].lambda + 1e-12);
            }
            assert_eq!(epoch.cycles.first().unwrap().lambda, 5.0);
        }
    }

    #[test]
    fn higher_lambda_max_shortens_epochs() {
        let config = small_config(200.0);
        let slow = run_flow(&config, &CcaParams::newreno(0.5), 60.0, 3).unwrap();
        let fast = run_flow(&config, &CcaParams::agile(0.5, 5.0), 60.0, 3).unwrap();
        assert!(fast.mean_epoch_duration_s < slow.mean_epoch_duration_s);
    }

    #[test]
    fn determinism_per_seed() {
        let mut config = small_config(80.0);
        config.loss_rate = 1e-3;
        let params = CcaParams::default();
        let a = run_flow(&config, &params, 25.0, 42).unwrap();
        let b = run_flow(&config, &params, 25.0, 42).unwrap();
        assert_eq!(a, b);
        let c = run_flow(&config, &params, 25.0, 43).unwrap();
        assert_ne!(a, c);
    }

    #[test]
    fn newreno_flag_and_lambda_one_traces_match() {
        let mut config = small_config(60.0);
        config.loss_rate = 5e-4;
        let via_cap = run_flow(&config, &CcaParams::agile(0.5, 1.0), 25.0, 9).unwrap();
        let via_newreno = run_flow(&config, &CcaParams::newreno(0.5), 25.0, 9).unwrap();
        assert_eq!(via_cap, via_newreno);
    }

    #[test]
    fn stored_rate_matches_recomputation() {
        let mut config = small_config(120.0);
        config.loss_rate = 1e-3;
        let report = run_flow(&config, &CcaParams::default(), 30.0, 5).unwrap();
        let recomputed =
            total_average_rate(&report.epochs, config.packet_size_kbits).unwrap();
        assert!((recomputed - report.tatr_kbps).abs() / report.tatr_kbps < 1e-9);
    }

    #[test]
    fn epoch_accounting_covers_the_duration() {
        let config = small_config(40.0);
        let report = run_flow(&config, &CcaParams::default(), 17.3, 2).unwrap();
        let total: f64 = report.epochs.iter().map(EpochRecord::duration_s).sum();
        assert!(total >= report.duration_s);
        assert!(total - report.duration_s <= config.rtt_s);
    }

    #[test]
    fn eatr_examples() {
        let epoch = EpochRecord {
            cycles: vec![CycleRecord {
                w: 10.0,
                lambda: 2.0,
                duration_s: 0.005,
                packets_sent: 5.0,
            }],
            end_cause: EpochEnd::RandomLoss,
        };
        assert!((epoch_average_rate(&epoch, 8.0).unwrap() - 8000.0).abs() < 1e-9);

        let epoch = EpochRecord {
            cycles: vec![
                CycleRecord {
                    w: 4.0,
                    lambda: 2.0,
                    duration_s: 0.005,
                    packets_sent: 2.0,
                },
                CycleRecord {
                    w: 5.0,
                    lambda: 1.0,
                    duration_s: 0.010,
                    packets_sent: 5.0,
                },
            ],
            end_cause: EpochEnd::CongestionLoss,
        };
        let rate = epoch_average_rate(&epoch, 8.0).unwrap();
        assert!((rate - 8.0 * 7.0 / 0.015).abs() < 1e-9);
        assert!((rate - 3733.333333).abs() < 1e-3);

        let empty = EpochRecord {
            cycles: vec![],
            end_cause: EpochEnd::SimulationEnd,
        };
        assert!(epoch_average_rate(&empty, 8.0).is_err());
    }

    #[test]
    fn tatr_is_time_weighted() {
        let short = EpochRecord {
            cycles: vec![CycleRecord {
                w: 10.0,
                lambda: 1.0,
                duration_s: 0.01,
                packets_sent: 10.0,
            }],
            end_cause: EpochEnd::RandomLoss,
        };
        // Four cycles at a five-fold higher rate; dominates by duration.
        let long = EpochRecord {
            cycles: vec![
                CycleRecord {
                    w: 50.0,
                    lambda: 1.0,
                    duration_s: 0.01,
                    packets_sent: 50.0,
                };
                4
            ],
            end_cause: EpochEnd::RandomLoss,
        };
        let theta = 8.0;
        let single = total_average_rate(&[short.clone()], theta).unwrap();
        assert!((single - epoch_average_rate(&short, theta).unwrap()).abs() < 1e-12);

        // Duplication leaves the ratio unchanged.
        let dup = total_average_rate(&[long.clone(), long.clone()], theta).unwrap();
        assert!((dup - epoch_average_rate(&long, theta).unwrap()).abs() < 1e-9);

        // Mixed epochs land between the extremes, nearer the longer one.
        let mixed = total_average_rate(&[short.clone(), long.clone()], theta).unwrap();
        let lo = epoch_average_rate(&short, theta).unwrap();
        let hi = epoch_average_rate(&long, theta).unwrap();
        assert!(mixed > lo && mixed < hi);
        assert!((mixed - hi).abs() < (mixed - lo).abs());

        assert!(total_average_rate(&[], theta).is_err());
    }

    /// The simulator and the chain agree exactly on the loss-free
    /// five-state example.
    #[test]
    fn matches_model_on_small_deterministic_chain() {
        let config = NetworkConfig {
            capacity_kbps: 4800.0,
            rtt_s: 0.010,
            packet_size_kbits: 8.0,
            buffer_packets: 0,
            loss_rate: 0.0,
            min_window: 2,
        };
        let params = CcaParams::newreno(0.75);
        let model = average_throughput(&config, &params, 999).unwrap();
        let sim = run_flow(&config, &params, 100.0, 1).unwrap();
        let rel = (sim.tatr_kbps - model.ath_kbps).abs() / model.ath_kbps;
        assert!(rel < 0.02, "relative error {rel}");
    }

    #[test]
    fn rejects_too_short_duration() {
        let config = small_config(20.0);
        assert!(run_flow(&config, &CcaParams::default(), 0.0001, 1).is_err());
        assert!(run_flow(&config, &CcaParams::default(), -1.0, 1).is_err());
    }
}
