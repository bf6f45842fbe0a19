//! Network and congestion-control parameter sets.
//!
//! [`NetworkConfig`] describes the bottleneck link (capacity, RTT, packet
//! size, buffer, random-loss rate) and derives the window bounds the model
//! and simulator share: the maximum congestion window `W`, the minimum
//! window `w_min`, and the state count `N = W - w_min + 1`.
//!
//! [`CcaParams`] fully describes the congestion control algorithm: the
//! multiplicative decrease factor `beta` and the agility-factor range
//! `[lambda_min, lambda_max]`. NewReno is the `lambda_max = 1` special case.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Bottleneck-link description.
///
/// Units: capacity in Kbps, RTT in seconds, packet size in Kbits, buffer in
/// packets, `loss_rate` as the per-packet random loss rate.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NetworkConfig {
    /// Link capacity `C` in Kbps.
    pub capacity_kbps: f64,
    /// Two-way link delay (RTT) in seconds.
    pub rtt_s: f64,
    /// Packet size `theta` in Kbits.
    pub packet_size_kbits: f64,
    /// Bottleneck buffer size `b` in packets.
    pub buffer_packets: u32,
    /// Per-packet random loss rate `R` (Poisson rate in the model,
    /// Bernoulli probability in the simulator).
    pub loss_rate: f64,
    /// Minimum allowed congestion window in packets.
    pub min_window: u32,
}

impl Default for NetworkConfig {
    /// Reference parameter set: 1 Gbps link, 10 ms RTT, 1000-byte packets,
    /// 4-packet buffer, loss rate 1e-8, minimum window 2.
    fn default() -> Self {
        Self {
            capacity_kbps: 1_000_000.0,
            rtt_s: 0.010,
            packet_size_kbits: 8.0,
            buffer_packets: 4,
            loss_rate: 1e-8,
            min_window: 2,
        }
    }
}

impl NetworkConfig {
    /// Checks the field-level constraints and the derived `N >= 2` bound.
    pub fn validate(&self) -> Result<()> {
        if !(self.capacity_kbps > 0.0) || !self.capacity_kbps.is_finite() {
            return Err(Error::InvalidParameter(format!(
                "capacity_kbps must be positive and finite, got {}",
                self.capacity_kbps
            )));
        }
        if !(self.rtt_s > 0.0) || !self.rtt_s.is_finite() {
            return Err(Error::InvalidParameter(format!(
                "rtt_s must be positive and finite, got {}",
                self.rtt_s
            )));
        }
        if !(self.packet_size_kbits > 0.0) || !self.packet_size_kbits.is_finite() {
            return Err(Error::InvalidParameter(format!(
                "packet_size_kbits must be positive and finite, got {}",
                self.packet_size_kbits
            )));
        }
        if self.loss_rate < 0.0 || !self.loss_rate.is_finite() {
            return Err(Error::InvalidParameter(format!(
                "loss_rate must be non-negative, got {}",
                self.loss_rate
            )));
        }
        if self.min_window < 1 {
            return Err(Error::InvalidParameter(
                "min_window must be at least 1".into(),
            ));
        }
        // Forces N >= 2.
        if self.max_window() < self.min_window + 1 {
            return Err(Error::InvalidParameter(format!(
                "max window {} leaves no room above min window {}",
                self.max_window(),
                self.min_window
            )));
        }
        Ok(())
    }

    /// Bandwidth-delay product expressed in packets: `C * RTT / theta`.
    pub fn bdp_packets(&self) -> f64 {
        self.capacity_kbps * self.rtt_s / self.packet_size_kbits
    }

    /// Maximum congestion window `W = round(C * RTT / theta) + b` in packets.
    ///
    /// The buffer extends the pipe: packets queued at the bottleneck count
    /// toward the in-flight limit.
    pub fn max_window(&self) -> u32 {
        self.bdp_packets().round() as u32 + self.buffer_packets
    }

    /// Number of window states `N = W - w_min + 1`.
    pub fn state_count(&self) -> Result<u32> {
        state_count(self.max_window(), self.min_window)
    }

    /// Hard upper bound on any throughput value: `theta * W / RTT` in Kbps.
    pub fn rate_ceiling_kbps(&self) -> f64 {
        self.packet_size_kbits * f64::from(self.max_window()) / self.rtt_s
    }
}

/// Number of window states for a `[min_window, max_window]` range.
pub fn state_count(max_window: u32, min_window: u32) -> Result<u32> {
    if max_window <= min_window {
        return Err(Error::InvalidParameter(format!(
            "max window {max_window} must exceed min window {min_window}"
        )));
    }
    Ok(max_window - min_window + 1)
}

/// Congestion-control algorithm parameters.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CcaParams {
    /// Multiplicative decrease factor `beta` in (0, 1).
    pub beta: f64,
    /// Lower bound of the agility factor, 1 by convention.
    pub lambda_min: f64,
    /// Upper bound of the agility factor (`lambda'` in tuning context).
    pub lambda_max: f64,
}

impl CcaParams {
    /// Agile-SD with the conventional `lambda_min = 1`.
    pub fn agile(beta: f64, lambda_max: f64) -> Self {
        Self {
            beta,
            lambda_min: 1.0,
            lambda_max,
        }
    }

    /// NewReno: the `lambda_min = lambda_max = 1` special case.
    pub fn newreno(beta: f64) -> Self {
        Self {
            beta,
            lambda_min: 1.0,
            lambda_max: 1.0,
        }
    }

    /// Whether these parameters reduce to NewReno behaviour.
    pub fn is_newreno(&self) -> bool {
        self.lambda_max == 1.0
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.beta > 0.0 && self.beta < 1.0) {
            return Err(Error::InvalidParameter(format!(
                "beta must lie strictly inside (0, 1), got {}",
                self.beta
            )));
        }
        if !(self.lambda_min >= 1.0) || !self.lambda_min.is_finite() {
            return Err(Error::InvalidParameter(format!(
                "lambda_min must be at least 1, got {}",
                self.lambda_min
            )));
        }
        if !(self.lambda_max >= self.lambda_min) || !self.lambda_max.is_finite() {
            return Err(Error::InvalidParameter(format!(
                "lambda_max {} must be at least lambda_min {}",
                self.lambda_max, self.lambda_min
            )));
        }
        Ok(())
    }
}

impl Default for CcaParams {
    /// Reference Agile-SD setting: `beta = 0.5`, `lambda` in `[1, 5]`.
    fn default() -> Self {
        Self::agile(0.5, 5.0)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn reference_config_derives_reference_windows() {
        let cfg = NetworkConfig::default();
        assert_eq!(cfg.bdp_packets(), 1250.0);
        assert_eq!(cfg.max_window(), 1254);
        assert_eq!(cfg.state_count().unwrap(), 1253);
        cfg.validate().unwrap();
    }

    #[test]
    fn max_window_scales_with_buffer() {
        let mut cfg = NetworkConfig::default();
        cfg.buffer_packets = 128;
        assert_eq!(cfg.max_window(), 1378);
        cfg.buffer_packets = 0;
        assert_eq!(cfg.max_window(), 1250);
    }

    #[test]
    fn state_count_examples() {
        assert_eq!(state_count(6, 2).unwrap(), 5);
        assert_eq!(state_count(3, 2).unwrap(), 2);
        assert_eq!(state_count(1254, 2).unwrap(), 1253);
        assert!(state_count(2, 2).is_err());
        assert!(state_count(1, 2).is_err());
    }

    #[test]
    fn invalid_network_configs_are_rejected() {
        let mut cfg = NetworkConfig::default();
        cfg.loss_rate = -1.0;
        assert!(cfg.validate().is_err());

        let mut cfg = NetworkConfig::default();
        cfg.capacity_kbps = 0.0;
        assert!(cfg.validate().is_err());

        // W = 1 + 0 leaves no room above min_window = 2.
        let cfg = NetworkConfig {
            capacity_kbps: 8.0,
            rtt_s: 1.0,
            packet_size_kbits: 8.0,
            buffer_packets: 0,
            loss_rate: 0.0,
            min_window: 2,
        };
        assert!(cfg.validate().is_err());
    }

    #[test]
    fn cca_params_ranges() {
        CcaParams::agile(0.5, 5.0).validate().unwrap();
        CcaParams::newreno(0.5).validate().unwrap();
        assert!(CcaParams::agile(1.0, 5.0).validate().is_err());
        assert!(CcaParams::agile(0.0, 5.0).validate().is_err());
        assert!(CcaParams::agile(0.5, 0.5).validate().is_err());
        assert!(CcaParams {
            beta: 0.5,
            lambda_min: 2.0,
            lambda_max: 1.5,
        }
        .validate()
        .is_err());
    }

    #[test]
    fn newreno_is_lambda_one() {
        assert!(CcaParams::newreno(0.5).is_newreno());
        assert!(!CcaParams::default().is_newreno());
    }
}
