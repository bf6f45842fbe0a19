//! Flat `key = value` configuration files.
//!
//! One key per line, lists comma-separated, `#` starts a comment. Every key
//! is optional; an empty file yields the reference defaults (1 Gbps link,
//! 10 ms RTT, 1000-byte packets, 4-packet buffer, loss rate 1e-8, minimum
//! window 2, 10,000 model iterations, beta 0.5, lambda in [1, 5], seeds
//! 1..10, 100 simulated seconds, mode `both`).
//!
//! Recognized keys: `capacity_kbps`, `rtt_ms`, `packet_size_bytes`,
//! `buffer_packets`, `loss_rate`, `min_window`, `beta`, `lambda_min`,
//! `lambda_max`, `iterations`, `sweep_variable`, `sweep_values`, `mode`,
//! `seeds`, `duration_s`.

use crate::config::{CcaParams, NetworkConfig};
use crate::error::{Error, Result};
use crate::markov::DEFAULT_ITERATIONS;
use crate::sweep::{RunMode, SweepSpec, SweepVariable};

/// Everything a config file can express, defaulted where unspecified.
#[derive(Debug, Clone, PartialEq)]
pub struct Settings {
    pub network: NetworkConfig,
    pub cca: CcaParams,
    pub iterations: usize,
    pub mode: RunMode,
    pub seeds: Vec<u64>,
    pub duration_s: f64,
    pub sweep_variable: Option<SweepVariable>,
    pub sweep_values: Vec<f64>,
}

impl Default for Settings {
    fn default() -> Self {
        Self {
            network: NetworkConfig::default(),
            cca: CcaParams::default(),
            iterations: DEFAULT_ITERATIONS,
            mode: RunMode::Both,
            seeds: (1..=10).collect(),
            duration_s: 100.0,
            sweep_variable: None,
            sweep_values: Vec::new(),
        }
    }
}

impl Settings {
    /// Parses config text; unknown keys, malformed values and out-of-range
    /// values are errors that name the offending key.
    pub fn parse(text: &str) -> Result<Self> {
        let mut settings = Settings::default();

        for raw_line in text.lines() {
            let line = raw_line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (key, value) = line.split_once('=').ok_or_else(|| Error::ConfigValue {
                key: line.to_string(),
                reason: "expected `key = value`".into(),
            })?;
            let key = key.trim();
            let value = value.trim();
            settings.apply(key, value)?;
        }

        settings.validate()?;
        Ok(settings)
    }

    fn apply(&mut self, key: &str, value: &str) -> Result<()> {
        match key {
            "capacity_kbps" => {
                self.network.capacity_kbps = parse_positive(key, value)?;
            }
            "rtt_ms" => {
                self.network.rtt_s = parse_positive(key, value)? / 1000.0;
            }
            "packet_size_bytes" => {
                // theta internally lives in Kbits.
                self.network.packet_size_kbits = parse_positive(key, value)? * 8.0 / 1000.0;
            }
            "buffer_packets" => {
                self.network.buffer_packets = parse_int(key, value)?;
            }
            "loss_rate" => {
                let r: f64 = parse_number(key, value)?;
                if r < 0.0 {
                    return Err(range_error(key, value, "must be non-negative"));
                }
                self.network.loss_rate = r;
            }
            "min_window" => {
                let w: u32 = parse_int(key, value)?;
                if w < 1 {
                    return Err(range_error(key, value, "must be at least 1"));
                }
                self.network.min_window = w;
            }
            "beta" => {
                let b: f64 = parse_number(key, value)?;
                if !(b > 0.0 && b < 1.0) {
                    return Err(range_error(key, value, "must lie strictly inside (0, 1)"));
                }
                self.cca.beta = b;
            }
            "lambda_min" => {
                let l: f64 = parse_number(key, value)?;
                if !(l >= 1.0) {
                    return Err(range_error(key, value, "must be at least 1"));
                }
                self.cca.lambda_min = l;
            }
            "lambda_max" => {
                let l: f64 = parse_number(key, value)?;
                if !(l >= 1.0) {
                    return Err(range_error(key, value, "must be at least 1"));
                }
                self.cca.lambda_max = l;
            }
            "iterations" => {
                let i: usize = parse_int(key, value)?;
                if i == 0 {
                    return Err(range_error(key, value, "must be at least 1"));
                }
                self.iterations = i;
            }
            "sweep_variable" => {
                self.sweep_variable =
                    Some(value.parse().map_err(|e| Error::ConfigValue {
                        key: key.into(),
                        reason: format!("{e}"),
                    })?);
            }
            "sweep_values" => {
                self.sweep_values = parse_list(key, value)?;
                if self.sweep_values.is_empty() {
                    return Err(range_error(key, value, "list must not be empty"));
                }
            }
            "mode" => {
                self.mode = value.parse().map_err(|e| Error::ConfigValue {
                    key: key.into(),
                    reason: format!("{e}"),
                })?;
            }
            "seeds" => {
                self.seeds = parse_list(key, value)?;
                if self.seeds.is_empty() {
                    return Err(range_error(key, value, "list must not be empty"));
                }
            }
            "duration_s" => {
                self.duration_s = parse_positive(key, value)?;
            }
            other => return Err(Error::UnknownKey(other.to_string())),
        }
        Ok(())
    }

    fn validate(&self) -> Result<()> {
        if self.cca.lambda_max < self.cca.lambda_min {
            return Err(Error::ConfigValue {
                key: "lambda_max".into(),
                reason: format!(
                    "must be at least lambda_min ({} < {})",
                    self.cca.lambda_max, self.cca.lambda_min
                ),
            });
        }
        self.network.validate()?;
        self.cca.validate()
    }

    /// Assembles the sweep; errors name the keys a sweep still needs.
    pub fn sweep_spec(&self) -> Result<SweepSpec> {
        let variable = self
            .sweep_variable
            .ok_or_else(|| Error::MissingKey("sweep_variable".into()))?;
        if self.sweep_values.is_empty() {
            return Err(Error::MissingKey("sweep_values".into()));
        }
        let spec = SweepSpec {
            variable,
            values: self.sweep_values.clone(),
            base_config: self.network.clone(),
            base_params: self.cca.clone(),
            mode: self.mode,
            seeds: self.seeds.clone(),
            duration_s: self.duration_s,
            iterations: self.iterations,
        };
        spec.validate()?;
        Ok(spec)
    }
}

/// Parses a full config file (see module docs for the schema).
pub fn parse_config(text: &str) -> Result<Settings> {
    Settings::parse(text)
}

fn parse_number(key: &str, value: &str) -> Result<f64> {
    let parsed: f64 = value.parse().map_err(|_| Error::ConfigValue {
        key: key.into(),
        reason: format!("`{value}` is not a number"),
    })?;
    if !parsed.is_finite() {
        return Err(range_error(key, value, "must be finite"));
    }
    Ok(parsed)
}

fn parse_positive(key: &str, value: &str) -> Result<f64> {
    let parsed = parse_number(key, value)?;
    if !(parsed > 0.0) {
        return Err(range_error(key, value, "must be positive"));
    }
    Ok(parsed)
}

fn parse_int<T: std::str::FromStr>(key: &str, value: &str) -> Result<T> {
    value.parse().map_err(|_| Error::ConfigValue {
        key: key.into(),
        reason: format!("`{value}` is not a valid integer"),
    })
}

fn parse_list<T: std::str::FromStr>(key: &str, value: &str) -> Result<Vec<T>> {
    value
        .split(',')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(|s| {
            s.parse().map_err(|_| Error::ConfigValue {
                key: key.into(),
                reason: format!("list item `{s}` is not valid"),
            })
        })
        .collect()
}

fn range_error(key: &str, value: &str, reason: &str) -> Error {
    Error::ConfigValue {
        key: key.into(),
        reason: format!("value `{value}` {reason}"),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_file_yields_reference_defaults() {
        let s = parse_config("").unwrap();
        assert_eq!(s.network.capacity_kbps, 1_000_000.0);
        assert_eq!(s.network.rtt_s, 0.010);
        assert_eq!(s.network.packet_size_kbits, 8.0);
        assert_eq!(s.network.buffer_packets, 4);
        assert_eq!(s.network.loss_rate, 1e-8);
        assert_eq!(s.network.min_window, 2);
        assert_eq!(s.iterations, 10_000);
        assert_eq!(s.cca.beta, 0.5);
        assert_eq!(s.cca.lambda_min, 1.0);
        assert_eq!(s.cca.lambda_max, 5.0);
        assert_eq!(s.seeds, (1..=10).collect::<Vec<u64>>());
        assert_eq!(s.duration_s, 100.0);
        assert_eq!(s.mode, RunMode::Both);
        assert!(s.sweep_variable.is_none());
    }

    #[test]
    fn out_of_range_beta_names_the_key() {
        let err = parse_config("beta = 1.2").unwrap_err();
        match err {
            Error::ConfigValue { key, .. } => assert_eq!(key, "beta"),
            other => panic!("unexpected error {other:?}"),
        }
    }

    #[test]
    fn unknown_key_is_rejected() {
        let err = parse_config("capactiy = 5").unwrap_err();
        assert!(matches!(err, Error::UnknownKey(k) if k == "capactiy"));
    }

    #[test]
    fn buffer_list_parses_into_a_six_point_sweep() {
        let s = parse_config(
            "sweep_variable = buffer\nsweep_values = 4,8,16,32,64,128\n",
        )
        .unwrap();
        let spec = s.sweep_spec().unwrap();
        assert_eq!(spec.values, vec![4.0, 8.0, 16.0, 32.0, 64.0, 128.0]);
        assert_eq!(spec.variable, SweepVariable::Buffer);
    }

    #[test]
    fn comments_whitespace_and_units_are_handled() {
        let text = "\n# reference point, halved RTT\nrtt_ms = 5\npacket_size_bytes = 500\n  seeds = 1, 2 ,3\n";
        let s = parse_config(text).unwrap();
        assert_eq!(s.network.rtt_s, 0.005);
        assert_eq!(s.network.packet_size_kbits, 4.0);
        assert_eq!(s.seeds, vec![1, 2, 3]);
    }

    #[test]
    fn sweep_spec_requires_variable_and_values() {
        let s = parse_config("").unwrap();
        assert!(matches!(
            s.sweep_spec(),
            Err(Error::MissingKey(k)) if k == "sweep_variable"
        ));
        let s = parse_config("sweep_variable = buffer").unwrap();
        assert!(matches!(
            s.sweep_spec(),
            Err(Error::MissingKey(k)) if k == "sweep_values"
        ));
    }

    #[test]
    fn malformed_lines_and_values_error_out() {
        assert!(parse_config("beta 0.5").is_err());
        assert!(parse_config("beta = fast").is_err());
        assert!(parse_config("seeds = 1,two,3").is_err());
        assert!(parse_config("mode = quick").is_err());
        assert!(parse_config("sweep_variable = color").is_err());
        assert!(parse_config("duration_s = -5").is_err());
        assert!(parse_config("lambda_min = 3\nlambda_max = 2").is_err());
    }

    #[test]
    fn later_entries_override_earlier_ones() {
        let s = parse_config("beta = 0.6\nbeta = 0.7\n").unwrap();
        assert_eq!(s.cca.beta, 0.7);
    }
}
