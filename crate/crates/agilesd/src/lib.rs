//! Throughput modeling and tuning for the Agile-SD TCP congestion control
//! algorithm, with NewReno as the built-in baseline.
//!
//! The crate has three legs:
//!
//! - [`markov`] — a sparse Markov-chain model over congestion-window states
//!   that computes average throughput under combined congestion and random
//!   loss. NewReno is the `lambda_max = 1` special case.
//! - [`sim`] — a cycle-level single-flow simulator of the same dynamics with
//!   drop-tail congestion loss and seeded per-packet random loss, used to
//!   cross-validate the model.
//! - [`tuner`] — a grid search over `(beta, lambda_max)` that extracts the
//!   smallest near-optimal agility cap per beta and compares it with the
//!   closed-form rule `ceil(8.91 - 7 * beta)`.
//!
//! [`sweep`] orchestrates parameter sweeps and model-vs-simulator
//! validation, [`cfgfile`] parses the flat `key = value` config format, and
//! [`emit`] writes the CSV/JSON outputs. The `agilesd` binary exposes all of
//! it as subcommands; the `examples/` directory shows one runnable program
//! per capability.
//!
//! ```
//! use agilesd::{average_throughput, CcaParams, NetworkConfig};
//!
//! let config = NetworkConfig::default(); // 1 Gbps, 10 ms RTT, 4-packet buffer
//! let agile = average_throughput(&config, &CcaParams::agile(0.5, 5.0), 10_000).unwrap();
//! let newreno = average_throughput(&config, &CcaParams::newreno(0.5), 10_000).unwrap();
//! assert!(agile.normalized_ath > newreno.normalized_ath);
//! ```

pub mod cfgfile;
pub mod config;
pub mod emit;
pub mod error;
pub mod markov;
pub mod sim;
pub mod sweep;
pub mod tuner;

pub use cfgfile::{parse_config, Settings};
pub use config::{state_count, CcaParams, NetworkConfig};
pub use error::{Error, Result};
pub use markov::{
    agility_factor_model, average_throughput, average_throughput_with, build_transition_matrix,
    initial_distribution, loss_probability, step_distribution, ModelOptions, StateDistribution,
    ThroughputReport, TransitionMatrix, DEFAULT_ITERATIONS,
};
pub use sim::{
    agility_factor_afm, epoch_average_rate, next_window_agile, next_window_newreno, run_flow,
    total_average_rate, CycleRecord, EpochEnd, EpochRecord, LossCounts, SimReport,
};
pub use sweep::{
    compare_model_vs_sim, run_sweep, Cca, PointComparison, RunMode, Source, SweepRow, SweepSpec,
    SweepVariable, ValidationReport,
};
pub use tuner::{
    fit_optimal_line, optimal_lambda_formula, run_aacpt, LineFit, TuningGrid, TuningResult,
};
