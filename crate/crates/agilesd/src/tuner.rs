//! Grid search for the agility-factor cap and its closed-form shortcut.
//!
//! The tuner evaluates the throughput model over a `(beta, lambda_max)`
//! grid, extracts the per-beta optimum as the *smallest* cap whose
//! throughput sits within a relative tolerance of the row maximum, and fits
//! a line through the optima for comparison with the closed-form rule
//! `ceil(8.91 - 7 * beta)`.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::config::{CcaParams, NetworkConfig};
use crate::error::{Error, Result};
use crate::markov::{average_throughput, DEFAULT_ITERATIONS};

/// A cap is "optimal" when its throughput is within this relative tolerance
/// of the row maximum; the smallest such cap wins.
pub const OPT_RELATIVE_TOLERANCE: f64 = 1e-3;

/// The `(beta, lambda')` evaluation grid.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TuningGrid {
    /// Problem instances, strictly increasing, each in (0, 1).
    pub betas: Vec<f64>,
    /// Candidate caps, strictly increasing, each at least 1.
    pub lambdas: Vec<f64>,
    /// Network configuration fixed across all combinations.
    pub base_config: NetworkConfig,
    /// Model iterations per evaluation.
    pub iterations: usize,
}

impl TuningGrid {
    /// The reference grid: ten betas from 0.5 to 0.95 and caps 1 through 10.
    pub fn with_default_ranges(base_config: NetworkConfig) -> Self {
        Self {
            betas: (0..10).map(|i| 0.5 + 0.05 * i as f64).collect(),
            lambdas: (1..=10).map(f64::from).collect(),
            base_config,
            iterations: DEFAULT_ITERATIONS,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.betas.is_empty() {
            return Err(Error::InvalidParameter("empty beta grid".into()));
        }
        if self.lambdas.is_empty() {
            return Err(Error::InvalidParameter("empty lambda grid".into()));
        }
        for &b in &self.betas {
            if !(b > 0.0 && b < 1.0) {
                return Err(Error::InvalidParameter(format!(
                    "grid beta {b} outside (0, 1)"
                )));
            }
        }
        for &l in &self.lambdas {
            if !(l >= 1.0) || !l.is_finite() {
                return Err(Error::InvalidParameter(format!(
                    "grid lambda {l} below 1"
                )));
            }
        }
        if self.betas.windows(2).any(|p| p[0] >= p[1]) {
            return Err(Error::InvalidParameter(
                "beta grid must be strictly increasing".into(),
            ));
        }
        if self.lambdas.windows(2).any(|p| p[0] >= p[1]) {
            return Err(Error::InvalidParameter(
                "lambda grid must be strictly increasing".into(),
            ));
        }
        self.base_config.validate()
    }
}

/// Outcome of the grid search.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TuningResult {
    pub betas: Vec<f64>,
    pub lambdas: Vec<f64>,
    /// Normalized average throughput per `(beta, lambda)` combination.
    pub at_matrix: Vec<Vec<f64>>,
    /// Selected cap per beta.
    pub lambda_opt: Vec<f64>,
    /// Closed-form cap per beta.
    pub formula_lambda: Vec<u32>,
    /// Evaluation config, recorded so the surface is reproducible.
    pub base_config: NetworkConfig,
    pub iterations: usize,
}

/// Runs the grid search. Rows are independent: the running maximum and the
/// selected cap reset for every beta.
pub fn run_aacpt(grid: &TuningGrid) -> Result<TuningResult> {
    grid.validate()?;

    let at_matrix: Vec<Vec<f64>> = grid
        .betas
        .par_iter()
        .map(|&beta| {
            grid.lambdas
                .iter()
                .map(|&lambda| {
                    average_throughput(
                        &grid.base_config,
                        &CcaParams::agile(beta, lambda),
                        grid.iterations,
                    )
                    .map(|r| r.normalized_ath)
                })
                .collect::<Result<Vec<f64>>>()
        })
        .collect::<Result<Vec<_>>>()?;

    let lambda_opt = at_matrix
        .iter()
        .map(|row| {
            let row_max = row.iter().copied().fold(f64::NEG_INFINITY, f64::max);
            let idx = row
                .iter()
                .position(|&at| at >= row_max * (1.0 - OPT_RELATIVE_TOLERANCE))
                .expect("row maximum exists");
            grid.lambdas[idx]
        })
        .collect();

    let formula_lambda = grid
        .betas
        .iter()
        .map(|&b| optimal_lambda_formula(b))
        .collect();

    Ok(TuningResult {
        betas: grid.betas.clone(),
        lambdas: grid.lambdas.clone(),
        at_matrix,
        lambda_opt,
        formula_lambda,
        base_config: grid.base_config.clone(),
        iterations: grid.iterations,
    })
}

/// Closed-form optimal cap: `ceil(8.91 - 7 * beta)` for `beta` in (0, 1).
pub fn optimal_lambda_formula(beta: f64) -> u32 {
    (8.91 - 7.0 * beta).ceil() as u32
}

/// Ordinary least-squares line through `(beta, lambda_opt)` points.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LineFit {
    pub slope: f64,
    pub intercept: f64,
}

impl LineFit {
    pub fn at(&self, x: f64) -> f64 {
        self.intercept + self.slope * x
    }
}

/// Fits a line through the optima; replaces an external curve-fit step.
pub fn fit_optimal_line(betas: &[f64], lambda_opts: &[f64]) -> Result<LineFit> {
    if betas.len() != lambda_opts.len() {
        return Err(Error::DimensionMismatch(format!(
            "{} betas vs {} optima",
            betas.len(),
            lambda_opts.len()
        )));
    }
    if betas.len() < 2 {
        return Err(Error::InvalidParameter(
            "line fit needs at least 2 points".into(),
        ));
    }
    let n = betas.len() as f64;
    let mean_x = betas.iter().sum::<f64>() / n;
    let mean_y = lambda_opts.iter().sum::<f64>() / n;
    let sxx: f64 = betas.iter().map(|x| (x - mean_x).powi(2)).sum();
    if sxx == 0.0 {
        return Err(Error::InvalidParameter(
            "line fit needs at least two distinct betas".into(),
        ));
    }
    let sxy: f64 = betas
        .iter()
        .zip(lambda_opts)
        .map(|(x, y)| (x - mean_x) * (y - mean_y))
        .sum();
    let slope = sxy / sxx;
    Ok(LineFit {
        slope,
        intercept: mean_y - slope * mean_x,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn formula_values() {
        assert_eq!(optimal_lambda_formula(0.5), 6);
        assert_eq!(optimal_lambda_formula(0.9), 3);
        assert_eq!(optimal_lambda_formula(0.95), 3);
        // Full reference grid.
        let grid: Vec<u32> = (0..10)
            .map(|i| optimal_lambda_formula(0.5 + 0.05 * i as f64))
            .collect();
        assert_eq!(grid, vec![6, 6, 5, 5, 5, 4, 4, 3, 3, 3]);
    }

    #[test]
    fn exact_line_is_recovered() {
        let betas: Vec<f64> = (0..10).map(|i| 0.5 + 0.05 * i as f64).collect();
        let ys: Vec<f64> = betas.iter().map(|b| 8.91 - 7.0 * b).collect();
        let fit = fit_optimal_line(&betas, &ys).unwrap();
        assert!((fit.slope + 7.0).abs() < 1e-9);
        assert!((fit.intercept - 8.91).abs() < 1e-9);
    }

    #[test]
    fn two_point_line() {
        let fit = fit_optimal_line(&[0.5, 0.9], &[6.0, 3.0]).unwrap();
        assert!((fit.slope + 7.5).abs() < 1e-12);
        assert!((fit.intercept - 9.75).abs() < 1e-12);
    }

    #[test]
    fn constant_optima_give_zero_slope() {
        let fit = fit_optimal_line(&[0.5, 0.7, 0.9], &[4.0, 4.0, 4.0]).unwrap();
        assert_eq!(fit.slope, 0.0);
        assert!((fit.intercept - 4.0).abs() < 1e-12);
    }

    #[test]
    fn degenerate_fits_are_rejected() {
        assert!(fit_optimal_line(&[0.5], &[6.0]).is_err());
        assert!(fit_optimal_line(&[0.5, 0.5], &[6.0, 3.0]).is_err());
        assert!(fit_optimal_line(&[0.5, 0.9], &[6.0]).is_err());
    }

    /// Scaled-down network so unit tests stay fast; the reference-scale grid
    /// runs in the acceptance suite.
    fn small_grid(lambdas: Vec<f64>) -> TuningGrid {
        let base_config = NetworkConfig {
            capacity_kbps: 80_000.0, // W = 104
            ..NetworkConfig::default()
        };
        TuningGrid {
            betas: vec![0.5, 0.7, 0.9],
            lambdas,
            base_config,
            iterations: 2_000,
        }
    }

    #[test]
    fn single_candidate_grid_reduces_to_newreno() {
        let grid = small_grid(vec![1.0]);
        let result = run_aacpt(&grid).unwrap();
        assert_eq!(result.lambda_opt, vec![1.0, 1.0, 1.0]);
        for (i, &beta) in grid.betas.iter().enumerate() {
            let newreno = average_throughput(
                &grid.base_config,
                &crate::config::CcaParams::newreno(beta),
                grid.iterations,
            )
            .unwrap();
            assert_eq!(result.at_matrix[i][0], newreno.normalized_ath);
        }
    }

    #[test]
    fn rows_are_monotone_in_lambda() {
        let grid = small_grid(vec![1.0, 2.0, 4.0, 8.0]);
        let result = run_aacpt(&grid).unwrap();
        for row in &result.at_matrix {
            for pair in row.windows(2) {
                assert!(pair[1] >= pair[0] - 1e-6);
            }
        }
    }

    #[test]
    fn rows_are_independent() {
        let full = small_grid(vec![1.0, 2.0, 4.0]);
        let result = run_aacpt(&full).unwrap();

        // Evaluating each beta alone reproduces its row and optimum.
        for (i, &beta) in full.betas.iter().enumerate() {
            let single = TuningGrid {
                betas: vec![beta],
                ..full.clone()
            };
            let alone = run_aacpt(&single).unwrap();
            assert_eq!(alone.at_matrix[0], result.at_matrix[i]);
            assert_eq!(alone.lambda_opt[0], result.lambda_opt[i]);
        }
    }

    #[test]
    fn selected_cap_sits_near_the_row_maximum() {
        let grid = small_grid(vec![1.0, 3.0, 5.0, 7.0]);
        let result = run_aacpt(&grid).unwrap();
        for (row, &opt) in result.at_matrix.iter().zip(&result.lambda_opt) {
            let idx = grid.lambdas.iter().position(|&l| l == opt).unwrap();
            let row_max = row.iter().copied().fold(f64::NEG_INFINITY, f64::max);
            assert!(row[idx] >= row_max * (1.0 - OPT_RELATIVE_TOLERANCE));
        }
    }

    #[test]
    fn empty_grids_are_rejected() {
        let mut grid = small_grid(vec![]);
        assert!(run_aacpt(&grid).is_err());
        grid = small_grid(vec![1.0]);
        grid.betas.clear();
        assert!(run_aacpt(&grid).is_err());
        grid = small_grid(vec![1.0, 1.0]);
        assert!(run_aacpt(&grid).is_err());
    }
}
