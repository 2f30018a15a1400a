//! Ensemble Monte Carlo driver, renewal-cycle decomposition, and the
//! statistical estimators that confront simulation output with the
//! closed-form laws in [`crate::analytic`].
//!
//! Determinism contract: every estimator here is a pure function of its
//! configuration and seeds. Path `i` uses the sub-seed
//! [`crate::seed::path_seed`]`(master_seed, i)`, per-path results are
//! collected by index, and reductions run in path order, so the output is
//! bitwise identical regardless of worker count.

mod hitting;
mod renewal;
mod stats;

pub use hitting::{hitting_time_oracle_test, HistogramBin, HitDetection, HittingReport};
pub use renewal::{
    collect_cycles, cycle_extreme_tails, cycle_stationary_estimate, detect_renewals, LevelStat,
    Region, RenewalCycle, RenewalDetector, TailGrid, TailReport,
};
pub use stats::{
    fluctuation_scaling, ks_distance, stationary_marginal_test, stationary_path_samples,
    stationary_report_from_samples, strong_law_estimate, EmpiricalDistribution,
    FluctuationReport, StationaryReport, StrongLawReport,
};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{self, GravParams, SystemState, TimeSeries};
use crate::seed::path_seed;

/// Configuration of an independent-path ensemble.
///
/// Paths start from the renewal state `(x, s, v) = (0, 0, -g)` unless
/// `initial` is overridden. Defaults follow the gap's per-step diffusive
/// scale (`gap_tol = 10 sqrt(dt)`), the excursion threshold `a0 = g + 1`,
/// and a burn-in of `100 * max(1/g, 1)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EnsembleConfig {
    pub params: GravParams,
    pub dt: f64,
    pub horizon: f64,
    pub n_paths: usize,
    pub master_seed: u64,
    /// Time discarded before retaining stationary samples.
    pub burn_in: f64,
    /// Time between retained `(V, H)` samples.
    pub sample_stride: f64,
    /// Discrete surrogate for the contact condition `S = X` in renewal
    /// detection.
    pub gap_tol: f64,
    /// Renewal excursion threshold: a cycle closes only after `|V + g|`
    /// has reached `a0`. Must exceed `g`.
    pub a0: f64,
    pub initial: SystemState,
}

impl EnsembleConfig {
    pub fn new(
        params: GravParams,
        dt: f64,
        horizon: f64,
        n_paths: usize,
        master_seed: u64,
    ) -> Self {
        let g = params.g();
        EnsembleConfig {
            params,
            dt,
            horizon,
            n_paths,
            master_seed,
            burn_in: 100.0 * (1.0 / g).max(1.0),
            sample_stride: 1.0,
            gap_tol: 10.0 * dt.sqrt(),
            a0: g + 1.0,
            initial: SystemState {
                t: 0.0,
                x: 0.0,
                s: 0.0,
                v: -g,
                l: 0.0,
                b: 0.0,
            },
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !self.dt.is_finite() || self.dt <= 0.0 {
            return Err(Error::invalid(format!("dt must be positive, got {}", self.dt)));
        }
        if !self.horizon.is_finite() || self.horizon < self.dt {
            return Err(Error::invalid(format!(
                "horizon must be at least one step, got {}",
                self.horizon
            )));
        }
        if self.n_paths == 0 {
            return Err(Error::invalid("ensemble needs at least one path"));
        }
        if !self.burn_in.is_finite() || self.burn_in < 0.0 || self.burn_in >= self.horizon {
            return Err(Error::invalid(format!(
                "burn-in must lie in [0, horizon), got {}",
                self.burn_in
            )));
        }
        if !self.sample_stride.is_finite() || self.sample_stride <= 0.0 {
            return Err(Error::invalid(format!(
                "sample stride must be positive, got {}",
                self.sample_stride
            )));
        }
        if !self.gap_tol.is_finite() || self.gap_tol <= 0.0 {
            return Err(Error::invalid(format!(
                "gap tolerance must be positive, got {}",
                self.gap_tol
            )));
        }
        if !self.a0.is_finite() || self.a0 <= self.params.g() {
            return Err(Error::invalid(format!(
                "excursion threshold a0 must exceed g = {}, got {}",
                self.params.g(),
                self.a0
            )));
        }
        if self.initial.s < self.initial.x {
            return Err(Error::constraint(format!(
                "initial state violates s >= x: {:?}",
                self.initial
            )));
        }
        Ok(())
    }

    /// Recording stride in steps corresponding to `sample_stride`.
    pub fn record_stride(&self) -> usize {
        ((self.sample_stride / self.dt).round() as usize).max(1)
    }

    /// Sub-seed of path `i` (see [`crate::seed::path_seed`]).
    pub fn seed_for_path(&self, i: usize) -> u64 {
        path_seed(self.master_seed, i as u64)
    }
}

/// Simulate `n_paths` independent trajectories, recorded at the sample
/// stride. Output is identical for any worker count: path `i` is a pure
/// function of `(master_seed, i)` and results are collected by index.
pub fn run_ensemble(config: &EnsembleConfig) -> Result<Vec<TimeSeries>> {
    config.validate()?;
    let stride = config.record_stride();
    let records_per_path = model::step_count(config.horizon, config.dt) / stride as u64 + 1;
    let est_bytes = records_per_path
        .saturating_mul(config.n_paths as u64)
        .saturating_mul(std::mem::size_of::<SystemState>() as u64);
    if est_bytes > 8_000_000_000 {
        return Err(Error::PathFailure {
            path: 0,
            reason: format!(
                "ensemble would record ~{est_bytes} bytes; raise sample_stride or lower horizon"
            ),
        });
    }
    (0..config.n_paths)
        .into_par_iter()
        .map(|i| {
            model::simulate_path(
                &config.initial,
                &config.params,
                config.dt,
                config.horizon,
                config.seed_for_path(i),
                stride,
            )
            .map_err(|e| Error::PathFailure {
                path: i,
                reason: e.to_string(),
            })
        })
        .collect()
}
