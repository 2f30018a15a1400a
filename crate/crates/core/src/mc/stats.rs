//! Empirical distributions, Kolmogorov-Smirnov distance, and the
//! stationary / strong-law / fluctuation experiments.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::analytic;
use crate::error::{Error, Result};
use crate::mc::renewal::ols_slope;
use crate::mc::{run_ensemble, EnsembleConfig};
use crate::model::{self, GravParams, NoiseStream, PathIntegrator, TimeSeries};

/// Sorted sample set with right-continuous step CDF.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EmpiricalDistribution {
    sorted: Vec<f64>,
}

impl EmpiricalDistribution {
    pub fn new(mut samples: Vec<f64>) -> Result<Self> {
        if samples.is_empty() {
            return Err(Error::insufficient("empirical distribution needs samples"));
        }
        if samples.iter().any(|x| !x.is_finite()) {
            return Err(Error::invalid("samples must be finite"));
        }
        samples.sort_unstable_by(|a, b| a.partial_cmp(b).expect("finite samples"));
        Ok(EmpiricalDistribution { sorted: samples })
    }

    pub fn n(&self) -> usize {
        self.sorted.len()
    }

    pub fn samples(&self) -> &[f64] {
        &self.sorted
    }

    /// Right-continuous empirical CDF: fraction of samples `<= x`.
    pub fn cdf(&self, x: f64) -> f64 {
        let k = self.sorted.partition_point(|&s| s <= x);
        k as f64 / self.sorted.len() as f64
    }

    pub fn mean(&self) -> f64 {
        self.sorted.iter().sum::<f64>() / self.sorted.len() as f64
    }

    /// Unbiased sample variance (zero for a single sample).
    pub fn variance(&self) -> f64 {
        let n = self.sorted.len();
        if n < 2 {
            return 0.0;
        }
        let m = self.mean();
        self.sorted.iter().map(|x| (x - m) * (x - m)).sum::<f64>() / (n - 1) as f64
    }
}

/// Kolmogorov-Smirnov distance between an empirical distribution and a
/// reference CDF: `sup_i max(|i/n - F(x_(i))|, |(i-1)/n - F(x_(i))|)`.
/// The reference must be non-decreasing on the sample points.
pub fn ks_distance<F: Fn(f64) -> f64>(emp: &EmpiricalDistribution, cdf: F) -> Result<f64> {
    let n = emp.n() as f64;
    let mut prev = f64::NEG_INFINITY;
    let mut d = 0.0f64;
    for (i, &x) in emp.samples().iter().enumerate() {
        let fx = cdf(x);
        if fx < prev {
            return Err(Error::NonMonotoneCdf {
                index: i,
                x,
                fx,
                prev,
            });
        }
        prev = fx;
        let hi = (i as f64 + 1.0) / n - fx;
        let lo = fx - i as f64 / n;
        d = d.max(hi.abs()).max(lo.abs());
    }
    Ok(d)
}

/// Pooled stationary-marginal comparison against the product law.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StationaryReport {
    pub n_samples: usize,
    pub n_paths: usize,
    /// KS distance of pooled velocity samples to the Gaussian marginal.
    pub ks_v: f64,
    /// KS distance of pooled gap samples to the exponential marginal.
    pub ks_h: f64,
    pub mean_v: f64,
    pub var_v: f64,
    pub mean_h: f64,
    /// Standard errors of the means across paths (paths as batches, which
    /// respects within-path serial correlation).
    pub se_mean_v: f64,
    pub se_mean_h: f64,
}

/// Per-path `(V, H)` samples retained after burn-in at the sample stride.
pub fn stationary_path_samples(config: &EnsembleConfig) -> Result<Vec<Vec<(f64, f64)>>> {
    config.validate()?;
    if config.horizon - config.burn_in < 10.0 * config.sample_stride {
        return Err(Error::insufficient(format!(
            "need horizon - burn_in >= 10 sample strides, got {} < {}",
            config.horizon - config.burn_in,
            10.0 * config.sample_stride
        )));
    }
    let ensemble = run_ensemble(config)?;
    Ok(ensemble
        .iter()
        .map(|series| {
            series
                .states
                .iter()
                .filter(|st| st.t > config.burn_in)
                .map(|st| (st.v, st.gap()))
                .collect()
        })
        .collect())
}

/// Pool `(V, H)` samples after burn-in across all paths and compare the
/// marginals to the stationary law by KS distance and moments.
pub fn stationary_marginal_test(config: &EnsembleConfig) -> Result<StationaryReport> {
    let path_samples = stationary_path_samples(config)?;
    stationary_report_from_samples(&path_samples, config)
}

/// Report from already-pooled per-path samples (shared with exporters that
/// also need the raw samples).
pub fn stationary_report_from_samples(
    path_samples: &[Vec<(f64, f64)>],
    config: &EnsembleConfig,
) -> Result<StationaryReport> {
    let mut v_samples = Vec::new();
    let mut h_samples = Vec::new();
    let mut path_mean_v = Vec::with_capacity(path_samples.len());
    let mut path_mean_h = Vec::with_capacity(path_samples.len());
    for samples in path_samples {
        let mut sum_v = 0.0;
        let mut sum_h = 0.0;
        for &(v, h) in samples {
            v_samples.push(v);
            h_samples.push(h);
            sum_v += v;
            sum_h += h;
        }
        if !samples.is_empty() {
            path_mean_v.push(sum_v / samples.len() as f64);
            path_mean_h.push(sum_h / samples.len() as f64);
        }
    }
    if v_samples.is_empty() {
        return Err(Error::insufficient("no samples after burn-in"));
    }

    let emp_v = EmpiricalDistribution::new(v_samples)?;
    let emp_h = EmpiricalDistribution::new(h_samples)?;
    let params = config.params;
    let ks_v = ks_distance(&emp_v, |v| analytic::stationary_v_cdf(v, &params))?;
    let ks_h = ks_distance(&emp_h, |h| {
        analytic::stationary_gap_cdf(h.max(0.0), &params).expect("non-negative gap")
    })?;

    Ok(StationaryReport {
        n_samples: emp_v.n(),
        n_paths: path_samples.len(),
        ks_v,
        ks_h,
        mean_v: emp_v.mean(),
        var_v: emp_v.variance(),
        mean_h: emp_h.mean(),
        se_mean_v: batch_se(&path_mean_v),
        se_mean_h: batch_se(&path_mean_h),
    })
}

/// Standard error of the grand mean from per-batch means.
fn batch_se(batch_means: &[f64]) -> f64 {
    let n = batch_means.len();
    if n < 2 {
        return f64::NAN;
    }
    let m = batch_means.iter().sum::<f64>() / n as f64;
    let var = batch_means.iter().map(|x| (x - m) * (x - m)).sum::<f64>() / (n - 1) as f64;
    (var / n as f64).sqrt()
}

/// Long-run velocity estimates and the drift-removed residual processes.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StrongLawReport {
    /// `X_T / T` at the terminal recorded time.
    pub x_over_t: f64,
    /// `S_T / T` at the terminal recorded time.
    pub s_over_t: f64,
    /// Recorded times.
    pub times: Vec<f64>,
    /// `X_t - (B_t - g t)` at the recorded times; identically equal to
    /// `(X_0 + V_0) - V_t`.
    pub residual_x: Vec<f64>,
    /// `S_t - (B_t - g t)` at the recorded times; identically equal to
    /// `(X_0 + V_0) - V_t + H_t`.
    pub residual_s: Vec<f64>,
}

/// Terminal-time ratios `X_T/T`, `S_T/T` and the residuals of `X` and `S`
/// against Brownian motion with drift `-g`.
pub fn strong_law_estimate(series: &TimeSeries, params: &GravParams) -> Result<StrongLawReport> {
    let last = series.last();
    if last.t < 1.0 {
        return Err(Error::insufficient(format!(
            "strong-law estimate needs horizon >= 1, got {}",
            last.t
        )));
    }
    let g = params.g();
    let mut times = Vec::with_capacity(series.states.len());
    let mut residual_x = Vec::with_capacity(series.states.len());
    let mut residual_s = Vec::with_capacity(series.states.len());
    for st in &series.states {
        times.push(st.t);
        let drift_part = st.b - g * st.t;
        residual_x.push(st.x - drift_part);
        residual_s.push(st.s - drift_part);
    }
    Ok(StrongLawReport {
        x_over_t: last.x / last.t,
        s_over_t: last.s / last.t,
        times,
        residual_x,
        residual_s,
    })
}

/// Growth of the running extremes of `V` and `H` across an ensemble.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FluctuationReport {
    pub checkpoints: Vec<f64>,
    /// Ensemble medians of `max_{u <= t} V_u` at the checkpoints.
    pub median_max_v: Vec<f64>,
    /// Ensemble medians of `max_{u <= t} H_u` at the checkpoints.
    pub median_max_h: Vec<f64>,
    /// OLS slope of the velocity medians on `sqrt(log t)`.
    pub v_slope_vs_sqrt_log_t: f64,
    /// OLS slope of the gap medians on `log t`; the stationary gap scale
    /// makes the expected value `1/(2g)`.
    pub h_slope_vs_log_t: f64,
}

/// Running maxima of `V` and `H` along one path at the checkpoint times.
/// `noise_seed = None` runs the zero-noise dynamics.
pub(crate) fn running_maxima_profile(
    config: &EnsembleConfig,
    checkpoints: &[f64],
    noise_seed: Option<u64>,
) -> Result<(Vec<f64>, Vec<f64>)> {
    let mut integ = PathIntegrator::new(&config.initial, &config.params, config.dt)?;
    let mut noise = noise_seed.map(|s| NoiseStream::new(s, config.dt));
    let checkpoint_steps: Vec<u64> = checkpoints
        .iter()
        .map(|&t| model::step_count(t, config.dt))
        .collect();
    let n_steps = *checkpoint_steps.last().expect("validated non-empty");
    let mut max_v = integ.velocity();
    let mut max_h = integ.gap();
    let mut out_v = Vec::with_capacity(checkpoints.len());
    let mut out_h = Vec::with_capacity(checkpoints.len());
    let mut next = 0usize;
    for i in 1..=n_steps {
        match noise.as_mut() {
            Some(n) => {
                integ.advance_exact(n);
            }
            None => {
                integ.advance(0.0);
            }
        }
        let v = integ.velocity();
        let h = integ.gap();
        if v > max_v {
            max_v = v;
        }
        if h > max_h {
            max_h = h;
        }
        while next < checkpoint_steps.len() && checkpoint_steps[next] == i {
            out_v.push(max_v);
            out_h.push(max_h);
            next += 1;
        }
    }
    Ok((out_v, out_h))
}

fn median(values: &mut [f64]) -> f64 {
    values.sort_unstable_by(|a, b| a.partial_cmp(b).expect("finite"));
    let n = values.len();
    if n % 2 == 1 {
        values[n / 2]
    } else {
        0.5 * (values[n / 2 - 1] + values[n / 2])
    }
}

/// Per-path running maxima of `V` and `H` up to each checkpoint; ensemble
/// medians regressed on `sqrt(log t)` (velocity) and `log t` (gap).
pub fn fluctuation_scaling(
    config: &EnsembleConfig,
    checkpoints: &[f64],
) -> Result<FluctuationReport> {
    config.validate()?;
    if checkpoints.len() < 2 {
        return Err(Error::invalid(
            "fluctuation scaling needs at least two checkpoints",
        ));
    }
    let mut prev = 0.0;
    for &t in checkpoints {
        if !t.is_finite() || t <= prev {
            return Err(Error::invalid(
                "checkpoints must be positive and strictly increasing",
            ));
        }
        prev = t;
    }

    let profiles: Vec<(Vec<f64>, Vec<f64>)> = (0..config.n_paths)
        .into_par_iter()
        .map(|i| {
            running_maxima_profile(config, checkpoints, Some(config.seed_for_path(i))).map_err(
                |e| Error::PathFailure {
                    path: i,
                    reason: e.to_string(),
                },
            )
        })
        .collect::<Result<_>>()?;

    let mut median_max_v = Vec::with_capacity(checkpoints.len());
    let mut median_max_h = Vec::with_capacity(checkpoints.len());
    for k in 0..checkpoints.len() {
        let mut vs: Vec<f64> = profiles.iter().map(|p| p.0[k]).collect();
        let mut hs: Vec<f64> = profiles.iter().map(|p| p.1[k]).collect();
        median_max_v.push(median(&mut vs));
        median_max_h.push(median(&mut hs));
    }

    let v_pts: Vec<(f64, f64)> = checkpoints
        .iter()
        .zip(&median_max_v)
        .map(|(&t, &m)| (t.ln().sqrt(), m))
        .collect();
    let h_pts: Vec<(f64, f64)> = checkpoints
        .iter()
        .zip(&median_max_h)
        .map(|(&t, &m)| (t.ln(), m))
        .collect();
    let v_slope = ols_slope(&v_pts)
        .ok_or_else(|| Error::invalid("degenerate checkpoint spacing"))?;
    let h_slope = ols_slope(&h_pts)
        .ok_or_else(|| Error::invalid("degenerate checkpoint spacing"))?;

    Ok(FluctuationReport {
        checkpoints: checkpoints.to_vec(),
        median_max_v,
        median_max_h,
        v_slope_vs_sqrt_log_t: v_slope,
        h_slope_vs_log_t: h_slope,
    })
}
