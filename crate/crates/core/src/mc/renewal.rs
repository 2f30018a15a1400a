//! Renewal-cycle decomposition of a trajectory.
//!
//! A renewal occurs when the velocity returns to `-g` with the particles in
//! contact, after the excursion `|V + g|` has reached the threshold `a0`.
//! On the grid, contact is `gap <= gap_tol` and the return is an up-crossing
//! of `-g`: an up-crossing forces contact in continuous time, so the gap
//! guard only rejects crossings that are artifacts of discretization.
//! Cycles between consecutive renewals are independent and identically
//! distributed, which is what makes per-cycle statistics meaningful.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::mc::EnsembleConfig;
use crate::model::{self, GravParams, NoiseStream, PathIntegrator, TimeSeries};

/// One regeneration cycle `[start, end)` with its extremes and, optionally,
/// strided `(v, h)` samples for time-average estimates.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RenewalCycle {
    pub start: f64,
    pub end: f64,
    pub duration: f64,
    pub sup_v: f64,
    pub inf_v: f64,
    pub sup_h: f64,
    /// True when the cycle carries samples usable for time-average
    /// (occupation-ratio) estimates.
    pub time_integral_indicator_capable: bool,
    pub samples: Vec<(f64, f64)>,
}

/// Incremental renewal detector; feed it every recorded `(t, v, h)` in
/// order. Used both by [`detect_renewals`] (on a recorded series) and by
/// the streaming cycle collector (on every integrator step).
#[derive(Debug, Clone)]
pub struct RenewalDetector {
    neg_g: f64,
    gap_tol: f64,
    a0: f64,
    /// Collect every k-th pushed sample into the open cycle; `0` disables
    /// sample collection.
    sample_every: usize,
    v_start_tol: f64,
    state: Phase,
    prev_v: Option<f64>,
    open: Option<OpenCycle>,
    cycles: Vec<RenewalCycle>,
    pushed: u64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
enum Phase {
    /// Before the first renewal point.
    Seek,
    /// Inside a cycle, excursion threshold not yet reached.
    AwaitExcursion,
    /// Inside a cycle, excursion seen; next qualified up-crossing closes it.
    AwaitReturn,
}

#[derive(Debug, Clone)]
struct OpenCycle {
    start: f64,
    sup_v: f64,
    inf_v: f64,
    sup_h: f64,
    samples: Vec<(f64, f64)>,
}

impl RenewalDetector {
    pub fn new(params: &GravParams, gap_tol: f64, a0: f64, dt: f64, sample_every: usize) -> Self {
        RenewalDetector {
            neg_g: -params.g(),
            gap_tol,
            a0,
            sample_every,
            // The first pushed sample may itself be the renewal state; the
            // endpoint drifts by at most g*dt per step.
            v_start_tol: params.g() * dt,
            state: Phase::Seek,
            prev_v: None,
            open: None,
            cycles: Vec::new(),
            pushed: 0,
        }
    }

    /// True at a grid point that qualifies as a renewal: an up-crossing of
    /// `-g` with the particles in contact (up to `gap_tol`).
    #[inline]
    fn is_return(&self, v: f64, h: f64) -> bool {
        match self.prev_v {
            Some(pv) => pv < self.neg_g && v >= self.neg_g && h <= self.gap_tol,
            None => false,
        }
    }

    #[inline]
    pub fn push(&mut self, t: f64, v: f64, h: f64) {
        let excess = v - self.neg_g;
        match self.state {
            Phase::Seek => {
                let starts_here = if self.pushed == 0 {
                    excess.abs() <= self.v_start_tol && h <= self.gap_tol
                } else {
                    self.is_return(v, h)
                };
                if starts_here {
                    self.open = Some(OpenCycle {
                        start: t,
                        sup_v: v,
                        inf_v: v,
                        sup_h: h,
                        samples: Vec::new(),
                    });
                    self.state = Phase::AwaitExcursion;
                    self.record_sample(v, h);
                }
            }
            Phase::AwaitExcursion => {
                self.track(v, h);
                if excess.abs() >= self.a0 {
                    self.state = Phase::AwaitReturn;
                }
            }
            Phase::AwaitReturn => {
                if self.is_return(v, h) {
                    let open = self.open.take().expect("open cycle in AwaitReturn");
                    self.cycles.push(RenewalCycle {
                        start: open.start,
                        end: t,
                        duration: t - open.start,
                        sup_v: open.sup_v,
                        inf_v: open.inf_v,
                        sup_h: open.sup_h,
                        time_integral_indicator_capable: !open.samples.is_empty(),
                        samples: open.samples,
                    });
                    self.open = Some(OpenCycle {
                        start: t,
                        sup_v: v,
                        inf_v: v,
                        sup_h: h,
                        samples: Vec::new(),
                    });
                    self.state = Phase::AwaitExcursion;
                    self.record_sample(v, h);
                } else {
                    self.track(v, h);
                }
            }
        }
        self.prev_v = Some(v);
        self.pushed += 1;
    }

    #[inline]
    fn track(&mut self, v: f64, h: f64) {
        self.record_sample(v, h);
        if let Some(open) = self.open.as_mut() {
            if v > open.sup_v {
                open.sup_v = v;
            }
            if v < open.inf_v {
                open.inf_v = v;
            }
            if h > open.sup_h {
                open.sup_h = h;
            }
        }
    }

    #[inline]
    fn record_sample(&mut self, v: f64, h: f64) {
        if self.sample_every == 0 {
            return;
        }
        if self.pushed % self.sample_every as u64 == 0 {
            if let Some(open) = self.open.as_mut() {
                open.samples.push((v, h));
            }
        }
    }

    /// Completed cycles; the trailing incomplete cycle is discarded.
    pub fn finish(self) -> Vec<RenewalCycle> {
        self.cycles
    }
}

/// Decompose a recorded series into renewal cycles. Returns an empty list
/// when the series never completes a cycle (for example the zero-noise
/// trajectory started at the renewal state, whose velocity never leaves
/// `-g` and so never reaches the excursion threshold).
pub fn detect_renewals(
    series: &TimeSeries,
    gap_tol: f64,
    a0: f64,
    params: &GravParams,
) -> Vec<RenewalCycle> {
    let mut det = RenewalDetector::new(params, gap_tol, a0, series.dt, 1);
    for st in &series.states {
        det.push(st.t, st.v, st.gap());
    }
    det.finish()
}

/// Stream `config.n_paths` trajectories at full step resolution and collect
/// their renewal cycles (concatenated in path order). `sample_every`
/// controls per-cycle sample retention in steps (`0` keeps none, which is
/// the cheap mode for extreme-value statistics).
pub fn collect_cycles(config: &EnsembleConfig, sample_every: usize) -> Result<Vec<RenewalCycle>> {
    config.validate()?;
    let n_steps = model::step_count(config.horizon, config.dt);
    let per_path: Vec<Vec<RenewalCycle>> = (0..config.n_paths)
        .into_par_iter()
        .map(|i| -> Result<Vec<RenewalCycle>> {
            let mut integ = PathIntegrator::new(&config.initial, &config.params, config.dt)
                .map_err(|e| Error::PathFailure {
                    path: i,
                    reason: e.to_string(),
                })?;
            let mut noise = NoiseStream::new(config.seed_for_path(i), config.dt);
            let mut det = RenewalDetector::new(
                &config.params,
                config.gap_tol,
                config.a0,
                config.dt,
                sample_every,
            );
            det.push(integ.time(), integ.velocity(), integ.gap());
            for _ in 0..n_steps {
                integ.advance_exact(&mut noise);
                det.push(integ.time(), integ.velocity(), integ.gap());
            }
            Ok(det.finish())
        })
        .collect::<Result<_>>()?;
    Ok(per_path.into_iter().flatten().collect())
}

/// Axis-aligned region in the `(v, h)` plane with inclusive bounds.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Region {
    pub v_min: f64,
    pub v_max: f64,
    pub h_min: f64,
    pub h_max: f64,
}

impl Region {
    #[inline]
    pub fn contains(&self, v: f64, h: f64) -> bool {
        v >= self.v_min && v <= self.v_max && h >= self.h_min && h <= self.h_max
    }
}

/// Occupation-ratio estimator of the stationary probability of `region`:
/// the fraction of cycle time spent in the region, over complete cycles.
/// Each cycle weighs its samples by `duration / n_samples`, so the whole
/// half-plane gets exactly 1. Consistent because time averages over
/// regeneration cycles converge to the stationary law.
pub fn cycle_stationary_estimate(cycles: &[RenewalCycle], region: &Region) -> Result<f64> {
    let mut time_in = 0.0;
    let mut time_total = 0.0;
    for c in cycles {
        if c.samples.is_empty() {
            continue;
        }
        let n_in = c.samples.iter().filter(|(v, h)| region.contains(*v, *h)).count();
        time_in += c.duration * n_in as f64 / c.samples.len() as f64;
        time_total += c.duration;
    }
    if time_total == 0.0 {
        return Err(Error::insufficient(
            "need at least one complete cycle carrying samples",
        ));
    }
    Ok(time_in / time_total)
}

/// Level grid for cycle-extreme tail estimation: velocity offsets `a`
/// (levels `-g + a` and `-g - a`) and absolute gap levels `r`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TailGrid {
    pub v_offsets: Vec<f64>,
    pub gap_levels: Vec<f64>,
}

/// Empirical exceedance at one level.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LevelStat {
    pub level: f64,
    pub exceedances: usize,
    pub probability: f64,
}

/// Cycle-extreme tail report. The velocity tails decay like
/// `exp(-a^2 + O(a))`, so their log-probabilities are regressed on `a^2`
/// (expected slope -1); the gap tail decays like `exp(-2 g r)`, regressed
/// on `r` (expected slope `-2g`). Levels with fewer than
/// [`MIN_TAIL_EVENTS`] exceedances are excluded from the fits.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TailReport {
    pub n_cycles: usize,
    pub sup_v: Vec<LevelStat>,
    pub inf_v: Vec<LevelStat>,
    pub sup_h: Vec<LevelStat>,
    pub sup_v_slope_vs_a2: Option<f64>,
    pub inf_v_slope_vs_a2: Option<f64>,
    pub sup_h_slope_vs_r: Option<f64>,
}

/// Slope fits exclude levels with fewer exceedances than this, to avoid
/// fitting pure noise in the extreme tail.
pub const MIN_TAIL_EVENTS: usize = 20;

/// Minimum number of cycles for tail-slope estimation.
pub const MIN_TAIL_CYCLES: usize = 1000;

/// Per-level exceedance fractions of the cycle extremes, with least-squares
/// slopes of log-probability against `a^2` (velocity) and `r` (gap).
pub fn cycle_extreme_tails(
    cycles: &[RenewalCycle],
    grid: &TailGrid,
    params: &GravParams,
) -> Result<TailReport> {
    if cycles.len() < MIN_TAIL_CYCLES {
        return Err(Error::insufficient(format!(
            "tail slopes need at least {MIN_TAIL_CYCLES} cycles, got {}",
            cycles.len()
        )));
    }
    if grid.v_offsets.is_empty() && grid.gap_levels.is_empty() {
        return Err(Error::invalid("empty level grid"));
    }
    let g = params.g();
    let n = cycles.len() as f64;

    let count = |pred: &dyn Fn(&RenewalCycle) -> bool| cycles.iter().filter(|c| pred(c)).count();

    let sup_v: Vec<LevelStat> = grid
        .v_offsets
        .iter()
        .map(|&a| {
            let k = count(&|c| c.sup_v >= -g + a);
            LevelStat {
                level: a,
                exceedances: k,
                probability: k as f64 / n,
            }
        })
        .collect();
    let inf_v: Vec<LevelStat> = grid
        .v_offsets
        .iter()
        .map(|&a| {
            let k = count(&|c| c.inf_v <= -g - a);
            LevelStat {
                level: a,
                exceedances: k,
                probability: k as f64 / n,
            }
        })
        .collect();
    let sup_h: Vec<LevelStat> = grid
        .gap_levels
        .iter()
        .map(|&r| {
            let k = count(&|c| c.sup_h >= r);
            LevelStat {
                level: r,
                exceedances: k,
                probability: k as f64 / n,
            }
        })
        .collect();

    let fit = |stats: &[LevelStat], x_of: &dyn Fn(f64) -> f64| -> Option<f64> {
        let pts: Vec<(f64, f64)> = stats
            .iter()
            .filter(|s| s.exceedances >= MIN_TAIL_EVENTS)
            .map(|s| (x_of(s.level), s.probability.ln()))
            .collect();
        ols_slope(&pts)
    };

    Ok(TailReport {
        n_cycles: cycles.len(),
        sup_v_slope_vs_a2: fit(&sup_v, &|a| a * a),
        inf_v_slope_vs_a2: fit(&inf_v, &|a| a * a),
        sup_h_slope_vs_r: fit(&sup_h, &|r| r),
        sup_v,
        inf_v,
        sup_h,
    })
}

/// Ordinary least squares slope of `y` on `x`; `None` with fewer than two
/// distinct abscissae.
pub(crate) fn ols_slope(points: &[(f64, f64)]) -> Option<f64> {
    if points.len() < 2 {
        return None;
    }
    let n = points.len() as f64;
    let mean_x = points.iter().map(|p| p.0).sum::<f64>() / n;
    let mean_y = points.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx: f64 = points.iter().map(|p| (p.0 - mean_x).powi(2)).sum();
    if sxx == 0.0 {
        return None;
    }
    let sxy: f64 = points
        .iter()
        .map(|p| (p.0 - mean_x) * (p.1 - mean_y))
        .sum();
    Some(sxy / sxx)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{new_state, simulate_path};

    fn params(g: f64) -> GravParams {
        GravParams::new(g).unwrap()
    }

    /// Independent brute-force re-implementation of the detector contract,
    /// used as an oracle: scan the recorded grid directly.
    fn brute_force_cycles(
        series: &TimeSeries,
        gap_tol: f64,
        a0: f64,
        g: f64,
    ) -> Vec<(f64, f64)> {
        let pts: Vec<(f64, f64, f64)> = series
            .states
            .iter()
            .map(|s| (s.t, s.v, s.gap()))
            .collect();
        let mut bounds = Vec::new();
        let mut start: Option<usize> = None;
        if !pts.is_empty() && (pts[0].1 + g).abs() <= g * series.dt && pts[0].2 <= gap_tol {
            start = Some(0);
        }
        let mut i = match start {
            Some(_) => 1,
            None => {
                let mut first = None;
                for k in 1..pts.len() {
                    if pts[k - 1].1 < -g && pts[k].1 >= -g && pts[k].2 <= gap_tol {
                        first = Some(k);
                        break;
                    }
                }
                match first {
                    Some(k) => {
                        start = Some(k);
                        k + 1
                    }
                    None => pts.len(),
                }
            }
        };
        let mut excursion_seen = false;
        while i < pts.len() {
            if !excursion_seen {
                if (pts[i].1 + g).abs() >= a0 {
                    excursion_seen = true;
                }
            } else if pts[i - 1].1 < -g && pts[i].1 >= -g && pts[i].2 <= gap_tol {
                bounds.push((pts[start.unwrap()].0, pts[i].0));
                start = Some(i);
                excursion_seen = false;
            }
            i += 1;
        }
        bounds
    }

    #[test]
    fn zero_noise_renewal_start_has_no_cycles() {
        // V stays at -g, the excursion threshold is never reached.
        let g = params(1.0);
        let st = new_state(0.0, 0.0, -1.0).unwrap();
        let mut integ = PathIntegrator::new(&st, &g, 1e-3).unwrap();
        let mut det = RenewalDetector::new(&g, 0.05, 2.0, 1e-3, 1);
        det.push(integ.time(), integ.velocity(), integ.gap());
        for _ in 0..10_000 {
            integ.advance(0.0);
            det.push(integ.time(), integ.velocity(), integ.gap());
        }
        assert!(det.finish().is_empty());
    }

    #[test]
    fn trailing_incomplete_cycle_is_discarded() {
        // A short series that starts at the renewal state and leaves it
        // never completes a cycle.
        let g = params(1.0);
        let st = new_state(0.0, 0.0, -1.0).unwrap();
        let series = simulate_path(&st, &g, 1e-3, 0.5, 3, 1).unwrap();
        assert!(detect_renewals(&series, 10.0 * (1e-3f64).sqrt(), 1.2, &g).is_empty());
    }

    #[test]
    fn detector_matches_brute_force_scan() {
        let g = params(1.0);
        let st = new_state(0.0, 0.0, -1.0).unwrap();
        let dt = 2e-3;
        let series = simulate_path(&st, &g, dt, 2000.0, 77, 1).unwrap();
        let gap_tol = 10.0 * dt.sqrt();
        let a0 = 1.2;
        let cycles = detect_renewals(&series, gap_tol, a0, &g);
        let oracle = brute_force_cycles(&series, gap_tol, a0, g.g());
        assert!(!cycles.is_empty(), "expected cycles in a 2000-unit run");
        assert_eq!(cycles.len(), oracle.len());
        for (c, (s, e)) in cycles.iter().zip(oracle.iter()) {
            assert_eq!(c.start, *s);
            assert_eq!(c.end, *e);
            assert!((c.duration - (e - s)).abs() < 1e-12);
        }
    }

    #[test]
    fn cycles_partition_the_detected_interval() {
        let g = params(1.0);
        let st = new_state(0.0, 0.0, -1.0).unwrap();
        let dt = 2e-3;
        let series = simulate_path(&st, &g, dt, 1500.0, 4, 1).unwrap();
        let cycles = detect_renewals(&series, 10.0 * dt.sqrt(), 1.2, &g);
        assert!(cycles.len() >= 2);
        for w in cycles.windows(2) {
            assert_eq!(w[0].end, w[1].start);
        }
        // Durations are positive; extremes bracket -g; endpoints start at
        // the crossing point, whose overshoot is bounded by the local-time
        // kick of one step (order sqrt(dt)), not by g*dt.
        let max_jump = 6.0 * dt.sqrt();
        for c in &cycles {
            assert!(c.duration > 0.0);
            assert!(c.sup_v >= -g.g() && c.inf_v <= -g.g());
            assert!(c.sup_h >= 0.0);
            assert!(c.sup_v >= -g.g() + 1.2 - 1e-12 || c.inf_v <= -g.g() - 1.2 + 1e-12);
        }
        // First cycle starts at t = 0 (renewal initial state).
        assert_eq!(cycles[0].start, 0.0);
        let _ = max_jump;
    }

    #[test]
    fn occupation_estimator_trivial_regions() {
        let g = params(1.0);
        let st = new_state(0.0, 0.0, -1.0).unwrap();
        let dt = 2e-3;
        let series = simulate_path(&st, &g, dt, 1500.0, 9, 1).unwrap();
        let cycles = detect_renewals(&series, 10.0 * dt.sqrt(), 1.2, &g);
        assert!(!cycles.is_empty());
        let everything = Region {
            v_min: f64::NEG_INFINITY,
            v_max: f64::INFINITY,
            h_min: 0.0,
            h_max: f64::INFINITY,
        };
        assert_eq!(cycle_stationary_estimate(&cycles, &everything).unwrap(), 1.0);
        let empty = Region {
            v_min: 1.0,
            v_max: 0.0,
            h_min: 0.0,
            h_max: 1.0,
        };
        assert_eq!(cycle_stationary_estimate(&cycles, &empty).unwrap(), 0.0);
        assert!(cycle_stationary_estimate(&[], &everything).is_err());
    }

    #[test]
    fn occupation_estimator_is_monotone_and_additive() {
        let g = params(1.0);
        let st = new_state(0.0, 0.0, -1.0).unwrap();
        let dt = 2e-3;
        let series = simulate_path(&st, &g, dt, 1500.0, 10, 1).unwrap();
        let cycles = detect_renewals(&series, 10.0 * dt.sqrt(), 1.2, &g);
        let below = Region {
            v_min: f64::NEG_INFINITY,
            v_max: -1.0,
            h_min: 0.0,
            h_max: f64::INFINITY,
        };
        let above = Region {
            v_min: -1.0,
            v_max: f64::INFINITY,
            h_min: 0.0,
            h_max: f64::INFINITY,
        };
        let all = Region {
            v_min: f64::NEG_INFINITY,
            v_max: f64::INFINITY,
            h_min: 0.0,
            h_max: f64::INFINITY,
        };
        let p_below = cycle_stationary_estimate(&cycles, &below).unwrap();
        let p_above = cycle_stationary_estimate(&cycles, &above).unwrap();
        let p_all = cycle_stationary_estimate(&cycles, &all).unwrap();
        assert!(p_below <= p_all && p_above <= p_all);
        // The shared boundary v = -1 may be double counted by at most the
        // samples sitting exactly on it.
        assert!(p_below + p_above >= p_all - 1e-12);
    }

    #[test]
    fn tail_report_requires_enough_cycles() {
        let grid = TailGrid {
            v_offsets: vec![1.0],
            gap_levels: vec![1.0],
        };
        let g = params(1.0);
        assert!(cycle_extreme_tails(&[], &grid, &g).is_err());
    }

    #[test]
    fn tail_slopes_recover_synthetic_rates() {
        // Synthetic cycles with known tails: sup_v - (-g) ~ sqrt(Exp(1))
        // (so P(sup_v >= -g + a) = exp(-a^2)) and sup_h ~ Exp(2)
        // (so P(sup_h >= r) = exp(-2r)).
        use rand::Rng;
        use rand::SeedableRng;
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(99);
        let g = params(1.0);
        let cycles: Vec<RenewalCycle> = (0..600_000)
            .map(|_| {
                let u: f64 = rng.gen::<f64>().max(1e-300);
                let w: f64 = rng.gen::<f64>().max(1e-300);
                let q: f64 = rng.gen::<f64>().max(1e-300);
                let a = (-u.ln()).sqrt();
                let b = (-w.ln()).sqrt();
                let r = -q.ln() / 2.0;
                RenewalCycle {
                    start: 0.0,
                    end: 1.0,
                    duration: 1.0,
                    sup_v: -1.0 + a,
                    inf_v: -1.0 - b,
                    sup_h: r,
                    time_integral_indicator_capable: false,
                    samples: Vec::new(),
                }
            })
            .collect();
        let grid = TailGrid {
            v_offsets: vec![1.0, 1.5, 2.0, 2.5, 3.0],
            gap_levels: vec![1.0, 1.5, 2.0, 2.5, 3.0],
        };
        let report = cycle_extreme_tails(&cycles, &grid, &g).unwrap();
        let up = report.sup_v_slope_vs_a2.unwrap();
        let down = report.inf_v_slope_vs_a2.unwrap();
        let gap = report.sup_h_slope_vs_r.unwrap();
        assert!((up + 1.0).abs() < 0.05, "up slope {up}");
        assert!((down + 1.0).abs() < 0.05, "down slope {down}");
        assert!((gap + 2.0).abs() < 0.1, "gap slope {gap}");
    }

    #[test]
    fn level_zero_probability_is_a_sanity_bound() {
        let g = params(1.0);
        let st = new_state(0.0, 0.0, -1.0).unwrap();
        let dt = 2e-3;
        let series = simulate_path(&st, &g, dt, 4000.0, 21, 1).unwrap();
        let cycles = detect_renewals(&series, 10.0 * dt.sqrt(), 1.2, &g);
        assert!(cycles.len() >= MIN_TAIL_CYCLES / 10);
        let frac = cycles.iter().filter(|c| c.sup_v >= -1.0).count() as f64 / cycles.len() as f64;
        assert!(frac <= 1.0 && frac > 0.0);
    }
}
