//! Closed-form reference laws used as oracles by the statistical tests:
//! the stationary density of `(V, H)` and its marginals, Brownian supremum
//! and hitting-time laws, and the linear-boundary Skorokhod functional.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::GravParams;

const SQRT_PI: f64 = 1.772453850905516_f64;

/// Standard normal CDF via the complementary error function
/// (relative accuracy well below 1e-12 over the tested range).
#[inline]
pub fn normal_cdf(x: f64) -> f64 {
    0.5 * libm::erfc(-x / std::f64::consts::SQRT_2)
}

/// Parameters of the stationary law of `(V, H)`: the velocity marginal is
/// Gaussian with mean `-g` and variance `1/2` (independent of `g`), the gap
/// marginal is exponential with rate `2g`, and the two are independent.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StationaryLaw {
    pub g: f64,
    pub v_mean: f64,
    pub v_variance: f64,
    pub gap_rate: f64,
}

impl StationaryLaw {
    pub fn new(params: &GravParams) -> Self {
        StationaryLaw {
            g: params.g(),
            v_mean: -params.g(),
            v_variance: 0.5,
            gap_rate: 2.0 * params.g(),
        }
    }

    /// Mean gap `1/(2g)`.
    pub fn gap_mean(&self) -> f64 {
        1.0 / self.gap_rate
    }
}

/// Stationary density `(2g/sqrt(pi)) exp(-2gh) exp(-(v+g)^2)` on
/// `R x [0, inf)`.
pub fn stationary_density(v: f64, h: f64, params: &GravParams) -> Result<f64> {
    if !h.is_finite() || h < 0.0 {
        return Err(Error::invalid(format!("gap must be non-negative, got {h}")));
    }
    let g = params.g();
    let e = v + g;
    Ok(2.0 * g / SQRT_PI * (-2.0 * g * h).exp() * (-e * e).exp())
}

/// CDF of the stationary velocity marginal: `Phi((v+g) sqrt(2))`.
pub fn stationary_v_cdf(v: f64, params: &GravParams) -> f64 {
    normal_cdf((v + params.g()) * std::f64::consts::SQRT_2)
}

/// CDF of the stationary gap marginal: `1 - exp(-2gh)`.
pub fn stationary_gap_cdf(h: f64, params: &GravParams) -> Result<f64> {
    if !h.is_finite() || h < 0.0 {
        return Err(Error::invalid(format!("gap must be non-negative, got {h}")));
    }
    Ok(-(-2.0 * params.g() * h).exp_m1())
}

/// Exact tail of the running supremum of standard Brownian motion:
/// `P(sup_{s<=t} B_s >= x) = 2 (1 - Phi(x / sqrt(t)))` for `x, t > 0`.
pub fn bm_sup_tail(x: f64, t: f64) -> Result<f64> {
    if !x.is_finite() || x <= 0.0 {
        return Err(Error::invalid(format!("level must be positive, got {x}")));
    }
    if !t.is_finite() || t <= 0.0 {
        return Err(Error::invalid(format!("time must be positive, got {t}")));
    }
    Ok(libm::erfc(x / (2.0 * t).sqrt()))
}

/// Density at `t` of the first hitting time of level `a` by Brownian motion
/// with drift `m`: `|a| / sqrt(2 pi t^3) * exp(-(a - m t)^2 / (2t))`.
pub fn bm_drift_hitting_density(a: f64, m: f64, t: f64) -> Result<f64> {
    if a == 0.0 {
        return Err(Error::invalid(
            "hitting level must be nonzero (level 0 is hit at time 0)",
        ));
    }
    if !t.is_finite() || t <= 0.0 {
        return Err(Error::invalid(format!("time must be positive, got {t}")));
    }
    if !(a.is_finite() && m.is_finite()) {
        return Err(Error::invalid("level and drift must be finite"));
    }
    let d = a - m * t;
    Ok(a.abs() / (2.0 * std::f64::consts::PI * t * t * t).sqrt() * (-d * d / (2.0 * t)).exp())
}

/// Probability that Brownian motion with drift `m` ever hits level `a`:
/// `exp(ma - |ma|)`.
pub fn bm_drift_hitting_prob(a: f64, m: f64) -> f64 {
    let p = m * a;
    (p - p.abs()).exp()
}

/// CDF at `t` of the first hitting time of level `a != 0` by Brownian motion
/// with drift `m` (the integrated form of `bm_drift_hitting_density`):
/// for `a > 0`, `Phi((mt - a)/sqrt(t)) + e^{2ma} Phi((-a - mt)/sqrt(t))`;
/// the case `a < 0` follows by the reflection `(a, m) -> (-a, -m)`.
pub fn bm_drift_hitting_cdf(a: f64, m: f64, t: f64) -> Result<f64> {
    if a == 0.0 {
        return Err(Error::invalid(
            "hitting level must be nonzero (level 0 is hit at time 0)",
        ));
    }
    if !t.is_finite() || t < 0.0 {
        return Err(Error::invalid(format!("time must be non-negative, got {t}")));
    }
    if t == 0.0 {
        return Ok(0.0);
    }
    let (a, m) = if a > 0.0 { (a, m) } else { (-a, -m) };
    let rt = t.sqrt();
    let main = normal_cdf((m * t - a) / rt);
    let refl = (2.0 * m * a).exp() * normal_cdf((-a - m * t) / rt);
    // The reflected term can overflow to inf * 0 for large positive drift;
    // in that regime the hit is essentially certain and the term vanishes.
    Ok(if refl.is_finite() { main + refl } else { main })
}

/// Skorokhod functional for reflection on a line of slope `slope` through
/// the origin: `max(0, max_u (b_u - slope * u))` over the recorded path.
pub fn skorokhod_linear(path: &[(f64, f64)], slope: f64) -> Result<f64> {
    if path.is_empty() {
        return Err(Error::invalid("empty path"));
    }
    let (t0, b0) = path[0];
    if t0 != 0.0 || b0 != 0.0 {
        return Err(Error::invalid(format!(
            "path must start at (0, 0), got ({t0}, {b0})"
        )));
    }
    let mut prev_t = f64::NEG_INFINITY;
    let mut sup = 0.0f64;
    for &(t, b) in path {
        if t <= prev_t {
            return Err(Error::invalid(format!(
                "path times must be strictly increasing, got {t} after {prev_t}"
            )));
        }
        prev_t = t;
        sup = sup.max(b - slope * t);
    }
    Ok(sup)
}
