//! Profile likelihood for the contaminated mixture `(1-p) N(0,1) + p N(t,1)`.
//!
//! For fixed `t` the log-likelihood ratio against `N(0,1)` is
//! `g(p) = sum_i log(1 + p Z_i(t))` with `Z_i(t) = exp(t X_i - t^2/2) - 1`.
//! `g` is concave in `p`, so the profile weight is found by a bracketed
//! Newton iteration on `g'`, and the location by a one-dimensional scan.

use serde::{Deserialize, Serialize};

use super::{FittedParams, MleResult};
use crate::error::{Error, Result};
use crate::model::{log_phi, ContaminatedParams};
use crate::optimize::{location_bound, scan_and_refine, symmetric_grid, GRID_STEP};

/// `u` above this is clamped when forming `Z` for derivative evaluations.
const U_CAP: f64 = 700.0;

/// Profile-maximizing weight at a fixed location.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ProfilePoint {
    pub t: f64,
    pub p_hat: f64,
    /// `p_hat * exp(t^2 / 2)`.
    pub eta_hat: f64,
    /// `2 * sum_i log(1 + p_hat Z_i(t))`.
    pub loglik_gain: f64,
}

/// `Z_i(t) = exp(t x_i - t^2/2) - 1`.
pub fn z_values(data: &[f64], t: f64) -> Vec<f64> {
    let half_t2 = 0.5 * t * t;
    data.iter().map(|&x| (t * x - half_t2).exp_m1()).collect()
}

/// `log(1 - p + p e^u)` without cancellation or overflow.
#[inline]
pub(crate) fn log_mix(p: f64, u: f64) -> f64 {
    if p == 0.0 {
        0.0
    } else if p == 1.0 {
        u
    } else if u > 0.0 {
        u + (p + (1.0 - p) * (-u).exp()).ln()
    } else {
        let pz = p * u.exp_m1();
        if pz > -0.5 {
            pz.ln_1p()
        } else {
            ((1.0 - p) + p * u.exp()).ln()
        }
    }
}

/// Fills `z` with `Z_i(t)`; returns true if any exponent had to be clamped.
fn fill_z(data: &[f64], t: f64, z: &mut Vec<f64>) -> bool {
    let half_t2 = 0.5 * t * t;
    let mut clamped = false;
    z.clear();
    z.extend(data.iter().map(|&x| {
        let u = t * x - half_t2;
        clamped |= u > U_CAP;
        u.min(U_CAP).exp_m1()
    }));
    clamped
}

/// `(g'(p), g''(p))` in one pass.
#[inline]
fn weight_derivatives(z: &[f64], p: f64) -> (f64, f64) {
    let mut d1 = 0.0;
    let mut d2 = 0.0;
    for &zi in z {
        let r = zi / (1.0 + p * zi);
        d1 += r;
        d2 += r * r;
    }
    (d1, -d2)
}

/// Maximizer of `sum log(1 + p z_i)` over `[0, 1]`, with the iteration count.
///
/// Flat objectives (all `z_i = 0`) return 0.
pub(crate) fn solve_weight(z: &[f64]) -> (f64, usize) {
    let n = z.len() as f64;
    let (mut s0, mut s2) = (0.0, 0.0);
    for &zi in z {
        s0 += zi;
        s2 += zi * zi;
    }
    if !(s0 > 0.0) {
        return (0.0, 0);
    }
    let (g1_at_one, _) = weight_derivatives(z, 1.0);
    if g1_at_one >= 0.0 {
        return (1.0, 1);
    }
    let tol = 1e-12 * n;
    let (mut lo, mut hi) = (0.0f64, 1.0f64);
    // the quadratic approximation of g is maximized at s0 / s2
    let mut p = (s0 / s2).min(0.5);
    let mut iterations = 1;
    for _ in 0..200 {
        iterations += 1;
        let (g1, g2) = weight_derivatives(z, p);
        if g1.abs() <= tol {
            break;
        }
        if g1 > 0.0 {
            lo = p;
        } else {
            hi = p;
        }
        let newton = p - g1 / g2;
        p = if newton > lo && newton < hi {
            newton
        } else {
            0.5 * (lo + hi)
        };
        if hi - lo <= 4.0 * f64::EPSILON * hi {
            break;
        }
    }
    (p, iterations)
}

fn gain_from_z(z: &[f64], p: f64) -> f64 {
    if p == 0.0 {
        return 0.0;
    }
    2.0 * z.iter().map(|&zi| (p * zi).ln_1p()).sum::<f64>()
}

/// `2 * sum_i log(1 + p Z_i(t))` evaluated stably.
pub fn weighted_gain(data: &[f64], params: ContaminatedParams) -> f64 {
    let ContaminatedParams { p, t } = params;
    if p == 0.0 {
        return 0.0;
    }
    let half_t2 = 0.5 * t * t;
    2.0 * data.iter().map(|&x| log_mix(p, t * x - half_t2)).sum::<f64>()
}

fn profile_exact(data: &[f64], t: f64, z: &mut Vec<f64>) -> ProfilePoint {
    fill_z(data, t, z);
    let (p_hat, _) = solve_weight(z);
    let loglik_gain = weighted_gain(data, ContaminatedParams { p: p_hat, t });
    ProfilePoint {
        t,
        p_hat,
        eta_hat: p_hat * (0.5 * t * t).exp(),
        loglik_gain,
    }
}

/// Maximizes the contaminated likelihood over the weight at a fixed location.
pub fn profile_weight(data: &[f64], t: f64) -> Result<ProfilePoint> {
    if data.is_empty() {
        return Err(Error::EmptySample);
    }
    if !t.is_finite() {
        return Err(Error::InvalidParams(format!("location t = {t}")));
    }
    let mut z = Vec::with_capacity(data.len());
    Ok(profile_exact(data, t, &mut z))
}

/// How far `p` is from satisfying the first-order conditions of the profile
/// problem at `t`: `|g'(p)|` inside `(0, 1)`, the positive part of `g'(0)`
/// at zero and of `-g'(1)` at one.
pub fn profile_kkt_residual(data: &[f64], t: f64, p: f64) -> f64 {
    let z = z_values(data, t);
    let (g1, _) = weight_derivatives(&z, p);
    if p <= 0.0 {
        g1.max(0.0)
    } else if p >= 1.0 {
        (-g1).max(0.0)
    } else {
        g1.abs()
    }
}

/// `sum_i log phi(x_i; 0, 1)`.
pub fn null_loglik_contaminated(data: &[f64]) -> f64 {
    data.iter().map(|&x| log_phi(x, 0.0)).sum()
}

/// Classical likelihood ratio statistic for `H0: N(0,1)` against the
/// contaminated mixture.
///
/// The supremum over the location is taken over `|t| <= location_bound(data)`
/// by a 0.02-spaced scan and golden-section refinement of the best cell.
pub fn lrt_contaminated(data: &[f64]) -> Result<MleResult> {
    if data.is_empty() {
        return Err(Error::EmptySample);
    }
    let bound = location_bound(data);
    let grid = symmetric_grid(bound, GRID_STEP);

    let mut scan_z = Vec::with_capacity(data.len());
    let mut fine_z = Vec::with_capacity(data.len());
    let best = scan_and_refine(
        &grid,
        bound,
        |t| {
            if t == 0.0 {
                return 0.0;
            }
            let clamped = fill_z(data, t, &mut scan_z);
            let (p, _) = solve_weight(&scan_z);
            if clamped {
                weighted_gain(data, ContaminatedParams { p, t })
            } else {
                gain_from_z(&scan_z, p)
            }
        },
        |t| profile_exact(data, t, &mut fine_z).loglik_gain,
    );

    let point = profile_exact(data, best.t, &mut fine_z);
    let (p_hat, t_hat, lambda) = if point.p_hat == 0.0 || point.loglik_gain <= 0.0 {
        (0.0, 0.0, 0.0)
    } else {
        (point.p_hat, point.t, point.loglik_gain)
    };
    let null_loglik = null_loglik_contaminated(data);
    Ok(MleResult {
        params: FittedParams::Contaminated(ContaminatedParams { p: p_hat, t: t_hat }),
        loglik: null_loglik + 0.5 * lambda,
        null_loglik,
        lambda,
        t_hat: Some(t_hat),
        converged: true,
        iterations: best.evaluations,
        clamped: false,
    })
}
