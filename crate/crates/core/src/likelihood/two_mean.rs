//! Two-mean mixture `(1-p) N(t1,1) + p N(t2,1)` fitted by EM.

use log::warn;
use rand::Rng;

use super::{FittedParams, MleResult};
use crate::error::{Error, Result};
use crate::model::{log_phi, TwoMeanParams, LN_SQRT_2PI};
use crate::rng::stream_rng;

pub const DEFAULT_RESTARTS: usize = 10;
pub const MAX_EM_ITERATIONS: usize = 500;
pub const EM_TOLERANCE: f64 = 1e-10;

/// One EM run from a fixed start.
#[derive(Debug, Clone)]
pub struct EmRun {
    pub params: TwoMeanParams,
    pub loglik: f64,
    pub iterations: usize,
    pub converged: bool,
    /// Log-likelihood at the start of every iteration, then at the end point.
    pub trace: Vec<f64>,
}

/// Sufficient statistics of the data that stay fixed across EM iterations.
#[derive(Debug, Clone, Copy)]
struct Moments {
    n: f64,
    sum: f64,
    sum_sq: f64,
}

impl Moments {
    fn of(data: &[f64]) -> Self {
        Moments {
            n: data.len() as f64,
            sum: data.iter().sum(),
            sum_sq: data.iter().map(|x| x * x).sum(),
        }
    }

    /// `sum_i log phi(x_i; mean, 1)`.
    fn gaussian_loglik(&self, mean: f64) -> f64 {
        -self.n * LN_SQRT_2PI - 0.5 * (self.sum_sq - 2.0 * mean * self.sum + self.n * mean * mean)
    }
}

/// Result of one pass over the data: the log-likelihood at the current
/// parameters plus the weighted sums the M-step needs.
#[derive(Debug, Clone, Copy)]
struct Pass {
    loglik: f64,
    /// `sum_i r_i` and `sum_i r_i x_i`, with `r_i` the posterior weight of the
    /// second component.
    w2: f64,
    s2: f64,
}

/// Products of `1 + e` with `e <= 1` stay below `2^BLOCK`; taking one log per
/// block replaces a `ln_1p` per point.
const BLOCK: usize = 64;

fn e_pass(data: &[f64], m: &Moments, params: TwoMeanParams) -> Pass {
    let TwoMeanParams { p, t1, t2 } = params;
    if p >= 1.0 {
        // everything sits on the second component
        return Pass {
            loglik: m.gaussian_loglik(t2),
            w2: m.n,
            s2: m.sum,
        };
    }
    // log[(1-p) phi(x-t1) + p phi(x-t2)] = log(1-p) + log phi(x-t1) + softplus(d)
    let log_odds = p.ln() - (1.0 - p).ln() - 0.5 * (t2 * t2 - t1 * t1);
    let dt = t2 - t1;
    let (mut pos, mut log_terms, mut w2, mut s2) = (0.0, 0.0, 0.0, 0.0);
    for chunk in data.chunks(BLOCK) {
        let mut prod = 1.0;
        for &x in chunk {
            let d = log_odds + dt * x;
            let e = (-d.abs()).exp();
            let one_e = 1.0 + e;
            prod *= one_e;
            let r = if d >= 0.0 {
                pos += d;
                1.0 / one_e
            } else {
                e / one_e
            };
            w2 += r;
            s2 += r * x;
        }
        log_terms += prod.ln();
    }
    Pass {
        loglik: m.n * (1.0 - p).ln() + m.gaussian_loglik(t1) + pos + log_terms,
        w2,
        s2,
    }
}

fn m_step(m: &Moments, pass: &Pass, prev: TwoMeanParams) -> TwoMeanParams {
    let w1 = m.n - pass.w2;
    let s1 = m.sum - pass.s2;
    TwoMeanParams {
        p: (pass.w2 / m.n).clamp(0.0, 1.0),
        t1: if w1 > 0.0 { s1 / w1 } else { prev.t1 },
        t2: if pass.w2 > 0.0 { pass.s2 / pass.w2 } else { prev.t2 },
    }
}

/// Runs EM from `start` until successive log-likelihoods differ by less than
/// [`EM_TOLERANCE`] or [`MAX_EM_ITERATIONS`] iterations have run.
pub fn em_run(data: &[f64], start: TwoMeanParams) -> EmRun {
    em_run_with(data, &Moments::of(data), start)
}

fn em_run_with(data: &[f64], m: &Moments, start: TwoMeanParams) -> EmRun {
    let mut params = start;
    let mut pass = e_pass(data, m, params);
    let mut trace = vec![pass.loglik];
    let mut converged = false;
    let mut iterations = 0;
    while iterations < MAX_EM_ITERATIONS {
        params = m_step(m, &pass, params);
        iterations += 1;
        let prev = pass.loglik;
        pass = e_pass(data, m, params);
        trace.push(pass.loglik);
        if (pass.loglik - prev).abs() < EM_TOLERANCE {
            converged = true;
            break;
        }
    }
    EmRun {
        params: params.canonical(),
        loglik: pass.loglik,
        iterations,
        converged,
        trace,
    }
}

/// Starting points: the median split first, then `restarts - 1` random draws
/// with means in `[min - 1, max + 1]`.
pub fn em_starts(data: &[f64], restarts: usize, seed: u64) -> Vec<TwoMeanParams> {
    let mut sorted = data.to_vec();
    sorted.sort_by(f64::total_cmp);
    let n = sorted.len();
    let half = n / 2;
    let mean = |s: &[f64]| s.iter().sum::<f64>() / s.len() as f64;
    let mut starts = vec![TwoMeanParams {
        p: (n - half) as f64 / n as f64,
        t1: mean(&sorted[..half]),
        t2: mean(&sorted[half..]),
    }];
    let (lo, hi) = (sorted[0] - 1.0, sorted[n - 1] + 1.0);
    let mut rng = stream_rng(seed, 0);
    for _ in 1..restarts.max(1) {
        starts.push(TwoMeanParams {
            p: rng.random_range(0.05..0.95),
            t1: rng.random_range(lo..=hi),
            t2: rng.random_range(lo..=hi),
        });
    }
    starts
}

fn check_size(data: &[f64]) -> Result<()> {
    if data.len() < 2 {
        return Err(Error::TooFewPoints {
            have: data.len(),
            need: 2,
        });
    }
    Ok(())
}

/// `sum_i log phi(x_i; mean(x), 1)`.
pub fn null_loglik_two_mean(data: &[f64]) -> f64 {
    if data.is_empty() {
        return 0.0;
    }
    let mean = data.iter().sum::<f64>() / data.len() as f64;
    data.iter().map(|&x| log_phi(x, mean)).sum()
}

/// Best EM fit of the two-mean mixture over `restarts` starting points.
///
/// `lambda` is measured against the fitted null `N(mean(x), 1)` and clamped
/// at zero when EM ends below it.
pub fn em_fit_two_mean(data: &[f64], restarts: usize, seed: u64) -> Result<MleResult> {
    check_size(data)?;
    let moments = Moments::of(data);
    let mut best: Option<EmRun> = None;
    let mut total_iterations = 0;
    for start in em_starts(data, restarts, seed) {
        let run = em_run_with(data, &moments, start);
        total_iterations += run.iterations;
        if best.as_ref().is_none_or(|b| run.loglik > b.loglik) {
            best = Some(run);
        }
    }
    let best = best.expect("at least one start");
    let null_loglik = null_loglik_two_mean(data);
    let raw = 2.0 * (best.loglik - null_loglik);
    let clamped = raw < 0.0;
    if clamped {
        warn!("EM fit is below the null fit by {}; clamping the statistic at 0", -raw / 2.0);
    }
    Ok(MleResult {
        params: FittedParams::TwoMean(best.params),
        loglik: best.loglik,
        null_loglik,
        lambda: raw.max(0.0),
        t_hat: None,
        converged: best.converged,
        iterations: total_iterations,
        clamped,
    })
}

/// Likelihood ratio statistic for `H0: p = 0 or t1 = t2`.
pub fn lrt_two_mean(data: &[f64], restarts: usize, seed: u64) -> Result<MleResult> {
    em_fit_two_mean(data, restarts, seed)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn constant_data_collapses() {
        let data = [1.7; 20];
        let fit = em_fit_two_mean(&data, 4, 1).unwrap();
        let FittedParams::TwoMean(p) = fit.params else { panic!() };
        assert_relative_eq!(p.t1, 1.7, epsilon = 1e-12);
        assert_relative_eq!(p.t2, 1.7, epsilon = 1e-12);
        assert_relative_eq!(fit.loglik, -20.0 * 0.918_938_533_204_672_8, epsilon = 1e-10);
        assert!(fit.lambda < 1e-10);
    }

    #[test]
    fn too_few_points() {
        assert!(matches!(
            em_fit_two_mean(&[1.0], 3, 0),
            Err(Error::TooFewPoints { have: 1, need: 2 })
        ));
    }

    #[test]
    fn em_is_monotone() {
        let data: Vec<f64> = (0..60).map(|i| ((i * 37 % 17) as f64 - 8.0) / 3.0).collect();
        for start in em_starts(&data, 6, 5) {
            let run = em_run(&data, start);
            for w in run.trace.windows(2) {
                assert!(w[1] >= w[0] - 1e-9 * w[0].abs().max(1.0), "{} -> {}", w[0], w[1]);
            }
        }
    }

    #[test]
    fn e_step_matches_density() {
        let params = TwoMeanParams { p: 0.3, t1: -1.0, t2: 2.0 };
        let data = [-2.0, 0.1, 3.0];
        let direct: f64 = data
            .iter()
            .map(|&x| crate::model::log_density_two_mean(params, x))
            .sum();
        let m = Moments::of(&data);
        assert_relative_eq!(e_pass(&data, &m, params).loglik, direct, epsilon = 1e-12);
        let degenerate = TwoMeanParams { p: 1.0, t1: 0.0, t2: 0.5 };
        let direct: f64 = data.iter().map(|&x| log_phi(x, 0.5)).sum();
        assert_relative_eq!(e_pass(&data, &m, degenerate).loglik, direct, epsilon = 1e-12);
        let empty = TwoMeanParams { p: 0.0, t1: 0.2, t2: 9.0 };
        let direct: f64 = data.iter().map(|&x| log_phi(x, 0.2)).sum();
        assert_relative_eq!(e_pass(&data, &m, empty).loglik, direct, epsilon = 1e-12);
    }

    #[test]
    fn posterior_weights_sum() {
        let params = TwoMeanParams { p: 0.4, t1: -0.5, t2: 1.5 };
        let data: Vec<f64> = (0..150).map(|i| (i as f64 * 0.731).sin() * 3.0).collect();
        let pass = e_pass(&data, &Moments::of(&data), params);
        let (mut w2, mut s2) = (0.0, 0.0);
        for &x in &data {
            let a = (1.0 - params.p).ln() + log_phi(x, params.t1);
            let b = params.p.ln() + log_phi(x, params.t2);
            let r = 1.0 / (1.0 + (a - b).exp());
            w2 += r;
            s2 += r * x;
        }
        assert_relative_eq!(pass.w2, w2, epsilon = 1e-10);
        assert_relative_eq!(pass.s2, s2, epsilon = 1e-10);
    }

    #[test]
    fn starts_use_median_split_first() {
        let s = em_starts(&[4.0, 1.0, 3.0, 2.0], 3, 0);
        assert_eq!(s.len(), 3);
        assert_eq!(s[0], TwoMeanParams { p: 0.5, t1: 1.5, t2: 3.5 });
        for st in &s[1..] {
            assert!(st.t1 >= 0.0 && st.t1 <= 5.0 && st.t2 >= 0.0 && st.t2 <= 5.0);
        }
    }
}
