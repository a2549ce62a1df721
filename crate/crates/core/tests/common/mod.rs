//! Brute-force reference computations shared by the integration tests. They
//! only use closed-form densities, never the production optimizers.
#![allow(dead_code)]

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

pub const LN_SQRT_2PI: f64 = 0.918_938_533_204_672_8;

pub fn normals(n: usize, seed: u64) -> Vec<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..n).map(|_| rng.sample(StandardNormal)).collect()
}

/// `sum_i log(1 + p (exp(t x_i - t^2/2) - 1))`.
pub fn contaminated_gain(data: &[f64], p: f64, t: f64) -> f64 {
    data.iter()
        .map(|&x| (1.0 + p * ((t * x - 0.5 * t * t).exp() - 1.0)).ln())
        .sum()
}

/// Likelihood ratio statistic of the contaminated model by exhaustive search:
/// `t` on a `t_step` grid over `|t| <= bound`, `p` on a `p_step` grid. The
/// weight objective is concave, so a hill climb on the `p` grid warm-started
/// from the previous `t` finds the grid maximum.
pub fn contaminated_grid_oracle(data: &[f64], bound: f64, t_step: f64, p_step: f64) -> (f64, f64, f64) {
    let kmax = (1.0 / p_step).round() as i64;
    let steps = (bound / t_step).floor() as i64;
    let mut best = (0.0, 0.0, 0.0);
    let mut k = 0i64;
    for j in -steps..=steps {
        let t = j as f64 * t_step;
        let g = |k: i64| contaminated_gain(data, k as f64 / kmax as f64, t);
        let mut cur = g(k);
        loop {
            if k < kmax {
                let up = g(k + 1);
                if up > cur {
                    k += 1;
                    cur = up;
                    continue;
                }
            }
            if k > 0 {
                let down = g(k - 1);
                if down > cur {
                    k -= 1;
                    cur = down;
                    continue;
                }
            }
            break;
        }
        if 2.0 * cur > best.0 {
            best = (2.0 * cur, k as f64 / kmax as f64, t);
        }
    }
    best
}

pub fn two_mean_loglik(data: &[f64], p: f64, t1: f64, t2: f64) -> f64 {
    data.iter()
        .map(|&x| {
            let a = (1.0 - p) * (-0.5 * (x - t1) * (x - t1)).exp();
            let b = p * (-0.5 * (x - t2) * (x - t2)).exp();
            (a + b).ln() - LN_SQRT_2PI
        })
        .sum()
}

pub fn normal_loglik(data: &[f64], mean: f64) -> f64 {
    data.iter().map(|&x| -0.5 * (x - mean) * (x - mean) - LN_SQRT_2PI).sum()
}

/// Grid maximum of the two-mean log-likelihood over `p in (0, 1)` and
/// `t1 <= t2` in `[lo, hi]`. Returns `(loglik, p, t1, t2)`.
pub fn two_mean_grid_oracle(data: &[f64], lo: f64, hi: f64, t_step: f64, p_step: f64) -> (f64, f64, f64, f64) {
    let nt = ((hi - lo) / t_step).round() as usize;
    let np = (1.0 / p_step).round() as usize;
    let mut best = (f64::NEG_INFINITY, 0.0, 0.0, 0.0);
    for i in 0..=nt {
        let t1 = lo + i as f64 * t_step;
        for j in i..=nt {
            let t2 = lo + j as f64 * t_step;
            for k in 1..np {
                let p = k as f64 / np as f64;
                let l = two_mean_loglik(data, p, t1, t2);
                if l > best.0 {
                    best = (l, p, t1, t2);
                }
            }
        }
    }
    best
}

pub fn mean_and_se(values: &[f64]) -> (f64, f64) {
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    let var = values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / (n - 1.0);
    (mean, (var / n).sqrt())
}
