//! Maximum likelihood fits and classical likelihood ratio statistics.

mod contaminated;
mod two_mean;

use serde::{Deserialize, Serialize};

pub use contaminated::{
    lrt_contaminated, null_loglik_contaminated, profile_kkt_residual, profile_weight, weighted_gain, z_values,
    ProfilePoint,
};
pub use two_mean::{
    em_fit_two_mean, em_run, em_starts, lrt_two_mean, null_loglik_two_mean, EmRun, DEFAULT_RESTARTS, EM_TOLERANCE,
    MAX_EM_ITERATIONS,
};

use crate::model::{log_density_contaminated, log_density_two_mean, ContaminatedParams, TwoMeanParams};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum FittedParams {
    Contaminated(ContaminatedParams),
    TwoMean(TwoMeanParams),
}

impl FittedParams {
    pub fn log_density(&self, x: f64) -> f64 {
        match *self {
            FittedParams::Contaminated(p) => log_density_contaminated(p, x),
            FittedParams::TwoMean(p) => log_density_two_mean(p, x),
        }
    }

    pub fn loglik(&self, data: &[f64]) -> f64 {
        data.iter().map(|&x| self.log_density(x)).sum()
    }
}

/// Full-model fit together with the likelihood ratio statistic.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MleResult {
    pub params: FittedParams,
    pub loglik: f64,
    pub null_loglik: f64,
    /// `2 (loglik - null_loglik)`, never negative.
    pub lambda: f64,
    /// Location argmax; contaminated model only.
    pub t_hat: Option<f64>,
    pub converged: bool,
    pub iterations: usize,
    /// Set when a local fit fell below the null and `lambda` was clamped.
    pub clamped: bool,
}
