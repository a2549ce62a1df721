//! Data splitting, split likelihood ratio statistics and decision thresholds.
//!
//! The split statistic fits the full model on `D1` and evaluates the
//! likelihood ratio against the null fit on `D0`. Under the null,
//! `exp(statistic / 2)` has expectation at most one, so comparing the
//! statistic with `-2 ln(alpha)` gives a finite-sample level-`alpha` test.

use std::fmt;
use std::str::FromStr;

use rand::seq::SliceRandom;
use serde::{Deserialize, Serialize};
use statrs::distribution::{ContinuousCDF, Normal};

use crate::error::{Error, Result};
use crate::likelihood::{
    lrt_contaminated, lrt_two_mean, null_loglik_two_mean, FittedParams, MleResult, DEFAULT_RESTARTS,
};
use crate::model::Sample;
use crate::rng::stream_rng;

/// Smallest `n` for which the asymptotic thresholds are evaluated.
pub const MIN_ASYMPTOTIC_N: usize = 16;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SplitConfig {
    /// Fraction of the data used for inference (`D0`).
    pub m0: f64,
    pub shuffle: bool,
    pub seed: u64,
}

impl SplitConfig {
    pub fn new(m0: f64) -> Result<Self> {
        if !(m0 > 0.0 && m0 < 1.0) {
            return Err(Error::InvalidFraction(m0));
        }
        Ok(SplitConfig {
            m0,
            shuffle: false,
            seed: 0,
        })
    }

    pub fn shuffled(mut self, seed: u64) -> Self {
        self.shuffle = true;
        self.seed = seed;
        self
    }

    /// `m0 / (1 - m0)`.
    pub fn beta(&self) -> f64 {
        self.m0 / (1.0 - self.m0)
    }

    /// `(n0, n1)` with `n0 = floor(m0 n)`.
    pub fn sizes(&self, n: usize) -> Result<(usize, usize)> {
        if !(self.m0 > 0.0 && self.m0 < 1.0) {
            return Err(Error::InvalidFraction(self.m0));
        }
        // guard products like 0.29 * 100 = 28.999999999999996
        let n0 = ((self.m0 * n as f64) * (1.0 + 4.0 * f64::EPSILON)).floor() as usize;
        let n0 = n0.min(n);
        let n1 = n - n0;
        if n0 == 0 || n1 == 0 {
            return Err(Error::DegenerateSplit { n0, n1 });
        }
        Ok((n0, n1))
    }
}

/// Splits into `(D0, D1)`: the first `n0` points after an optional seeded
/// shuffle, and the rest.
pub fn split(data: &[f64], config: &SplitConfig) -> Result<(Sample, Sample)> {
    let (n0, _) = config.sizes(data.len())?;
    let mut values = data.to_vec();
    if config.shuffle {
        values.shuffle(&mut stream_rng(config.seed, 0));
    }
    let d1 = values.split_off(n0);
    Ok((Sample::new(values), Sample::new(d1)))
}

/// Borrowing variant of [`split`] for unshuffled configurations.
fn split_slices<'a>(data: &'a [f64], config: &SplitConfig) -> Result<(std::borrow::Cow<'a, [f64]>, std::borrow::Cow<'a, [f64]>)> {
    if config.shuffle {
        let (d0, d1) = split(data, config)?;
        Ok((d0.values.into(), d1.values.into()))
    } else {
        let (n0, _) = config.sizes(data.len())?;
        let (d0, d1) = data.split_at(n0);
        Ok((d0.into(), d1.into()))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ThresholdRule {
    /// `-2 ln(alpha)`.
    Universal,
    /// Extreme-value threshold for the classical statistic.
    AsymptoticLrt,
    /// Normal-limit threshold for the split statistic.
    AsymptoticSlrt,
}

impl fmt::Display for ThresholdRule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ThresholdRule::Universal => "universal",
            ThresholdRule::AsymptoticLrt => "asymptotic_lrt",
            ThresholdRule::AsymptoticSlrt => "asymptotic_slrt",
        })
    }
}

impl FromStr for ThresholdRule {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().replace('-', "_").as_str() {
            "universal" => Ok(ThresholdRule::Universal),
            "asymptotic_lrt" | "lrt" => Ok(ThresholdRule::AsymptoticLrt),
            "asymptotic_slrt" | "slrt" | "split" => Ok(ThresholdRule::AsymptoticSlrt),
            other => Err(Error::Parse(format!("unknown threshold rule `{other}`"))),
        }
    }
}

/// Outcome of one test.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TestResult {
    pub statistic: f64,
    pub threshold_rule: ThresholdRule,
    pub threshold: f64,
    pub reject: bool,
    pub e_value: Option<f64>,
    pub alpha: f64,
}

impl TestResult {
    pub fn decide(statistic: f64, threshold_rule: ThresholdRule, threshold: f64, alpha: f64, e_value: bool) -> Self {
        TestResult {
            statistic,
            threshold_rule,
            threshold,
            reject: statistic > threshold,
            e_value: e_value.then(|| (statistic / 2.0).exp()),
            alpha,
        }
    }
}

fn check_level(alpha: f64) -> Result<()> {
    if alpha > 0.0 && alpha < 1.0 {
        Ok(())
    } else {
        Err(Error::InvalidLevel(alpha))
    }
}

fn check_asymptotic_size(n: usize) -> Result<()> {
    if n < MIN_ASYMPTOTIC_N {
        return Err(Error::DegenerateSize {
            n,
            min: MIN_ASYMPTOTIC_N,
        });
    }
    Ok(())
}

/// `-2 ln(alpha)`. Accepts `alpha = 1` (threshold 0).
pub fn universal_threshold(alpha: f64) -> Result<f64> {
    if !(alpha > 0.0 && alpha <= 1.0) {
        return Err(Error::InvalidLevel(alpha));
    }
    Ok(-2.0 * alpha.ln())
}

/// `ln ln n - ln(2 pi^2) - 2 ln ln (1 - alpha)^{-1}`.
pub fn asymptotic_lrt_threshold(n: usize, alpha: f64) -> Result<f64> {
    check_level(alpha)?;
    check_asymptotic_size(n)?;
    let lln = (n as f64).ln().ln();
    let ln_2pi2 = (2.0 * std::f64::consts::PI * std::f64::consts::PI).ln();
    Ok(lln - ln_2pi2 - 2.0 * (-(-alpha).ln_1p()).ln())
}

/// Standard normal quantile.
pub fn normal_quantile(prob: f64) -> f64 {
    if prob == 0.5 {
        return 0.0;
    }
    Normal::standard().inverse_cdf(prob)
}

pub fn normal_cdf(x: f64) -> f64 {
    Normal::standard().cdf(x)
}

/// `2 sqrt(beta ln ln n) z_{1-alpha} - beta ln ln n` with `beta = m0 / (1 - m0)`.
pub fn asymptotic_slrt_threshold(n: usize, alpha: f64, m0: f64) -> Result<f64> {
    check_level(alpha)?;
    if !(m0 > 0.0 && m0 < 1.0) {
        return Err(Error::InvalidFraction(m0));
    }
    check_asymptotic_size(n)?;
    let scale = m0 / (1.0 - m0) * (n as f64).ln().ln();
    Ok(2.0 * scale.sqrt() * normal_quantile(1.0 - alpha) - scale)
}

/// Threshold for `rule`; `m0` is required by [`ThresholdRule::AsymptoticSlrt`].
pub fn threshold(rule: ThresholdRule, n: usize, alpha: f64, m0: Option<f64>) -> Result<f64> {
    match rule {
        ThresholdRule::Universal => {
            check_level(alpha)?;
            universal_threshold(alpha)
        }
        ThresholdRule::AsymptoticLrt => asymptotic_lrt_threshold(n, alpha),
        ThresholdRule::AsymptoticSlrt => {
            let m0 = m0.ok_or_else(|| Error::InvalidFraction(f64::NAN))?;
            asymptotic_slrt_threshold(n, alpha, m0)
        }
    }
}

/// The split statistic with the `D1` fit it was evaluated at.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SplitStatistic {
    pub statistic: f64,
    pub fit: MleResult,
    pub n0: usize,
    pub n1: usize,
}

/// `2 [sum_{D0} log f_fit(x) - sum_{D0} log phi(x; 0, 1)]` for a contaminated
/// fit, computed as `2 sum log(1 + p Z(t))`.
pub fn split_statistic_contaminated(d0: &[f64], fit: &FittedParams) -> f64 {
    match *fit {
        FittedParams::Contaminated(p) => crate::likelihood::weighted_gain(d0, p),
        FittedParams::TwoMean(_) => {
            2.0 * (fit.loglik(d0) - crate::likelihood::null_loglik_contaminated(d0))
        }
    }
}

/// `2 [sum_{D0} log f_fit(x) - sum_{D0} log phi(x; mean(D0), 1)]`.
pub fn split_statistic_two_mean(d0: &[f64], fit: &FittedParams) -> f64 {
    2.0 * (fit.loglik(d0) - null_loglik_two_mean(d0))
}

pub fn slrt_contaminated_statistic(data: &[f64], config: &SplitConfig) -> Result<SplitStatistic> {
    let (d0, d1) = split_slices(data, config)?;
    let fit = lrt_contaminated(&d1)?;
    Ok(SplitStatistic {
        statistic: split_statistic_contaminated(&d0, &fit.params),
        n0: d0.len(),
        n1: d1.len(),
        fit,
    })
}

pub fn slrt_two_mean_statistic(data: &[f64], config: &SplitConfig, restarts: usize, seed: u64) -> Result<SplitStatistic> {
    let (n0, n1) = config.sizes(data.len())?;
    if n0 < 2 || n1 < 2 {
        return Err(Error::TooFewPoints {
            have: n0.min(n1),
            need: 2,
        });
    }
    let (d0, d1) = split_slices(data, config)?;
    let fit = lrt_two_mean(&d1, restarts, seed)?;
    Ok(SplitStatistic {
        statistic: split_statistic_two_mean(&d0, &fit.params),
        n0,
        n1,
        fit,
    })
}

/// Split likelihood ratio test for the contaminated model.
pub fn slrt_contaminated(data: &[f64], config: &SplitConfig, alpha: f64, rule: ThresholdRule) -> Result<TestResult> {
    let stat = slrt_contaminated_statistic(data, config)?;
    let c = threshold(rule, data.len(), alpha, Some(config.m0))?;
    Ok(TestResult::decide(stat.statistic, rule, c, alpha, true))
}

/// Split likelihood ratio test for the two-mean model.
pub fn slrt_two_mean(
    data: &[f64],
    config: &SplitConfig,
    alpha: f64,
    rule: ThresholdRule,
    seed: u64,
) -> Result<TestResult> {
    let stat = slrt_two_mean_statistic(data, config, DEFAULT_RESTARTS, seed)?;
    let c = threshold(rule, data.len(), alpha, Some(config.m0))?;
    Ok(TestResult::decide(stat.statistic, rule, c, alpha, true))
}

/// Classical likelihood ratio test; the statistic is not an e-value.
pub fn lrt_test(fit: &MleResult, n: usize, alpha: f64, rule: ThresholdRule, m0: Option<f64>) -> Result<TestResult> {
    let c = threshold(rule, n, alpha, m0)?;
    Ok(TestResult::decide(fit.lambda, rule, c, alpha, false))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::ContaminatedParams;
    use approx::assert_relative_eq;

    #[test]
    fn split_sizes() {
        let c = SplitConfig::new(0.5).unwrap();
        let data: Vec<f64> = (1..=10).map(f64::from).collect();
        let (d0, d1) = split(&data, &c).unwrap();
        assert_eq!(d0.values, vec![1.0, 2.0, 3.0, 4.0, 5.0]);
        assert_eq!(d1.values, vec![6.0, 7.0, 8.0, 9.0, 10.0]);
        assert_eq!(SplitConfig::new(0.4).unwrap().sizes(1000).unwrap(), (400, 600));
        assert_eq!(SplitConfig::new(0.6).unwrap().sizes(1000).unwrap(), (600, 400));
        assert_eq!(SplitConfig::new(0.5).unwrap().sizes(3).unwrap(), (1, 2));
        assert_eq!(SplitConfig::new(0.29).unwrap().sizes(100).unwrap(), (29, 71));
    }

    #[test]
    fn degenerate_splits() {
        assert!(matches!(
            SplitConfig::new(0.3).unwrap().sizes(2),
            Err(Error::DegenerateSplit { n0: 0, n1: 2 })
        ));
        assert!(matches!(SplitConfig::new(1.0), Err(Error::InvalidFraction(_))));
        assert!(matches!(SplitConfig::new(0.0), Err(Error::InvalidFraction(_))));
    }

    #[test]
    fn shuffled_split_is_a_permutation() {
        let data: Vec<f64> = (0..50).map(f64::from).collect();
        let c = SplitConfig::new(0.4).unwrap().shuffled(3);
        let (d0, d1) = split(&data, &c).unwrap();
        let (e0, e1) = split(&data, &c).unwrap();
        assert_eq!((&d0, &d1), (&e0, &e1));
        let mut all: Vec<f64> = d0.iter().chain(d1.iter()).copied().collect();
        all.sort_by(f64::total_cmp);
        assert_eq!(all, data);
        assert_ne!(d0.values, data[..20].to_vec());
    }

    #[test]
    fn universal_thresholds() {
        assert_relative_eq!(universal_threshold(0.05).unwrap(), 5.991_464_547_107_982, epsilon = 1e-14);
        assert_eq!(universal_threshold(1.0).unwrap(), 0.0);
        assert_relative_eq!(universal_threshold((-1.0f64).exp()).unwrap(), 2.0, epsilon = 1e-15);
        assert!(matches!(universal_threshold(0.0), Err(Error::InvalidLevel(_))));
    }

    #[test]
    fn asymptotic_thresholds() {
        // 30-digit evaluations
        assert_relative_eq!(asymptotic_lrt_threshold(1000, 0.05).unwrap(), 4.890_428_279_741_649, epsilon = 1e-12);
        assert_relative_eq!(
            asymptotic_lrt_threshold(10_000_000, 0.05).unwrap(),
            5.737_726_140_128_853,
            epsilon = 1e-12
        );
        assert_relative_eq!(
            asymptotic_slrt_threshold(1000, 0.05, 0.5).unwrap(),
            2.640_692_913_333_954,
            epsilon = 1e-10
        );
        assert_relative_eq!(
            asymptotic_slrt_threshold(1000, 0.05, 0.4).unwrap(),
            2.445_684_729_796_981,
            epsilon = 1e-10
        );
        let lln = 1000f64.ln().ln();
        assert_eq!(asymptotic_slrt_threshold(1000, 0.5, 0.5).unwrap(), -lln);
        assert!(asymptotic_lrt_threshold(10_000_000, 0.05).unwrap() > asymptotic_lrt_threshold(1000, 0.05).unwrap());
        assert!(matches!(asymptotic_lrt_threshold(15, 0.05), Err(Error::DegenerateSize { .. })));
        assert!(matches!(asymptotic_slrt_threshold(100, 0.05, 1.2), Err(Error::InvalidFraction(_))));
        assert!(matches!(asymptotic_lrt_threshold(100, 1.0), Err(Error::InvalidLevel(_))));
    }

    #[test]
    fn quantile_accuracy() {
        assert_relative_eq!(normal_quantile(0.95), 1.644_853_626_951_472_7, max_relative = 1e-12);
        assert_relative_eq!(normal_quantile(0.999), 3.090_232_306_167_813_5, max_relative = 1e-12);
    }

    #[test]
    fn split_statistic_closed_form() {
        let fit = FittedParams::Contaminated(ContaminatedParams { p: 1.0, t: 2.0 });
        let s = split_statistic_contaminated(&[0.0], &fit);
        assert_relative_eq!(s, -4.0, epsilon = 1e-14);
        let r = TestResult::decide(s, ThresholdRule::Universal, 5.99, 0.05, true);
        assert_relative_eq!(r.e_value.unwrap(), (-2.0f64).exp(), epsilon = 1e-15);
        assert!(!r.reject);
    }

    #[test]
    fn null_fit_gives_zero_statistic() {
        let fit = FittedParams::Contaminated(ContaminatedParams { p: 0.0, t: 1.3 });
        assert_eq!(split_statistic_contaminated(&[0.4, -2.0, 3.0], &fit), 0.0);
        // D1 = zeros fits p = 0
        let data = [0.7, -0.3, 0.0, 0.0, 0.0, 0.0];
        let r = slrt_contaminated(&data, &SplitConfig::new(0.34).unwrap(), 0.05, ThresholdRule::Universal).unwrap();
        assert_eq!(r.statistic, 0.0);
        assert_eq!(r.e_value, Some(1.0));
    }

    #[test]
    fn two_mean_collapsed_fit() {
        let d0 = [0.5, 1.5, 1.0];
        let fit = FittedParams::TwoMean(crate::model::TwoMeanParams { p: 0.3, t1: 1.0, t2: 1.0 });
        assert!(split_statistic_two_mean(&d0, &fit).abs() < 1e-13);
    }

    #[test]
    fn two_mean_split_needs_two_points_each() {
        let c = SplitConfig::new(0.5).unwrap();
        assert!(matches!(
            slrt_two_mean(&[1.0, 2.0, 3.0], &c, 0.05, ThresholdRule::Universal, 0),
            Err(Error::TooFewPoints { .. }) | Err(Error::DegenerateSplit { .. })
        ));
    }
}
