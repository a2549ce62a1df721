//! The empirical process `S_n(t)`, its supremum, standardizations against the
//! limiting laws, and null-distribution summaries.

use std::fmt;
use std::io::Write;
use std::str::FromStr;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::likelihood::lrt_contaminated;
use crate::model::BaseDraws;
use crate::optimize::{location_bound, scan_and_refine, symmetric_grid, GRID_STEP};
use crate::rng::stream_rng;
use crate::universal::{normal_cdf, slrt_contaminated_statistic, SplitConfig, MIN_ASYMPTOTIC_N};

/// `S_n` on the scan grid together with its refined supremum.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProcessCurve {
    pub t_grid: Vec<f64>,
    pub s_values: Vec<f64>,
    pub m_n: f64,
    pub t_star: f64,
}

/// `S_n(t) = n^{-1/2} sum_i (exp(t x_i - t^2/2) - 1) exp(-t^2/2)`.
pub fn process_value(data: &[f64], t: f64) -> f64 {
    if t == 0.0 || data.is_empty() {
        return 0.0;
    }
    let half_t2 = 0.5 * t * t;
    let sum: f64 = data.iter().map(|&x| (t * x - half_t2).exp_m1()).sum();
    sum * (-half_t2).exp() / (data.len() as f64).sqrt()
}

/// Supremum of `S_n` over `|t| <= location_bound(data)`.
pub fn process_supremum(data: &[f64]) -> Result<ProcessCurve> {
    if data.is_empty() {
        return Err(Error::EmptySample);
    }
    let bound = location_bound(data);
    let t_grid = symmetric_grid(bound, GRID_STEP);
    let s_values: Vec<f64> = t_grid.iter().map(|&t| process_value(data, t)).collect();
    let mut values = s_values.iter();
    let best = scan_and_refine(
        &t_grid,
        bound,
        |_| *values.next().expect("one value per grid point"),
        |t| process_value(data, t),
    );
    Ok(ProcessCurve {
        t_grid,
        s_values,
        m_n: best.value,
        t_star: best.t,
    })
}

fn lln(n: usize) -> Result<f64> {
    if n < MIN_ASYMPTOTIC_N {
        return Err(Error::DegenerateSize {
            n,
            min: MIN_ASYMPTOTIC_N,
        });
    }
    Ok((n as f64).ln().ln())
}

/// `sqrt(ln ln n) (M_n - sqrt(ln ln n)) + ln(sqrt(2) pi)`; limit CDF `exp(-exp(-x))`.
pub fn gumbel_standardize_m(m_n: f64, n: usize) -> Result<f64> {
    let l = lln(n)?;
    Ok(l.sqrt() * (m_n - l.sqrt()) + (std::f64::consts::SQRT_2 * std::f64::consts::PI).ln())
}

/// `lambda - ln ln n + ln(2 pi^2)`; limit CDF `exp(-exp(-x/2))`.
pub fn gumbel_standardize_lambda(lambda: f64, n: usize) -> Result<f64> {
    let l = lln(n)?;
    Ok(lambda - l + (2.0 * std::f64::consts::PI * std::f64::consts::PI).ln())
}

/// `(lambda_split + beta ln ln n) / (2 sqrt(beta ln ln n))`; limit `N(0, 1)`.
pub fn normal_standardize_split(lambda_split: f64, n: usize, m0: f64) -> Result<f64> {
    if !(m0 > 0.0 && m0 < 1.0) {
        return Err(Error::InvalidFraction(m0));
    }
    let scale = m0 / (1.0 - m0) * lln(n)?;
    Ok((lambda_split + scale) / (2.0 * scale.sqrt()))
}

pub fn gumbel_cdf(x: f64) -> f64 {
    (-(-x).exp()).exp()
}

/// Limit CDF of the standardized classical statistic.
pub fn lambda_limit_cdf(x: f64) -> f64 {
    (-(-x / 2.0).exp()).exp()
}

/// Kolmogorov-Smirnov distance between the empirical law of `values` and `cdf`.
pub fn ks_distance<F: Fn(f64) -> f64>(values: &[f64], cdf: F) -> Option<f64> {
    if values.is_empty() {
        return None;
    }
    let mut sorted = values.to_vec();
    sorted.sort_by(f64::total_cmp);
    let m = sorted.len() as f64;
    let d = sorted
        .iter()
        .enumerate()
        .map(|(i, &x)| {
            let f = cdf(x);
            (f - i as f64 / m).max((i + 1) as f64 / m - f)
        })
        .fold(0.0, f64::max);
    Some(d)
}

/// `A_{2,n} = [2 sqrt(ln ln ln n), sqrt(ln(n) / 2) - 2 sqrt(ln ln n)]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct IntervalA2 {
    pub lower: f64,
    pub upper: f64,
}

impl IntervalA2 {
    pub fn for_n(n: usize) -> Result<Self> {
        let ln_n = (n as f64).ln();
        let lower = 2.0 * ln_n.ln().ln().sqrt();
        let upper = (ln_n / 2.0).sqrt() - 2.0 * ln_n.ln().sqrt();
        // NaN bounds (n below e^e) also land here
        if !(lower < upper) {
            return Err(Error::EmptyInterval { n, lower, upper });
        }
        Ok(IntervalA2 { lower, upper })
    }

    pub fn contains(&self, x: f64) -> bool {
        x >= self.lower && x <= self.upper
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct UniformityReport {
    pub n: usize,
    pub n1: usize,
    pub m0: f64,
    pub reps: usize,
    pub interval: IntervalA2,
    /// Fraction of replications with `|t_hat| in interval`.
    pub in_interval_fraction: f64,
    /// KS distance of the in-interval `|t_hat|` to the uniform law on the
    /// interval; absent when no replication landed inside.
    pub ks_distance: Option<f64>,
}

/// Null-simulation check that the `D1` location estimate spreads uniformly
/// over `A_{2,n1}`.
pub fn that_uniformity_report(n: usize, m0: f64, reps: usize, seed: u64) -> Result<UniformityReport> {
    let (_, n1) = SplitConfig::new(m0)?.sizes(n)?;
    let interval = IntervalA2::for_n(n1)?;
    uniformity_report_on(interval, n, m0, reps, seed)
}

/// [`that_uniformity_report`] against a caller-chosen interval.
pub fn uniformity_report_on(
    interval: IntervalA2,
    n: usize,
    m0: f64,
    reps: usize,
    seed: u64,
) -> Result<UniformityReport> {
    let config = SplitConfig::new(m0)?;
    let (n0, n1) = config.sizes(n)?;
    let abs_t: Vec<f64> = (0..reps as u64)
        .into_par_iter()
        .map(|r| {
            let draws = BaseDraws::generate(n, &mut stream_rng(seed, r));
            let fit = lrt_contaminated(&draws.normals[n0..])?;
            // a null fit has no location
            Ok(if fit.lambda > 0.0 {
                fit.t_hat.unwrap_or(0.0).abs()
            } else {
                f64::NAN
            })
        })
        .collect::<Result<_>>()?;
    let inside: Vec<f64> = abs_t.iter().copied().filter(|&x| interval.contains(x)).collect();
    let width = interval.upper - interval.lower;
    let ks_distance = ks_distance(&inside, |x| ((x - interval.lower) / width).clamp(0.0, 1.0));
    Ok(UniformityReport {
        n,
        n1,
        m0,
        reps,
        interval,
        in_interval_fraction: if reps == 0 {
            0.0
        } else {
            inside.len() as f64 / reps as f64
        },
        ks_distance,
    })
}

/// Statistic whose null distribution is summarized.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum NullStatistic {
    /// Classical statistic, standardized against `exp(-exp(-x/2))`.
    Lrt,
    /// Supremum `M_n`, standardized against `exp(-exp(-x))`.
    Supremum,
    /// Split statistic, standardized against `N(0, 1)`.
    Split,
}

impl fmt::Display for NullStatistic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            NullStatistic::Lrt => "lrt",
            NullStatistic::Supremum => "supremum",
            NullStatistic::Split => "split",
        })
    }
}

impl FromStr for NullStatistic {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "lrt" => Ok(NullStatistic::Lrt),
            "supremum" | "sup" | "m" => Ok(NullStatistic::Supremum),
            "split" | "slrt" => Ok(NullStatistic::Split),
            other => Err(Error::Parse(format!("unknown statistic `{other}`"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NullDraw {
    pub rep: u64,
    pub statistic: f64,
    pub standardized: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NullSummary {
    pub statistic: NullStatistic,
    pub n: usize,
    pub m0: Option<f64>,
    pub reps: usize,
    pub seed: u64,
    pub mean: f64,
    pub sd: f64,
    pub standardized_mean: f64,
    /// KS distance of the standardized draws to the limit law.
    pub ks_distance: Option<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct NullDistribution {
    pub draws: Vec<NullDraw>,
    pub summary: NullSummary,
}

/// Simulates `reps` standard normal samples of size `n` and records the
/// chosen statistic and its standardization.
pub fn null_distribution(
    statistic: NullStatistic,
    n: usize,
    m0: Option<f64>,
    reps: usize,
    seed: u64,
) -> Result<NullDistribution> {
    lln(n)?;
    let split = match statistic {
        NullStatistic::Split => Some(SplitConfig::new(m0.ok_or(Error::InvalidFraction(f64::NAN))?)?),
        _ => None,
    };
    let draws: Vec<NullDraw> = (0..reps as u64)
        .into_par_iter()
        .map(|rep| {
            let data = BaseDraws::generate(n, &mut stream_rng(seed, rep)).normals;
            let (value, standardized) = match statistic {
                NullStatistic::Lrt => {
                    let l = lrt_contaminated(&data)?.lambda;
                    (l, gumbel_standardize_lambda(l, n)?)
                }
                NullStatistic::Supremum => {
                    let m = process_supremum(&data)?.m_n;
                    (m, gumbel_standardize_m(m, n)?)
                }
                NullStatistic::Split => {
                    let cfg = split.expect("split config");
                    let s = slrt_contaminated_statistic(&data, &cfg)?.statistic;
                    (s, normal_standardize_split(s, n, cfg.m0)?)
                }
            };
            Ok(NullDraw {
                rep,
                statistic: value,
                standardized,
            })
        })
        .collect::<Result<_>>()?;

    let values: Vec<f64> = draws.iter().map(|d| d.statistic).collect();
    let std_values: Vec<f64> = draws.iter().map(|d| d.standardized).collect();
    let cnt = values.len().max(1) as f64;
    let mean = values.iter().sum::<f64>() / cnt;
    let var = values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / (cnt - 1.0).max(1.0);
    let ks = match statistic {
        NullStatistic::Lrt => ks_distance(&std_values, lambda_limit_cdf),
        NullStatistic::Supremum => ks_distance(&std_values, gumbel_cdf),
        NullStatistic::Split => ks_distance(&std_values, normal_cdf),
    };
    Ok(NullDistribution {
        summary: NullSummary {
            statistic,
            n,
            m0: split.map(|c| c.m0),
            reps,
            seed,
            mean,
            sd: var.sqrt(),
            standardized_mean: std_values.iter().sum::<f64>() / cnt,
            ks_distance: ks,
        },
        draws,
    })
}

impl NullDistribution {
    /// CSV with columns `rep,statistic,standardized`.
    pub fn write_csv<W: Write>(&self, writer: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(writer);
        for d in &self.draws {
            w.serialize(d)?;
        }
        w.flush()?;
        Ok(())
    }
}
