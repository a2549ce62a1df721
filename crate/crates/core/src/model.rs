//! Mixture densities, samplers and the alternative sequences used in the
//! simulation study.
//!
//! Every sampler goes through the indicator representation
//! `X = X0 + J * shift`, where `X0` is a standard normal draw and `J` a
//! Bernoulli indicator. The base draws are kept separate from the scenario so
//! the same draws can be reused across drift constants.

use std::fmt;
use std::ops::Deref;
use std::str::FromStr;

use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rng::stream_rng;

/// `ln(sqrt(2 pi))`.
pub const LN_SQRT_2PI: f64 = 0.918_938_533_204_672_8;

/// Log-density of `N(mean, 1)` at `x`.
#[inline]
pub fn log_phi(x: f64, mean: f64) -> f64 {
    let d = x - mean;
    -0.5 * d * d - LN_SQRT_2PI
}

/// Numerically stable `ln(exp(a) + exp(b))`.
#[inline]
pub(crate) fn log_add_exp(a: f64, b: f64) -> f64 {
    if a == f64::NEG_INFINITY {
        return b;
    }
    if b == f64::NEG_INFINITY {
        return a;
    }
    let (hi, lo) = if a >= b { (a, b) } else { (b, a) };
    hi + (lo - hi).exp().ln_1p()
}

/// Where a sample came from.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Provenance {
    pub seed: u64,
    pub stream: u64,
    pub scenario: AlternativeScenario,
}

/// An ordered collection of observations.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct Sample {
    pub values: Vec<f64>,
    pub provenance: Option<Provenance>,
}

impl Sample {
    pub fn new(values: Vec<f64>) -> Self {
        Sample {
            values,
            provenance: None,
        }
    }
}

impl From<Vec<f64>> for Sample {
    fn from(values: Vec<f64>) -> Self {
        Sample::new(values)
    }
}

impl Deref for Sample {
    type Target = [f64];

    fn deref(&self) -> &[f64] {
        &self.values
    }
}

/// Contaminated mixture `(1-p) N(0,1) + p N(t,1)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ContaminatedParams {
    pub p: f64,
    pub t: f64,
}

impl ContaminatedParams {
    pub fn new(p: f64, t: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&p) || !t.is_finite() {
            return Err(Error::InvalidParams(format!("p = {p}, t = {t}")));
        }
        Ok(ContaminatedParams { p, t })
    }

    pub fn null() -> Self {
        ContaminatedParams { p: 0.0, t: 0.0 }
    }

    pub fn is_null(&self) -> bool {
        self.p == 0.0 || self.t == 0.0
    }
}

/// Two-mean mixture `(1-p) N(t1,1) + p N(t2,1)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TwoMeanParams {
    pub p: f64,
    pub t1: f64,
    pub t2: f64,
}

impl TwoMeanParams {
    pub fn new(p: f64, t1: f64, t2: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&p) || !t1.is_finite() || !t2.is_finite() {
            return Err(Error::InvalidParams(format!("p = {p}, t1 = {t1}, t2 = {t2}")));
        }
        Ok(TwoMeanParams { p, t1, t2 })
    }

    /// Relabels so that `t1 <= t2`; the density is unchanged.
    pub fn canonical(self) -> Self {
        if self.t1 <= self.t2 {
            self
        } else {
            TwoMeanParams {
                p: 1.0 - self.p,
                t1: self.t2,
                t2: self.t1,
            }
        }
    }
}

/// `log f_{p,t}(x)` for the contaminated mixture.
pub fn log_density_contaminated(params: ContaminatedParams, x: f64) -> f64 {
    let ContaminatedParams { p, t } = params;
    let base = (1.0 - p).ln() + log_phi(x, 0.0);
    let shifted = p.ln() + log_phi(x, t);
    log_add_exp(base, shifted)
}

/// `log f_{p,t1,t2}(x)` for the two-mean mixture.
pub fn log_density_two_mean(params: TwoMeanParams, x: f64) -> f64 {
    let TwoMeanParams { p, t1, t2 } = params;
    log_add_exp((1.0 - p).ln() + log_phi(x, t1), p.ln() + log_phi(x, t2))
}

/// Simulation cases (i)-(v) plus the contiguous alternative.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CaseId {
    I,
    II,
    III,
    IV,
    V,
    Contig,
}

impl CaseId {
    pub const ALL: [CaseId; 6] = [
        CaseId::I,
        CaseId::II,
        CaseId::III,
        CaseId::IV,
        CaseId::V,
        CaseId::Contig,
    ];

    /// Whether data for this case are fitted with the two-mean model.
    pub fn is_two_mean(self) -> bool {
        matches!(self, CaseId::IV | CaseId::V)
    }

    /// Sample size used in the simulation tables.
    pub fn default_n(self) -> usize {
        match self {
            CaseId::III => 10_000_000,
            CaseId::Contig => 10_000,
            _ => 1000,
        }
    }
}

impl fmt::Display for CaseId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            CaseId::I => "i",
            CaseId::II => "ii",
            CaseId::III => "iii",
            CaseId::IV => "iv",
            CaseId::V => "v",
            CaseId::Contig => "contig",
        };
        f.write_str(s)
    }
}

impl FromStr for CaseId {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "i" | "1" => Ok(CaseId::I),
            "ii" | "2" => Ok(CaseId::II),
            "iii" | "3" => Ok(CaseId::III),
            "iv" | "4" => Ok(CaseId::IV),
            "v" | "5" => Ok(CaseId::V),
            "contig" => Ok(CaseId::Contig),
            other => Err(Error::Parse(format!("unknown case id `{other}`"))),
        }
    }
}

/// A point on one of the alternative sequences.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AlternativeScenario {
    pub case: CaseId,
    pub gamma: f64,
    pub n: usize,
    /// Fixed contaminant location for [`CaseId::Contig`]; ignored otherwise.
    pub mu: f64,
}

impl AlternativeScenario {
    pub fn new(case: CaseId, gamma: f64, n: usize) -> Self {
        AlternativeScenario {
            case,
            gamma,
            n,
            mu: 1.0,
        }
    }

    pub fn with_mu(mut self, mu: f64) -> Self {
        self.mu = mu;
        self
    }

    pub fn with_gamma(mut self, gamma: f64) -> Self {
        self.gamma = gamma;
        self
    }

    pub fn resolve(&self) -> Result<ResolvedScenario> {
        resolve_scenario(self)
    }
}

/// Concrete mixture parameters for a scenario.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum ResolvedScenario {
    /// `(1-q) N(0,1) + q N(mu,1)`.
    Contaminated { q: f64, mu: f64 },
    /// `(1-q) N(mu1,1) + q N(mu2,1)`.
    TwoMean { q: f64, mu1: f64, mu2: f64 },
}

impl ResolvedScenario {
    pub fn weight(&self) -> f64 {
        match *self {
            ResolvedScenario::Contaminated { q, .. } | ResolvedScenario::TwoMean { q, .. } => q,
        }
    }

    /// Mean of one draw from the mixture.
    pub fn mean(&self) -> f64 {
        match *self {
            ResolvedScenario::Contaminated { q, mu } => q * mu,
            ResolvedScenario::TwoMean { q, mu1, mu2 } => (1.0 - q) * mu1 + q * mu2,
        }
    }
}

/// Detection-boundary scale `sqrt(ln ln n / n)`.
pub fn boundary_scale(n: usize) -> f64 {
    let n = n as f64;
    (n.ln().ln() / n).sqrt()
}

pub fn resolve_scenario(scenario: &AlternativeScenario) -> Result<ResolvedScenario> {
    let n = scenario.n;
    if n < 3 {
        return Err(Error::DegenerateSize { n, min: 3 });
    }
    let gamma = scenario.gamma;
    if !gamma.is_finite() {
        return Err(Error::InvalidScenario(format!("gamma = {gamma}")));
    }
    let s = boundary_scale(n);
    let resolved = match scenario.case {
        CaseId::I | CaseId::III => {
            let ln_n = (n as f64).ln();
            ResolvedScenario::Contaminated {
                q: gamma * s * ln_n.sqrt(),
                mu: 1.0 / ln_n.sqrt(),
            }
        }
        CaseId::II => ResolvedScenario::Contaminated {
            q: 0.5,
            mu: 2.0 * gamma * s,
        },
        CaseId::IV => ResolvedScenario::TwoMean {
            q: 0.5,
            mu1: -4.0 * gamma * s,
            mu2: 4.0 * gamma * s,
        },
        CaseId::V => ResolvedScenario::TwoMean {
            q: 0.5,
            mu1: -3.0 * gamma * s,
            mu2: 5.0 * gamma * s,
        },
        CaseId::Contig => {
            let mu = scenario.mu;
            if !mu.is_finite() || mu == 0.0 {
                return Err(Error::InvalidScenario(format!("contiguous location mu = {mu}")));
            }
            ResolvedScenario::Contaminated {
                q: gamma / ((n as f64).sqrt() * mu),
                mu,
            }
        }
    };
    let q = resolved.weight();
    if !(0.0..=1.0).contains(&q) {
        return Err(Error::InvalidScenario(format!(
            "case {} with gamma = {gamma}, n = {n} gives mixing weight {q}",
            scenario.case
        )));
    }
    Ok(resolved)
}

/// Standard-normal base draws and uniforms for the Bernoulli indicators.
#[derive(Debug, Clone)]
pub struct BaseDraws {
    pub normals: Vec<f64>,
    pub uniforms: Vec<f64>,
}

impl BaseDraws {
    pub fn generate<R: Rng + ?Sized>(n: usize, rng: &mut R) -> Self {
        let normals = (0..n).map(|_| rng.sample(StandardNormal)).collect();
        let uniforms = (0..n).map(|_| rng.random::<f64>()).collect();
        BaseDraws { normals, uniforms }
    }

    pub fn len(&self) -> usize {
        self.normals.len()
    }

    pub fn is_empty(&self) -> bool {
        self.normals.is_empty()
    }

    /// Indicators `J_i = 1{U_i < q}`.
    pub fn indicators(&self, q: f64) -> Vec<bool> {
        self.uniforms.iter().map(|&u| u < q).collect()
    }

    /// Observations of the resolved mixture built on these draws.
    pub fn realize(&self, resolved: &ResolvedScenario) -> Vec<f64> {
        match *resolved {
            ResolvedScenario::Contaminated { q, mu } => self
                .normals
                .iter()
                .zip(&self.uniforms)
                .map(|(&x0, &u)| if u < q { x0 + mu } else { x0 })
                .collect(),
            ResolvedScenario::TwoMean { q, mu1, mu2 } => self
                .normals
                .iter()
                .zip(&self.uniforms)
                .map(|(&x0, &u)| if u < q { x0 + mu2 } else { x0 + mu1 })
                .collect(),
        }
    }
}

/// Draws `n` observations from the scenario, deterministically in `seed`.
///
/// Uses stream 0 of the seed, the same stream the simulation engine assigns
/// to replication 0.
pub fn sample(scenario: &AlternativeScenario, seed: u64) -> Result<Sample> {
    sample_stream(scenario, seed, 0)
}

pub fn sample_stream(scenario: &AlternativeScenario, seed: u64, stream: u64) -> Result<Sample> {
    let resolved = scenario.resolve()?;
    let mut rng = stream_rng(seed, stream);
    let draws = BaseDraws::generate(scenario.n, &mut rng);
    Ok(Sample {
        values: draws.realize(&resolved),
        provenance: Some(Provenance {
            seed,
            stream,
            scenario: *scenario,
        }),
    })
}
