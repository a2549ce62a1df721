//! Plain-text experiment definitions.
//!
//! ```toml
//! case = "i"
//! gamma = [0, 0.5, 1, 2, 4]
//! n = 1000
//! reps = 1000
//! seed = 7
//! ```
//!
//! Optional keys: `alpha`, `m0` (list), `mu` (contiguous case),
//! `em_restarts`, `threads`.

use serde::Deserialize;

use crate::error::{Error, Result};
use crate::likelihood::DEFAULT_RESTARTS;
use crate::model::{AlternativeScenario, CaseId};
use crate::simulation::{ExperimentSpec, MethodSpec, TABLE_GAMMAS, TABLE_M0};

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioConfig {
    pub case: String,
    #[serde(default)]
    pub gamma: Option<Vec<f64>>,
    #[serde(default)]
    pub n: Option<usize>,
    pub reps: usize,
    pub seed: u64,
    #[serde(default)]
    pub alpha: Option<f64>,
    #[serde(default)]
    pub m0: Option<Vec<f64>>,
    #[serde(default)]
    pub mu: Option<f64>,
    #[serde(default)]
    pub em_restarts: Option<usize>,
    #[serde(default)]
    pub threads: Option<usize>,
}

impl ScenarioConfig {
    pub fn parse(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| Error::Parse(e.to_string()))
    }

    pub fn into_spec(self) -> Result<ExperimentSpec> {
        let case: CaseId = self.case.parse()?;
        let n = self.n.unwrap_or_else(|| case.default_n());
        let m0 = self.m0.unwrap_or_else(|| TABLE_M0.to_vec());
        let spec = ExperimentSpec {
            scenario: AlternativeScenario::new(case, 0.0, n).with_mu(self.mu.unwrap_or(1.0)),
            gamma_list: self.gamma.unwrap_or_else(|| TABLE_GAMMAS.to_vec()),
            methods: MethodSpec::table_set(&m0),
            reps: self.reps,
            alpha: self.alpha.unwrap_or(0.05),
            seed: self.seed,
            em_restarts: self.em_restarts.unwrap_or(DEFAULT_RESTARTS),
            threads: self.threads,
        };
        spec.validate()?;
        Ok(spec)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_minimal_config() {
        let cfg = ScenarioConfig::parse("case = \"iv\"\ngamma = [0, 2]\nn = 500\nreps = 20\nseed = 7\n").unwrap();
        let spec = cfg.into_spec().unwrap();
        assert_eq!(spec.scenario.case, CaseId::IV);
        assert_eq!(spec.scenario.n, 500);
        assert_eq!(spec.gamma_list, vec![0.0, 2.0]);
        assert_eq!(spec.methods.len(), 7);
    }

    #[test]
    fn rejects_unknown_keys_and_bad_values() {
        assert!(ScenarioConfig::parse("case = \"i\"\nreps = 1\nseed = 1\nbogus = 3\n").is_err());
        let cfg = ScenarioConfig::parse("case = \"i\"\nreps = 0\nseed = 1\n").unwrap();
        assert!(cfg.into_spec().is_err());
        let cfg = ScenarioConfig::parse("case = \"vi\"\nreps = 1\nseed = 1\n").unwrap();
        assert!(matches!(cfg.into_spec(), Err(Error::Parse(_))));
    }
}
