//! Fixed inputs for the benchmarks.

use splitlr::model::{sample, AlternativeScenario, CaseId};

/// A case (i) sample at drift `gamma`, always drawn with the same seed.
pub fn contaminated_sample(n: usize, gamma: f64) -> Vec<f64> {
    sample(&AlternativeScenario::new(CaseId::I, gamma, n), 42)
        .expect("valid scenario")
        .values
}

/// A case (iv) sample at drift `gamma`, always drawn with the same seed.
pub fn two_mean_sample(n: usize, gamma: f64) -> Vec<f64> {
    sample(&AlternativeScenario::new(CaseId::IV, gamma, n), 42)
        .expect("valid scenario")
        .values
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn inputs_are_fixed() {
        assert_eq!(contaminated_sample(50, 1.0), contaminated_sample(50, 1.0));
        assert_eq!(two_mean_sample(30, 0.0).len(), 30);
    }
}
