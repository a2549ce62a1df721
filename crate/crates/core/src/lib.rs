//! Likelihood ratio and split likelihood ratio tests for homogeneity in
//! Gaussian mixtures, with a Monte Carlo engine for size and power studies.
//!
//! Two testing problems are covered:
//!
//! * `N(0,1)` against the contaminated mixture `(1-p) N(0,1) + p N(t,1)`;
//! * `N(mu,1)` against the two-mean mixture `(1-p) N(t1,1) + p N(t2,1)`.
//!
//! For each, the classical statistic is compared with an extreme-value
//! threshold and the split statistic with either the universal threshold
//! `-2 ln(alpha)` or a normal-limit threshold.

pub mod config;
pub mod diagnostics;
pub mod error;
pub mod likelihood;
pub mod model;
pub mod optimize;
pub mod rng;
pub mod simulation;
pub mod universal;

pub use error::{Error, Result};
pub use likelihood::{
    em_fit_two_mean, lrt_contaminated, lrt_two_mean, profile_weight, FittedParams, MleResult, ProfilePoint,
};
pub use model::{AlternativeScenario, CaseId, ContaminatedParams, ResolvedScenario, Sample, TwoMeanParams};
pub use simulation::{
    compare_to_reference, CellVerdict, run_experiment, ExperimentSpec, MethodKind, MethodSpec, SimReport,
};
pub use universal::{SplitConfig, TestResult, ThresholdRule};
