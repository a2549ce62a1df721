//! Monte Carlo engine for rejection-frequency tables.
//!
//! Replication `r` reads its random numbers from stream `r` of the
//! experiment seed. One set of base draws per replication is shared by every
//! drift constant and every method, so comparisons across methods and across
//! `gamma` are paired.

use std::collections::BTreeMap;
use std::fmt;
use std::io::{Read, Write};
use std::str::FromStr;
use std::time::Instant;

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::likelihood::{lrt_contaminated, lrt_two_mean, DEFAULT_RESTARTS};
use crate::model::{AlternativeScenario, BaseDraws, CaseId};
use crate::rng::stream_rng;
use crate::universal::{
    slrt_contaminated_statistic, slrt_two_mean_statistic, threshold, SplitConfig, ThresholdRule,
};

/// Drift constants used in the reference tables.
pub const TABLE_GAMMAS: [f64; 5] = [0.0, 0.5, 1.0, 2.0, 4.0];
/// Split fractions used in the reference tables.
pub const TABLE_M0: [f64; 3] = [0.4, 0.5, 0.6];
/// Replications behind each reference cell.
pub const TABLE_REPS: usize = 1000;

const REFERENCE_CSV: &str = include_str!("../fixtures/reference.csv");

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "UPPERCASE")]
pub enum MethodKind {
    Lrt,
    Slrt,
}

impl fmt::Display for MethodKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            MethodKind::Lrt => "LRT",
            MethodKind::Slrt => "SLRT",
        })
    }
}

impl FromStr for MethodKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "lrt" => Ok(MethodKind::Lrt),
            "slrt" => Ok(MethodKind::Slrt),
            other => Err(Error::Parse(format!("unknown method `{other}`"))),
        }
    }
}

/// A test procedure: statistic plus decision rule.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MethodSpec {
    pub kind: MethodKind,
    /// Split fraction; required for SLRT.
    pub m0: Option<f64>,
    pub rule: ThresholdRule,
}

impl MethodSpec {
    pub fn lrt() -> Self {
        MethodSpec {
            kind: MethodKind::Lrt,
            m0: None,
            rule: ThresholdRule::AsymptoticLrt,
        }
    }

    pub fn slrt(m0: f64, rule: ThresholdRule) -> Self {
        MethodSpec {
            kind: MethodKind::Slrt,
            m0: Some(m0),
            rule,
        }
    }

    /// The classical test plus both split rules at each `m0`.
    pub fn table_set(m0s: &[f64]) -> Vec<MethodSpec> {
        let mut methods = vec![MethodSpec::lrt()];
        for &m0 in m0s {
            methods.push(MethodSpec::slrt(m0, ThresholdRule::Universal));
            methods.push(MethodSpec::slrt(m0, ThresholdRule::AsymptoticSlrt));
        }
        methods
    }

    fn statistic_key(&self) -> StatKey {
        StatKey {
            kind: self.kind,
            m0_bits: self.m0.map(f64::to_bits),
        }
    }
}

/// Identifies a statistic shared by methods that differ only in their rule.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
struct StatKey {
    kind: MethodKind,
    m0_bits: Option<u64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentSpec {
    /// Case, `n` and contiguous location; the drift comes from `gamma_list`.
    pub scenario: AlternativeScenario,
    pub gamma_list: Vec<f64>,
    pub methods: Vec<MethodSpec>,
    pub reps: usize,
    pub alpha: f64,
    pub seed: u64,
    /// EM starting points for two-mean fits.
    pub em_restarts: usize,
    /// Worker threads; `None` uses the global pool.
    pub threads: Option<usize>,
}

impl ExperimentSpec {
    /// The layout of one reference table.
    pub fn table(case: CaseId, n: usize, reps: usize, seed: u64) -> Self {
        ExperimentSpec {
            scenario: AlternativeScenario::new(case, 0.0, n),
            gamma_list: TABLE_GAMMAS.to_vec(),
            methods: MethodSpec::table_set(&TABLE_M0),
            reps,
            alpha: 0.05,
            seed,
            em_restarts: DEFAULT_RESTARTS,
            threads: None,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.reps == 0 {
            return Err(Error::InvalidExperiment("reps must be at least 1".into()));
        }
        if self.gamma_list.is_empty() {
            return Err(Error::InvalidExperiment("gamma list is empty".into()));
        }
        if self.methods.is_empty() {
            return Err(Error::InvalidExperiment("no methods".into()));
        }
        if !(self.alpha > 0.0 && self.alpha < 1.0) {
            return Err(Error::InvalidLevel(self.alpha));
        }
        for m in &self.methods {
            match (m.kind, m.m0) {
                (MethodKind::Slrt, None) => {
                    return Err(Error::InvalidExperiment("SLRT needs a split fraction".into()))
                }
                (MethodKind::Slrt, Some(m0)) => {
                    SplitConfig::new(m0)?.sizes(self.scenario.n)?;
                }
                (MethodKind::Lrt, _) => {}
            }
        }
        Ok(())
    }
}

/// Statistics and decisions of one replication, indexed `[gamma][method]`.
#[derive(Debug, Clone, PartialEq)]
pub struct ReplicationOutcome {
    pub rep: u64,
    pub statistics: Vec<Vec<f64>>,
    pub rejects: Vec<Vec<bool>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReportRow {
    pub case: CaseId,
    pub method: MethodKind,
    pub m0: Option<f64>,
    pub rule: ThresholdRule,
    pub gamma: f64,
    pub rejections: usize,
    pub frequency: f64,
    pub se: f64,
    pub reps: usize,
    pub seed: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimReport {
    pub case: CaseId,
    pub n: usize,
    pub alpha: f64,
    pub reps: usize,
    pub seed: u64,
    pub rows: Vec<ReportRow>,
    pub wall_time_secs: f64,
}

/// `k sqrt(f (1 - f) / reps)`.
pub fn mc_tolerance(frequency: f64, reps: usize, k: f64) -> f64 {
    if reps == 0 {
        return 0.0;
    }
    k * (frequency * (1.0 - frequency) / reps as f64).max(0.0).sqrt()
}

/// Per-replication work: one set of base draws, every gamma, every statistic.
fn run_replication(spec: &ExperimentSpec, thresholds: &[f64], rep: u64) -> Result<ReplicationOutcome> {
    let n = spec.scenario.n;
    let mut rng = stream_rng(spec.seed, rep);
    let draws = BaseDraws::generate(n, &mut rng);
    let fit_seed: u64 = rng.random();
    let two_mean = spec.scenario.case.is_two_mean();

    let mut keys: Vec<StatKey> = spec.methods.iter().map(MethodSpec::statistic_key).collect();
    keys.sort();
    keys.dedup();

    let mut statistics = Vec::with_capacity(spec.gamma_list.len());
    let mut rejects = Vec::with_capacity(spec.gamma_list.len());
    for &gamma in &spec.gamma_list {
        let annotate = |e: Error| Error::Replication {
            gamma,
            rep,
            source: Box::new(e),
        };
        let resolved = spec.scenario.with_gamma(gamma).resolve().map_err(annotate)?;
        let data = draws.realize(&resolved);

        let mut values: BTreeMap<StatKey, f64> = BTreeMap::new();
        for key in &keys {
            let value = match (key.kind, key.m0_bits.map(f64::from_bits)) {
                (MethodKind::Lrt, _) if two_mean => lrt_two_mean(&data, spec.em_restarts, fit_seed).map(|f| f.lambda),
                (MethodKind::Lrt, _) => lrt_contaminated(&data).map(|f| f.lambda),
                (MethodKind::Slrt, m0) => {
                    let config = SplitConfig::new(m0.unwrap_or(f64::NAN)).map_err(annotate)?;
                    if two_mean {
                        slrt_two_mean_statistic(&data, &config, spec.em_restarts, fit_seed).map(|s| s.statistic)
                    } else {
                        slrt_contaminated_statistic(&data, &config).map(|s| s.statistic)
                    }
                }
            }
            .map_err(annotate)?;
            values.insert(*key, value);
        }

        let stats: Vec<f64> = spec.methods.iter().map(|m| values[&m.statistic_key()]).collect();
        let rej = stats.iter().zip(thresholds).map(|(s, c)| s > c).collect();
        statistics.push(stats);
        rejects.push(rej);
    }
    Ok(ReplicationOutcome {
        rep,
        statistics,
        rejects,
    })
}

/// Threshold of every method at the experiment's `n` and `alpha`.
pub fn method_thresholds(spec: &ExperimentSpec) -> Result<Vec<f64>> {
    spec.methods
        .iter()
        .map(|m| threshold(m.rule, spec.scenario.n, spec.alpha, m.m0))
        .collect()
}

/// Runs the experiment and keeps every replication's statistics.
pub fn run_experiment_with_outcomes(spec: &ExperimentSpec) -> Result<(SimReport, Vec<ReplicationOutcome>)> {
    spec.validate()?;
    let thresholds = method_thresholds(spec)?;
    let start = Instant::now();
    let work = || -> Result<Vec<ReplicationOutcome>> {
        (0..spec.reps as u64)
            .into_par_iter()
            .map(|r| run_replication(spec, &thresholds, r))
            .collect()
    };
    let outcomes = match spec.threads {
        Some(k) => rayon::ThreadPoolBuilder::new()
            .num_threads(k)
            .build()
            .map_err(|e| Error::InvalidExperiment(format!("thread pool: {e}")))?
            .install(work)?,
        None => work()?,
    };

    let mut rows = Vec::with_capacity(spec.gamma_list.len() * spec.methods.len());
    for (gi, &gamma) in spec.gamma_list.iter().enumerate() {
        for (mi, method) in spec.methods.iter().enumerate() {
            let rejections = outcomes.iter().filter(|o| o.rejects[gi][mi]).count();
            let frequency = rejections as f64 / spec.reps as f64;
            rows.push(ReportRow {
                case: spec.scenario.case,
                method: method.kind,
                m0: method.m0,
                rule: method.rule,
                gamma,
                rejections,
                frequency,
                se: mc_tolerance(frequency, spec.reps, 1.0),
                reps: spec.reps,
                seed: spec.seed,
            });
        }
    }
    let report = SimReport {
        case: spec.scenario.case,
        n: spec.scenario.n,
        alpha: spec.alpha,
        reps: spec.reps,
        seed: spec.seed,
        rows,
        wall_time_secs: start.elapsed().as_secs_f64(),
    };
    Ok((report, outcomes))
}

pub fn run_experiment(spec: &ExperimentSpec) -> Result<SimReport> {
    run_experiment_with_outcomes(spec).map(|(report, _)| report)
}

#[derive(Debug, Serialize)]
struct CsvRow {
    case: String,
    method: String,
    m0: Option<f64>,
    rule: String,
    gamma: f64,
    frequency: f64,
    se: f64,
    reps: usize,
    seed: u64,
}

impl SimReport {
    /// CSV with columns `case,method,m0,rule,gamma,frequency,se,reps,seed`.
    pub fn write_csv<W: Write>(&self, writer: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(writer);
        for row in &self.rows {
            w.serialize(CsvRow {
                case: row.case.to_string(),
                method: row.method.to_string(),
                m0: row.m0,
                rule: row.rule.to_string(),
                gamma: row.gamma,
                frequency: row.frequency,
                se: row.se,
                reps: row.reps,
                seed: row.seed,
            })?;
        }
        w.flush()?;
        Ok(())
    }

    pub fn to_csv_string(&self) -> Result<String> {
        let mut buf = Vec::new();
        self.write_csv(&mut buf)?;
        Ok(String::from_utf8(buf).expect("csv output is utf-8"))
    }

    pub fn row(&self, method: MethodKind, m0: Option<f64>, rule: ThresholdRule, gamma: f64) -> Option<&ReportRow> {
        self.rows
            .iter()
            .find(|r| r.method == method && same_m0(r.m0, m0) && r.rule == rule && r.gamma == gamma)
    }
}

fn same_m0(a: Option<f64>, b: Option<f64>) -> bool {
    match (a, b) {
        (None, None) => true,
        (Some(x), Some(y)) => (x - y).abs() < 1e-9,
        _ => false,
    }
}

/// One reference cell.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReferenceRow {
    pub case: String,
    pub method: String,
    pub m0: Option<f64>,
    pub rule: String,
    pub gamma: f64,
    pub frequency: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ReferenceTable {
    pub rows: Vec<ReferenceRow>,
    /// Replications behind each reference cell.
    pub reps: usize,
}

impl ReferenceTable {
    /// Reads `case,method,m0,rule,gamma,frequency` rows.
    pub fn from_reader<R: Read>(reader: R, reps: usize) -> Result<Self> {
        let mut rdr = csv::Reader::from_reader(reader);
        let rows = rdr.deserialize().collect::<std::result::Result<Vec<ReferenceRow>, _>>()?;
        Ok(ReferenceTable { rows, reps })
    }

    pub fn for_case(&self, case: CaseId) -> Vec<&ReferenceRow> {
        let name = case.to_string();
        self.rows.iter().filter(|r| r.case == name).collect()
    }
}

/// The cells of the reference tables for cases (i)-(v).
pub fn bundled_reference() -> ReferenceTable {
    ReferenceTable::from_reader(REFERENCE_CSV.as_bytes(), TABLE_REPS).expect("bundled reference parses")
}

/// Verdict for one table cell.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CellVerdict {
    pub case: CaseId,
    pub method: MethodKind,
    pub m0: Option<f64>,
    pub rule: ThresholdRule,
    pub gamma: f64,
    pub observed: f64,
    pub reference: f64,
    /// Allowed absolute difference.
    pub band: f64,
    pub pass: bool,
}

/// Compares every report row with its reference cell. Both sides are Monte
/// Carlo estimates, so the band is the sum of their 3-SE half-widths.
pub fn compare_to_reference(report: &SimReport, reference: &ReferenceTable) -> Result<Vec<CellVerdict>> {
    let case_name = report.case.to_string();
    report
        .rows
        .iter()
        .map(|row| {
            let method = row.method.to_string();
            let rule = row.rule.to_string();
            let cell = reference
                .rows
                .iter()
                .find(|r| {
                    r.case == case_name
                        && r.method.eq_ignore_ascii_case(&method)
                        && r.rule == rule
                        && same_m0(r.m0, row.m0)
                        && (r.gamma - row.gamma).abs() < 1e-9
                })
                .ok_or_else(|| {
                    Error::KeyMismatch(format!(
                        "no reference cell for case {case_name}, {method}, m0 {:?}, {rule}, gamma {}",
                        row.m0, row.gamma
                    ))
                })?;
            let band = mc_tolerance(cell.frequency, reference.reps, 3.0) + mc_tolerance(row.frequency, row.reps, 3.0);
            Ok(CellVerdict {
                case: row.case,
                method: row.method,
                m0: row.m0,
                rule: row.rule,
                gamma: row.gamma,
                observed: row.frequency,
                reference: cell.frequency,
                band,
                pass: (row.frequency - cell.frequency).abs() <= band,
            })
        })
        .collect()
}

/// JSON summary of a report, with verdicts when a comparison was made.
pub fn report_json(report: &SimReport, verdicts: Option<&[CellVerdict]>) -> Result<String> {
    #[derive(Serialize)]
    struct Summary<'a> {
        report: &'a SimReport,
        #[serde(skip_serializing_if = "Option::is_none")]
        verdicts: Option<&'a [CellVerdict]>,
        #[serde(skip_serializing_if = "Option::is_none")]
        all_pass: Option<bool>,
    }
    Ok(serde_json::to_string_pretty(&Summary {
        report,
        verdicts,
        all_pass: verdicts.map(|v| v.iter().all(|c| c.pass)),
    })?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn tolerance_examples() {
        assert_relative_eq!(mc_tolerance(0.5, 1000, 3.0), 0.047_434_164_902_525_69, epsilon = 1e-15);
        assert_relative_eq!(mc_tolerance(0.05, 1000, 3.0), 0.020_676_073_128_135_33, epsilon = 1e-15);
        assert_eq!(mc_tolerance(0.0, 1000, 3.0), 0.0);
        assert_eq!(mc_tolerance(1.0, 1000, 3.0), 0.0);
    }

    #[test]
    fn bundled_reference_covers_five_tables() {
        let r = bundled_reference();
        assert_eq!(r.rows.len(), 5 * 5 * 7);
        for case in [CaseId::I, CaseId::II, CaseId::III, CaseId::IV, CaseId::V] {
            assert_eq!(r.for_case(case).len(), 35);
        }
        let cell = r
            .rows
            .iter()
            .find(|c| c.case == "i" && c.method == "SLRT" && c.m0 == Some(0.5) && c.rule == "universal" && c.gamma == 4.0)
            .unwrap();
        assert_eq!(cell.frequency, 0.847);
    }

    fn fake_report(freqs: &[(f64, f64)], reps: usize) -> SimReport {
        SimReport {
            case: CaseId::I,
            n: 1000,
            alpha: 0.05,
            reps,
            seed: 0,
            rows: freqs
                .iter()
                .map(|&(gamma, f)| ReportRow {
                    case: CaseId::I,
                    method: MethodKind::Slrt,
                    m0: Some(0.5),
                    rule: ThresholdRule::Universal,
                    gamma,
                    rejections: (f * reps as f64).round() as usize,
                    frequency: f,
                    se: mc_tolerance(f, reps, 1.0),
                    reps,
                    seed: 0,
                })
                .collect(),
            wall_time_secs: 0.0,
        }
    }

    #[test]
    fn comparison_bands() {
        let reference = bundled_reference();
        let v = compare_to_reference(&fake_report(&[(4.0, 0.862)], 1000), &reference).unwrap();
        assert!(v[0].pass);
        assert!((v[0].band - 0.067).abs() < 0.002);
        let v = compare_to_reference(&fake_report(&[(0.0, 0.30)], 1000), &reference).unwrap();
        assert!(!v[0].pass);
        let identical = fake_report(&[(0.0, 0.002), (0.5, 0.007), (1.0, 0.024), (2.0, 0.218), (4.0, 0.847)], 1000);
        assert!(compare_to_reference(&identical, &reference).unwrap().iter().all(|c| c.pass));
        let missing = fake_report(&[(3.0, 0.5)], 1000);
        assert!(matches!(compare_to_reference(&missing, &reference), Err(Error::KeyMismatch(_))));
    }

    #[test]
    fn single_replication_is_binary() {
        let mut spec = ExperimentSpec::table(CaseId::I, 200, 1, 5);
        spec.gamma_list = vec![0.0, 4.0];
        let report = run_experiment(&spec).unwrap();
        for row in &report.rows {
            assert!(row.frequency == 0.0 || row.frequency == 1.0);
            assert_eq!(row.se, 0.0);
        }
    }

    #[test]
    fn invalid_specs() {
        let mut spec = ExperimentSpec::table(CaseId::I, 200, 0, 5);
        assert!(matches!(run_experiment(&spec), Err(Error::InvalidExperiment(_))));
        spec.reps = 3;
        spec.gamma_list = vec![100.0];
        match run_experiment(&spec) {
            Err(Error::Replication { gamma, source, .. }) => {
                assert_eq!(gamma, 100.0);
                assert!(matches!(*source, Error::InvalidScenario(_)));
            }
            other => panic!("{other:?}"),
        }
    }
}
