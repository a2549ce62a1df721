use splitlr::config::ScenarioConfig;
use splitlr::model::{AlternativeScenario, CaseId};
use splitlr::simulation::{mc_tolerance, run_experiment_with_outcomes, MethodKind, TABLE_GAMMAS};
use splitlr::{run_experiment, ExperimentSpec, MethodSpec, ThresholdRule};

fn small(case: CaseId, n: usize, reps: usize, threads: usize) -> ExperimentSpec {
    let mut spec = ExperimentSpec::table(case, n, reps, 77);
    spec.threads = Some(threads);
    spec
}

#[test]
fn report_independent_of_worker_count() {
    for (case, n, reps) in [(CaseId::I, 300, 40), (CaseId::V, 200, 6)] {
        let one = run_experiment(&small(case, n, reps, 1)).unwrap().to_csv_string().unwrap();
        let three = run_experiment(&small(case, n, reps, 3)).unwrap().to_csv_string().unwrap();
        assert_eq!(one, three);
    }
}

#[test]
fn frequencies_and_errors_consistent() {
    let report = run_experiment(&small(CaseId::II, 300, 30, 2)).unwrap();
    assert_eq!(report.rows.len(), TABLE_GAMMAS.len() * 7);
    for row in &report.rows {
        assert!((0.0..=1.0).contains(&row.frequency));
        assert_eq!(row.frequency, row.rejections as f64 / 30.0);
        let se = (row.frequency * (1.0 - row.frequency) / 30.0).sqrt();
        assert!((row.se - se).abs() <= 1e-12);
    }
}

#[test]
fn single_replication_is_binary() {
    let report = run_experiment(&small(CaseId::IV, 100, 1, 1)).unwrap();
    for row in &report.rows {
        assert!(row.frequency == 0.0 || row.frequency == 1.0);
        assert_eq!(row.se, 0.0);
    }
}

#[test]
fn universal_rejections_imply_split_rejections() {
    let (report, outcomes) = run_experiment_with_outcomes(&small(CaseId::I, 500, 60, 1)).unwrap();
    let spec = small(CaseId::I, 500, 60, 1);
    let g0 = spec.gamma_list.iter().position(|&g| g == 0.0).unwrap();
    for m0 in [0.4, 0.5, 0.6] {
        let idx = |rule| {
            spec.methods
                .iter()
                .position(|m| *m == MethodSpec::slrt(m0, rule))
                .unwrap()
        };
        let (u, s) = (idx(ThresholdRule::Universal), idx(ThresholdRule::AsymptoticSlrt));
        for o in &outcomes {
            assert!(!o.rejects[g0][u] || o.rejects[g0][s]);
            assert_eq!(o.statistics[g0][u], o.statistics[g0][s]);
        }
        let fu = report.row(MethodKind::Slrt, Some(m0), ThresholdRule::Universal, 0.0).unwrap();
        let fs = report.row(MethodKind::Slrt, Some(m0), ThresholdRule::AsymptoticSlrt, 0.0).unwrap();
        assert!(fu.frequency <= fs.frequency);
    }
}

#[test]
fn config_file_round_trip() {
    let text = "case = \"contig\"\ngamma = [0, 1]\nn = 400\nreps = 5\nseed = 3\nm0 = [0.5]\nmu = 2.0\n";
    let spec = ScenarioConfig::parse(text).unwrap().into_spec().unwrap();
    assert_eq!(spec.scenario, AlternativeScenario::new(CaseId::Contig, 0.0, 400).with_mu(2.0));
    let report = run_experiment(&spec).unwrap();
    assert_eq!(report.rows.len(), 2 * 3);
}

#[test]
fn invalid_experiments_rejected() {
    let mut spec = small(CaseId::I, 100, 0, 1);
    assert!(run_experiment(&spec).is_err());
    spec.reps = 5;
    spec.gamma_list.clear();
    assert!(run_experiment(&spec).is_err());
    // case I at n = 100 with a huge drift has no valid mixing weight
    let mut spec = small(CaseId::I, 100, 2, 1);
    spec.gamma_list = vec![50.0];
    assert!(run_experiment(&spec).is_err());
}

#[test]
fn tolerance_examples() {
    assert!((mc_tolerance(0.5, 1000, 3.0) - 0.047_434).abs() < 1e-6);
    assert!((mc_tolerance(0.05, 1000, 3.0) - 0.020_676).abs() < 1e-6);
    assert_eq!(mc_tolerance(0.0, 1000, 3.0), 0.0);
}
