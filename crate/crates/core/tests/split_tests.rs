mod common;

use common::normals;
use splitlr::likelihood::lrt_contaminated;
use splitlr::universal::{
    lrt_test, slrt_contaminated, slrt_contaminated_statistic, slrt_two_mean_statistic, split_statistic_contaminated,
    split_statistic_two_mean, threshold, SplitConfig, ThresholdRule,
};
use splitlr::{FittedParams, TwoMeanParams};

const RULES: [ThresholdRule; 3] = [ThresholdRule::Universal, ThresholdRule::AsymptoticLrt, ThresholdRule::AsymptoticSlrt];

#[test]
fn null_fit_on_fitting_half_gives_zero() {
    // fitting half all zero: no location improves on the null
    let mut data = normals(50, 1);
    data.extend(std::iter::repeat_n(0.0, 50));
    let s = slrt_contaminated_statistic(&data, &SplitConfig::new(0.5).unwrap()).unwrap();
    assert_eq!(s.statistic, 0.0);

    let d0 = normals(30, 2);
    let mean = d0.iter().sum::<f64>() / 30.0;
    let collapsed = FittedParams::TwoMean(TwoMeanParams { p: 0.3, t1: mean, t2: mean });
    assert!(split_statistic_two_mean(&d0, &collapsed).abs() < 1e-10);
}

#[test]
fn statistic_depends_on_fit_only() {
    let d0 = normals(40, 3);
    let a = lrt_contaminated(&[2.0]).unwrap();
    let b = lrt_contaminated(&[2.0, 2.0, 2.0]).unwrap();
    assert_eq!(a.params, b.params);
    assert_eq!(
        split_statistic_contaminated(&d0, &a.params),
        split_statistic_contaminated(&d0, &b.params)
    );
}

#[test]
fn decisions_monotone_in_threshold() {
    for seed in 0..20u64 {
        let mut data = normals(200, seed);
        for x in data.iter_mut().skip(150) {
            *x += 0.15 * seed as f64;
        }
        let cfg = SplitConfig::new(0.5).unwrap();
        let mut split: Vec<_> = RULES
            .iter()
            .map(|&r| slrt_contaminated(&data, &cfg, 0.05, r).unwrap())
            .collect();
        let fit = lrt_contaminated(&data).unwrap();
        let mut full: Vec<_> = RULES
            .iter()
            .map(|&r| lrt_test(&fit, 200, 0.05, r, Some(0.5)).unwrap())
            .collect();
        for results in [&mut split, &mut full] {
            results.sort_by(|a, b| a.threshold.total_cmp(&b.threshold));
            for w in results.windows(2) {
                assert!(w[0].reject || !w[1].reject, "rejected at the larger threshold only");
            }
            for r in results.iter() {
                assert_eq!(r.reject, r.statistic > r.threshold);
            }
        }
        for r in &split {
            assert_eq!(r.e_value, Some((r.statistic / 2.0).exp()));
        }
        assert!(full.iter().all(|r| r.e_value.is_none()));
    }
}

#[test]
fn two_mean_split_needs_two_points_each() {
    let cfg = SplitConfig::new(0.5).unwrap();
    assert!(slrt_two_mean_statistic(&[0.1, 0.2, 0.3], &cfg, 3, 0).is_err());
    assert!(slrt_two_mean_statistic(&[0.1, 0.2, 0.3, 0.4], &cfg, 3, 0).is_ok());
}

#[test]
fn universal_threshold_is_largest_at_table_sizes() {
    for m0 in [0.4, 0.5, 0.6] {
        let u = threshold(ThresholdRule::Universal, 1000, 0.05, Some(m0)).unwrap();
        let s = threshold(ThresholdRule::AsymptoticSlrt, 1000, 0.05, Some(m0)).unwrap();
        assert!(u > s);
    }
}
