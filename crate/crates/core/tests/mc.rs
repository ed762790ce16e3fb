use poisson_girsanov::geometry::{HullTransform, PointConfiguration};
use poisson_girsanov::mc::*;

#[test]
fn sampler_matches_laplace_transform() {
    for case in LaplaceCase::standard() {
        let r = verify_laplace(&case, 2.0, 40_000, 3, None).unwrap();
        assert!(
            r.passed(),
            "{}: {} vs {} (z {})",
            case.name,
            r.estimate,
            r.target,
            r.z_score
        );
    }
    let r = verify_mean_count(2.0, 40_000, 4, None).unwrap();
    assert!(r.passed(), "z {}", r.z_score);
}

#[test]
fn zero_shift_estimators_agree_sample_by_sample() {
    let cfg = McConfig::new(2.0, [0.0, 0.0], 2_000, 8, 64).unwrap();
    for f in [
        Functional::F1,
        Functional::F2,
        Functional::F3 {
            b: Functional::UNIT_BOX,
        },
    ] {
        let r = verify_girsanov_functional(f, &cfg).unwrap();
        assert_eq!(r.transformed.estimate, r.plain.estimate);
        assert_eq!(r.paired_std_error, 0.0);
        assert!(r.plain.passed(), "{:?}", f);
    }
}

#[test]
fn small_configurations_have_unit_density() {
    let u = HullTransform::new([0.2, 0.0]).unwrap();
    for pts in [vec![], vec![[0.1, 0.2]], vec![[0.1, 0.2], [-0.5, 0.3]]] {
        let omega = PointConfiguration::new(pts).unwrap();
        let d = girsanov_density(&omega, &u, 2.0, 64).unwrap();
        assert_eq!(d.value, 1.0);
    }
}

#[test]
fn short_unit_run_is_consistent() {
    let cfg = McConfig::new(1.0, [0.1, 0.1], 4_000, 21, 64).unwrap();
    let run = verify_girsanov_unit(&cfg).unwrap();
    assert!(run.report.passed(), "z {}", run.report.z_score);
    assert_eq!(run.report.domain_errors, 0);
    assert_eq!(run.series.len(), 100);
    assert!((run.series.last().unwrap().running_mean - run.report.estimate).abs() < 1e-12);
    let json = serde_json::to_string(&run.report.to_report(false)).unwrap();
    assert!(!json.contains("runtime_ms"));
}

#[test]
fn functional_with_shift_agrees() {
    let cfg = McConfig::new(1.0, [0.15, 0.0], 4_000, 5, 64).unwrap();
    let r = verify_girsanov_functional(Functional::F1, &cfg).unwrap();
    assert!(r.passed(), "z {}", r.z_pooled);
}
