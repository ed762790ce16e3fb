use poisson_girsanov::exact::{int, ratio, to_f64};
use poisson_girsanov::finite_oracle::catalog::{
    cyclic_counterexample, standard_processes, tau_cases,
};
use poisson_girsanov::finite_oracle::*;
use poisson_girsanov::moments::central_poisson_moment;
use poisson_girsanov::polynomials::charlier;
use poisson_girsanov::report::Status;
use poisson_girsanov::Error;
use proptest::prelude::*;

fn space3(k: usize) -> CellSpace {
    CellSpace::new(vec![int(1), ratio(3, 4), ratio(1, 2)], k).unwrap()
}

#[test]
fn catalog_statuses() {
    for check in OracleCheck::ALL {
        let space = space3(check.default_trunc());
        for row in run_check(check, &space, OracleOptions::default()).unwrap() {
            println!(
                "{:<40} {:?} gap={:.3e} radius={:.3e}",
                row.check_id,
                row.status,
                row.gap(),
                row.radius
            );
            match row.status {
                Status::Pass => {}
                Status::Flagged => {
                    assert!(row.check_id.contains("cyclic_pair"), "{}", row.check_id)
                }
                Status::Fail => assert!(
                    row.check_id.starts_with("l12.cyclic/cyclic_pair"),
                    "{}",
                    row.check_id
                ),
            }
        }
    }
}

#[test]
fn catalog_has_anticipating_processes() {
    let cat = standard_processes(3);
    assert!(cat.len() >= 6);
    assert!(
        cat.iter()
            .filter(|e| !e.process.is_forward_adapted())
            .count()
            >= 3
    );
}

#[test]
fn deterministic_set_moments_match_central_poisson() {
    let space = space3(16);
    // A = cells {1, 3}, σ(A) = 3/2
    let a = CellProcess::new("det", vec![Expr::int(1), Expr::int(0), Expr::int(1)]);
    for n in 1..=4 {
        let row = check_prop_l221(&space, &Expr::int(1), &a, n, OracleOptions::default()).unwrap();
        assert!(row.passed());
        let target = to_f64(&central_poisson_moment(n, &ratio(3, 2)).unwrap());
        assert!(
            (row.lhs - target).abs() <= row.radius + 1e-12,
            "n={n}: {} vs {target}",
            row.lhs
        );
        assert!((row.rhs - target).abs() <= row.radius + 1e-12);
    }
}

#[test]
fn deterministic_p12_sides_vanish() {
    let space = space3(16);
    let a = CellProcess::new("det", vec![Expr::int(1), Expr::int(0), Expr::int(0)]);
    for k in 1..=3 {
        let row = check_prop_p12(
            &space,
            std::slice::from_ref(&a),
            &[k],
            OracleOptions::default(),
        )
        .unwrap();
        assert!(row.passed());
        assert!(row.lhs.abs() <= row.radius, "k={k}");
        assert_eq!(row.rhs, 0.0);
    }
}

#[test]
fn membership_read_off_foreign_cells_gives_zero_p12() {
    // shifts only ever land in A, which the membership rule never reads
    let space = space3(16);
    let a = CellProcess::new(
        "first_if_second",
        vec![Expr::ind(Cond::Ge(1, 1)), Expr::int(0), Expr::int(0)],
    );
    let row = check_prop_p12(&space, &[a], &[2], OracleOptions::default()).unwrap();
    assert!(row.passed());
    assert!(row.lhs.abs() <= row.radius);
    assert_eq!(row.rhs, 0.0);
}

#[test]
fn self_referential_set_p12_is_nontrivial() {
    let space = space3(16);
    // each cell's membership reads the other cell, so Δ_{s,t} = D_t 1_A(s) D_s 1_A(t) ≠ 0
    let a = CellProcess::new(
        "mutual",
        vec![
            Expr::ind(Cond::Ge(1, 1)),
            Expr::ind(Cond::Ge(0, 1)),
            Expr::int(0),
        ],
    );
    for k in [2, 3] {
        let row = check_prop_p12(
            &space,
            std::slice::from_ref(&a),
            &[k],
            OracleOptions::default(),
        )
        .unwrap();
        assert!(
            row.passed(),
            "k={k} gap {} radius {}",
            row.gap(),
            row.radius
        );
        assert!(row.lhs.abs() > 1e-3, "{}", row.lhs);
    }
}

#[test]
fn l221_with_shift_sensitive_set() {
    let space = space3(16);
    let a = CellProcess::new(
        "chain",
        vec![Expr::int(1), Expr::ind(Cond::Ge(0, 1)), Expr::int(0)],
    );
    for n in 2..=4 {
        let row = check_prop_l221(
            &space,
            &Expr::ind(Cond::Lt(1, 2)),
            &a,
            n,
            OracleOptions::default(),
        )
        .unwrap();
        assert!(
            row.passed(),
            "n={n} gap {} radius {}",
            row.gap(),
            row.radius
        );
    }
}

#[test]
fn overlapping_sets_rejected() {
    let space = space3(6);
    let a = CellProcess::new("a", vec![Expr::int(1), Expr::int(0), Expr::int(0)]);
    let b = CellProcess::new(
        "b",
        vec![Expr::ind(Cond::Ge(2, 1)), Expr::int(0), Expr::int(0)],
    );
    let err = check_prop_p12(&space, &[a, b], &[1, 1], OracleOptions::default()).unwrap_err();
    assert!(matches!(err, Error::Argument(_)));
}

#[test]
fn non_indicator_rejected() {
    let space = space3(6);
    let a = CellProcess::new("a", vec![Expr::int(2), Expr::int(0), Expr::int(0)]);
    assert!(check_prop_l221(&space, &Expr::int(1), &a, 2, OracleOptions::default()).is_err());
}

#[test]
fn multiple_integral_orthogonality() {
    // E[Π C_{k_i}(N_i, σ_i)] = 0 unless all k_i = 0
    let space = space3(20);
    for ks in [
        [1, 0, 0],
        [0, 2, 0],
        [1, 1, 0],
        [2, 0, 1],
        [0, 0, 3],
        [1, 2, 1],
    ] {
        let t = Table::<f64>::from_fn(3, 20, |k| {
            (0..3)
                .map(|i| charlier(ks[i]).eval(&int(k[i] as i64), &space.sigma()[i]))
                .map(|q| to_f64(&q))
                .product()
        });
        let env = (0..3).fold(Envelope::constant(3, 1.0), |e, i| {
            e.mul(
                &Envelope::count(3, i)
                    .add(&Envelope::constant(3, 1.0))
                    .pow(ks[i] as u32),
            )
        });
        let est = space.expectation(&t, &env);
        assert!(
            est.value.abs() <= est.radius + 1e-13,
            "{ks:?}: {}",
            est.value
        );
    }
}

#[test]
fn commutation_is_exact_for_catalog() {
    let space = space3(6);
    for e in standard_processes(3) {
        let row = check_commutation(&space, &e.process).unwrap();
        assert!(row.passed(), "{}", row.check_id);
    }
}

#[test]
fn broken_commutation_is_caught() {
    // a functional outside the expression language: skorohod of u with a wrong σ
    let space = space3(5);
    let u = CellProcess::new("p", vec![Expr::count(1), Expr::int(1), Expr::int(0)]);
    let ut = u.tabulate::<poisson_girsanov::ExactRational>(6);
    let bad = Table::skorohod(&ut, &[int(1), int(1), int(1)]);
    let good = skorohod_delta(&space, &ut);
    assert!(!bad.mismatches(&good, 5).is_empty());
}

#[test]
fn exact_mode_certifies_float_sums() {
    let space = space3(4);
    let opts = OracleOptions { exact: true };
    for e in standard_processes(3).into_iter().take(4) {
        let row = check_duality(&space, &e.process, &e.functional, opts).unwrap();
        let ex = row.exact.as_ref().unwrap();
        assert!(ex.float_discrepancy < 1e-12, "{}", ex.float_discrepancy);
        let row = check_isometry(&space, &e.process, opts).unwrap();
        assert!(row.exact.unwrap().float_discrepancy < 1e-12);
    }
    let err = check_duality(
        &space3(6),
        &standard_processes(3)[0].process,
        &Expr::int(1),
        opts,
    )
    .unwrap_err();
    assert!(matches!(err, Error::Argument(_)));
}

#[test]
fn cyclic_counterexample_detected() {
    let space = space3(12);
    let (tau, g) = cyclic_counterexample(3);
    let rows = check_lemma_l12_and_t11(&space, &tau, &g, 2).unwrap();
    let cyc = &rows[0];
    assert_eq!(cyc.status, Status::Fail);
    assert_eq!(cyc.details["first_order_violations"], 0);
    assert!(cyc.details["cyclic_violations"].as_u64().unwrap() > 0);
    assert_eq!(rows[1].status, Status::Flagged);
    assert!(rows[1].details["nonzero_points"].as_u64().unwrap() > 0);
    // own-point condition holds, so the series identity still applies
    assert_eq!(rows[2].status, Status::Pass);

    let declared = TauRule {
        declared_adapted: true,
        ..tau
    };
    let err = check_lemma_l12_and_t11(&space, &declared, &g, 2).unwrap_err();
    assert!(matches!(err, Error::Configuration(_)));
}

#[test]
fn adapted_rules_have_unit_series() {
    let space = space3(16);
    for (tau, g) in tau_cases(3).into_iter().filter(|(t, _)| t.declared_adapted) {
        let rows = check_lemma_l12_and_t11(&space, &tau, &g, 3).unwrap();
        assert!(rows.iter().all(|r| r.passed()), "{}", tau.name);
        let series = &rows[2];
        assert!((series.rhs - 1.0).abs() < 1e-12);
        assert!((series.lhs - 1.0).abs() <= series.radius);
    }
}

fn small_expr() -> impl Strategy<Value = Expr> {
    let leaf = prop_oneof![
        (-3i64..=3).prop_map(Expr::int),
        (0usize..3).prop_map(Expr::count),
        (0usize..3, 0usize..3).prop_map(|(c, t)| Expr::ind(Cond::Ge(c, t))),
        (0usize..3, 1usize..3).prop_map(|(c, t)| Expr::ind(Cond::Lt(c, t))),
    ];
    leaf.prop_recursive(2, 6, 2, |inner| {
        prop_oneof![
            (inner.clone(), inner.clone()).prop_map(|(a, b)| a + b),
            (inner.clone(), inner.clone()).prop_map(|(a, b)| a * b),
            (inner.clone(), inner).prop_map(|(a, b)| a - b),
        ]
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn zero_mean_for_random_processes(a in small_expr(), b in small_expr(), c in small_expr()) {
        let space = space3(14);
        let u = CellProcess::new("rand", vec![a, b, c]);
        let row = check_zero_mean(&space, &u).unwrap();
        prop_assert!(row.passed(), "gap {} radius {}", row.gap(), row.radius);
    }

    #[test]
    fn product_rule_pointwise(f in small_expr(), g in small_expr()) {
        let space = space3(5);
        prop_assert!(check_product_rule(&space, &f, &g).unwrap().passed());
    }

    #[test]
    fn duality_for_random_processes(a in small_expr(), b in small_expr(), f in small_expr()) {
        let space = space3(14);
        let u = CellProcess::new("rand", vec![a, Expr::int(0), b]);
        let row = check_duality(&space, &u, &f, OracleOptions::default()).unwrap();
        prop_assert!(row.passed(), "gap {} radius {}", row.gap(), row.radius);
        prop_assert!(check_commutation(&space3(5), &u).unwrap().passed());
    }
}
