use proptest::prelude::*;
use vrsda_core::linesearch::LineSearchConfig;
use vrsda_core::problems::{make_bilinear, make_quadratic};
use vrsda_core::solvers::{run, SolverConfig, SolverKind};
use vrsda_core::Point;

fn point() -> impl Strategy<Value = Point> {
    (-3.0f64..3.0, -3.0f64..3.0).prop_map(|(a, b)| Point::new(vec![a, b]).unwrap())
}

fn kind() -> impl Strategy<Value = SolverKind> {
    prop::sample::select(SolverKind::ALL.to_vec())
}

fn config(kind: SolverKind, budget: u64, seed: u64) -> SolverConfig {
    let cfg = SolverConfig::new(kind, budget, seed);
    match kind {
        SolverKind::Sgda | SolverKind::Seg => cfg.with_eta(0.1),
        SolverKind::Adam => cfg.with_eta(0.01),
        _ => cfg,
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn line_search_steps_lie_on_the_lattice(z0 in point(), seed in any::<u64>(), c in 0.5f64..3.0, beta in 0.2f64..0.9) {
        let p = make_quadratic(0.5, 2.25).unwrap();
        let ls = LineSearchConfig::new(c, beta, 0.8);
        for kind in [SolverKind::VrSdaA, SolverKind::SdaA] {
            let tr = run(&p, &z0, &SolverConfig::new(kind, 300, seed).with_line_search(ls)).unwrap();
            for r in &tr.records {
                prop_assert_eq!(r.eta, ls.step_at(r.backtracks));
                prop_assert!(r.eta >= ls.eta_floor);
                prop_assert!(r.backtracks <= ls.max_backtracks);
            }
        }
    }

    #[test]
    fn oracle_calls_add_up(z0 in point(), seed in any::<u64>(), kind in kind(), budget in 1u64..400) {
        let p = make_bilinear(2.25).unwrap();
        let tr = run(&p, &z0, &config(kind, budget, seed)).unwrap();
        let mut total = 0;
        for (i, r) in tr.records.iter().enumerate() {
            total += r.calls;
            prop_assert_eq!(r.t, i as u64);
            prop_assert_eq!(r.oracle_calls, total + u64::from(matches!(kind, SolverKind::VrSdaA | SolverKind::VrSdaFixed)));
            let expected = match kind {
                SolverKind::Sgda | SolverKind::Adam => 1,
                SolverKind::Seg | SolverKind::VrSdaFixed => 2,
                // One probe per lattice point tried, none when d = 0.
                SolverKind::VrSdaA => 2 + u64::from(r.backtracks) + 1,
                SolverKind::SdaA => 1 + u64::from(r.backtracks) + 1,
            };
            prop_assert_eq!(r.calls, expected);
        }
        // The loop stops at the first iteration that reaches the budget.
        if !tr.diverged {
            prop_assert!(tr.oracle_calls() >= budget);
            if tr.records.len() > 1 {
                prop_assert!(tr.records[tr.records.len() - 2].oracle_calls < budget);
            }
        }
    }

    #[test]
    fn diagnostics_columns_are_consistent(z0 in point(), seed in any::<u64>(), kind in kind()) {
        let p = make_quadratic(0.5, 1.0).unwrap();
        let tr = run(&p, &z0, &config(kind, 200, seed)).unwrap();
        for r in &tr.records {
            prop_assert!(r.merit >= 0.0 && r.est_err >= 0.0);
            prop_assert!((r.merit - 0.5 * r.op_norm * r.op_norm).abs() <= 1e-12 * r.merit.max(1.0));
            if r.eta > 0.0 {
                prop_assert_eq!(r.phi, r.merit + r.est_err / r.eta);
            }
            prop_assert!(r.alpha > 0.0 && r.alpha <= 1.0);
        }
        prop_assert!(tr.min_norm <= z0.norm() && z0.norm() <= tr.max_norm);
    }

    #[test]
    fn runs_are_prefixes_of_longer_runs(z0 in point(), seed in any::<u64>(), kind in kind(), budget in 2u64..300) {
        let p = make_bilinear(2.25).unwrap();
        let short = run(&p, &z0, &config(kind, budget, seed).with_path()).unwrap();
        let long = run(&p, &z0, &config(kind, 2 * budget, seed).with_path()).unwrap();
        prop_assert_eq!(&short.records[..], &long.records[..short.records.len()]);
        prop_assert_eq!(&short.path[..], &long.path[..short.path.len()]);
    }

    #[test]
    fn identical_inputs_give_identical_traces(z0 in point(), seed in any::<u64>(), kind in kind()) {
        let p = make_quadratic(0.5, 2.25).unwrap();
        let cfg = config(kind, 150, seed).with_path().with_certificates();
        prop_assert_eq!(run(&p, &z0, &cfg).unwrap(), run(&p, &z0, &cfg).unwrap());
    }
}

#[test]
fn zero_noise_fixed_step_matches_sgda_when_momentum_is_one() {
    // With σ² = 0 every sample equals the population operator, so STORM's
    // direction is exact and fixed-step VR-SDA is plain descent-ascent.
    let p = make_quadratic(0.5, 0.0).unwrap();
    let z0 = Point::new(vec![1.0, -1.0]).unwrap();
    let a = run(
        &p,
        &z0,
        &SolverConfig::new(SolverKind::Sgda, 100, 0).with_eta(0.2).with_path(),
    )
    .unwrap();
    let b = run(
        &p,
        &z0,
        &SolverConfig::new(SolverKind::VrSdaFixed, 201, 0)
            .with_eta(0.2)
            .with_path(),
    )
    .unwrap();
    assert_eq!(a.path.len(), b.path.len());
    for (x, y) in a.path.iter().zip(&b.path) {
        assert!((x.as_vector() - y.as_vector()).norm() <= 1e-14);
    }
}
