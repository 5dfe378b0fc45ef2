use lppsd_core::bootstrap::{run_tests, Scheme};
use lppsd_core::lorenz::LinearLpp;
use lppsd_core::{
    generalized_lpp, ksb3_test, lpp_step, pp_plot, ssd_test, t_inf, t_one, Ksb3Config, Sample,
    StatKind, TestConfig,
};
use proptest::prelude::*;

fn sample(max_len: usize) -> impl Strategy<Value = Sample> {
    prop::collection::vec(0.01f64..50.0, 1..max_len).prop_map(|v| Sample::new(v).unwrap())
}

fn kinds() -> [StatKind; 4] {
    [
        StatKind::TInf,
        StatKind::T1,
        StatKind::Tp(2.0),
        StatKind::Tp(3.5),
    ]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    #[test]
    fn lpp_is_monotone_and_bounded(x in sample(60), y in sample(60)) {
        let c = lpp_step(&x, &y);
        prop_assert_eq!(c.n(), x.len());
        prop_assert!(c.counts().windows(2).all(|w| w[0] <= w[1]));
        prop_assert!(c.values().iter().all(|&v| (0.0..=1.0).contains(&v)));
        prop_assert!(c.nu() > 0.0 && c.nu() <= 1.0);
    }

    #[test]
    fn identical_samples_stay_on_or_above_identity(x in sample(60)) {
        let c = lpp_step(&x, &x);
        for k in 1..=x.len() {
            prop_assert!(c.value(k) >= k as f64 / x.len() as f64);
        }
        prop_assert_eq!(t_inf(&c), 0.0);
        prop_assert_eq!(t_one(&x, &x), 0.0);
    }

    #[test]
    fn step_and_linear_agree_at_nodes(x in sample(80), y in sample(80)) {
        let step = lpp_step(&x, &y);
        let lin = LinearLpp::new(&x, &y);
        let m = y.len() as f64;
        for k in 1..=x.len() {
            let p = k as f64 / x.len() as f64;
            prop_assert!((lin.eval(p) - step.value(k)).abs() <= 1.0 / m + 1e-12);
        }
    }

    #[test]
    fn functionals_are_scale_invariant(x in sample(40), y in sample(40), c in prop::sample::select(vec![1e-3, 0.5, 1.0, 7.0, 1e3])) {
        let a = lpp_step(&x, &y);
        let b = lpp_step(&x.scaled(c).unwrap(), &y.scaled(c).unwrap());
        prop_assert_eq!(a.counts(), b.counts());
    }

    #[test]
    fn theta_one_matches_plain_lpp(x in sample(40), y in sample(40)) {
        prop_assert_eq!(generalized_lpp(&x, &y, 1.0).unwrap(), lpp_step(&x, &y));
    }

    #[test]
    fn pp_plot_counts_order_statistics(x in sample(40), y in sample(40)) {
        let pp = pp_plot(&x, &y);
        for (k, &c) in pp.counts().iter().enumerate() {
            let want = y.values().iter().filter(|&&v| v <= x.sorted()[k]).count();
            prop_assert_eq!(c as usize, want);
        }
    }

    #[test]
    fn prop1_positive_part_norms(g in prop::collection::vec(-1.0f64..1.0, 1..50),
                                 h in prop::collection::vec(-1.0f64..1.0, 50),
                                 c in 0.0f64..10.0,
                                 beta in prop::sample::select(vec![0.25, 0.5, 0.75])) {
        let h = &h[..g.len()];
        let tol = 1e-12;
        for kind in kinds() {
            let t = |v: &[f64]| kind.apply(v);
            // 1, 2: zero and non-positive functions
            prop_assert_eq!(t(&vec![0.0; g.len()]), 0.0);
            let neg: Vec<f64> = g.iter().map(|v| -v.abs()).collect();
            prop_assert_eq!(t(&neg), 0.0);
            // 3: positive somewhere
            if g.iter().any(|&v| v > 0.0) {
                prop_assert!(t(&g) > 0.0);
            }
            // 4: Lipschitz in the sup norm
            let sup = g.iter().zip(h).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
            prop_assert!((t(&g) - t(h)).abs() <= sup + tol);
            // 5: positive homogeneity
            let scaled: Vec<f64> = g.iter().map(|v| c * v).collect();
            prop_assert!((t(&scaled) - c * t(&g)).abs() <= tol * (1.0 + c));
            // 6: convexity
            let mix: Vec<f64> = g.iter().zip(h).map(|(a, b)| beta * b + (1.0 - beta) * a).collect();
            prop_assert!(t(&mix) <= beta * t(h) + (1.0 - beta) * t(&g) + tol);
        }
        // 7: monotone in p
        let vals: Vec<f64> = [StatKind::T1, StatKind::Tp(2.0), StatKind::Tp(3.5), StatKind::TInf].iter().map(|k| k.apply(&g)).collect();
        prop_assert!(vals.windows(2).all(|w| w[0] <= w[1] + tol));
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn pvalues_on_lattice_and_reproducible(x in sample(30), y in sample(30), seed in any::<u64>()) {
        let cfg = TestConfig { replicates: 40, seed, ..Default::default() };
        let a = ssd_test(&x, &y, &cfg).unwrap();
        let b = ssd_test(&x, &y, &cfg).unwrap();
        prop_assert_eq!(&a, &b);
        prop_assert_eq!((a.pvalue * 40.0).fract(), 0.0);
        prop_assert_eq!(a.reject, a.pvalue < cfg.alpha);
        prop_assert!(a.statistic.raw >= 0.0);
    }

    #[test]
    fn shared_replicates_match_single_runs(x in sample(30), y in sample(30)) {
        let cfg = TestConfig { replicates: 30, seed: 5, ..Default::default() };
        let stats = [StatKind::TInf, StatKind::T1, StatKind::Tp(2.0)];
        let many = run_tests(&x, &y, &stats, &cfg).unwrap();
        for (kind, out) in stats.iter().zip(&many) {
            let single = ssd_test(&x, &y, &TestConfig { stat: *kind, ..cfg.clone() }).unwrap();
            prop_assert_eq!(&single, out);
        }
    }

    #[test]
    fn ksb3_pvalue_in_unit_interval(x in sample(30), y in sample(30)) {
        for order in [1u8, 2] {
            let out = ksb3_test(&x, &y, &Ksb3Config { order, replicates: 30, ..Default::default() }).unwrap();
            prop_assert!((0.0..=1.0).contains(&out.pvalue));
            prop_assert_eq!(out.replicate_values.len(), 30);
        }
        let n = x.len().min(y.len());
        let xs = Sample::new(x.values()[..n].to_vec()).unwrap();
        let ys = Sample::new(y.values()[..n].to_vec()).unwrap();
        let paired = Ksb3Config { replicates: 10, scheme: Scheme::MatchedPairs, ..Default::default() };
        prop_assert!(ksb3_test(&xs, &ys, &paired).is_ok());
    }
}
