use accbound::bounds::{theorem1_log_bound, theorem2_log_bound, RateQuery, TailBoundQuery};
use accbound::catalog::{moment_profile, DistributionSpec};
use accbound::scalar::{exp_bound, partial_series_check, slack_at, tighter_variant, BoundVariant};
use proptest::prelude::*;

fn catalog_member() -> impl Strategy<Value = DistributionSpec> {
    prop_oneof![
        Just(DistributionSpec::Rademacher),
        (-3.0..0.0f64, 0.1..3.0f64).prop_map(|(a, w)| DistributionSpec::Uniform { a, b: a + w }),
        (0.01..0.99f64).prop_map(|p| DistributionSpec::Bernoulli { p }),
        (0.01..0.99f64).prop_map(|p| DistributionSpec::CenteredBernoulli { p }),
        (0.1..1.5f64).prop_map(|scale| DistributionSpec::Laplace { scale }),
        (-1.0..1.0f64, 0.1..2.0f64).prop_map(|(mean, sigma)| DistributionSpec::Gaussian { mean, sigma }),
    ]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(512))]

    #[test]
    fn slack_is_nonnegative(x in -700.0..700.0f64) {
        for v in BoundVariant::ALL {
            let s = slack_at(x, v).unwrap();
            prop_assert!(!s.is_violation(), "{v} at {x}: {:?}", s);
        }
    }

    // Sq is the smaller majorant inside the unit interval, Abs outside it.
    #[test]
    fn crossover_orientation(x in -5.0..5.0f64) {
        let abs = exp_bound(x, BoundVariant::Abs).unwrap();
        let sq = exp_bound(x, BoundVariant::Sq).unwrap();
        match tighter_variant(x) {
            Some(BoundVariant::Sq) => prop_assert!(sq <= abs),
            Some(BoundVariant::Abs) => prop_assert!(abs <= sq),
            None => prop_assert_eq!(abs, sq),
        }
    }

    #[test]
    fn series_partial_sums(x in -10.0..10.0f64, n in 3u32..=30) {
        prop_assert!(partial_series_check(x, n).unwrap().ok);
    }

    #[test]
    fn k_sung_is_twice_k(dist in catalog_member(), delta in 0.01..0.6f64) {
        let p = moment_profile(&dist, delta).unwrap();
        prop_assert_eq!(p.k_sung, 2.0 * p.k_constant);
    }

    #[test]
    fn k_grows_with_delta(dist in catalog_member(), d1 in 0.01..0.3f64, d2 in 0.01..0.3f64) {
        let (lo, hi) = if d1 <= d2 { (d1, d2) } else { (d2, d1) };
        let a = moment_profile(&dist, lo).unwrap();
        let b = moment_profile(&dist, hi).unwrap();
        prop_assert!(a.abs_exp_moment <= b.abs_exp_moment * (1.0 + 1e-12));
        prop_assert!(a.k_constant <= b.k_constant * (1.0 + 1e-12));
    }

    // Jensen: E e^{d|X|} >= e^{d E|X|} >= 1, and E|X|^2 >= (EX)^2.
    #[test]
    fn jensen(dist in catalog_member(), delta in 0.01..0.6f64) {
        let p = moment_profile(&dist, delta).unwrap();
        prop_assert!(p.abs_exp_moment >= 1.0);
        prop_assert!(p.second_abs_moment >= p.mean * p.mean * (1.0 - 1e-12));
        prop_assert!(p.variance() >= -1e-12);
    }

    #[test]
    fn rate_form_is_threshold_form(n in 1u64..100_000, alpha in 0.1..3.0f64, delta in 0.01..2.0f64, k in 0.01..10.0f64, m in 1.0..10.0f64) {
        let (r, eps) = theorem2_log_bound(&RateQuery::new(n, alpha, delta, m, k).unwrap());
        let t = theorem1_log_bound(&TailBoundQuery::new(n, eps, delta, m, k).unwrap()).unwrap();
        let diff = (r.log_bound - t.log_bound).abs();
        // eps itself is rounded at the scale of K; n delta / 2 amplifies that
        let representation = n as f64 * delta / 2.0 * accbound::numeric::ulp(eps);
        prop_assert!(diff <= 1e-12 * r.log_bound.abs().max(1.0) + representation, "{} vs {}", r.log_bound, t.log_bound);
    }
}
