use accbound::catalog::{empirical_profile_with_errors, moment_profile, sample_iid, DistributionSpec};
use accbound::ci::two_sided;
use accbound::rng::StreamKey;
use rand::Rng;

#[test]
fn empirical_profile_within_three_se() {
    let cases = [
        (DistributionSpec::Rademacher, 1.0),
        (DistributionSpec::Uniform { a: -1.0, b: 1.0 }, 1.0),
        (DistributionSpec::Laplace { scale: 1.0 }, 0.2),
        (DistributionSpec::Gaussian { mean: 0.5, sigma: 1.0 }, 0.5),
        (DistributionSpec::CenteredBernoulli { p: 0.3 }, 1.0),
    ];
    for (i, (dist, delta)) in cases.iter().enumerate() {
        let xs = sample_iid(dist, 1_000_000, 100 + i as u64).unwrap();
        let (emp, se) = empirical_profile_with_errors(&xs, *delta).unwrap();
        let truth = moment_profile(dist, *delta).unwrap();
        let checks = [
            ("mean", emp.mean, truth.mean, se.mean),
            ("second", emp.second_abs_moment, truth.second_abs_moment, se.second_abs_moment),
            ("absexp", emp.abs_exp_moment, truth.abs_exp_moment, se.abs_exp_moment),
            ("k", emp.k_constant, truth.k_constant, se.k_constant),
        ];
        for (name, got, want, err) in checks {
            // Rademacher |X| is constant: zero standard error, exact equality
            let tol = (3.0 * err).max(1e-12 * want.abs().max(1.0));
            assert!((got - want).abs() <= tol, "{dist} {name}: {got} vs {want} (se {err})");
        }
    }
}

// Seeded coverage check of the exact interval: nominal 95% should cover at
// least that often, up to binomial noise over 1000 trials.
#[test]
fn clopper_pearson_covers() {
    let key = StreamKey::new(2024);
    for &(p, n) in &[(0.01, 50u64), (0.3, 40), (0.5, 25), (0.9, 60)] {
        let mut covered = 0;
        for t in 0..1000 {
            let mut rng = key.stream(t);
            let hits = (0..n).filter(|_| rng.random::<f64>() < p).count() as u64;
            let (lo, hi) = two_sided(hits, n, 0.95);
            if lo <= p && p <= hi {
                covered += 1;
            }
        }
        // 0.95 - 3 * sqrt(0.95 * 0.05 / 1000) ~ 0.929
        assert!(covered >= 929, "p={p} n={n}: {covered}/1000");
    }
}
