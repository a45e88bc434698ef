use accbound::catalog::DistributionSpec;
use accbound::families::{
    acceptability_ratio, end_min_m, sample_family, BivariateTable, FamilyKind, FamilySpec,
};
use accbound::montecarlo::{estimate_tail, Sampling};
use accbound::oracle::{exact_sum_pmf, exact_tail};

fn iid(dist: DistributionSpec, n: usize) -> FamilySpec {
    FamilySpec::new(FamilyKind::Iid { dist, n }, 1.0, 1.0).unwrap()
}

#[test]
fn simulated_tail_matches_exact() {
    let cases = [
        (DistributionSpec::Rademacher, 10u32, 0.3),
        (DistributionSpec::Bernoulli { p: 0.2 }, 15, 0.15),
        (
            DistributionSpec::DiscreteTable { values: vec![-1.0, 0.5, 2.0], probs: vec![0.3, 0.5, 0.2] },
            8,
            0.4,
        ),
    ];
    for (i, (dist, n, eps)) in cases.into_iter().enumerate() {
        let pmf = exact_sum_pmf(&dist, n).unwrap();
        let exact = exact_tail(&pmf, n as f64 * dist.mean(), n as f64 * eps);
        let est = estimate_tail(&iid(dist.clone(), n as usize), eps, Sampling::new(200_000, 7 + i as u64)).unwrap();
        let se = (exact * (1.0 - exact) / est.reps as f64).sqrt();
        assert!((est.p_hat - exact).abs() <= 3.0 * se, "{dist}: {} vs {exact}", est.p_hat);
    }
}

#[test]
fn sum_pmf_moments() {
    let cases = [
        DistributionSpec::Rademacher,
        DistributionSpec::Bernoulli { p: 0.37 },
        DistributionSpec::CenteredBernoulli { p: 0.8 },
        DistributionSpec::DiscreteTable { values: vec![-2.0, 0.25, 1.0], probs: vec![0.1, 0.6, 0.3] },
    ];
    for dist in cases {
        for n in [1u32, 5, 20, 64] {
            let pmf = exact_sum_pmf(&dist, n).unwrap();
            let nf = f64::from(n);
            assert!((pmf.total_mass() - 1.0).abs() < 1e-12);
            assert!((pmf.mean() - nf * dist.mean()).abs() < 1e-10 * nf.max(1.0), "{dist} n={n}");
            assert!((pmf.variance() - nf * dist.variance()).abs() < 1e-10 * nf.max(1.0), "{dist} n={n}");
        }
    }
}

#[test]
fn multinomial_counts_sum_to_trials() {
    let spec = FamilySpec::new(
        FamilyKind::MultinomialCoords { trials: 17, probs: vec![0.1, 0.2, 0.3, 0.4], take: 4 },
        1.0,
        1.0,
    )
    .unwrap();
    for seed in 0..200 {
        let x = sample_family(&spec, seed);
        assert_eq!(x.len(), 4);
        assert_eq!(x.iter().sum::<f64>(), 17.0);
        assert!(x.iter().all(|v| *v >= 0.0 && v.fract() == 0.0));
    }
}

#[test]
fn permutation_preserves_values() {
    let values = vec![3.0, -1.0, 0.5, 0.5, 7.0];
    let spec = FamilySpec::new(FamilyKind::RandomPermutation { values: values.clone() }, 1.0, 1.0).unwrap();
    let mut sorted = values;
    sorted.sort_by(f64::total_cmp);
    for seed in 0..50 {
        let mut x = sample_family(&spec, seed);
        x.sort_by(f64::total_cmp);
        assert_eq!(x, sorted);
    }
}

#[test]
fn end_constant_invariant_under_relabeling() {
    let t = BivariateTable {
        support_x: vec![0.0, 1.0, 2.0],
        support_y: vec![-1.0, 4.0],
        joint_probs: vec![vec![0.1, 0.2], vec![0.25, 0.05], vec![0.3, 0.1]],
    };
    let base = end_min_m(&t).unwrap();
    // same joint law listed in a different order
    let shuffled = BivariateTable {
        support_x: vec![2.0, 0.0, 1.0],
        support_y: vec![4.0, -1.0],
        joint_probs: vec![vec![0.1, 0.3], vec![0.2, 0.1], vec![0.05, 0.25]],
    };
    assert!((end_min_m(&shuffled).unwrap() - base).abs() < 1e-15);
    // strictly increasing maps of the supports leave orthant events unchanged
    let mapped = BivariateTable {
        support_x: t.support_x.iter().map(|v| 3.0 * v + 1.0).collect(),
        support_y: t.support_y.iter().map(|v| v * v * v).collect(),
        joint_probs: t.joint_probs.clone(),
    };
    assert!((end_min_m(&mapped).unwrap() - base).abs() < 1e-15);
    assert!(base >= 1.0);
}

#[test]
fn independent_coordinates_ratio_near_one() {
    let spec = iid(DistributionSpec::Uniform { a: -1.0, b: 2.0 }, 6);
    let est = acceptability_ratio(&spec, 0.5, 200_000, 3, 4).unwrap();
    assert!((est.ratio - 1.0).abs() <= 4.0 * est.std_error, "{est:?}");
}
