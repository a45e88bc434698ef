//! Built-in cases used when a subcommand is given no explicit inputs.

use accbound::catalog::DistributionSpec;
use accbound::families::{BivariateTable, FamilyKind, FamilySpec};

use crate::config::NamedTable;

/// One member of every catalog kind, all admissible at `delta <= 1`.
pub fn catalog() -> Vec<DistributionSpec> {
    vec![
        DistributionSpec::Rademacher,
        DistributionSpec::Uniform { a: -1.0, b: 1.0 },
        DistributionSpec::Uniform { a: 0.0, b: 2.0 },
        DistributionSpec::Bernoulli { p: 0.3 },
        DistributionSpec::CenteredBernoulli { p: 0.3 },
        DistributionSpec::Laplace { scale: 0.5 },
        DistributionSpec::Gaussian { mean: 0.0, sigma: 1.0 },
        DistributionSpec::Gaussian { mean: 0.5, sigma: 2.0 },
        DistributionSpec::DiscreteTable {
            values: vec![-1.0, 0.0, 2.0],
            probs: vec![0.25, 0.5, 0.25],
        },
    ]
}

pub fn deltas() -> Vec<f64> {
    vec![0.1, 0.5, 1.0]
}

fn family(kind: FamilyKind, delta: f64) -> FamilySpec {
    FamilySpec::new(kind, 1.0, delta).expect("built-in family is valid")
}

pub fn iid_families() -> Vec<FamilySpec> {
    vec![
        family(
            FamilyKind::Iid {
                dist: DistributionSpec::Uniform { a: -1.0, b: 1.0 },
                n: 5,
            },
            1.0,
        ),
        family(
            FamilyKind::Iid {
                dist: DistributionSpec::Rademacher,
                n: 10,
            },
            1.0,
        ),
        family(
            FamilyKind::Iid {
                dist: DistributionSpec::Gaussian { mean: 0.0, sigma: 1.0 },
                n: 4,
            },
            1.0,
        ),
    ]
}

/// Negatively associated families (acceptable with `M = 1`).
pub fn na_families() -> Vec<FamilySpec> {
    vec![
        family(
            FamilyKind::MultinomialCoords {
                trials: 1,
                probs: vec![0.5, 0.5],
                take: 2,
            },
            1.0,
        ),
        family(
            FamilyKind::MultinomialCoords {
                trials: 10,
                probs: vec![0.2, 0.3, 0.5],
                take: 3,
            },
            1.0,
        ),
        family(FamilyKind::RandomPermutation { values: vec![0.0, 1.0] }, 1.0),
        family(
            FamilyKind::RandomPermutation {
                values: vec![1.0, 2.0, 3.0, 4.0, 5.0],
            },
            1.0,
        ),
        family(
            FamilyKind::SrsWithoutReplacement {
                population: (0..10).map(f64::from).collect(),
                draws: 4,
            },
            1.0,
        ),
        family(
            FamilyKind::NegCorrGaussian {
                mean: vec![0.0, 0.0, 0.0],
                covariance: vec![vec![1.0, -0.3, -0.2], vec![-0.3, 1.0, -0.3], vec![-0.2, -0.3, 1.0]],
            },
            1.0,
        ),
    ]
}

pub fn acceptability_families() -> Vec<FamilySpec> {
    let mut v = iid_families();
    v.extend(na_families());
    v
}

pub fn theorem1_families() -> Vec<FamilySpec> {
    vec![
        family(
            FamilyKind::Iid {
                dist: DistributionSpec::Rademacher,
                n: 20,
            },
            0.5,
        ),
        family(
            FamilyKind::Iid {
                dist: DistributionSpec::Bernoulli { p: 0.3 },
                n: 20,
            },
            1.0,
        ),
        family(
            FamilyKind::MultinomialCoords {
                trials: 30,
                probs: vec![0.2, 0.3, 0.5],
                take: 2,
            },
            0.1,
        ),
        family(
            FamilyKind::Iid {
                dist: DistributionSpec::Uniform { a: -1.0, b: 1.0 },
                n: 10,
            },
            0.5,
        ),
        family(
            FamilyKind::RandomPermutation {
                values: vec![-1.0, -0.5, 0.0, 0.5, 1.0],
            },
            0.5,
        ),
    ]
}

fn bernoulli_half() -> (Vec<f64>, Vec<f64>) {
    (vec![0.0, 1.0], vec![0.5, 0.5])
}

pub fn end_tables() -> Vec<NamedTable> {
    let (s, p) = bernoulli_half();
    vec![
        NamedTable {
            name: "product_bernoulli_half".into(),
            table: BivariateTable::product(s.clone(), &p, s.clone(), &p),
            expect: Some(1.0),
        },
        NamedTable {
            name: "product_mixed".into(),
            table: BivariateTable::product(vec![-1.0, 0.0, 2.0], &[0.2, 0.5, 0.3], vec![1.0, 3.0], &[0.6, 0.4]),
            expect: Some(1.0),
        },
        NamedTable {
            name: "comonotone_bernoulli_half".into(),
            table: BivariateTable {
                support_x: s.clone(),
                support_y: s.clone(),
                joint_probs: vec![vec![0.5, 0.0], vec![0.0, 0.5]],
            },
            expect: Some(2.0),
        },
        NamedTable {
            name: "countermonotone_bernoulli_half".into(),
            table: BivariateTable {
                support_x: s.clone(),
                support_y: s,
                joint_probs: vec![vec![0.0, 0.5], vec![0.5, 0.0]],
            },
            expect: Some(1.0),
        },
    ]
}
