//! Exact sum distributions for finite-support laws.
//!
//! Supports that live on a lattice `k / s` (integers, halves, decimals) are
//! convolved on dense integer-indexed arrays, so equal atoms always merge.
//! Other supports fall back to sorted merging with a `1e-9` tolerance.

use crate::catalog::DistributionSpec;
use crate::numeric::compensated_sum;
use crate::{Error, Result};
use serde::{Deserialize, Serialize};

/// Cap on the number of states an exact computation may touch.
pub const STATE_CAP: u64 = 10_000_000;

const PROB_SUM_TOL: f64 = 1e-12;
const MERGE_TOL: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExactPmf {
    support: Vec<f64>,
    probs: Vec<f64>,
}

impl ExactPmf {
    pub fn new(support: Vec<f64>, probs: Vec<f64>) -> Result<Self> {
        if support.is_empty() || support.len() != probs.len() {
            return Err(Error::construction("pmf needs matching, non-empty support and probabilities"));
        }
        if support.iter().any(|v| !v.is_finite()) || support.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::construction("pmf support must be finite and strictly increasing"));
        }
        if probs.iter().any(|p| !(p.is_finite() && *p >= 0.0)) {
            return Err(Error::construction("pmf probabilities must be non-negative"));
        }
        let total = compensated_sum(probs.iter().copied());
        if (total - 1.0).abs() > PROB_SUM_TOL {
            return Err(Error::construction(format!("pmf probabilities sum to {total}")));
        }
        Ok(Self { support, probs })
    }

    /// Law of a finite-support catalog member.
    pub fn from_dist(dist: &DistributionSpec) -> Result<Self> {
        dist.validate()?;
        let atoms = dist
            .atoms()
            .ok_or_else(|| Error::Unsupported(format!("{} has no finite support", dist.kind_name())))?;
        Ok(Self::from_atoms(atoms))
    }

    /// Sort, merge exact duplicates and drop zero-mass atoms.
    fn from_atoms(mut atoms: Vec<(f64, f64)>) -> Self {
        atoms.sort_by(|a, b| a.0.total_cmp(&b.0));
        let mut support: Vec<f64> = Vec::with_capacity(atoms.len());
        let mut probs: Vec<f64> = Vec::with_capacity(atoms.len());
        for (v, p) in atoms {
            if p == 0.0 {
                continue;
            }
            if support.last() == Some(&v) {
                *probs.last_mut().unwrap() += p;
            } else {
                support.push(v);
                probs.push(p);
            }
        }
        Self { support, probs }
    }

    pub fn support(&self) -> &[f64] {
        &self.support
    }

    pub fn probs(&self) -> &[f64] {
        &self.probs
    }

    pub fn len(&self) -> usize {
        self.support.len()
    }

    pub fn is_empty(&self) -> bool {
        self.support.is_empty()
    }

    pub fn mean(&self) -> f64 {
        compensated_sum(self.support.iter().zip(&self.probs).map(|(v, p)| v * p))
    }

    pub fn variance(&self) -> f64 {
        let m = self.mean();
        compensated_sum(self.support.iter().zip(&self.probs).map(|(v, p)| (v - m) * (v - m) * p))
    }

    pub fn total_mass(&self) -> f64 {
        compensated_sum(self.probs.iter().copied())
    }
}

/// Common scale `s` such that every value times `s` is an integer.
fn lattice_scale(values: &[f64]) -> Option<f64> {
    const SCALES: [f64; 12] = [1.0, 2.0, 4.0, 8.0, 10.0, 16.0, 100.0, 1e3, 1e4, 1e5, 1e6, 1024.0];
    let max_abs = values.iter().fold(0.0_f64, |m, v| m.max(v.abs()));
    SCALES.into_iter().find(|&s| {
        max_abs * s < 2f64.powi(50)
            && values.iter().all(|v| {
                let k = v * s;
                (k - k.round()).abs() <= MERGE_TOL
            })
    })
}

fn gcd(a: i64, b: i64) -> i64 {
    if b == 0 {
        a.abs()
    } else {
        gcd(b, a % b)
    }
}

/// Law of `X + Y` for independent `X ~ a`, `Y ~ b`.
pub fn convolve(a: &ExactPmf, b: &ExactPmf) -> Result<ExactPmf> {
    let pairs = a.len() as u64 * b.len() as u64;
    let all: Vec<f64> = a.support.iter().chain(&b.support).copied().collect();
    if let Some(scale) = lattice_scale(&all) {
        let ka: Vec<i64> = a.support.iter().map(|v| (v * scale).round() as i64).collect();
        let kb: Vec<i64> = b.support.iter().map(|v| (v * scale).round() as i64).collect();
        let g = ka
            .iter()
            .map(|k| k - ka[0])
            .chain(kb.iter().map(|k| k - kb[0]))
            .fold(0, gcd)
            .max(1);
        let span_a = (ka[ka.len() - 1] - ka[0]) / g;
        let span_b = (kb[kb.len() - 1] - kb[0]) / g;
        let states = (span_a + span_b + 1) as u64;
        if states.max(pairs) > STATE_CAP {
            return Err(Error::Size { states: states.max(pairs), cap: STATE_CAP });
        }
        let mut dense = vec![0.0_f64; states as usize];
        // fixed accumulation order keeps results reproducible
        for (i, pa) in ka.iter().zip(&a.probs) {
            let ia = (i - ka[0]) / g;
            for (j, pb) in kb.iter().zip(&b.probs) {
                let jb = (j - kb[0]) / g;
                dense[(ia + jb) as usize] += pa * pb;
            }
        }
        let base = ka[0] + kb[0];
        let atoms: Vec<(f64, f64)> = dense
            .into_iter()
            .enumerate()
            .filter(|(_, p)| *p > 0.0)
            .map(|(idx, p)| ((base + idx as i64 * g) as f64 / scale, p))
            .collect();
        return Ok(ExactPmf::from_atoms(atoms));
    }

    if pairs > STATE_CAP {
        return Err(Error::Size { states: pairs, cap: STATE_CAP });
    }
    let mut atoms: Vec<(f64, f64)> = Vec::with_capacity(pairs as usize);
    for (va, pa) in a.support.iter().zip(&a.probs) {
        for (vb, pb) in b.support.iter().zip(&b.probs) {
            atoms.push((va + vb, pa * pb));
        }
    }
    atoms.sort_by(|x, y| x.0.total_cmp(&y.0));
    let mut merged: Vec<(f64, Vec<f64>)> = Vec::new();
    for (v, p) in atoms {
        match merged.last_mut() {
            Some((last, ps)) if (v - *last).abs() <= MERGE_TOL * last.abs().max(1.0) => ps.push(p),
            _ => merged.push((v, vec![p])),
        }
    }
    Ok(ExactPmf::from_atoms(
        merged.into_iter().map(|(v, ps)| (v, compensated_sum(ps))).collect(),
    ))
}

/// Exact law of `X_1 + ... + X_n` for i.i.d. `X_i ~ dist`.
pub fn exact_sum_pmf(dist: &DistributionSpec, n: u32) -> Result<ExactPmf> {
    if n == 0 {
        return Err(Error::domain("n must be at least 1"));
    }
    let base = ExactPmf::from_dist(dist)?;
    let bound = n as u64 * base.len() as u64;
    if bound > STATE_CAP {
        return Err(Error::Size { states: bound, cap: STATE_CAP });
    }
    let mut acc = base.clone();
    for _ in 1..n {
        acc = convolve(&acc, &base)?;
    }
    Ok(acc)
}

/// `P(|S - center| > threshold)`.
pub fn exact_tail(pmf: &ExactPmf, center: f64, threshold: f64) -> f64 {
    compensated_sum(
        pmf.support
            .iter()
            .zip(&pmf.probs)
            .filter(|(v, _)| (*v - center).abs() > threshold)
            .map(|(_, p)| *p),
    )
}

/// `E exp(lambda (X - c EX))` with `c = 1` when `centered`.
pub fn exact_mgf(dist: &DistributionSpec, lambda: f64, centered: bool) -> Result<f64> {
    let pmf = ExactPmf::from_dist(dist)?;
    let shift = if centered { pmf.mean() } else { 0.0 };
    Ok(compensated_sum(
        pmf.support.iter().zip(&pmf.probs).map(|(v, p)| p * (lambda * (v - shift)).exp()),
    ))
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::E;

    fn binomial_pmf(n: u64, p: f64, k: u64) -> f64 {
        // product form, independent of the convolution path
        let mut c = 1.0;
        for i in 0..k {
            c = c * (n - i) as f64 / (i + 1) as f64;
        }
        c * p.powi(k as i32) * (1.0 - p).powi((n - k) as i32)
    }

    #[test]
    fn rademacher_pair() {
        let pmf = exact_sum_pmf(&DistributionSpec::Rademacher, 2).unwrap();
        assert_eq!(pmf.support(), &[-2.0, 0.0, 2.0]);
        assert_eq!(pmf.probs(), &[0.25, 0.5, 0.25]);
    }

    #[test]
    fn single_summand_is_marginal() {
        let d = DistributionSpec::DiscreteTable {
            values: vec![2.0, -1.0, 0.5],
            probs: vec![0.2, 0.5, 0.3],
        };
        let pmf = exact_sum_pmf(&d, 1).unwrap();
        assert_eq!(pmf.support(), &[-1.0, 0.5, 2.0]);
        assert_eq!(pmf.probs(), &[0.5, 0.3, 0.2]);
    }

    #[test]
    fn bernoulli_sum_is_binomial() {
        let pmf = exact_sum_pmf(&DistributionSpec::Bernoulli { p: 0.3 }, 3).unwrap();
        assert_eq!(pmf.support(), &[0.0, 1.0, 2.0, 3.0]);
        for k in 0..4 {
            assert!((pmf.probs()[k] - binomial_pmf(3, 0.3, k as u64)).abs() < 1e-15);
        }
    }

    #[test]
    fn centered_bernoulli_atoms_merge() {
        let pmf = exact_sum_pmf(&DistributionSpec::CenteredBernoulli { p: 0.3 }, 10).unwrap();
        assert_eq!(pmf.len(), 11);
        assert!(pmf.mean().abs() < 1e-12);
        assert!((pmf.variance() - 10.0 * 0.21).abs() < 1e-10);
    }

    #[test]
    fn irrational_support_uses_tolerance_merge() {
        let d = DistributionSpec::DiscreteTable {
            values: vec![0.0, std::f64::consts::PI],
            probs: vec![0.5, 0.5],
        };
        let pmf = exact_sum_pmf(&d, 3).unwrap();
        assert_eq!(pmf.len(), 4);
        assert!((pmf.probs()[1] - 0.375).abs() < 1e-15);
    }

    #[test]
    fn continuous_is_unsupported() {
        let e = exact_sum_pmf(&DistributionSpec::Gaussian { mean: 0.0, sigma: 1.0 }, 2).unwrap_err();
        assert!(matches!(e, Error::Unsupported(_)));
        assert!(exact_mgf(&DistributionSpec::Laplace { scale: 1.0 }, 0.1, true).is_err());
    }

    #[test]
    fn state_cap_is_enforced() {
        let d = DistributionSpec::DiscreteTable {
            values: vec![0.0, 1.0, 1e7],
            probs: vec![0.2, 0.3, 0.5],
        };
        assert!(matches!(exact_sum_pmf(&d, 2), Err(Error::Size { .. })));
    }

    #[test]
    fn tail_fixtures() {
        let pmf = exact_sum_pmf(&DistributionSpec::Rademacher, 2).unwrap();
        assert_eq!(exact_tail(&pmf, 0.0, 1.0), 0.5);
        assert_eq!(exact_tail(&pmf, 0.0, 2.0), 0.0);
        assert_eq!(exact_tail(&pmf, 0.0, -1.0), 1.0);
    }

    #[test]
    fn mgf_fixtures() {
        let r = exact_mgf(&DistributionSpec::Rademacher, 0.05, true).unwrap();
        assert!((r - 1.001250260438369).abs() < 1e-15);
        assert_eq!(exact_mgf(&DistributionSpec::Bernoulli { p: 0.4 }, 0.0, true).unwrap(), 1.0);
        let b = exact_mgf(&DistributionSpec::Bernoulli { p: 0.5 }, 1.0, false).unwrap();
        assert!((b - (1.0 + E) / 2.0).abs() < 1e-15);
    }

    #[test]
    fn convolution_is_associative() {
        let d = DistributionSpec::DiscreteTable {
            values: vec![-1.0, 0.0, 2.0],
            probs: vec![0.3, 0.5, 0.2],
        };
        let p3 = exact_sum_pmf(&d, 3).unwrap();
        let p4 = exact_sum_pmf(&d, 4).unwrap();
        let p7 = exact_sum_pmf(&d, 7).unwrap();
        let c = convolve(&p3, &p4).unwrap();
        assert_eq!(c.support(), p7.support());
        for (a, b) in c.probs().iter().zip(p7.probs()) {
            assert!((a - b).abs() < 1e-12);
        }
    }

    #[test]
    fn pmf_validation() {
        assert!(ExactPmf::new(vec![1.0, 0.0], vec![0.5, 0.5]).is_err());
        assert!(ExactPmf::new(vec![0.0, 1.0], vec![0.5, 0.6]).is_err());
        assert!(ExactPmf::new(vec![0.0, 1.0], vec![0.5, 0.5]).is_ok());
    }
}
