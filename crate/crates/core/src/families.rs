//! Joint laws of dependent coordinates.
//!
//! Every non-i.i.d. construction here is negatively associated by
//! construction (multinomial coordinates, sampling without replacement,
//! random permutations, Gaussians with non-positive correlations), hence
//! acceptable with `M = 1`. The acceptability ratio
//! `E exp(lambda sum X_i) / prod_i E exp(lambda X_i)` is estimated with an
//! analytic denominator and a Monte Carlo numerator.

use crate::catalog::{check_table, moment_profile, DistributionSpec, MomentProfile};
use crate::numeric::{compensated_sum, Moments};
use crate::parallel::chunked_reduce;
use crate::rng::StreamKey;
use crate::{Error, Result};
use rand::seq::{index, SliceRandom};
use rand::Rng;
use rand_distr::{Binomial, Distribution, StandardNormal};
use serde::{Deserialize, Serialize};
use std::fmt;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum FamilyKind {
    Iid {
        dist: DistributionSpec,
        n: usize,
    },
    /// First `take` cell counts of a multinomial with `trials` trials.
    MultinomialCoords {
        trials: u64,
        probs: Vec<f64>,
        take: usize,
    },
    SrsWithoutReplacement {
        population: Vec<f64>,
        draws: usize,
    },
    RandomPermutation {
        values: Vec<f64>,
    },
    NegCorrGaussian {
        mean: Vec<f64>,
        covariance: Vec<Vec<f64>>,
    },
}

fn default_m() -> f64 {
    1.0
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawFamilySpec {
    family: FamilyKind,
    #[serde(default = "default_m")]
    declared_m: f64,
    declared_delta: f64,
}

/// A validated joint law with its declared acceptability constants.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawFamilySpec", into = "RawFamilySpec")]
pub struct FamilySpec {
    kind: FamilyKind,
    declared_m: f64,
    declared_delta: f64,
    /// `B` with `B B^T = covariance` for Gaussian families.
    factor: Option<Vec<Vec<f64>>>,
}

impl TryFrom<RawFamilySpec> for FamilySpec {
    type Error = Error;

    fn try_from(raw: RawFamilySpec) -> Result<Self> {
        FamilySpec::new(raw.family, raw.declared_m, raw.declared_delta)
    }
}

impl From<FamilySpec> for RawFamilySpec {
    fn from(spec: FamilySpec) -> Self {
        RawFamilySpec {
            family: spec.kind,
            declared_m: spec.declared_m,
            declared_delta: spec.declared_delta,
        }
    }
}

const PSD_TOL: f64 = 1e-12;

/// Cholesky factorisation with diagonal pivoting that tolerates zero
/// eigenvalues. Returns `B` (n x rank) in the original coordinate order with
/// `B B^T = a` up to rounding.
pub fn pivoted_cholesky(a: &[Vec<f64>]) -> Result<Vec<Vec<f64>>> {
    let n = a.len();
    let scale = (0..n).map(|i| a[i][i].abs()).fold(0.0, f64::max).max(1.0);
    let mut resid: Vec<Vec<f64>> = a.to_vec();
    let mut cols: Vec<Vec<f64>> = Vec::new();
    let mut used = vec![false; n];
    for _ in 0..n {
        let (piv, d) = (0..n)
            .filter(|&i| !used[i])
            .map(|i| (i, resid[i][i]))
            .fold((usize::MAX, f64::NEG_INFINITY), |best, c| if c.1 > best.1 { c } else { best });
        if piv == usize::MAX {
            break;
        }
        if d < -PSD_TOL * scale {
            return Err(Error::construction(format!(
                "covariance is not positive semidefinite (pivot {d})"
            )));
        }
        if d <= PSD_TOL * scale {
            // remaining Schur complement must vanish
            for i in (0..n).filter(|&i| !used[i]) {
                for j in (0..n).filter(|&j| !used[j]) {
                    if resid[i][j].abs() > 1e-9 * scale {
                        return Err(Error::construction("covariance is not positive semidefinite"));
                    }
                }
            }
            break;
        }
        used[piv] = true;
        let root = d.sqrt();
        let col: Vec<f64> = (0..n)
            .map(|i| if i == piv { root } else if used[i] { 0.0 } else { resid[i][piv] / root })
            .collect();
        for i in 0..n {
            for j in 0..n {
                resid[i][j] -= col[i] * col[j];
            }
        }
        cols.push(col);
    }
    Ok((0..n).map(|i| cols.iter().map(|c| c[i]).collect()).collect())
}

fn validate_kind(kind: &FamilyKind) -> Result<Option<Vec<Vec<f64>>>> {
    match kind {
        FamilyKind::Iid { dist, n } => {
            dist.validate()?;
            if *n == 0 {
                return Err(Error::construction("iid family needs n >= 1"));
            }
        }
        FamilyKind::MultinomialCoords { probs, take, .. } => {
            check_table(&vec![0.0; probs.len()], probs)?;
            if *take == 0 || *take > probs.len() {
                return Err(Error::construction(format!(
                    "take must be in 1..={}, got {take}",
                    probs.len()
                )));
            }
        }
        FamilyKind::SrsWithoutReplacement { population, draws } => {
            if population.iter().any(|v| !v.is_finite()) {
                return Err(Error::construction("population values must be finite"));
            }
            if *draws == 0 || *draws > population.len() {
                return Err(Error::construction(format!(
                    "draws must be in 1..={}, got {draws}",
                    population.len()
                )));
            }
        }
        FamilyKind::RandomPermutation { values } => {
            if values.is_empty() || values.iter().any(|v| !v.is_finite()) {
                return Err(Error::construction("permutation needs at least one finite value"));
            }
        }
        FamilyKind::NegCorrGaussian { mean, covariance } => {
            let n = mean.len();
            if n == 0 || mean.iter().any(|m| !m.is_finite()) {
                return Err(Error::construction("gaussian family needs a finite, non-empty mean"));
            }
            if covariance.len() != n || covariance.iter().any(|r| r.len() != n) {
                return Err(Error::construction(format!("covariance must be {n} x {n}")));
            }
            for i in 0..n {
                if !(covariance[i][i].is_finite() && covariance[i][i] > 0.0) {
                    return Err(Error::construction(format!(
                        "covariance diagonal entry {i} must be positive"
                    )));
                }
                for j in 0..n {
                    let (c, ct) = (covariance[i][j], covariance[j][i]);
                    if !c.is_finite() || c != ct {
                        return Err(Error::construction("covariance must be finite and symmetric"));
                    }
                    if i != j && c > 0.0 {
                        return Err(Error::construction(format!(
                            "covariance entry ({i}, {j}) = {c} is positive; off-diagonals must be <= 0"
                        )));
                    }
                }
            }
            return pivoted_cholesky(covariance).map(Some);
        }
    }
    Ok(None)
}

impl FamilySpec {
    pub fn new(kind: FamilyKind, declared_m: f64, declared_delta: f64) -> Result<Self> {
        if !(declared_m.is_finite() && declared_m >= 1.0) {
            return Err(Error::construction(format!(
                "declared_m must be >= 1 (the acceptability inequality at lambda = 0 forces it), got {declared_m}"
            )));
        }
        if !(declared_delta.is_finite() && declared_delta > 0.0) {
            return Err(Error::construction(format!(
                "declared_delta must be positive, got {declared_delta}"
            )));
        }
        let factor = validate_kind(&kind)?;
        Ok(Self {
            kind,
            declared_m,
            declared_delta,
            factor,
        })
    }

    pub fn kind(&self) -> &FamilyKind {
        &self.kind
    }

    pub fn declared_m(&self) -> f64 {
        self.declared_m
    }

    pub fn declared_delta(&self) -> f64 {
        self.declared_delta
    }

    /// Number of coordinates.
    pub fn len(&self) -> usize {
        match &self.kind {
            FamilyKind::Iid { n, .. } => *n,
            FamilyKind::MultinomialCoords { take, .. } => *take,
            FamilyKind::SrsWithoutReplacement { draws, .. } => *draws,
            FamilyKind::RandomPermutation { values } => values.len(),
            FamilyKind::NegCorrGaussian { mean, .. } => mean.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn is_iid(&self) -> bool {
        matches!(self.kind, FamilyKind::Iid { .. })
    }

    /// One joint draw into `out` (cleared first).
    pub fn sample_into<R: Rng + ?Sized>(&self, rng: &mut R, out: &mut Vec<f64>) {
        out.clear();
        match &self.kind {
            FamilyKind::Iid { dist, n } => out.extend((0..*n).map(|_| dist.sample(rng))),
            FamilyKind::MultinomialCoords { trials, probs, take } => {
                let mut remaining = *trials;
                let mut mass = 1.0;
                for (i, &p) in probs.iter().enumerate().take(*take) {
                    let count = if i + 1 == probs.len() || remaining == 0 {
                        remaining
                    } else {
                        let q = if mass > 0.0 { (p / mass).clamp(0.0, 1.0) } else { 0.0 };
                        Binomial::new(remaining, q).expect("q in [0, 1]").sample(rng)
                    };
                    out.push(count as f64);
                    remaining -= count;
                    mass -= p;
                }
            }
            FamilyKind::SrsWithoutReplacement { population, draws } => {
                out.extend(index::sample(rng, population.len(), *draws).iter().map(|i| population[i]));
            }
            FamilyKind::RandomPermutation { values } => {
                out.extend_from_slice(values);
                out.shuffle(rng);
            }
            FamilyKind::NegCorrGaussian { mean, .. } => {
                let b = self.factor.as_ref().expect("validated gaussian family");
                let rank = b.first().map_or(0, Vec::len);
                let z: Vec<f64> = (0..rank).map(|_| rng.sample(StandardNormal)).collect();
                out.extend(
                    mean.iter()
                        .zip(b)
                        .map(|(m, row)| m + row.iter().zip(&z).map(|(a, z)| a * z).sum::<f64>()),
                );
            }
        }
    }

    /// Law of coordinate `i`, expressed in the catalog.
    pub fn marginal(&self, i: usize) -> Result<DistributionSpec> {
        let len = self.len();
        if i >= len {
            return Err(Error::IndexOutOfRange { index: i, len });
        }
        Ok(match &self.kind {
            FamilyKind::Iid { dist, .. } => dist.clone(),
            FamilyKind::MultinomialCoords { trials, probs, .. } => binomial_table(*trials, probs[i]),
            FamilyKind::SrsWithoutReplacement { population: values, .. }
            | FamilyKind::RandomPermutation { values } => empirical_table(values),
            FamilyKind::NegCorrGaussian { mean, covariance } => DistributionSpec::Gaussian {
                mean: mean[i],
                sigma: covariance[i][i].sqrt(),
            },
        })
    }

    /// Sum of the marginal means.
    pub fn mean_of_sum(&self) -> Result<f64> {
        Ok(compensated_sum(
            (0..self.len()).map(|i| self.marginal(i).map(|d| d.mean())).collect::<Result<Vec<_>>>()?,
        ))
    }

    /// Largest marginal `K` at `delta`; equals the common `K` for identically
    /// distributed coordinates.
    pub fn max_marginal_k(&self, delta: f64) -> Result<f64> {
        let mut k: f64 = 0.0;
        for i in 0..self.len() {
            k = k.max(marginal_profile(self, i, delta)?.k_constant);
        }
        Ok(k)
    }
}

impl fmt::Display for FamilySpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let list = |v: &[f64]| v.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(";");
        match &self.kind {
            FamilyKind::Iid { dist, n } => write!(f, "iid({dist};n={n})"),
            FamilyKind::MultinomialCoords { trials, probs, take } => {
                write!(f, "multinomial(t={trials};p={};take={take})", list(probs))
            }
            FamilyKind::SrsWithoutReplacement { population, draws } => {
                write!(f, "srs(pop={};k={draws})", list(population))
            }
            FamilyKind::RandomPermutation { values } => write!(f, "permutation({})", list(values)),
            FamilyKind::NegCorrGaussian { mean, covariance } => {
                let rows: Vec<String> = covariance.iter().map(|r| list(r)).collect();
                write!(f, "neg_gaussian(mean={};cov={})", list(mean), rows.join("|"))
            }
        }
    }
}

/// Binomial(trials, p) as a discrete table on `0..=trials`.
fn binomial_table(trials: u64, p: f64) -> DistributionSpec {
    let values: Vec<f64> = (0..=trials).map(|k| k as f64).collect();
    let probs: Vec<f64> = if p <= 0.0 || p >= 1.0 {
        let hit = if p <= 0.0 { 0 } else { trials };
        (0..=trials).map(|k| if k == hit { 1.0 } else { 0.0 }).collect()
    } else {
        let (lp, lq) = (p.ln(), (-p).ln_1p());
        let t = trials as f64;
        (0..=trials)
            .map(|k| {
                let k = k as f64;
                (statrs::function::factorial::ln_binomial(trials, k as u64) + k * lp + (t - k) * lq).exp()
            })
            .collect()
    };
    let total = compensated_sum(probs.iter().copied());
    DistributionSpec::DiscreteTable {
        values,
        probs: probs.into_iter().map(|q| q / total).collect(),
    }
}

/// Uniform law over a finite multiset, duplicates merged.
fn empirical_table(values: &[f64]) -> DistributionSpec {
    let mut sorted = values.to_vec();
    sorted.sort_by(f64::total_cmp);
    let mut atoms: Vec<(f64, usize)> = Vec::new();
    for v in sorted {
        match atoms.last_mut() {
            Some((last, c)) if *last == v => *c += 1,
            _ => atoms.push((v, 1)),
        }
    }
    let n = values.len() as f64;
    DistributionSpec::DiscreteTable {
        values: atoms.iter().map(|a| a.0).collect(),
        probs: atoms.iter().map(|a| a.1 as f64 / n).collect(),
    }
}

/// One joint draw from stream 0 of `seed`.
pub fn sample_family(spec: &FamilySpec, seed: u64) -> Vec<f64> {
    let mut rng = StreamKey::new(seed).stream(0);
    let mut out = Vec::with_capacity(spec.len());
    spec.sample_into(&mut rng, &mut out);
    out
}

pub fn marginal_profile(spec: &FamilySpec, i: usize, delta: f64) -> Result<MomentProfile> {
    moment_profile(&spec.marginal(i)?, delta)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AcceptabilityEstimate {
    pub lambda: f64,
    pub ratio: f64,
    pub std_error: f64,
    /// `sum_i ln E exp(lambda X_i)`, computed analytically.
    pub log_denominator: f64,
    pub reps: u64,
}

impl AcceptabilityEstimate {
    /// One-sided upper confidence limit at `level` (normal approximation).
    pub fn upper_limit(&self, level: f64) -> f64 {
        self.ratio + crate::numeric::normal_quantile(level) * self.std_error
    }

    pub fn lower_limit(&self, level: f64) -> f64 {
        self.ratio - crate::numeric::normal_quantile(level) * self.std_error
    }
}

pub const MIN_REPS: u64 = 1_000;

/// Estimate `E exp(lambda S) / prod_i E exp(lambda X_i)`.
///
/// Replication `r` uses stream `r` of `seed`; the result is independent of
/// `workers`.
pub fn acceptability_ratio(
    spec: &FamilySpec,
    lambda: f64,
    reps: u64,
    seed: u64,
    workers: usize,
) -> Result<AcceptabilityEstimate> {
    if !(lambda.abs() <= spec.declared_delta) {
        return Err(Error::domain(format!(
            "lambda = {lambda} outside [-delta, delta] with delta = {}",
            spec.declared_delta
        )));
    }
    if reps < MIN_REPS {
        return Err(Error::domain(format!("need at least {MIN_REPS} replications, got {reps}")));
    }
    let mut log_den = Vec::with_capacity(spec.len());
    for i in 0..spec.len() {
        let m = spec.marginal(i)?.mgf(lambda)?;
        if !(m.is_finite() && m > 0.0) {
            return Err(Error::domain(format!("marginal {i} MGF is not finite at lambda = {lambda}")));
        }
        log_den.push(m.ln());
    }
    let log_denominator = compensated_sum(log_den);
    let key = StreamKey::new(seed);
    let moments = chunked_reduce(
        reps,
        workers,
        |range| {
            let mut acc = Moments::default();
            let mut buf = Vec::with_capacity(spec.len());
            for r in range {
                let mut rng = key.stream(r);
                spec.sample_into(&mut rng, &mut buf);
                let s = compensated_sum(buf.iter().copied());
                acc.push((lambda * s - log_denominator).exp());
            }
            acc
        },
        |a, b| a.merge(&b),
        Moments::default(),
    );
    Ok(AcceptabilityEstimate {
        lambda,
        ratio: moments.mean,
        std_error: moments.std_error(),
        log_denominator,
        reps,
    })
}

/// A finite joint law of two coordinates; `joint_probs[i][j] = P(X = x_i, Y = y_j)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BivariateTable {
    pub support_x: Vec<f64>,
    pub support_y: Vec<f64>,
    pub joint_probs: Vec<Vec<f64>>,
}

impl BivariateTable {
    pub fn validate(&self) -> Result<()> {
        let (nx, ny) = (self.support_x.len(), self.support_y.len());
        if nx == 0 || ny == 0 {
            return Err(Error::construction("bivariate table needs non-empty supports"));
        }
        if self.joint_probs.len() != nx || self.joint_probs.iter().any(|r| r.len() != ny) {
            return Err(Error::construction(format!("joint_probs must be {nx} x {ny}")));
        }
        for s in [&self.support_x, &self.support_y] {
            let mut sorted = s.clone();
            sorted.sort_by(f64::total_cmp);
            if sorted.iter().any(|v| !v.is_finite()) || sorted.windows(2).any(|w| w[0] == w[1]) {
                return Err(Error::construction("support values must be finite and distinct"));
            }
        }
        let flat: Vec<f64> = self.joint_probs.iter().flatten().copied().collect();
        check_table(&vec![0.0; flat.len()], &flat)
    }

    /// Independent coupling of two marginals.
    pub fn product(support_x: Vec<f64>, px: &[f64], support_y: Vec<f64>, py: &[f64]) -> Self {
        let joint_probs = px.iter().map(|a| py.iter().map(|b| a * b).collect()).collect();
        Self {
            support_x,
            support_y,
            joint_probs,
        }
    }
}

/// Smallest `M` with both orthant inequalities
/// `P(X <= x, Y <= y) <= M P(X <= x) P(Y <= y)` and
/// `P(X > x, Y > y) <= M P(X > x) P(Y > y)` over the support grid.
/// Threshold pairs with a zero product are skipped.
pub fn end_min_m(table: &BivariateTable) -> Result<f64> {
    table.validate()?;
    let order = |s: &[f64]| {
        let mut idx: Vec<usize> = (0..s.len()).collect();
        idx.sort_by(|&a, &b| s[a].total_cmp(&s[b]));
        idx
    };
    let ox = order(&table.support_x);
    let oy = order(&table.support_y);
    let p: Vec<Vec<f64>> = ox
        .iter()
        .map(|&i| oy.iter().map(|&j| table.joint_probs[i][j]).collect())
        .collect();
    let (nx, ny) = (ox.len(), oy.len());

    // lower[i][j] = P(X <= x_i, Y <= y_j); upper[i][j] = P(X > x_i, Y > y_j)
    let mut lower = vec![vec![0.0; ny]; nx];
    let mut upper = vec![vec![0.0; ny]; nx];
    for i in 0..nx {
        for j in 0..ny {
            lower[i][j] = compensated_sum(p[..=i].iter().flat_map(|r| r[..=j].iter().copied()));
            upper[i][j] = compensated_sum(p[i + 1..].iter().flat_map(|r| r[j + 1..].iter().copied()));
        }
    }
    let fx: Vec<f64> = (0..nx).map(|i| compensated_sum(p[..=i].iter().flatten().copied())).collect();
    let sx: Vec<f64> = (0..nx).map(|i| compensated_sum(p[i + 1..].iter().flatten().copied())).collect();
    let fy: Vec<f64> = (0..ny).map(|j| compensated_sum(p.iter().flat_map(|r| r[..=j].iter().copied()))).collect();
    let sy: Vec<f64> = (0..ny).map(|j| compensated_sum(p.iter().flat_map(|r| r[j + 1..].iter().copied()))).collect();

    let mut m: f64 = 0.0;
    for i in 0..nx {
        for j in 0..ny {
            let lo = fx[i] * fy[j];
            if lo > 0.0 {
                m = m.max(lower[i][j] / lo);
            }
            let hi = sx[i] * sy[j];
            if hi > 0.0 {
                m = m.max(upper[i][j] / hi);
            }
        }
    }
    Ok(m)
}
