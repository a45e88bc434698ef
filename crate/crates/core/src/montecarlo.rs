//! Seeded Monte Carlo estimates and the verification suites.
//!
//! Replication `r` always reads stream `r` of its seed and chunk results are
//! folded in a fixed order, so every estimate here is bit-identical for any
//! worker count.

use crate::bounds::{lemma_log_bound_with, theorem1_log_bound, LemmaForm, TailBoundQuery};
use crate::catalog::{moment_profile, DistributionSpec};
use crate::ci;
use crate::families::{FamilyKind, FamilySpec, MIN_REPS};
use crate::numeric::{compensated_sum, normal_quantile, Moments};
use crate::oracle::{exact_mgf, exact_sum_pmf, exact_tail};
use crate::parallel::chunked_reduce;
use crate::rng::{derive_seed, StreamKey};
use crate::{Error, Result};
use serde::{Deserialize, Serialize};
use std::fmt;

pub const DEFAULT_CI_LEVEL: f64 = 0.99;

/// Kurtosis above which MGF summands are flagged as heavy-tailed.
pub const HEAVY_TAIL_KURTOSIS: f64 = 50.0;

/// Replication count, seed and parallelism of one simulation.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Sampling {
    pub reps: u64,
    pub seed: u64,
    pub workers: usize,
}

impl Sampling {
    pub fn new(reps: u64, seed: u64) -> Self {
        Self { reps, seed, workers: 1 }
    }

    pub fn with_workers(self, workers: usize) -> Self {
        Self { workers, ..self }
    }

    fn child(self, label: u64) -> Self {
        Self {
            seed: derive_seed(self.seed, label),
            ..self
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TailEstimate {
    pub hits: u64,
    pub reps: u64,
    pub p_hat: f64,
    /// Two-sided Clopper–Pearson limits at `ci_level`.
    pub ci_low: f64,
    pub ci_high: f64,
    pub ci_level: f64,
    pub seed: u64,
}

impl TailEstimate {
    pub fn from_counts(hits: u64, reps: u64, ci_level: f64, seed: u64) -> Self {
        let (ci_low, ci_high) = ci::two_sided(hits, reps, ci_level);
        let p_hat = hits as f64 / reps as f64;
        Self {
            hits,
            reps,
            p_hat,
            ci_low: ci_low.min(p_hat),
            ci_high: ci_high.max(p_hat),
            ci_level,
            seed,
        }
    }
}

/// Estimate `P(|S_n - E S_n| > n eps)` for the family.
pub fn estimate_tail(spec: &FamilySpec, epsilon: f64, sampling: Sampling) -> Result<TailEstimate> {
    if sampling.reps < MIN_REPS {
        return Err(Error::domain(format!(
            "need at least {MIN_REPS} replications, got {}",
            sampling.reps
        )));
    }
    let center = spec.mean_of_sum()?;
    let threshold = spec.len() as f64 * epsilon;
    let key = StreamKey::new(sampling.seed);
    let hits = chunked_reduce(
        sampling.reps,
        sampling.workers,
        |range| {
            let mut buf = Vec::with_capacity(spec.len());
            let mut hits = 0u64;
            for r in range {
                let mut rng = key.stream(r);
                spec.sample_into(&mut rng, &mut buf);
                let s = compensated_sum(buf.iter().copied());
                if (s - center).abs() > threshold {
                    hits += 1;
                }
            }
            hits
        },
        |a, b| a + b,
        0,
    );
    Ok(TailEstimate::from_counts(hits, sampling.reps, DEFAULT_CI_LEVEL, sampling.seed))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MgfEstimate {
    pub mean: f64,
    pub std_error: f64,
    pub reps: u64,
    pub kurtosis: Option<f64>,
    pub heavy_tail_warning: bool,
}

impl MgfEstimate {
    pub fn upper_limit(&self, level: f64) -> f64 {
        self.mean + normal_quantile(level) * self.std_error
    }

    pub fn lower_limit(&self, level: f64) -> f64 {
        self.mean - normal_quantile(level) * self.std_error
    }
}

/// Sample mean of `exp(lambda (X - c EX))`, `c = 1` when `centered`.
///
/// Requires `E exp(2 lambda X)` finite so the estimator has finite variance.
pub fn estimate_mgf(dist: &DistributionSpec, lambda: f64, centered: bool, sampling: Sampling) -> Result<MgfEstimate> {
    dist.validate()?;
    if sampling.reps == 0 {
        return Err(Error::domain("need at least one replication"));
    }
    let second = dist.mgf(2.0 * lambda).map_err(|e| {
        Error::domain(format!("MGF estimator has infinite variance at lambda = {lambda}: {e}"))
    })?;
    if !second.is_finite() {
        return Err(Error::domain(format!("MGF estimator has infinite variance at lambda = {lambda}")));
    }
    let shift = if centered { dist.mean() } else { 0.0 };
    let key = StreamKey::new(sampling.seed);
    let m = chunked_reduce(
        sampling.reps,
        sampling.workers,
        |range| {
            let mut acc = Moments::default();
            for r in range {
                let mut rng = key.stream(r);
                acc.push((lambda * (dist.sample(&mut rng) - shift)).exp());
            }
            acc
        },
        |a, b| a.merge(&b),
        Moments::default(),
    );
    let kurtosis = m.kurtosis();
    Ok(MgfEstimate {
        mean: m.mean,
        std_error: m.std_error(),
        reps: m.n,
        kurtosis,
        heavy_tail_warning: kurtosis.is_some_and(|k| k > HEAVY_TAIL_KURTOSIS),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum Verdict {
    Pass,
    Fail,
    Vacuous,
}

impl Verdict {
    pub fn as_str(self) -> &'static str {
        match self {
            Verdict::Pass => "PASS",
            Verdict::Fail => "FAIL",
            Verdict::Vacuous => "VACUOUS",
        }
    }
}

impl fmt::Display for Verdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LhsMethod {
    Exact,
    MonteCarlo,
}

impl LhsMethod {
    pub fn as_str(self) -> &'static str {
        match self {
            LhsMethod::Exact => "exact",
            LhsMethod::MonteCarlo => "monte_carlo",
        }
    }
}

/// One confrontation of a quantity with its bound.
///
/// `lhs` is the exact value or the point estimate; for exact rows the
/// confidence limits equal `lhs`. A row fails only when even the lower
/// confidence limit exceeds the bound.
#[derive(Debug, Clone, PartialEq)]
pub struct VerificationRow {
    pub case_id: String,
    pub lhs: f64,
    pub lhs_ci_low: f64,
    pub lhs_ci_high: f64,
    pub method: LhsMethod,
    pub rhs: f64,
    pub log_rhs: f64,
    /// `rhs - lhs_ci_high`
    pub margin: f64,
    pub verdict: Verdict,
}

impl VerificationRow {
    fn judge(case_id: String, lhs: (f64, f64, f64), method: LhsMethod, log_rhs: f64, probability: bool) -> Self {
        let (point, low, high) = lhs;
        let rhs = if probability { log_rhs.min(0.0).exp() } else { log_rhs.exp() };
        let verdict = if probability && rhs >= 1.0 {
            Verdict::Vacuous
        } else if low > rhs {
            Verdict::Fail
        } else {
            Verdict::Pass
        };
        Self {
            case_id,
            lhs: point,
            lhs_ci_low: low,
            lhs_ci_high: high,
            method,
            rhs,
            log_rhs,
            margin: rhs - high,
            verdict,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct LemmaRow {
    pub dist: String,
    pub delta: f64,
    pub lambda: f64,
    pub k: f64,
    pub row: VerificationRow,
}

/// Check `E exp(lambda (X - EX)) <= exp(K lambda)` on a grid of `lambda`.
///
/// Finite supports use the exact MGF; other laws use the one-sided 99% upper
/// limit of a Monte Carlo estimate, with `lambda` index `i` on child seed `i`.
pub fn verify_lemma(
    dist: &DistributionSpec,
    delta: f64,
    lambda_grid: &[f64],
    sampling: Sampling,
    form: LemmaForm,
) -> Result<Vec<LemmaRow>> {
    let profile = moment_profile(dist, delta)?;
    if let Some(bad) = lambda_grid.iter().find(|l| !(**l > 0.0 && **l <= delta / 2.0)) {
        return Err(Error::domain(format!(
            "lambda = {bad} outside (0, delta/2] with delta = {delta}"
        )));
    }
    lambda_grid
        .iter()
        .enumerate()
        .map(|(i, &lambda)| {
            let log_rhs = lemma_log_bound_with(form, profile.k_constant, lambda, delta)?;
            let (lhs, method) = if dist.has_finite_support() {
                let v = exact_mgf(dist, lambda, true)?;
                ((v, v, v), LhsMethod::Exact)
            } else {
                let est = estimate_mgf(dist, lambda, true, sampling.child(i as u64))?;
                (
                    (
                        est.mean,
                        est.lower_limit(DEFAULT_CI_LEVEL),
                        est.upper_limit(DEFAULT_CI_LEVEL),
                    ),
                    LhsMethod::MonteCarlo,
                )
            };
            Ok(LemmaRow {
                dist: dist.to_string(),
                delta,
                lambda,
                k: profile.k_constant,
                row: VerificationRow::judge(
                    format!("lemma/{dist}/delta={delta}/lambda={lambda}"),
                    lhs,
                    method,
                    log_rhs,
                    false,
                ),
            })
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq)]
pub struct Theorem1Row {
    pub family: String,
    pub n: u64,
    pub delta: f64,
    pub epsilon: f64,
    pub k: f64,
    pub m: f64,
    pub log_bound: f64,
    pub row: VerificationRow,
}

/// Exact law of the coordinate sum when one is available.
fn exact_sum_law(spec: &FamilySpec) -> Result<Option<crate::oracle::ExactPmf>> {
    match spec.kind() {
        FamilyKind::Iid { dist, n } if dist.has_finite_support() => {
            let n = u32::try_from(*n).map_err(|_| Error::domain("family too large"))?;
            exact_sum_pmf(dist, n).map(Some)
        }
        FamilyKind::MultinomialCoords { trials, probs, take } => {
            // the first `take` counts add up to Binomial(trials, sum p_i)
            let q = compensated_sum(probs[..*take].iter().copied()).min(1.0);
            if *trials == 0 {
                return Ok(Some(crate::oracle::ExactPmf::new(vec![0.0], vec![1.0])?));
            }
            let t = u32::try_from(*trials).map_err(|_| Error::domain("too many trials"))?;
            exact_sum_pmf(&DistributionSpec::Bernoulli { p: q }, t).map(Some)
        }
        _ => Ok(None),
    }
}

/// Check the two-sided tail bound over a grid of `eps >= K`.
///
/// `K` is the largest marginal constant at `delta` (the common one for
/// identically distributed coordinates). The left side is exact when the
/// sum law is enumerable, otherwise the Clopper–Pearson limits of a
/// simulation with grid index `i` on child seed `i`.
pub fn verify_theorem1(
    spec: &FamilySpec,
    delta: f64,
    epsilon_grid: &[f64],
    sampling: Sampling,
) -> Result<Vec<Theorem1Row>> {
    let k = spec.max_marginal_k(delta)?;
    if let Some(bad) = epsilon_grid.iter().find(|e| !(**e >= k)) {
        return Err(Error::domain(format!(
            "epsilon = {bad} is below K = {k}; the two-sided bound requires eps >= K"
        )));
    }
    let n = spec.len() as u64;
    let exact = exact_sum_law(spec)?;
    let center = spec.mean_of_sum()?;
    let label = spec.to_string();
    epsilon_grid
        .iter()
        .enumerate()
        .map(|(i, &epsilon)| {
            let bound = theorem1_log_bound(&TailBoundQuery::new(n, epsilon, delta, spec.declared_m(), k)?)?;
            let (lhs, method) = match &exact {
                Some(pmf) => {
                    let v = exact_tail(pmf, center, n as f64 * epsilon);
                    ((v, v, v), LhsMethod::Exact)
                }
                None => {
                    let est = estimate_tail(spec, epsilon, sampling.child(i as u64))?;
                    ((est.p_hat, est.ci_low, est.ci_high), LhsMethod::MonteCarlo)
                }
            };
            Ok(Theorem1Row {
                family: label.clone(),
                n,
                delta,
                epsilon,
                k,
                m: spec.declared_m(),
                log_bound: bound.log_bound,
                row: VerificationRow::judge(
                    format!("theorem1/{label}/delta={delta}/eps={epsilon}"),
                    lhs,
                    method,
                    bound.log_bound,
                    true,
                ),
            })
        })
        .collect()
}
