//! Tail bounds, carried in log-domain.
//!
//! For identically distributed M-acceptable summands with constant `K` at
//! `delta`:
//!
//! * MGF bound: `E exp(lambda (X - EX)) <= exp(K lambda)` for `0 < lambda <= delta/2`;
//! * Chernoff curve: `P(S - ES > n eps) <= M exp(-lambda n (eps - K))`;
//! * two-sided bound at the optimum `lambda = delta/2`:
//!   `log(2M) - (n delta / 2)(eps - K)` for `eps >= K`;
//! * rate form with `eps_n = n^(alpha-1) + K`: `log(2M) - (delta/2) n^alpha`.
//!
//! `exp` of these exponents underflows for moderate `n`, so the log is the
//! primary output and the clipped probability is derived from it.

use crate::catalog::{moment_profile, DistributionSpec};
use crate::{Error, Result};
use serde::{Deserialize, Serialize};
use std::f64::consts::LN_2;

/// Which right-hand side of the MGF bound to use.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LemmaForm {
    /// `exp(K lambda)`
    #[default]
    Stated,
    /// `exp(K lambda / 2)`, where the derivation actually ends.
    ProofTight,
}

fn finite(name: &str, v: f64) -> Result<()> {
    if v.is_finite() {
        Ok(())
    } else {
        Err(Error::domain(format!("{name} must be finite, got {v}")))
    }
}

fn check_common(n: u64, delta: f64, m: f64, k: f64) -> Result<()> {
    if n == 0 {
        return Err(Error::domain("n must be at least 1"));
    }
    finite("delta", delta)?;
    finite("M", m)?;
    finite("K", k)?;
    if delta <= 0.0 {
        return Err(Error::domain(format!("delta must be positive, got {delta}")));
    }
    if m < 1.0 {
        return Err(Error::domain(format!("M must be >= 1, got {m}")));
    }
    if k <= 0.0 {
        return Err(Error::domain(format!("K must be positive, got {k}")));
    }
    Ok(())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TailBoundQuery {
    pub n: u64,
    pub epsilon: f64,
    pub delta: f64,
    pub m: f64,
    pub k: f64,
}

impl TailBoundQuery {
    pub fn new(n: u64, epsilon: f64, delta: f64, m: f64, k: f64) -> Result<Self> {
        check_common(n, delta, m, k)?;
        finite("epsilon", epsilon)?;
        Ok(Self { n, epsilon, delta, m, k })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RateQuery {
    pub n: u64,
    pub alpha: f64,
    pub delta: f64,
    pub m: f64,
    pub k: f64,
}

impl RateQuery {
    pub fn new(n: u64, alpha: f64, delta: f64, m: f64, k: f64) -> Result<Self> {
        check_common(n, delta, m, k)?;
        finite("alpha", alpha)?;
        if alpha <= 0.0 {
            return Err(Error::domain(format!("alpha must be positive, got {alpha}")));
        }
        Ok(Self { n, alpha, delta, m, k })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BoundResult {
    pub log_bound: f64,
    /// `min(1, exp(log_bound))`
    pub bound_clipped: f64,
    pub lambda_star: f64,
}

impl BoundResult {
    fn new(log_bound: f64, lambda_star: f64) -> Self {
        Self {
            log_bound,
            bound_clipped: log_bound.min(0.0).exp(),
            lambda_star,
        }
    }

    pub fn is_vacuous(&self) -> bool {
        self.bound_clipped >= 1.0
    }
}

/// `log` of the MGF bound `exp(K lambda)`, i.e. `K lambda`.
pub fn lemma_log_bound(k: f64, lambda: f64, delta: f64) -> Result<f64> {
    lemma_log_bound_with(LemmaForm::Stated, k, lambda, delta)
}

pub fn lemma_log_bound_with(form: LemmaForm, k: f64, lambda: f64, delta: f64) -> Result<f64> {
    finite("K", k)?;
    finite("delta", delta)?;
    if k < 0.0 {
        return Err(Error::domain(format!("K must be non-negative, got {k}")));
    }
    if !(lambda > 0.0 && lambda <= delta / 2.0) {
        return Err(Error::domain(format!(
            "lambda = {lambda} outside (0, delta/2] with delta = {delta}"
        )));
    }
    Ok(match form {
        LemmaForm::Stated => k * lambda,
        LemmaForm::ProofTight => k * lambda / 2.0,
    })
}

/// Two-sided bound `log(2M) - (n delta / 2)(eps - K)`, valid for `eps >= K`.
pub fn theorem1_log_bound(q: &TailBoundQuery) -> Result<BoundResult> {
    if q.epsilon < q.k {
        return Err(Error::domain(format!(
            "the two-sided bound requires eps >= K, got eps = {} < K = {}",
            q.epsilon, q.k
        )));
    }
    let n = q.n as f64;
    let log_bound = LN_2 + q.m.ln() - n * q.delta / 2.0 * (q.epsilon - q.k);
    Ok(BoundResult::new(log_bound, q.delta / 2.0))
}

/// Rate form; returns the bound and `eps_n = n^(alpha-1) + K`.
pub fn theorem2_log_bound(q: &RateQuery) -> (BoundResult, f64) {
    let n = q.n as f64;
    let epsilon_n = n.powf(q.alpha - 1.0) + q.k;
    let log_bound = LN_2 + q.m.ln() - q.delta / 2.0 * n.powf(q.alpha);
    (BoundResult::new(log_bound, q.delta / 2.0), epsilon_n)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SungBound {
    /// `ln 2 - alpha ln n`
    pub log_bound: f64,
    /// `2 (K_sung alpha ln n / n)^(1/2)`
    pub epsilon_sung: f64,
    pub k_sung: f64,
}

/// The reference bound `2 exp(-alpha ln n)` at level `2 (K_sung alpha ln n / n)^(1/2)`.
pub fn sung_log_bound(n: u64, alpha: f64, k_sung: f64) -> Result<SungBound> {
    if n < 2 {
        return Err(Error::domain(format!("reference bound needs n >= 2, got {n}")));
    }
    if !(alpha > 0.0 && alpha.is_finite()) {
        return Err(Error::domain(format!("alpha must be positive, got {alpha}")));
    }
    if !(k_sung > 0.0 && k_sung.is_finite()) {
        return Err(Error::domain(format!("K_sung must be positive, got {k_sung}")));
    }
    let ln_n = (n as f64).ln();
    Ok(SungBound {
        log_bound: LN_2 - alpha * ln_n,
        epsilon_sung: 2.0 * (k_sung * alpha * ln_n / n as f64).sqrt(),
        k_sung,
    })
}

/// One-sided Markov/Chernoff exponent `log M - lambda n (eps - K)`.
pub fn chernoff_log_curve(lambda: f64, n: u64, epsilon: f64, k: f64, m: f64) -> f64 {
    m.ln() - lambda * n as f64 * (epsilon - k)
}

/// Minimiser of [`chernoff_log_curve`] over `points` evenly spaced values
/// `(delta/2) j / points`, `j = 1..=points`.
pub fn chernoff_grid_argmin(points: u32, delta: f64, n: u64, epsilon: f64, k: f64, m: f64) -> f64 {
    let mut best = (f64::INFINITY, f64::NAN);
    for j in 1..=points {
        let lambda = delta / 2.0 * (f64::from(j) / f64::from(points));
        let v = chernoff_log_curve(lambda, n, epsilon, k, m);
        if v < best.0 {
            best = (v, lambda);
        }
    }
    best.1
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ComparisonRow {
    pub n: u64,
    pub alpha: f64,
    pub epsilon_new: f64,
    pub log_bound_new: f64,
    pub epsilon_sung: f64,
    pub log_bound_sung: f64,
    pub k_ratio: f64,
    /// A common level `K_sung + n^(alpha-1)` at which both constants apply.
    pub shared_epsilon: f64,
    /// New bound (constant `K`) at the shared level.
    pub shared_log_bound_new: f64,
    /// Same bound with `K` replaced by `K_sung`.
    pub shared_log_bound_ksung: f64,
}

/// New and reference bounds side by side over `n_grid`.
pub fn compare_bounds(
    dist: &DistributionSpec,
    delta: f64,
    n_grid: &[u64],
    alpha: f64,
    m: f64,
) -> Result<Vec<ComparisonRow>> {
    if n_grid.is_empty() {
        return Err(Error::domain("n_grid must not be empty"));
    }
    let profile = moment_profile(dist, delta)?;
    let k = profile.k_constant;
    let k_sung = profile.k_sung;
    n_grid
        .iter()
        .map(|&n| {
            let (new, epsilon_new) = theorem2_log_bound(&RateQuery::new(n, alpha, delta, m, k)?);
            let sung = sung_log_bound(n, alpha, k_sung)?;
            let shared_epsilon = k_sung + (n as f64).powf(alpha - 1.0);
            let shared_new = theorem1_log_bound(&TailBoundQuery::new(n, shared_epsilon, delta, m, k)?)?;
            let shared_ksung = theorem1_log_bound(&TailBoundQuery::new(n, shared_epsilon, delta, m, k_sung)?)?;
            Ok(ComparisonRow {
                n,
                alpha,
                epsilon_new,
                log_bound_new: new.log_bound,
                epsilon_sung: sung.epsilon_sung,
                log_bound_sung: sung.log_bound,
                k_ratio: k_sung / k,
                shared_epsilon,
                shared_log_bound_new: shared_new.log_bound,
                shared_log_bound_ksung: shared_ksung.log_bound,
            })
        })
        .collect()
}
