//! Marginal laws with closed-form moments.
//!
//! Every member carries analytic values for the mean, `E|X|^2`,
//! `E exp(delta |X|)` and the MGF, so it can serve as ground truth for the
//! simulation-based checks.

use crate::numeric::{compensated_sum, normal_cdf};
use crate::rng::StreamKey;
use crate::{Error, Result};
use rand::distr::Open01;
use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};
use std::fmt;

const PROB_SUM_TOL: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum DistributionSpec {
    /// Uniform on `{-1, +1}`.
    Rademacher,
    Uniform { a: f64, b: f64 },
    Bernoulli { p: f64 },
    /// `B - p` for `B ~ Bernoulli(p)`.
    CenteredBernoulli { p: f64 },
    /// Zero-mean Laplace with density `exp(-|x|/scale) / (2 scale)`.
    Laplace { scale: f64 },
    Gaussian {
        #[serde(default)]
        mean: f64,
        sigma: f64,
    },
    DiscreteTable { values: Vec<f64>, probs: Vec<f64> },
}

/// The constants of one marginal at a fixed `delta`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MomentProfile {
    pub delta: f64,
    pub mean: f64,
    /// `E|X|^2`
    pub second_abs_moment: f64,
    /// `E exp(delta |X|)`
    pub abs_exp_moment: f64,
    /// `K = sqrt(E|X|^2) * E exp(delta |X|)`
    pub k_constant: f64,
    /// The reference constant, exactly `2 K`.
    pub k_sung: f64,
}

impl MomentProfile {
    pub fn from_moments(delta: f64, mean: f64, second_abs_moment: f64, abs_exp_moment: f64) -> Self {
        let k_constant = second_abs_moment.sqrt() * abs_exp_moment;
        Self {
            delta,
            mean,
            second_abs_moment,
            abs_exp_moment,
            k_constant,
            k_sung: 2.0 * k_constant,
        }
    }

    pub fn variance(&self) -> f64 {
        (self.second_abs_moment - self.mean * self.mean).max(0.0)
    }
}

fn check_prob(name: &str, p: f64) -> Result<()> {
    if (0.0..=1.0).contains(&p) {
        Ok(())
    } else {
        Err(Error::construction(format!("{name} must lie in [0, 1], got {p}")))
    }
}

fn check_positive(name: &str, v: f64) -> Result<()> {
    if v.is_finite() && v > 0.0 {
        Ok(())
    } else {
        Err(Error::construction(format!("{name} must be positive and finite, got {v}")))
    }
}

fn check_delta(delta: f64) -> Result<()> {
    if delta.is_finite() && delta > 0.0 {
        Ok(())
    } else {
        Err(Error::domain(format!("delta must be positive and finite, got {delta}")))
    }
}

/// Validate a finite probability table.
pub(crate) fn check_table(values: &[f64], probs: &[f64]) -> Result<()> {
    if values.is_empty() {
        return Err(Error::construction("discrete table has no atoms"));
    }
    if values.len() != probs.len() {
        return Err(Error::construction(format!(
            "discrete table has {} values but {} probabilities",
            values.len(),
            probs.len()
        )));
    }
    if let Some(v) = values.iter().find(|v| !v.is_finite()) {
        return Err(Error::construction(format!("discrete table value {v} is not finite")));
    }
    if let Some(p) = probs.iter().find(|p| !(p.is_finite() && **p >= 0.0)) {
        return Err(Error::construction(format!("probability {p} is negative or not finite")));
    }
    let total = compensated_sum(probs.iter().copied());
    if (total - 1.0).abs() > PROB_SUM_TOL {
        return Err(Error::construction(format!("probabilities sum to {total}, not 1")));
    }
    Ok(())
}

/// `E exp(delta |X|)` for `X ~ N(mean, sigma^2)`.
fn gaussian_abs_exp_moment(mean: f64, sigma: f64, delta: f64) -> f64 {
    let half_var = delta * delta * sigma * sigma / 2.0;
    let z = mean / sigma;
    (delta * mean + half_var).exp() * normal_cdf(z + delta * sigma)
        + (-delta * mean + half_var).exp() * normal_cdf(-z + delta * sigma)
}

/// Antiderivative of `exp(delta |x|)` vanishing at 0.
fn abs_exp_antiderivative(x: f64, delta: f64) -> f64 {
    x.signum() * (delta * x.abs()).exp_m1() / delta
}

impl DistributionSpec {
    pub fn validate(&self) -> Result<()> {
        match self {
            DistributionSpec::Rademacher => Ok(()),
            DistributionSpec::Uniform { a, b } => {
                if a.is_finite() && b.is_finite() && a < b {
                    Ok(())
                } else {
                    Err(Error::construction(format!("uniform requires finite a < b, got a = {a}, b = {b}")))
                }
            }
            DistributionSpec::Bernoulli { p } | DistributionSpec::CenteredBernoulli { p } => check_prob("p", *p),
            DistributionSpec::Laplace { scale } => check_positive("scale", *scale),
            DistributionSpec::Gaussian { mean, sigma } => {
                if !mean.is_finite() {
                    return Err(Error::construction(format!("gaussian mean must be finite, got {mean}")));
                }
                check_positive("sigma", *sigma)
            }
            DistributionSpec::DiscreteTable { values, probs } => check_table(values, probs),
        }
    }

    /// Short lowercase name of the kind.
    pub fn kind_name(&self) -> &'static str {
        match self {
            DistributionSpec::Rademacher => "rademacher",
            DistributionSpec::Uniform { .. } => "uniform",
            DistributionSpec::Bernoulli { .. } => "bernoulli",
            DistributionSpec::CenteredBernoulli { .. } => "centered_bernoulli",
            DistributionSpec::Laplace { .. } => "laplace",
            DistributionSpec::Gaussian { .. } => "gaussian",
            DistributionSpec::DiscreteTable { .. } => "discrete_table",
        }
    }

    /// Atoms `(value, probability)` when the support is finite.
    pub fn atoms(&self) -> Option<Vec<(f64, f64)>> {
        match self {
            DistributionSpec::Rademacher => Some(vec![(-1.0, 0.5), (1.0, 0.5)]),
            DistributionSpec::Bernoulli { p } => Some(vec![(0.0, 1.0 - p), (1.0, *p)]),
            DistributionSpec::CenteredBernoulli { p } => Some(vec![(-p, 1.0 - p), (1.0 - p, *p)]),
            DistributionSpec::DiscreteTable { values, probs } => {
                Some(values.iter().copied().zip(probs.iter().copied()).collect())
            }
            _ => None,
        }
    }

    pub fn has_finite_support(&self) -> bool {
        matches!(
            self,
            DistributionSpec::Rademacher
                | DistributionSpec::Bernoulli { .. }
                | DistributionSpec::CenteredBernoulli { .. }
                | DistributionSpec::DiscreteTable { .. }
        )
    }

    pub fn mean(&self) -> f64 {
        match self {
            DistributionSpec::Rademacher
            | DistributionSpec::CenteredBernoulli { .. }
            | DistributionSpec::Laplace { .. } => 0.0,
            DistributionSpec::Uniform { a, b } => (a + b) / 2.0,
            DistributionSpec::Bernoulli { p } => *p,
            DistributionSpec::Gaussian { mean, .. } => *mean,
            DistributionSpec::DiscreteTable { values, probs } => {
                compensated_sum(values.iter().zip(probs).map(|(v, p)| v * p))
            }
        }
    }

    /// `E|X|^2`
    pub fn second_abs_moment(&self) -> f64 {
        match self {
            DistributionSpec::Rademacher => 1.0,
            DistributionSpec::Uniform { a, b } => (a * a + a * b + b * b) / 3.0,
            DistributionSpec::Bernoulli { p } => *p,
            DistributionSpec::CenteredBernoulli { p } => p * (1.0 - p),
            DistributionSpec::Laplace { scale } => 2.0 * scale * scale,
            DistributionSpec::Gaussian { mean, sigma } => mean * mean + sigma * sigma,
            DistributionSpec::DiscreteTable { values, probs } => {
                compensated_sum(values.iter().zip(probs).map(|(v, p)| v * v * p))
            }
        }
    }

    pub fn variance(&self) -> f64 {
        let m = self.mean();
        match self {
            DistributionSpec::DiscreteTable { values, probs } => {
                compensated_sum(values.iter().zip(probs).map(|(v, p)| (v - m) * (v - m) * p))
            }
            _ => (self.second_abs_moment() - m * m).max(0.0),
        }
    }

    /// `E exp(delta |X|)`, or a domain error when it diverges.
    pub fn abs_exp_moment(&self, delta: f64) -> Result<f64> {
        check_delta(delta)?;
        Ok(match self {
            DistributionSpec::Rademacher => delta.exp(),
            DistributionSpec::Uniform { a, b } => {
                (abs_exp_antiderivative(*b, delta) - abs_exp_antiderivative(*a, delta)) / (b - a)
            }
            DistributionSpec::Bernoulli { p } => 1.0 + p * delta.exp_m1(),
            DistributionSpec::CenteredBernoulli { p } => {
                p * (delta * (1.0 - p)).exp() + (1.0 - p) * (delta * p).exp()
            }
            DistributionSpec::Laplace { scale } => {
                if delta * scale >= 1.0 {
                    return Err(Error::domain(format!(
                        "abs_exp_moment diverges: laplace(scale = {scale}) requires delta < 1/scale = {}, got delta = {delta}",
                        1.0 / scale
                    )));
                }
                1.0 / (1.0 - delta * scale)
            }
            DistributionSpec::Gaussian { mean, sigma } => gaussian_abs_exp_moment(*mean, *sigma, delta),
            DistributionSpec::DiscreteTable { values, probs } => {
                compensated_sum(values.iter().zip(probs).map(|(v, p)| p * (delta * v.abs()).exp()))
            }
        })
    }

    /// `E exp(lambda X)`.
    pub fn mgf(&self, lambda: f64) -> Result<f64> {
        if !lambda.is_finite() {
            return Err(Error::domain(format!("lambda must be finite, got {lambda}")));
        }
        Ok(match self {
            DistributionSpec::Rademacher => lambda.cosh(),
            DistributionSpec::Uniform { a, b } => {
                if lambda == 0.0 {
                    1.0
                } else {
                    // e^{la} (e^{l(b-a)} - 1) / (l (b - a))
                    (lambda * a).exp() * (lambda * (b - a)).exp_m1() / (lambda * (b - a))
                }
            }
            DistributionSpec::Bernoulli { p } => 1.0 + p * lambda.exp_m1(),
            DistributionSpec::CenteredBernoulli { p } => (-lambda * p).exp() * (1.0 + p * lambda.exp_m1()),
            DistributionSpec::Laplace { scale } => {
                let ls = lambda * scale;
                if ls.abs() >= 1.0 {
                    return Err(Error::domain(format!(
                        "laplace(scale = {scale}) MGF diverges at lambda = {lambda}"
                    )));
                }
                1.0 / (1.0 - ls * ls)
            }
            DistributionSpec::Gaussian { mean, sigma } => (lambda * mean + lambda * lambda * sigma * sigma / 2.0).exp(),
            DistributionSpec::DiscreteTable { values, probs } => {
                compensated_sum(values.iter().zip(probs).map(|(v, p)| p * (lambda * v).exp()))
            }
        })
    }

    /// One draw.
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        match self {
            DistributionSpec::Rademacher => {
                if rng.random::<bool>() {
                    1.0
                } else {
                    -1.0
                }
            }
            DistributionSpec::Uniform { a, b } => a + (b - a) * rng.random::<f64>(),
            DistributionSpec::Bernoulli { p } => f64::from(u8::from(rng.random::<f64>() < *p)),
            DistributionSpec::CenteredBernoulli { p } => f64::from(u8::from(rng.random::<f64>() < *p)) - p,
            DistributionSpec::Laplace { scale } => {
                let u: f64 = rng.sample(Open01);
                if u < 0.5 {
                    scale * (2.0 * u).ln()
                } else {
                    -scale * (2.0 * (1.0 - u)).ln()
                }
            }
            DistributionSpec::Gaussian { mean, sigma } => {
                let z: f64 = rng.sample(StandardNormal);
                mean + sigma * z
            }
            DistributionSpec::DiscreteTable { values, probs } => {
                let u = rng.random::<f64>();
                let mut acc = 0.0;
                for (v, p) in values.iter().zip(probs) {
                    acc += p;
                    if u < acc {
                        return *v;
                    }
                }
                // rounding left u above the accumulated total
                values[probs.iter().rposition(|p| *p > 0.0).unwrap_or(values.len() - 1)]
            }
        }
    }
}

impl fmt::Display for DistributionSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            DistributionSpec::Rademacher => write!(f, "rademacher"),
            DistributionSpec::Uniform { a, b } => write!(f, "uniform({a};{b})"),
            DistributionSpec::Bernoulli { p } => write!(f, "bernoulli({p})"),
            DistributionSpec::CenteredBernoulli { p } => write!(f, "centered_bernoulli({p})"),
            DistributionSpec::Laplace { scale } => write!(f, "laplace({scale})"),
            DistributionSpec::Gaussian { mean, sigma } => write!(f, "gaussian({mean};{sigma})"),
            DistributionSpec::DiscreteTable { values, probs } => {
                write!(f, "table(")?;
                for (i, (v, p)) in values.iter().zip(probs).enumerate() {
                    if i > 0 {
                        write!(f, ";")?;
                    }
                    write!(f, "{v}:{p}")?;
                }
                write!(f, ")")
            }
        }
    }
}

/// Analytic constants of `dist` at `delta`.
pub fn moment_profile(dist: &DistributionSpec, delta: f64) -> Result<MomentProfile> {
    dist.validate()?;
    let abs_exp = dist.abs_exp_moment(delta)?;
    Ok(MomentProfile::from_moments(
        delta,
        dist.mean(),
        dist.second_abs_moment(),
        abs_exp,
    ))
}

/// `n` i.i.d. draws from a single stream of `seed`.
pub fn sample_iid(dist: &DistributionSpec, n: usize, seed: u64) -> Result<Vec<f64>> {
    dist.validate()?;
    let mut rng = StreamKey::new(seed).stream(0);
    Ok((0..n).map(|_| dist.sample(&mut rng)).collect())
}

/// Standard errors of the plug-in estimates in [`empirical_profile_with_errors`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ProfileErrors {
    pub mean: f64,
    pub second_abs_moment: f64,
    pub abs_exp_moment: f64,
    /// Delta-method error of `sqrt(A) * B`, including the covariance of `A` and `B`.
    pub k_constant: f64,
}

/// Plug-in estimates of every profile field.
pub fn empirical_profile(samples: &[f64], delta: f64) -> Result<MomentProfile> {
    empirical_profile_with_errors(samples, delta).map(|(p, _)| p)
}

pub fn empirical_profile_with_errors(samples: &[f64], delta: f64) -> Result<(MomentProfile, ProfileErrors)> {
    if samples.is_empty() {
        return Err(Error::domain("empirical profile needs at least one sample"));
    }
    check_delta(delta)?;
    let m = samples.len() as f64;
    let mean = compensated_sum(samples.iter().copied()) / m;
    let sq: Vec<f64> = samples.iter().map(|x| x * x).collect();
    let ex: Vec<f64> = samples.iter().map(|x| (delta * x.abs()).exp()).collect();
    let a = compensated_sum(sq.iter().copied()) / m;
    let b = compensated_sum(ex.iter().copied()) / m;
    let profile = MomentProfile::from_moments(delta, mean, a, b);

    let var = |v: &[f64], mu: f64| compensated_sum(v.iter().map(|x| (x - mu) * (x - mu))) / (m - 1.0).max(1.0);
    let var_x = var(samples, mean);
    let var_a = var(&sq, a);
    let var_b = var(&ex, b);
    let cov_ab = compensated_sum(sq.iter().zip(&ex).map(|(s, e)| (s - a) * (e - b))) / (m - 1.0).max(1.0);
    // K = sqrt(A) B: dK/dA = B / (2 sqrt A), dK/dB = sqrt A
    let var_k = if a > 0.0 {
        let ga = b / (2.0 * a.sqrt());
        let gb = a.sqrt();
        (ga * ga * var_a + gb * gb * var_b + 2.0 * ga * gb * cov_ab).max(0.0)
    } else {
        0.0
    };
    let errors = ProfileErrors {
        mean: (var_x / m).sqrt(),
        second_abs_moment: (var_a / m).sqrt(),
        abs_exp_moment: (var_b / m).sqrt(),
        k_constant: (var_k / m).sqrt(),
    };
    Ok((profile, errors))
}
