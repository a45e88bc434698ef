//! The two majorants of `e^x` and their numerical verification.
//!
//! * [`BoundVariant::Abs`]: `e^x <= 1 + x + (|x|/2) e^{|x|}`
//! * [`BoundVariant::Sq`]:  `e^x <= 1 + x + (x^2/2) e^{|x|}`
//!
//! The two majorants coincide at `|x| in {0, 1}`. For `0 < |x| < 1` the `Sq`
//! form is the smaller one; for `|x| > 1` the `Abs` form is.
//!
//! Slack is computed from the series remainders (`e^x - 1 - x`, ...) rather
//! than by subtracting two nearly equal doubles, so it is strictly positive
//! for every nonzero `x` that is representable.

use crate::numeric::{exp_tail, ulp};
use crate::rng::StreamKey;
use crate::{Error, Result};
use rand::Rng;
use serde::{Deserialize, Serialize};
use std::fmt;

/// Largest log-magnitude evaluated in linear domain.
const LOG_DOMAIN_THRESHOLD: f64 = 700.0;

/// Slack below `-VIOLATION_ULPS` ULPs of the bound counts as a violation.
const VIOLATION_ULPS: f64 = 4.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BoundVariant {
    Abs,
    Sq,
}

impl BoundVariant {
    pub const ALL: [BoundVariant; 2] = [BoundVariant::Abs, BoundVariant::Sq];

    /// Coefficient multiplying `e^{|x|}`.
    fn coefficient(self, x: f64) -> f64 {
        match self {
            BoundVariant::Abs => x.abs() / 2.0,
            BoundVariant::Sq => x * x / 2.0,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            BoundVariant::Abs => "abs",
            BoundVariant::Sq => "sq",
        }
    }
}

impl fmt::Display for BoundVariant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Domain {
    Linear,
    Log,
}

impl Domain {
    pub fn as_str(self) -> &'static str {
        match self {
            Domain::Linear => "linear",
            Domain::Log => "log",
        }
    }
}

/// Both sides of the inequality at one point.
///
/// In [`Domain::Log`] `exp_value` is `x`, `bound_value` is the natural log of
/// the majorant and `slack` is their difference.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SlackReport {
    pub x: f64,
    pub variant: BoundVariant,
    pub exp_value: f64,
    pub bound_value: f64,
    pub slack: f64,
    pub domain: Domain,
}

impl SlackReport {
    pub fn is_violation(&self) -> bool {
        self.slack < -VIOLATION_ULPS * ulp(self.bound_value)
    }
}

fn check_finite(x: f64) -> Result<()> {
    if x.is_finite() {
        Ok(())
    } else {
        Err(Error::domain(format!("x must be finite, got {x}")))
    }
}

/// The majorant `1 + x + c(x) e^{|x|}`; `+inf` once it leaves the double range.
pub fn exp_bound(x: f64, variant: BoundVariant) -> Result<f64> {
    check_finite(x)?;
    Ok(1.0 + x + variant.coefficient(x) * x.abs().exp())
}

/// Natural log of the majorant, valid over the whole real line.
pub fn log_exp_bound(x: f64, variant: BoundVariant) -> Result<f64> {
    check_finite(x)?;
    let c = variant.coefficient(x);
    if c == 0.0 {
        return Ok((1.0 + x).ln());
    }
    let a = x.abs();
    // log(c e^a + (1 + x)) = a + ln c + ln1p((1 + x) e^{-a} / c); the ln1p
    // argument is > -1 because the majorant is positive
    Ok(a + c.ln() + ((1.0 + x) * (-a).exp() / c).ln_1p())
}

fn log_magnitude(x: f64, variant: BoundVariant) -> f64 {
    let c = variant.coefficient(x);
    if c == 0.0 {
        0.0
    } else {
        x.abs() + c.ln()
    }
}

pub fn slack_at(x: f64, variant: BoundVariant) -> Result<SlackReport> {
    check_finite(x)?;
    if log_magnitude(x, variant) > LOG_DOMAIN_THRESHOLD || x.abs() > LOG_DOMAIN_THRESHOLD {
        let log_bound = log_exp_bound(x, variant)?;
        return Ok(SlackReport {
            x,
            variant,
            exp_value: x,
            bound_value: log_bound,
            slack: log_bound - x,
            domain: Domain::Log,
        });
    }
    let a = x.abs();
    let slack = match variant {
        // (|x|/2) e^{|x|} - (e^x - 1 - x)
        BoundVariant::Abs => a / 2.0 * a.exp() - exp_tail(x, 2),
        // (x^2/2)(e^{|x|} - 1) - (e^x - 1 - x - x^2/2)
        BoundVariant::Sq => x * x / 2.0 * a.exp_m1() - exp_tail(x, 3),
    };
    Ok(SlackReport {
        x,
        variant,
        exp_value: x.exp(),
        bound_value: exp_bound(x, variant)?,
        slack,
        domain: Domain::Linear,
    })
}

/// Which majorant is the smaller one at `x`; `None` where they coincide.
pub fn tighter_variant(x: f64) -> Option<BoundVariant> {
    let a = x.abs();
    if a == 0.0 || a == 1.0 {
        None
    } else if a < 1.0 {
        Some(BoundVariant::Sq)
    } else {
        Some(BoundVariant::Abs)
    }
}

/// Evenly spaced points `lo, lo + step, ..., <= hi`.
///
/// When `lo` is an integer multiple of `step` the points are computed as
/// `k * step`, so the origin is hit exactly.
pub fn grid(lo: f64, hi: f64, step: f64) -> Result<Vec<f64>> {
    if !(lo.is_finite() && hi.is_finite() && step.is_finite()) {
        return Err(Error::domain("grid bounds and step must be finite"));
    }
    if step <= 0.0 {
        return Err(Error::domain(format!("step must be positive, got {step}")));
    }
    if lo > hi {
        return Err(Error::domain(format!("empty grid: lo = {lo} > hi = {hi}")));
    }
    let count = ((hi - lo) / step + 1e-9).floor() as u64 + 1;
    let k0 = (lo / step).round();
    let aligned = (k0 * step - lo).abs() <= 1e-12 * lo.abs().max(step);
    Ok((0..count)
        .map(|i| {
            if aligned {
                (k0 + i as f64) * step
            } else {
                lo + i as f64 * step
            }
        })
        .collect())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScanConfig {
    pub lo: f64,
    pub hi: f64,
    pub step: f64,
    pub random_points: u64,
    pub random_lo: f64,
    pub random_hi: f64,
}

impl Default for ScanConfig {
    fn default() -> Self {
        Self {
            lo: -30.0,
            hi: 30.0,
            step: 1e-3,
            random_points: 100_000,
            random_lo: -700.0,
            random_hi: 700.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScanReport {
    pub variant: BoundVariant,
    pub points: u64,
    pub violations: u64,
    pub min_slack: f64,
    pub argmin: f64,
    /// Number of points with slack exactly zero.
    pub zero_slack_points: u64,
    /// Points where the majorants do not order as [`tighter_variant`] says.
    pub crossover_mismatches: u64,
}

/// Points of a scan: the grid followed by the seeded random points.
pub fn scan_points(cfg: &ScanConfig, seed: u64) -> Result<Vec<f64>> {
    let mut pts = grid(cfg.lo, cfg.hi, cfg.step)?;
    if cfg.random_points > 0 {
        if !(cfg.random_lo < cfg.random_hi) {
            return Err(Error::domain("random range must satisfy random_lo < random_hi"));
        }
        let mut rng = StreamKey::new(seed).stream(0);
        let width = cfg.random_hi - cfg.random_lo;
        pts.extend((0..cfg.random_points).map(|_| cfg.random_lo + width * rng.random::<f64>()));
    }
    Ok(pts)
}

fn crossover_consistent(x: f64) -> Result<bool> {
    let abs = exp_bound(x, BoundVariant::Abs)?;
    let sq = exp_bound(x, BoundVariant::Sq)?;
    Ok(match tighter_variant(x) {
        None => abs == sq || !abs.is_finite(),
        Some(BoundVariant::Sq) => sq <= abs,
        Some(BoundVariant::Abs) => abs <= sq,
    })
}

/// Scan one variant over a grid plus seeded random points.
pub fn scan_inequality(cfg: &ScanConfig, seed: u64, variant: BoundVariant) -> Result<ScanReport> {
    let pts = scan_points(cfg, seed)?;
    scan_slice(&pts, variant)
}

pub fn scan_slice(points: &[f64], variant: BoundVariant) -> Result<ScanReport> {
    if points.is_empty() {
        return Err(Error::domain("empty grid"));
    }
    let mut report = ScanReport {
        variant,
        points: 0,
        violations: 0,
        min_slack: f64::INFINITY,
        argmin: f64::NAN,
        zero_slack_points: 0,
        crossover_mismatches: 0,
    };
    for &x in points {
        let s = slack_at(x, variant)?;
        report.points += 1;
        if s.is_violation() {
            report.violations += 1;
        }
        if s.slack == 0.0 {
            report.zero_slack_points += 1;
        }
        if s.slack < report.min_slack {
            report.min_slack = s.slack;
            report.argmin = x;
        }
        if !crossover_consistent(x)? {
            report.crossover_mismatches += 1;
        }
    }
    Ok(report)
}

/// Partial sums of the factorial comparison used to prove the `Abs` majorant:
/// `sum_{n=3}^N x^n/n! <= sum_{n=3}^N |x|^n / (2 (n-1)!)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SeriesCheck {
    pub lhs: f64,
    pub rhs: f64,
    pub ok: bool,
}

pub fn partial_series_check(x: f64, terms: u32) -> Result<SeriesCheck> {
    check_finite(x)?;
    if terms < 3 {
        return Err(Error::domain(format!("N must be at least 3, got {terms}")));
    }
    // x^n / n! built incrementally
    let mut term = x * x / 2.0;
    let mut lhs = Vec::with_capacity(terms as usize);
    let mut rhs = Vec::with_capacity(terms as usize);
    for n in 3..=terms {
        term *= x / f64::from(n);
        lhs.push(term);
        // |x|^n / (2 (n-1)!) = (|x|^n / n!) * n / 2
        rhs.push(term.abs() * f64::from(n) / 2.0);
    }
    let lhs = crate::numeric::compensated_sum(lhs);
    let rhs = crate::numeric::compensated_sum(rhs);
    Ok(SeriesCheck {
        lhs,
        rhs,
        ok: lhs <= rhs,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::E;

    #[test]
    fn exp_bound_fixtures() {
        assert_eq!(exp_bound(0.0, BoundVariant::Abs).unwrap(), 1.0);
        let v = exp_bound(1.0, BoundVariant::Abs).unwrap();
        assert!((v - (2.0 + E / 2.0)).abs() < 1e-15);
        assert!((v - 3.3591409142295225).abs() < 1e-12);
        assert_eq!(v, exp_bound(1.0, BoundVariant::Sq).unwrap());
        let w = exp_bound(-2.0, BoundVariant::Abs).unwrap();
        assert!((w - (E * E - 1.0)).abs() < 1e-14);
        assert!((w - 6.38905609893065).abs() < 1e-12);
    }

    #[test]
    fn exp_bound_rejects_non_finite() {
        assert!(exp_bound(f64::NAN, BoundVariant::Abs).is_err());
        assert!(exp_bound(f64::INFINITY, BoundVariant::Sq).is_err());
        assert!(slack_at(f64::NEG_INFINITY, BoundVariant::Sq).is_err());
    }

    #[test]
    fn slack_fixtures() {
        for v in BoundVariant::ALL {
            let s = slack_at(0.0, v).unwrap();
            assert_eq!(s.slack, 0.0);
            assert_eq!(s.domain, Domain::Linear);
        }
        let s = slack_at(1.0, BoundVariant::Abs).unwrap();
        assert!((s.slack - (2.0 - E / 2.0)).abs() < 1e-15);
        assert!((s.slack - 0.6409).abs() < 1e-4);

        let big = slack_at(900.0, BoundVariant::Abs).unwrap();
        assert_eq!(big.domain, Domain::Log);
        assert!(big.slack > 0.0);
        assert!((big.slack - 450.0_f64.ln()).abs() < 1e-12);

        let neg = slack_at(-900.0, BoundVariant::Sq).unwrap();
        assert_eq!(neg.domain, Domain::Log);
        assert!(neg.slack > 1800.0);
    }

    #[test]
    fn slack_positive_for_tiny_nonzero_x() {
        // below ~1e-100 the Sq slack (order |x|^3) is not representable
        for &x in &[1e-100, -1e-100, 1e-17, -1e-9, 3e-5] {
            for v in BoundVariant::ALL {
                let s = slack_at(x, v).unwrap();
                assert!(s.slack > 0.0, "x={x} {v}: {}", s.slack);
            }
        }
    }

    #[test]
    fn abs_slack_positive_down_to_denormals() {
        for &x in &[1e-300, -1e-300, 1e-307] {
            assert!(slack_at(x, BoundVariant::Abs).unwrap().slack > 0.0);
        }
    }

    #[test]
    fn log_bound_agrees_with_linear() {
        for &x in &[-50.0, -3.0, -0.5, 0.25, 2.0, 40.0] {
            for v in BoundVariant::ALL {
                let lin = exp_bound(x, v).unwrap().ln();
                let lg = log_exp_bound(x, v).unwrap();
                assert!((lin - lg).abs() < 1e-12 * lin.abs().max(1.0), "{x} {v}");
            }
        }
    }

    #[test]
    fn tighter_variant_orders_majorants() {
        assert_eq!(tighter_variant(0.5), Some(BoundVariant::Sq));
        assert_eq!(tighter_variant(-0.5), Some(BoundVariant::Sq));
        assert_eq!(tighter_variant(2.0), Some(BoundVariant::Abs));
        assert_eq!(tighter_variant(-1.0), None);
        assert!(exp_bound(0.5, BoundVariant::Sq).unwrap() < exp_bound(0.5, BoundVariant::Abs).unwrap());
        assert!(exp_bound(3.0, BoundVariant::Abs).unwrap() < exp_bound(3.0, BoundVariant::Sq).unwrap());
    }

    #[test]
    fn grid_hits_origin() {
        let g = grid(-30.0, 30.0, 1e-3).unwrap();
        assert_eq!(g.len(), 60_001);
        assert!(g.contains(&0.0));
        assert_eq!(g[0], -30.0);
        assert!((g[g.len() - 1] - 30.0).abs() < 1e-12);
    }

    #[test]
    fn degenerate_grid_is_single_point() {
        let cfg = ScanConfig {
            lo: 0.5,
            hi: 0.5,
            step: 0.1,
            random_points: 0,
            ..ScanConfig::default()
        };
        let r = scan_inequality(&cfg, 1, BoundVariant::Abs).unwrap();
        assert_eq!(r.points, 1);
        assert_eq!(r.argmin, 0.5);
        assert_eq!(r.violations, 0);
    }

    #[test]
    fn grid_errors() {
        assert!(grid(1.0, 0.0, 0.1).is_err());
        assert!(grid(0.0, 1.0, 0.0).is_err());
        assert!(scan_slice(&[], BoundVariant::Sq).is_err());
    }

    #[test]
    fn scan_is_deterministic() {
        let cfg = ScanConfig {
            lo: -2.0,
            hi: 2.0,
            step: 0.01,
            random_points: 1000,
            ..ScanConfig::default()
        };
        let a = scan_inequality(&cfg, 11, BoundVariant::Sq).unwrap();
        let b = scan_inequality(&cfg, 11, BoundVariant::Sq).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.violations, 0);
        assert_eq!(a.argmin, 0.0);
    }

    #[test]
    fn series_fixtures() {
        let c = partial_series_check(2.0, 5).unwrap();
        assert!((c.lhs - 34.0 / 15.0).abs() < 1e-14);
        assert!((c.rhs - 4.0).abs() < 1e-14);
        assert!(c.ok);
        let z = partial_series_check(0.0, 3).unwrap();
        assert_eq!((z.lhs, z.rhs, z.ok), (0.0, 0.0, true));
        assert!(partial_series_check(-3.0, 8).unwrap().ok);
        assert!(partial_series_check(1.0, 2).is_err());
    }
}
