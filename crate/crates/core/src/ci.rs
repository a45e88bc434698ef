//! Exact (Clopper–Pearson) binomial confidence limits.
//!
//! Limits are Beta quantiles, found by bisection on the regularised
//! incomplete beta function; the zero-hit and all-hit edges use their closed
//! forms.

use statrs::function::beta::beta_reg;

/// `q` with `I_q(a, b) = p`.
pub fn beta_quantile(p: f64, a: f64, b: f64) -> f64 {
    if p <= 0.0 {
        return 0.0;
    }
    if p >= 1.0 {
        return 1.0;
    }
    let (mut lo, mut hi) = (0.0_f64, 1.0_f64);
    for _ in 0..200 {
        // geometric midpoint while the bracket spans orders of magnitude
        let mid = if lo > 0.0 && hi / lo > 4.0 {
            (lo * hi).sqrt()
        } else if lo == 0.0 && hi < 1e-3 {
            hi / 16.0
        } else {
            0.5 * (lo + hi)
        };
        if mid <= lo || mid >= hi {
            break;
        }
        if beta_reg(a, b, mid) < p {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

/// One-sided upper limit at confidence `level`.
pub fn upper_limit(hits: u64, reps: u64, level: f64) -> f64 {
    assert!(hits <= reps && reps > 0, "need 0 <= hits <= reps, reps > 0");
    if hits == reps {
        return 1.0;
    }
    let alpha = 1.0 - level;
    if hits == 0 {
        // 1 - alpha^(1/n), computed without cancellation
        return -(alpha.ln() / reps as f64).exp_m1();
    }
    beta_quantile(level, hits as f64 + 1.0, (reps - hits) as f64)
}

/// One-sided lower limit at confidence `level`.
pub fn lower_limit(hits: u64, reps: u64, level: f64) -> f64 {
    assert!(hits <= reps && reps > 0, "need 0 <= hits <= reps, reps > 0");
    if hits == 0 {
        return 0.0;
    }
    let alpha = 1.0 - level;
    if hits == reps {
        return alpha.powf(1.0 / reps as f64);
    }
    beta_quantile(alpha, hits as f64, (reps - hits + 1) as f64)
}

/// Two-sided interval with coverage `level`.
pub fn two_sided(hits: u64, reps: u64, level: f64) -> (f64, f64) {
    let tail = (1.0 + level) / 2.0;
    (lower_limit(hits, reps, tail), upper_limit(hits, reps, tail))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zero_hits_rule_of_three() {
        let u = upper_limit(0, 1_000_000, 0.95);
        assert!((u - 2.995731e-6).abs() < 1e-11, "{u}");
        assert!((u * 1e6 - 3.0).abs() < 0.01);
    }

    #[test]
    fn all_hits() {
        let (lo, hi) = two_sided(50, 50, 0.99);
        assert_eq!(hi, 1.0);
        assert!((lo - 0.005_f64.powf(1.0 / 50.0)).abs() < 1e-15);
    }

    #[test]
    fn matches_reference_values() {
        // 7 of 20 at 95% two-sided: (0.15391, 0.59219)
        let (lo, hi) = two_sided(7, 20, 0.95);
        assert!((lo - 0.1539092).abs() < 1e-6, "{lo}");
        assert!((hi - 0.5921885).abs() < 1e-6, "{hi}");
    }

    #[test]
    fn quantile_inverts_beta_reg() {
        for &(p, a, b) in &[(0.01, 2.0, 50.0), (0.5, 1.0, 1.0), (0.995, 30.0, 3.0), (1e-6, 1.0, 1e6)] {
            let q = beta_quantile(p, a, b);
            assert!((beta_reg(a, b, q) - p).abs() < 1e-10 * p.max(1e-3), "{p} {a} {b}");
        }
    }
}
