//! Small numerical helpers shared across modules.

/// Neumaier-compensated summation.
pub fn compensated_sum<I: IntoIterator<Item = f64>>(values: I) -> f64 {
    let mut sum = 0.0_f64;
    let mut comp = 0.0_f64;
    for v in values {
        let t = sum + v;
        if sum.abs() >= v.abs() {
            comp += (sum - t) + v;
        } else {
            comp += (v - t) + sum;
        }
        sum = t;
    }
    sum + comp
}

/// Distance to the next representable double above `|x|`.
pub fn ulp(x: f64) -> f64 {
    let a = x.abs();
    if !a.is_finite() {
        return f64::NAN;
    }
    f64::from_bits(a.to_bits() + 1) - a
}

/// `sum_{j >= k} x^j / j!`, accurate for small `|x|` where the direct
/// subtraction `e^x - sum_{j<k} x^j/j!` cancels.
pub fn exp_tail(x: f64, k: u32) -> f64 {
    if x.abs() < 1.0 {
        let mut term = 1.0_f64;
        for j in 1..=k {
            term *= x / f64::from(j);
        }
        let mut sum = 0.0_f64;
        let mut j = k;
        while term != 0.0 && (sum == 0.0 || term.abs() > sum.abs() * 1e-18) {
            sum += term;
            j += 1;
            term *= x / f64::from(j);
        }
        sum
    } else {
        let mut head = 0.0;
        let mut term = 1.0;
        for j in 0..k {
            if j > 0 {
                term *= x / f64::from(j);
            }
            head += term;
        }
        if k >= 1 {
            // e^x - 1 - ... keeps one more digit through expm1
            x.exp_m1() - (head - 1.0)
        } else {
            x.exp()
        }
    }
}

/// Standard normal CDF.
pub fn normal_cdf(z: f64) -> f64 {
    0.5 * statrs::function::erf::erfc(-z / std::f64::consts::SQRT_2)
}

/// Standard normal quantile.
pub fn normal_quantile(p: f64) -> f64 {
    // erfc_inv is accurate in both tails
    -std::f64::consts::SQRT_2 * statrs::function::erf::erfc_inv(2.0 * p)
}

/// Streaming central moments up to order four, mergeable in a fixed order.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct Moments {
    pub n: u64,
    pub mean: f64,
    m2: f64,
    m3: f64,
    m4: f64,
}

impl Moments {
    pub fn push(&mut self, x: f64) {
        let n1 = self.n as f64;
        self.n += 1;
        let n = self.n as f64;
        let delta = x - self.mean;
        let delta_n = delta / n;
        let delta_n2 = delta_n * delta_n;
        let term1 = delta * delta_n * n1;
        self.mean += delta_n;
        self.m4 += term1 * delta_n2 * (n * n - 3.0 * n + 3.0) + 6.0 * delta_n2 * self.m2
            - 4.0 * delta_n * self.m3;
        self.m3 += term1 * delta_n * (n - 2.0) - 3.0 * delta_n * self.m2;
        self.m2 += term1;
    }

    pub fn merge(&self, other: &Moments) -> Moments {
        if self.n == 0 {
            return *other;
        }
        if other.n == 0 {
            return *self;
        }
        let na = self.n as f64;
        let nb = other.n as f64;
        let n = na + nb;
        let d = other.mean - self.mean;
        let d2 = d * d;
        let d3 = d2 * d;
        let d4 = d2 * d2;
        let mean = self.mean + d * nb / n;
        let m2 = self.m2 + other.m2 + d2 * na * nb / n;
        let m3 = self.m3
            + other.m3
            + d3 * na * nb * (na - nb) / (n * n)
            + 3.0 * d * (na * other.m2 - nb * self.m2) / n;
        let m4 = self.m4
            + other.m4
            + d4 * na * nb * (na * na - na * nb + nb * nb) / (n * n * n)
            + 6.0 * d2 * (na * na * other.m2 + nb * nb * self.m2) / (n * n)
            + 4.0 * d * (na * other.m3 - nb * self.m3) / n;
        Moments {
            n: self.n + other.n,
            mean,
            m2,
            m3,
            m4,
        }
    }

    /// Unbiased sample variance; zero for fewer than two observations.
    pub fn variance(&self) -> f64 {
        if self.n < 2 {
            0.0
        } else {
            self.m2 / (self.n as f64 - 1.0)
        }
    }

    pub fn std_error(&self) -> f64 {
        if self.n == 0 {
            return f64::NAN;
        }
        (self.variance() / self.n as f64).sqrt()
    }

    /// Sample kurtosis `m4 / m2^2` (3 for a Gaussian); `None` when degenerate.
    pub fn kurtosis(&self) -> Option<f64> {
        if self.n < 4 || self.m2 <= 0.0 {
            return None;
        }
        let n = self.n as f64;
        Some(n * self.m4 / (self.m2 * self.m2))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn compensated_sum_recovers_lost_bits() {
        let v = [1.0, 1e100, 1.0, -1e100];
        assert_eq!(compensated_sum(v), 2.0);
    }

    #[test]
    fn exp_tail_matches_series_and_direct() {
        for &x in &[-3.0_f64, -0.7, 0.3, 0.99, 2.5] {
            let direct = x.exp() - 1.0 - x;
            let t = exp_tail(x, 2);
            assert!((t - direct).abs() <= 1e-13 * direct.abs(), "{x}");
        }
        // small x: e^x - 1 - x - x^2/2 ~ x^3/6
        let x = 1e-5_f64;
        let t = exp_tail(x, 3);
        assert!((t / (x * x * x / 6.0) - 1.0).abs() < 1e-5);
    }

    #[test]
    fn normal_quantile_inverts_cdf() {
        for &p in &[1e-10, 0.01, 0.5, 0.99, 0.995] {
            let z = normal_quantile(p);
            assert!((normal_cdf(z) - p).abs() < 1e-12, "p={p}");
        }
        assert!((normal_quantile(0.99) - 2.3263478740408408).abs() < 1e-14);
        assert!((normal_quantile(0.995) - 2.5758293035489004).abs() < 1e-14);
        assert!((normal_quantile(1e-10) + 6.361340902404056).abs() < 1e-13);
    }

    #[test]
    fn moments_merge_matches_sequential() {
        let xs: Vec<f64> = (0..1000).map(|i| ((i * 37) % 101) as f64 / 7.0 - 3.0).collect();
        let mut all = Moments::default();
        xs.iter().for_each(|&x| all.push(x));
        let mut a = Moments::default();
        let mut b = Moments::default();
        xs[..313].iter().for_each(|&x| a.push(x));
        xs[313..].iter().for_each(|&x| b.push(x));
        let m = a.merge(&b);
        assert_eq!(m.n, all.n);
        assert!((m.mean - all.mean).abs() < 1e-12);
        assert!((m.variance() - all.variance()).abs() < 1e-10);
        assert!((m.kurtosis().unwrap() - all.kurtosis().unwrap()).abs() < 1e-9);
    }
}
