//! Streaming log-sum-exp accumulators.
//!
//! Path weights span hundreds of orders of magnitude, so every sum is
//! carried as `exp(max) · Σ exp(x_i − max)`. Partial accumulators merge
//! deterministically, which lets parallel chunks combine in index order.

/// `log Σ exp(x_i)` over a slice.
pub fn log_sum_exp(xs: &[f64]) -> f64 {
    let mut acc = LogSum::new();
    for &x in xs {
        acc.add(x);
    }
    acc.value()
}

/// `log(exp(a) + exp(b))`.
#[inline]
pub fn log_add(a: f64, b: f64) -> f64 {
    if a == f64::NEG_INFINITY {
        return b;
    }
    if b == f64::NEG_INFINITY {
        return a;
    }
    let (hi, lo) = if a >= b { (a, b) } else { (b, a) };
    hi + (lo - hi).exp().ln_1p()
}

/// `log(exp(a) − exp(b))` for `a ≥ b`; `-inf` when they are equal.
#[inline]
pub fn log_sub(a: f64, b: f64) -> f64 {
    if b == f64::NEG_INFINITY {
        return a;
    }
    if b >= a {
        return f64::NEG_INFINITY;
    }
    a + (-(b - a).exp()).ln_1p()
}

/// Compensated log-sum-exp of exact terms.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LogSum {
    max: f64,
    sum: f64,
    comp: f64,
}

impl Default for LogSum {
    fn default() -> Self {
        Self::new()
    }
}

impl LogSum {
    pub fn new() -> Self {
        LogSum {
            max: f64::NEG_INFINITY,
            sum: 0.0,
            comp: 0.0,
        }
    }

    #[inline]
    fn add_scaled(&mut self, t: f64) {
        let s = self.sum + t;
        if self.sum.abs() >= t.abs() {
            self.comp += (self.sum - s) + t;
        } else {
            self.comp += (t - s) + self.sum;
        }
        self.sum = s;
    }

    #[inline]
    fn rescale(&mut self, new_max: f64) {
        if self.max != f64::NEG_INFINITY {
            let f = (self.max - new_max).exp();
            self.sum *= f;
            self.comp *= f;
        }
        self.max = new_max;
    }

    /// Add the term `exp(x)`.
    #[inline]
    pub fn add(&mut self, x: f64) {
        if x == f64::NEG_INFINITY {
            return;
        }
        if x > self.max {
            self.rescale(x);
        }
        self.add_scaled((x - self.max).exp());
    }

    pub fn merge(&mut self, other: &LogSum) {
        if other.max == f64::NEG_INFINITY {
            return;
        }
        if other.max > self.max {
            self.rescale(other.max);
        }
        let f = (other.max - self.max).exp();
        self.add_scaled(other.sum * f);
        self.add_scaled(other.comp * f);
    }

    /// `log Σ exp(x_i)`, `-inf` when empty.
    pub fn value(&self) -> f64 {
        if self.max == f64::NEG_INFINITY {
            return f64::NEG_INFINITY;
        }
        self.max + (self.sum + self.comp).ln()
    }
}

/// Log-space mean and standard error of nonnegative samples `exp(x_i)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LogMoments {
    max: f64,
    s1: f64,
    s2: f64,
    n: u64,
}

impl Default for LogMoments {
    fn default() -> Self {
        Self::new()
    }
}

impl LogMoments {
    pub fn new() -> Self {
        LogMoments {
            max: f64::NEG_INFINITY,
            s1: 0.0,
            s2: 0.0,
            n: 0,
        }
    }

    /// Record the sample `exp(x)`; `x = -inf` records a zero.
    #[inline]
    pub fn add(&mut self, x: f64) {
        self.n += 1;
        if x == f64::NEG_INFINITY {
            return;
        }
        if x > self.max {
            if self.max != f64::NEG_INFINITY {
                let f = (self.max - x).exp();
                self.s1 *= f;
                self.s2 *= f * f;
            }
            self.max = x;
        }
        let t = (x - self.max).exp();
        self.s1 += t;
        self.s2 += t * t;
    }

    pub fn merge(&mut self, other: &LogMoments) {
        self.n += other.n;
        if other.max == f64::NEG_INFINITY {
            return;
        }
        if other.max > self.max {
            if self.max != f64::NEG_INFINITY {
                let f = (self.max - other.max).exp();
                self.s1 *= f;
                self.s2 *= f * f;
            }
            self.max = other.max;
        }
        let f = (other.max - self.max).exp();
        self.s1 += other.s1 * f;
        self.s2 += other.s2 * f * f;
    }

    pub fn count(&self) -> u64 {
        self.n
    }

    /// Log of the sample mean.
    pub fn log_mean(&self) -> f64 {
        if self.n == 0 || self.max == f64::NEG_INFINITY {
            return f64::NEG_INFINITY;
        }
        self.max + (self.s1 / self.n as f64).ln()
    }

    /// Log of the standard error of the mean (sample standard deviation
    /// over `√n`); `-inf` when all samples coincide.
    pub fn log_std_err(&self) -> f64 {
        if self.n < 2 || self.max == f64::NEG_INFINITY {
            return f64::NEG_INFINITY;
        }
        let n = self.n as f64;
        let m = self.s1 / n;
        let var = ((self.s2 - n * m * m) / (n - 1.0)).max(0.0);
        if var == 0.0 || var < 1e-15 * m * m {
            return f64::NEG_INFINITY;
        }
        self.max + 0.5 * (var / n).ln()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn log_sum_matches_direct() {
        let xs = [0.1, -2.0, 3.5, 1.0];
        let direct: f64 = xs.iter().map(|x: &f64| x.exp()).sum::<f64>().ln();
        assert!((log_sum_exp(&xs) - direct).abs() < 1e-14);
        assert_eq!(log_sum_exp(&[]), f64::NEG_INFINITY);
    }

    #[test]
    fn log_sum_survives_huge_offsets() {
        let v = log_sum_exp(&[-1000.0, -1000.0]);
        assert!((v - (-1000.0 + 2f64.ln())).abs() < 1e-12);
    }

    #[test]
    fn merge_equals_sequential() {
        let xs: Vec<f64> = (0..50).map(|i| (i as f64 * 0.37).sin() * 30.0).collect();
        let mut all = LogSum::new();
        let mut a = LogSum::new();
        let mut b = LogSum::new();
        for (i, &x) in xs.iter().enumerate() {
            all.add(x);
            if i < 20 { a.add(x) } else { b.add(x) }
        }
        a.merge(&b);
        assert!((a.value() - all.value()).abs() < 1e-13);
    }

    #[test]
    fn moments_match_linear_scale() {
        let ws = [1.0f64, 2.0, 4.0, 0.0, 3.0];
        let mut m = LogMoments::new();
        for &w in &ws {
            m.add(w.ln());
        }
        let n = ws.len() as f64;
        let mean = ws.iter().sum::<f64>() / n;
        let var = ws.iter().map(|w| (w - mean).powi(2)).sum::<f64>() / (n - 1.0);
        assert!((m.log_mean().exp() - mean).abs() < 1e-12);
        assert!((m.log_std_err().exp() - (var / n).sqrt()).abs() < 1e-12);
    }

    #[test]
    fn add_and_sub() {
        assert!((log_add(1f64.ln(), 2f64.ln()) - 3f64.ln()).abs() < 1e-15);
        assert!((log_sub(3f64.ln(), 2f64.ln()) - 0.0).abs() < 1e-15);
        assert_eq!(log_sub(1.0, 1.0), f64::NEG_INFINITY);
    }
}
