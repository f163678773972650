//! Log-moment generating function of the truncated disorder
//! `ω̃ = ω 1{|ω| ≤ k}` under the law sampled by `DisorderField`.

use crate::error::{Error, Result};

/// Switch to the second-order cumulant expansion below this `β k`.
pub const SERIES_THRESHOLD: f64 = 1e-2;

/// Sign branches of the law: `(probability, sign, interval of V)` where
/// `ω = sign·V − c` and `V` is Pareto(α) on `[1, ∞)`, restricted to
/// `|ω| ≤ k`.
fn branches(alpha: f64, p: f64, q: f64, k: f64) -> [(f64, f64, f64, f64); 2] {
    let c = if alpha > 1.0 { (p - q) * alpha / (alpha - 1.0) } else { 0.0 };
    let plus = ((c - k).max(1.0), c + k);
    let minus = ((-k - c).max(1.0), k - c);
    [(p, 1.0, plus.0, plus.1), (q, -1.0, minus.0, minus.1)]
}

fn centering(alpha: f64, p: f64, q: f64) -> f64 {
    if alpha > 1.0 {
        (p - q) * alpha / (alpha - 1.0)
    } else {
        0.0
    }
}

/// `∫_a^b v^r α v^{−α−1} dv`.
fn pareto_moment(alpha: f64, r: f64, a: f64, b: f64) -> f64 {
    if b <= a {
        return 0.0;
    }
    let e = r - alpha;
    if e.abs() < 1e-12 {
        alpha * (b / a).ln()
    } else {
        alpha * (b.powf(e) - a.powf(e)) / e
    }
}

/// `E[ω̃]` and `E[ω̃²]`.
pub fn truncated_moments(alpha: f64, p: f64, q: f64, k: f64) -> (f64, f64) {
    let c = centering(alpha, p, q);
    let mut m1 = 0.0;
    let mut m2 = 0.0;
    for (w, s, a, b) in branches(alpha, p, q, k) {
        let (v0, v1, v2) = (
            pareto_moment(alpha, 0.0, a, b),
            pareto_moment(alpha, 1.0, a, b),
            pareto_moment(alpha, 2.0, a, b),
        );
        m1 += w * (s * v1 - c * v0);
        m2 += w * (v2 - 2.0 * s * c * v1 + c * c * v0);
    }
    (m1, m2)
}

/// `λ = log E[exp(β ω 1{|ω| ≤ k})]`.
pub fn truncated_log_mgf(alpha: f64, p: f64, q: f64, beta: f64, k: f64) -> Result<f64> {
    if !(alpha > 0.0) || !(p > 0.0 && q > 0.0) || (p + q - 1.0).abs() > 1e-12 {
        return Err(Error::invalid("need alpha > 0 and p, q > 0 with p + q = 1"));
    }
    if !(beta >= 0.0 && beta.is_finite()) {
        return Err(Error::invalid(format!("beta = {beta} must be finite and >= 0")));
    }
    if !(k >= 1.0 && k.is_finite()) {
        return Err(Error::invalid(format!("truncation level k = {k} must be finite and >= 1")));
    }
    if beta == 0.0 {
        return Ok(0.0);
    }
    let c = centering(alpha, p, q);
    if beta * (k + c.abs()) > 700.0 {
        return Err(Error::invalid(format!(
            "beta * k = {} overflows the exponential",
            beta * k
        )));
    }
    if beta * k <= SERIES_THRESHOLD {
        let (m1, m2) = truncated_moments(alpha, p, q, k);
        return Ok(beta * m1 + 0.5 * beta * beta * (m2 - m1 * m1));
    }
    // E[e^{βω̃}] − 1 = Σ_branches w ∫_I (e^{β(sv − c)} − 1) α v^{−α−1} dv,
    // integrated in t = log v.
    let mut excess = 0.0;
    for (w, s, a, b) in branches(alpha, p, q, k) {
        if b <= a {
            continue;
        }
        let (t0, t1) = (a.ln(), b.ln());
        let pieces = ((t1 - t0).ceil() as usize).max(1) * 4;
        let h = (t1 - t0) / pieces as f64;
        let f = |t: f64| {
            let v = t.exp();
            alpha * (-alpha * t).exp() * (beta * (s * v - c)).exp_m1()
        };
        for i in 0..pieces {
            let lo = t0 + i as f64 * h;
            let out = quadrature::double_exponential::integrate(f, lo, lo + h, 1e-17);
            excess += w * out.integral;
        }
    }
    Ok(excess.ln_1p())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::environment::DisorderField;
    use crate::logspace::LogMoments;

    #[test]
    fn zero_beta() {
        assert_eq!(truncated_log_mgf(1.5, 0.7, 0.3, 0.0, 10.0).unwrap(), 0.0);
        assert!(truncated_log_mgf(1.5, 0.7, 0.3, 1.0, 1e4).is_err());
        assert!(truncated_log_mgf(1.5, 0.7, 0.3, 0.1, 0.5).is_err());
    }

    #[test]
    fn series_and_quadrature_meet() {
        for (alpha, p, k) in [(2.5, 0.6, 100.0), (1.5, 0.7, 50.0), (0.8, 0.5, 20.0)] {
            let q = 1.0 - p;
            let beta = SERIES_THRESHOLD / k;
            let series = truncated_log_mgf(alpha, p, q, beta, k).unwrap();
            let quad = truncated_log_mgf(alpha, p, q, beta * 1.000001, k).unwrap();
            // Third cumulant term is O((βk)·β² m2), far below the tolerance.
            assert!((series - quad).abs() < 2e-2 * series.abs().max(beta * beta), "{alpha}: {series} vs {quad}");
        }
    }

    #[test]
    fn quadratic_limit_for_finite_variance() {
        let (alpha, p, q, k) = (3.0, 0.6, 0.4, 200.0);
        let (m1, m2) = truncated_moments(alpha, p, q, k);
        let var = m2 - m1 * m1;
        for beta in [1e-3, 1e-4] {
            let lam = truncated_log_mgf(alpha, p, q, beta, k).unwrap();
            let ratio = (lam - beta * m1) / (0.5 * beta * beta);
            assert!((ratio / var - 1.0).abs() < 0.2, "{ratio} vs {var}");
        }
        // Mean of the truncated variable is −E[ω; |ω| > k], of order k^{1−α}.
        assert!(m1.abs() < 10.0 * k.powf(1.0 - alpha));
    }

    #[test]
    fn quadrature_matches_sampling() {
        let (alpha, p, beta, k) = (2.5, 0.6, 0.01, 100.0);
        let lam = truncated_log_mgf(alpha, p, 1.0 - p, beta, k).unwrap();
        let f = DisorderField::new(77, alpha, p).unwrap();
        let n = 10_000_000i64;
        let parts = crate::par::map_indexed(100, |c| {
            let mut m = LogMoments::new();
            for i in (c as i64 * n / 100)..((c as i64 + 1) * n / 100) {
                let w = f.omega_at(&[(i % 4000) as i32, (i / 4000) as i32]);
                m.add(if w.abs() <= k { beta * w } else { 0.0 });
            }
            m
        });
        let mut m = LogMoments::new();
        for x in &parts {
            m.merge(x);
        }
        let (mean, se) = (m.log_mean().exp(), m.log_std_err().exp());
        assert!((mean - lam.exp()).abs() < 3.0 * se, "{} vs {} ± {se}", mean, lam.exp());
    }
}
