//! Bessel functions needed by the limit constants and the lattice Green's
//! function.

use crate::error::{Error, Result};
use statrs::function::gamma::ln_gamma;

/// `J_ν(x)` from its ascending series, for `ν ≥ 0` and moderate `x`.
pub fn bessel_j(nu: f64, x: f64) -> f64 {
    if x == 0.0 {
        return if nu == 0.0 { 1.0 } else { 0.0 };
    }
    let half = 0.5 * x;
    let mut term = (nu * half.ln() - ln_gamma(nu + 1.0)).exp();
    let mut sum = term;
    let q = -half * half;
    for k in 1..500 {
        let k = k as f64;
        term *= q / (k * (k + nu));
        sum += term;
        if term.abs() < 1e-17 * sum.abs() {
            break;
        }
    }
    sum
}

/// First positive zero `j_{ν,1}` of `J_ν`, by scanning for a sign change
/// and bisecting.
pub fn bessel_j_first_zero(nu: f64) -> Result<f64> {
    if !(0.0..=20.0).contains(&nu) {
        return Err(Error::invalid(format!("Bessel order {nu} outside [0, 20]")));
    }
    let step = 0.05;
    let mut a = nu.max(step);
    let mut fa = bessel_j(nu, a);
    loop {
        let b = a + step;
        let fb = bessel_j(nu, b);
        if fa.signum() != fb.signum() {
            let (mut lo, mut hi) = (a, b);
            for _ in 0..200 {
                let mid = 0.5 * (lo + hi);
                if bessel_j(nu, mid).signum() == fa.signum() {
                    lo = mid;
                } else {
                    hi = mid;
                }
                if hi - lo < 1e-15 * hi {
                    break;
                }
            }
            return Ok(0.5 * (lo + hi));
        }
        a = b;
        fa = fb;
    }
}

/// `e^{−s} I_0(s)`.
fn scaled_i0(s: f64) -> f64 {
    if s < 600.0 {
        scaled_i_series(0, s)
    } else {
        // Large-argument expansion; the terms used are below 1e-13 here.
        let t = 1.0 / (8.0 * s);
        let poly = 1.0 + t * (1.0 + t * (4.5 + t * (37.5 + t * 459.375)));
        poly / (2.0 * std::f64::consts::PI * s).sqrt()
    }
}

fn scaled_i_series(n: u32, s: f64) -> f64 {
    let half = 0.5 * s;
    let log_t0 = n as f64 * half.ln() - ln_gamma(n as f64 + 1.0);
    let q = half * half;
    let mut term = 1.0f64;
    let mut sum = 1.0f64;
    let mut k = 0.0f64;
    loop {
        k += 1.0;
        term *= q / (k * (k + n as f64));
        sum += term;
        if k > half && term < 1e-17 * sum {
            break;
        }
    }
    (log_t0 - s + sum.ln()).exp()
}

/// `e^{−s} I_n(s)` for integer `n ≥ 0` and `s ≥ 0`.
pub fn scaled_bessel_i(n: u32, s: f64) -> f64 {
    if s == 0.0 {
        return if n == 0 { 1.0 } else { 0.0 };
    }
    if n == 0 {
        return scaled_i0(s);
    }
    if s < 30.0 {
        return scaled_i_series(n, s);
    }
    // Ratios r_k = I_k / I_{k−1} from the backward recurrence
    // r_k = 1 / (2k/s + r_{k+1}).
    let top = n as usize + 40 + (12.0 * s.sqrt()) as usize;
    let mut r = 0.0;
    let mut prod = 1.0;
    for k in (1..=top).rev() {
        r = 1.0 / (2.0 * k as f64 / s + r);
        if k <= n as usize {
            prod *= r;
        }
    }
    scaled_i0(s) * prod
}
