//! The spatial kernel `f` of the continuum field `𝒲`.

use super::green::LAMBDA_3;
use crate::error::{Error, Result};
use statrs::function::erf::erfc;
use std::f64::consts::PI;

/// Heat kernel `ρ_d(t, x) = (2πt/d)^{−d/2} exp(−d‖x‖²/2t)`.
pub fn heat_kernel(d: usize, t: f64, r_sq: f64) -> f64 {
    let d = d as f64;
    (2.0 * PI * t / d).powf(-d / 2.0) * (-d * r_sq / (2.0 * t)).exp()
}

/// `f(x)`: `E₁(‖x‖²/2)` for `d = 2` and `2λ₃ ∫_0^1 ρ_3(u, x) du` for `d = 3`.
///
/// For `d = 3` the time integral is `3 erfc(‖x‖√(3/2)) / (2π‖x‖)`.
pub fn f_kernel(d: usize, x: &[f64]) -> Result<f64> {
    if x.len() != d {
        return Err(Error::invalid(format!("point has {} coordinates, expected {d}", x.len())));
    }
    let r_sq: f64 = x.iter().map(|v| v * v).sum();
    f_radial(d, r_sq)
}

/// `f` as a function of `‖x‖²`.
pub fn f_radial(d: usize, r_sq: f64) -> Result<f64> {
    match d {
        2 => {
            if r_sq <= 0.0 {
                return Err(Error::invalid("f is singular at x = 0 in d = 2"));
            }
            Ok(exp_integral_e1(0.5 * r_sq))
        }
        3 => {
            if r_sq <= 0.0 {
                return Err(Error::invalid("f is singular at x = 0 in d = 3"));
            }
            let r = r_sq.sqrt();
            Ok(3.0 * LAMBDA_3 * erfc(r * 1.5f64.sqrt()) / (PI * r))
        }
        _ => Err(Error::invalid(format!("f is defined for d in {{2, 3}}, got d = {d}"))),
    }
}

/// Exponential integral `E₁(x) = ∫_x^∞ e^{−u}/u du` for `x > 0`: power
/// series up to 1, Lentz continued fraction beyond.
pub fn exp_integral_e1(x: f64) -> f64 {
    const EULER: f64 = 0.577_215_664_901_532_9;
    if x <= 1.0 {
        let mut sum = 0.0;
        let mut term = 1.0;
        for k in 1..100 {
            term *= -x / k as f64;
            let add = term / k as f64;
            sum += add;
            if add.abs() < 1e-17 {
                break;
            }
        }
        return -EULER - x.ln() - sum;
    }
    let tiny = 1e-300;
    let mut b = x + 1.0;
    let mut c = 1.0 / tiny;
    let mut d = 1.0 / b;
    let mut h = d;
    for i in 1..1000 {
        let a = -((i * i) as f64);
        b += 2.0;
        d = 1.0 / (a * d + b);
        c = b + a / c;
        let del = c * d;
        h *= del;
        if (del - 1.0).abs() < 1e-15 {
            break;
        }
    }
    h * (-x).exp()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn e1_series(x: f64) -> f64 {
        let euler = 0.577_215_664_901_532_9;
        let mut sum = 0.0;
        let mut term = 1.0;
        for k in 1..60 {
            term *= -x / k as f64;
            sum += term / k as f64;
        }
        -euler - x.ln() - sum
    }

    #[test]
    fn e1_branches_meet() {
        for x in [0.999, 1.0, 1.001, 1.049, 1.5] {
            assert!((exp_integral_e1(x) - e1_series(x)).abs() < 1e-12, "{x}");
        }
        // E₁(10) = 4.156968929685324e-6
        assert!((exp_integral_e1(10.0) / 4.156_968_929_685_324e-6 - 1.0).abs() < 1e-12);
    }

    #[test]
    fn exponential_integral_at_one() {
        let v = f_kernel(2, &[2f64.sqrt(), 0.0]).unwrap();
        assert!((v - e1_series(1.0)).abs() < 1e-8);
        assert!((v - 0.219_383_934_395_520_3).abs() < 1e-8);
        for x in [0.05, 0.5, 2.0, 4.0] {
            assert!((f_radial(2, 2.0 * x).unwrap() - e1_series(x)).abs() < 1e-9);
        }
    }

    #[test]
    fn d3_matches_time_quadrature() {
        for r in [0.1f64, 0.5, 1.0, 2.0] {
            let q = quadrature::double_exponential::integrate(|t| heat_kernel(3, t, r * r), 0.0, 1.0, 1e-14).integral;
            let closed = f_radial(3, r * r).unwrap();
            assert!((closed - 2.0 * LAMBDA_3 * q).abs() < 1e-9 * closed.max(1e-6), "{r}: {closed} vs {}", 2.0 * LAMBDA_3 * q);
        }
    }

    #[test]
    fn decreasing_and_vanishing() {
        for d in [2, 3] {
            let mut last = f64::INFINITY;
            for r in [0.1, 0.3, 1.0, 2.0, 4.0] {
                let v = f_radial(d, r * r).unwrap();
                assert!(v > 0.0 && v < last);
                last = v;
            }
            assert!(f_radial(d, 100.0).unwrap() < 1e-20);
        }
        assert!(f_kernel(4, &[1.0; 4]).is_err());
        assert!(f_kernel(2, &[0.0, 0.0]).is_err());
    }
}
