//! Cramér rate function of the simple random walk step,
//! `J_d(v) = sup_λ [⟨λ, v⟩ − Λ(λ)]` with `Λ(λ) = log((1/d) Σ_i cosh λ_i)`.

/// `‖v‖₁` within this distance of 1 is treated as the boundary.
pub const BOUNDARY_TOL: f64 = 1e-12;

/// `Λ(λ)` computed without overflow.
pub fn log_mgf(lambda: &[f64]) -> f64 {
    let m = lambda.iter().fold(0.0f64, |a, l| a.max(l.abs()));
    let s: f64 = lambda.iter().map(|&l| 0.5 * ((l - m).exp() + (-l - m).exp())).sum();
    m + (s / lambda.len() as f64).ln()
}

/// `∇Λ(λ)_i = sinh λ_i / Σ_j cosh λ_j`.
pub fn log_mgf_grad(lambda: &[f64]) -> Vec<f64> {
    let m = lambda.iter().fold(0.0f64, |a, l| a.max(l.abs()));
    let c: f64 = lambda.iter().map(|&l| (l - m).exp() + (-l - m).exp()).sum();
    lambda.iter().map(|&l| ((l - m).exp() - (-l - m).exp()) / c).collect()
}

/// Solution of the inner problem at an interior speed.
#[derive(Debug, Clone, PartialEq)]
pub struct Dual {
    pub value: f64,
    pub lambda: Vec<f64>,
    /// `Λ(λ*)`; `+∞` on the boundary `‖v‖₁ = 1`.
    pub log_mgf: f64,
}

fn objective(lambda: &[f64], v: &[f64]) -> f64 {
    lambda.iter().zip(v).map(|(l, x)| l * x).sum::<f64>() - log_mgf(lambda)
}

/// Damped Newton on the concave inner objective. Works with `|v|`, since
/// `J_d` is even in every coordinate.
fn newton(v: &[f64]) -> Vec<f64> {
    let d = v.len();
    let mut lambda = vec![0.0; d];
    let mut f = objective(&lambda, v);
    for _ in 0..200 {
        let m = lambda.iter().fold(0.0f64, |a, l| a.max(l.abs()));
        let cosh: Vec<f64> = lambda.iter().map(|&l| (l - m).exp() + (-l - m).exp()).collect();
        let sinh: Vec<f64> = lambda.iter().map(|&l| (l - m).exp() - (-l - m).exp()).collect();
        let total: f64 = cosh.iter().sum();
        let g: Vec<f64> = (0..d).map(|i| v[i] - sinh[i] / total).collect();
        if g.iter().all(|x| x.abs() < 1e-15) {
            break;
        }
        // Hessian of Λ is D − u uᵀ with D = diag(cosh/Σcosh), u = sinh/Σcosh;
        // invert by Sherman–Morrison.
        let dinv: Vec<f64> = cosh.iter().map(|c| total / c).collect();
        let u: Vec<f64> = sinh.iter().map(|s| s / total).collect();
        let dg: Vec<f64> = (0..d).map(|i| dinv[i] * g[i]).collect();
        let du: Vec<f64> = (0..d).map(|i| dinv[i] * u[i]).collect();
        let udg: f64 = u.iter().zip(&dg).map(|(a, b)| a * b).sum();
        let udu: f64 = u.iter().zip(&du).map(|(a, b)| a * b).sum();
        let denom = (1.0 - udu).max(1e-300);
        let step: Vec<f64> = (0..d).map(|i| dg[i] + du[i] * udg / denom).collect();
        let mut t = 1.0;
        let mut improved = false;
        for _ in 0..60 {
            let trial: Vec<f64> = (0..d).map(|i| lambda[i] + t * step[i]).collect();
            let ft = objective(&trial, v);
            if ft >= f - 1e-15 * f.abs().max(1.0) {
                lambda = trial;
                improved = ft > f;
                f = ft;
                break;
            }
            t *= 0.5;
        }
        if !improved && t < 1.0 {
            break;
        }
    }
    lambda
}

/// `J_d(v)` with the maximizer; `value = +∞` when `‖v‖₁ > 1`.
pub fn rate_dual(v: &[f64]) -> Dual {
    let d = v.len();
    let abs: Vec<f64> = v.iter().map(|x| x.abs()).collect();
    let l1: f64 = abs.iter().sum();
    if l1 > 1.0 + BOUNDARY_TOL {
        return Dual {
            value: f64::INFINITY,
            lambda: vec![f64::INFINITY; d],
            log_mgf: f64::INFINITY,
        };
    }
    if l1 == 0.0 {
        return Dual {
            value: 0.0,
            lambda: vec![0.0; d],
            log_mgf: 0.0,
        };
    }
    if l1 >= 1.0 - BOUNDARY_TOL {
        // Only steps in the sign directions of v are allowed; the count of
        // such paths gives log(2d) − H(|v|).
        let value = (2.0 * d as f64).ln() + abs.iter().filter(|&&a| a > 0.0).map(|&a| a * a.ln()).sum::<f64>();
        return Dual {
            value,
            lambda: v.iter().map(|&x| if x == 0.0 { 0.0 } else { f64::INFINITY.copysign(x) }).collect(),
            log_mgf: f64::INFINITY,
        };
    }
    let lam = newton(&abs);
    let value = objective(&lam, &abs).max(0.0);
    let log_mgf = log_mgf(&lam);
    Dual {
        value,
        lambda: lam.iter().zip(v).map(|(l, x)| l.copysign(*x)).collect(),
        log_mgf,
    }
}

/// `J_d(v)`, `+∞` outside the closed `ℓ¹` unit ball.
pub fn rate_j(v: &[f64]) -> f64 {
    rate_dual(v).value
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::rng_from_seed;
    use proptest::prelude::*;
    use rand::Rng;

    #[test]
    fn special_values() {
        assert_eq!(rate_j(&[0.0, 0.0]), 0.0);
        assert!((rate_j(&[1.0, 0.0]) - 4f64.ln()).abs() < 1e-15);
        assert!((rate_j(&[0.0, -1.0, 0.0]) - 6f64.ln()).abs() < 1e-15);
        assert_eq!(rate_j(&[0.7, 0.7]), f64::INFINITY);
        // Continuity at the boundary.
        let inner = rate_j(&[0.5 - 1e-7, 0.5 - 1e-7]);
        let edge = rate_j(&[0.5, 0.5]);
        assert!((inner - edge).abs() < 1e-4, "{inner} vs {edge}");
    }

    #[test]
    fn one_dimensional_closed_form() {
        // d = 1: J(v) = ((1+v)/2) ln(1+v) + ((1−v)/2) ln(1−v).
        for v in [0.1, 0.5, 0.9, 0.999] {
            let exact = 0.5 * (1.0 + v) * (1.0f64 + v).ln() + 0.5 * (1.0 - v) * (1.0f64 - v).ln();
            assert!((rate_j(&[v]) - exact).abs() < 1e-12, "{v}");
        }
    }

    #[test]
    fn gradient_matches_finite_differences() {
        let mut rng = rng_from_seed(4);
        for _ in 0..20 {
            let d = rng.random_range(1..6);
            let lam: Vec<f64> = (0..d).map(|_| rng.random_range(-3.0..3.0)).collect();
            let grad = log_mgf_grad(&lam);
            for i in 0..d {
                let h = 1e-5;
                let mut up = lam.clone();
                let mut down = lam.clone();
                up[i] += h;
                down[i] -= h;
                let fd = (log_mgf(&up) - log_mgf(&down)) / (2.0 * h);
                assert!((fd - grad[i]).abs() < 1e-6);
            }
        }
    }

    #[test]
    fn stationarity_at_optimum() {
        let v = [0.3, -0.2, 0.45];
        let dual = rate_dual(&v);
        let g = log_mgf_grad(&dual.lambda);
        for i in 0..3 {
            assert!((g[i] - v[i]).abs() < 1e-12);
        }
    }

    fn in_ball(d: usize) -> impl Strategy<Value = Vec<f64>> {
        prop::collection::vec(-1.0f64..1.0, d).prop_map(|v| {
            let l1: f64 = v.iter().map(|x| x.abs()).sum();
            if l1 > 0.999 {
                v.iter().map(|x| x * 0.999 / l1).collect()
            } else {
                v
            }
        })
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(100))]
        #[test]
        fn midpoint_convexity(a in in_ball(3), b in in_ball(3)) {
            let mid: Vec<f64> = a.iter().zip(&b).map(|(x, y)| 0.5 * (x + y)).collect();
            prop_assert!(rate_j(&mid) <= 0.5 * (rate_j(&a) + rate_j(&b)) + 1e-9);
        }

        #[test]
        fn nonnegative_and_zero_only_at_origin(v in in_ball(2)) {
            let j = rate_j(&v);
            prop_assert!(j >= 0.0);
            if v.iter().any(|x| x.abs() > 1e-3) {
                prop_assert!(j > 0.0);
            }
        }
    }
}
