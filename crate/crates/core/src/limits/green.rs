//! Lattice Green's function `G(x) = Σ_n P(S_n = x)` of the simple random
//! walk in `d ≥ 3` and the hitting probabilities `P(x ∈ R_∞) = G(x)/G(0)`.

use super::special::scaled_bessel_i;
use crate::error::{Error, Result};
use crate::lattice::step_axis;
use crate::par;
use crate::rng::Streams;
use crate::walk::sample::draw_step;
use quadrature::double_exponential::integrate;
use serde::Serialize;
use std::f64::consts::PI;

/// `P(S_n ≠ 0 for all n ≥ 1)` for `d = 3`, i.e. `1/G(0)`, with
/// `G(0) = 1.516386059151978` evaluated by [`green_function`] with the
/// Fourier route.
pub const LAMBDA_3: f64 = 0.659_462_670_700_8;

/// Where [`LAMBDA_3`] comes from; written into run manifests.
pub const LAMBDA_3_PROVENANCE: &str = "1/G(0) of the cubic lattice, Fourier route of limits::green_function";

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(rename_all = "snake_case", tag = "method")]
pub enum GreenMethod {
    /// Two-dimensional integral of the Fourier representation after
    /// integrating the third frequency in closed form (`d = 3` only).
    Fourier,
    /// `G(x) = d ∫_0^∞ Π_i e^{−s} I_{x_i}(s) ds` from the continuous-time
    /// walk; any `d ≥ 3`.
    BesselTime,
    /// Visit counts of `x` and `0` by `horizon`-step walks plus the
    /// local-limit tail beyond the horizon.
    MonteCarlo { horizon: u64, n_samples: u64, seed: u64 },
}

impl GreenMethod {
    pub fn name(&self) -> &'static str {
        match self {
            GreenMethod::Fourier => "fourier",
            GreenMethod::BesselTime => "bessel_time",
            GreenMethod::MonteCarlo { .. } => "monte_carlo",
        }
    }

    /// Fourier for `d = 3`, the Bessel route otherwise.
    pub fn default_for(d: usize) -> Self {
        if d == 3 {
            GreenMethod::Fourier
        } else {
            GreenMethod::BesselTime
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct HitProb {
    pub value: f64,
    /// Zero for the deterministic routes.
    pub std_err: f64,
    pub method: &'static str,
}

/// Sorted absolute coordinates; `G` is invariant under the hyperoctahedral
/// group, so this is the orbit representative.
pub fn canonical(x: &[i32]) -> Vec<u32> {
    let mut c: Vec<u32> = x.iter().map(|v| v.unsigned_abs()).collect();
    c.sort_unstable();
    c
}

fn check_dim(d: usize, x: &[i32]) -> Result<()> {
    if d < 3 {
        return Err(Error::invalid(format!("the walk is recurrent in d = {d}; need d >= 3")));
    }
    if x.len() != d {
        return Err(Error::invalid(format!("point has {} coordinates, expected {d}", x.len())));
    }
    Ok(())
}

fn fourier_d3(n: &[u32]) -> f64 {
    let (n1, n2, n3) = (n[0] as f64, n[1] as f64, n[2] as i32);
    let b = 1.0 / 3.0;
    let f = |k1: f64, k2: f64| {
        // a² − b² = (a − b)(a + b), kept accurate near k = 0.
        let am = (2.0 * (0.5 * k1).sin().powi(2) + 2.0 * (0.5 * k2).sin().powi(2)) / 3.0;
        let a = am + b;
        let root = (am * (a + b)).sqrt();
        if root == 0.0 {
            return 0.0;
        }
        let r = (a - root) / b;
        (n1 * k1).cos() * (n2 * k2).cos() * r.powi(n3) / root
    };
    // Polar coordinates about the 1/|k| singularity at the origin.
    let ray = |theta: f64| {
        let (s, c) = theta.sin_cos();
        let rho_max = PI / c.max(s);
        integrate(|rho: f64| rho * f(rho * c, rho * s), 0.0, rho_max, 1e-14).integral
    };
    let quarter = 0.25 * PI;
    (integrate(ray, 0.0, quarter, 1e-13).integral + integrate(ray, quarter, 2.0 * quarter, 1e-13).integral) / (PI * PI)
}

fn bessel_integrand(n: &[u32], s: f64) -> f64 {
    n.iter().map(|&k| scaled_bessel_i(k, s)).product()
}

fn bessel_time(n: &[u32]) -> f64 {
    let d = n.len() as f64;
    let nmax = *n.iter().max().unwrap_or(&0) as f64;
    let cut = (50.0 * d * nmax * nmax).max(600.0);
    let head = integrate(|s| bessel_integrand(n, s), 0.0, 1.0, 1e-14).integral;
    let log_cut = cut.ln();
    let pieces = (log_cut.ceil() as usize).max(1);
    let width = log_cut / pieces as f64;
    let mut body = 0.0;
    for i in 0..pieces {
        let lo = i as f64 * width;
        body += integrate(
            |u: f64| {
                let s = u.exp();
                s * bessel_integrand(n, s)
            },
            lo,
            lo + width,
            1e-14,
        )
        .integral;
    }
    // Π_i e^{−s} I_{n_i}(s) = (2πs)^{−d/2} (1 − A/s + B/s² + O(s^{−3})).
    let a: Vec<f64> = n.iter().map(|&k| (4.0 * (k as f64).powi(2) - 1.0) / 8.0).collect();
    let big_a: f64 = a.iter().sum();
    let mut big_b: f64 = n
        .iter()
        .map(|&k| {
            let mu = 4.0 * (k as f64).powi(2);
            (mu - 1.0) * (mu - 9.0) / 128.0
        })
        .sum();
    for i in 0..a.len() {
        for j in i + 1..a.len() {
            big_b += a[i] * a[j];
        }
    }
    let h = d / 2.0;
    let tail = (2.0 * PI).powf(-h)
        * (cut.powf(1.0 - h) / (h - 1.0) - big_a * cut.powf(-h) / h + big_b * cut.powf(-1.0 - h) / (h + 1.0));
    d * (head + body + tail)
}

/// Expected number of visits after time `t` to a fixed site, from the
/// local limit theorem: `(d/2π)^{d/2} T^{1−d/2}/(d/2 − 1)`.
pub fn visit_tail(d: usize, horizon: u64) -> f64 {
    let h = d as f64 / 2.0;
    (d as f64 / (2.0 * PI)).powf(h) * (horizon as f64).powf(1.0 - h) / (h - 1.0)
}

/// Monte Carlo `(G(x)/G(0), standard error)`.
fn monte_carlo(d: usize, x: &[i32], horizon: u64, n_samples: u64, seed: u64) -> Result<(f64, f64)> {
    if horizon == 0 || n_samples < 2 {
        return Err(Error::invalid("Monte Carlo Green's function needs horizon >= 1 and >= 2 samples"));
    }
    let streams = Streams::new(seed);
    let parts = par::chunks(n_samples, 256);
    let target: Vec<i64> = x.iter().map(|&v| v as i64).collect();
    let x_sq: i64 = target.iter().map(|v| v * v).sum();
    let sums = par::map_indexed(parts.len(), |c| {
        let (idx, _, len) = parts[c];
        let mut rng = streams.stream(idx);
        let mut pos = vec![0i64; d];
        // (Σ v_x, Σ v_0, Σ v_x², Σ v_0², Σ v_x v_0)
        let mut acc = [0.0f64; 5];
        for _ in 0..len {
            pos.iter_mut().for_each(|p| *p = 0);
            let mut norm_sq = 0i64;
            let mut dist_sq = x_sq;
            let mut vx = (x_sq == 0) as u64;
            let mut v0 = 1u64;
            for _ in 0..horizon {
                let (k, dir) = step_axis(draw_step(&mut rng, d));
                let dir = dir as i64;
                norm_sq += 2 * dir * pos[k] + 1;
                dist_sq += 2 * dir * (pos[k] - target[k]) + 1;
                pos[k] += dir;
                v0 += (norm_sq == 0) as u64;
                vx += (dist_sq == 0) as u64;
            }
            let (a, b) = (vx as f64, v0 as f64);
            acc[0] += a;
            acc[1] += b;
            acc[2] += a * a;
            acc[3] += b * b;
            acc[4] += a * b;
        }
        acc
    });
    let mut acc = [0.0f64; 5];
    for s in &sums {
        for i in 0..5 {
            acc[i] += s[i];
        }
    }
    let n = n_samples as f64;
    let tail = visit_tail(d, horizon);
    let (mx, m0) = (acc[0] / n, acc[1] / n);
    let var_x = (acc[2] / n - mx * mx) * n / (n - 1.0);
    let var_0 = (acc[3] / n - m0 * m0) * n / (n - 1.0);
    let cov = (acc[4] / n - mx * m0) * n / (n - 1.0);
    let (gx, g0) = (mx + tail, m0 + tail);
    let ratio = gx / g0;
    let var = (var_x - 2.0 * ratio * cov + ratio * ratio * var_0) / (g0 * g0 * n);
    Ok((ratio, var.max(0.0).sqrt()))
}

/// `G(x)` by a deterministic route.
pub fn green_function(d: usize, x: &[i32], method: GreenMethod) -> Result<f64> {
    check_dim(d, x)?;
    let n = canonical(x);
    match method {
        GreenMethod::Fourier if d == 3 => Ok(fourier_d3(&n)),
        GreenMethod::Fourier => Err(Error::Unsupported(format!("Fourier Green's function is implemented for d = 3 only, got d = {d}"))),
        GreenMethod::BesselTime => Ok(bessel_time(&n)),
        GreenMethod::MonteCarlo { .. } => Err(Error::Unsupported("green_function needs a deterministic method; use hit_prob_infty".into())),
    }
}

/// `P(x ∈ R_∞) = G(x)/G(0)`; `x = 0` gives 1.
pub fn hit_prob_infty(d: usize, x: &[i32], method: GreenMethod) -> Result<HitProb> {
    check_dim(d, x)?;
    let name = method.name();
    if x.iter().all(|&v| v == 0) {
        return Ok(HitProb {
            value: 1.0,
            std_err: 0.0,
            method: name,
        });
    }
    let (value, std_err) = match method {
        GreenMethod::MonteCarlo { horizon, n_samples, seed } => monte_carlo(d, &canonical_point(x), horizon, n_samples, seed)?,
        _ => {
            let origin = vec![0; d];
            (green_function(d, x, method)? / green_function(d, &origin, method)?, 0.0)
        }
    };
    Ok(HitProb { value, std_err, method: name })
}

fn canonical_point(x: &[i32]) -> Vec<i32> {
    canonical(x).into_iter().map(|v| v as i32).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn origin_value_and_cache() {
        let g0 = green_function(3, &[0, 0, 0], GreenMethod::Fourier).unwrap();
        assert!((g0 - 1.516_386_059_151_978).abs() < 1e-11, "{g0}");
        assert!((1.0 / g0 - LAMBDA_3).abs() < 1e-9);
        let gb = green_function(3, &[0, 0, 0], GreenMethod::BesselTime).unwrap();
        assert!((gb - g0).abs() < 1e-8, "{gb} vs {g0}");
    }

    #[test]
    fn routes_agree_off_origin() {
        for x in [[1, 0, 0], [1, 1, 0], [2, 1, 3], [0, 0, 6]] {
            let f = green_function(3, &x, GreenMethod::Fourier).unwrap();
            let b = green_function(3, &x, GreenMethod::BesselTime).unwrap();
            assert!((f - b).abs() < 1e-8, "{x:?}: {f} vs {b}");
        }
        // Harmonicity at the origin: G(0) − mean of neighbours = 1.
        let g0 = green_function(3, &[0, 0, 0], GreenMethod::Fourier).unwrap();
        let g1 = green_function(3, &[1, 0, 0], GreenMethod::Fourier).unwrap();
        assert!((g0 - g1 - 1.0).abs() < 1e-9);
        let g0 = green_function(5, &[0; 5], GreenMethod::BesselTime).unwrap();
        let g1 = green_function(5, &[1, 0, 0, 0, 0], GreenMethod::BesselTime).unwrap();
        assert!((g0 - g1 - 1.0).abs() < 1e-9);
    }

    #[test]
    fn symmetric_and_decreasing() {
        let base = hit_prob_infty(3, &[2, -1, 0], GreenMethod::Fourier).unwrap().value;
        for x in [[-2, 1, 0], [1, 0, 2], [0, -2, -1], [0, 1, -2]] {
            assert_eq!(hit_prob_infty(3, &x, GreenMethod::Fourier).unwrap().value, base);
        }
        let mut last = 1.0;
        for r in [1, 2, 4, 8] {
            let v = hit_prob_infty(3, &[r, 0, 0], GreenMethod::Fourier).unwrap().value;
            assert!(v > 0.0 && v < last, "{r}: {v}");
            last = v;
        }
        assert_eq!(hit_prob_infty(3, &[0, 0, 0], GreenMethod::Fourier).unwrap().value, 1.0);
        assert!(hit_prob_infty(2, &[1, 0], GreenMethod::BesselTime).is_err());
    }

    #[test]
    fn monte_carlo_matches_fourier() {
        let exact = hit_prob_infty(3, &[1, 0, 0], GreenMethod::Fourier).unwrap();
        let mc = hit_prob_infty(
            3,
            &[0, -1, 0],
            GreenMethod::MonteCarlo {
                horizon: 10_000,
                n_samples: 20_000,
                seed: 5,
            },
        )
        .unwrap();
        assert!((mc.value - exact.value).abs() < 3.0 * mc.std_err, "{mc:?} vs {exact:?}");
        assert!(mc.std_err < 0.02);
    }

    #[test]
    fn far_field_asymptotics() {
        // G(x) ~ 3/(2π|x|) in d = 3.
        let g = green_function(3, &[0, 0, 20], GreenMethod::BesselTime).unwrap();
        let asym = 3.0 / (2.0 * PI * 20.0);
        assert!((g / asym - 1.0).abs() < 5e-3, "{g} vs {asym}");
    }
}
