//! Principal Dirichlet eigenvalue of `−(1/2d)Δ` on the unit-volume ball
//! and the range-penalty rate constant `c_d(ĥ)`.

use super::special::bessel_j_first_zero;
use crate::error::{Error, Result};
use statrs::function::gamma::gamma;
use std::f64::consts::PI;

/// Radius of the ball of unit volume in `R^d`.
pub fn unit_volume_radius(d: usize) -> f64 {
    let h = d as f64 / 2.0;
    (gamma(h + 1.0) / PI.powf(h)).powf(1.0 / d as f64)
}

/// `λ₁ = (1/2d) (j_{d/2−1,1} / r_d)²`.
pub fn lambda_1(d: usize) -> Result<f64> {
    if d < 2 {
        return Err(Error::invalid(format!("need d >= 2, got d = {d}")));
    }
    let j = bessel_j_first_zero(d as f64 / 2.0 - 1.0)?;
    let r = unit_volume_radius(d);
    Ok((j / r).powi(2) / (2.0 * d as f64))
}

/// `c_d(ĥ) = ĥ^{2/(d+2)} ((d+2)/2) (2λ₁/d)^{d/(d+2)}`.
pub fn c_d_constant(d: usize, h_hat: f64) -> Result<f64> {
    if !(h_hat > 0.0 && h_hat.is_finite()) {
        return Err(Error::invalid(format!("h_hat = {h_hat} must be positive")));
    }
    Ok(c_d_from_lambda(d, h_hat, lambda_1(d)?))
}

/// The same constant from any value of `λ₁`, e.g. the grid eigensolver's.
pub fn c_d_from_lambda(d: usize, h_hat: f64, lambda: f64) -> f64 {
    let df = d as f64;
    h_hat.powf(2.0 / (df + 2.0)) * (df + 2.0) / 2.0 * (2.0 * lambda / df).powf(df / (df + 2.0))
}

/// Sparse row-compressed matrix.
struct Csr {
    diag: Vec<f64>,
    start: Vec<usize>,
    col: Vec<usize>,
    val: Vec<f64>,
}

impl Csr {
    fn apply(&self, x: &[f64], y: &mut [f64]) {
        for i in 0..self.diag.len() {
            let mut s = self.diag[i] * x[i];
            for k in self.start[i]..self.start[i + 1] {
                s += self.val[k] * x[self.col[k]];
            }
            y[i] = s;
        }
    }
}

/// Shortley–Weller discretization of `−Δ` on the ball of radius `r`
/// restricted to the closed positive orthant, with mirror conditions on
/// the coordinate planes (the principal eigenfunction is even in each
/// coordinate).
fn assemble(d: usize, r: f64, m: usize) -> Csr {
    let h = r / m as f64;
    let side = m + 1;
    let total = side.pow(d as u32);
    let mut index = vec![usize::MAX; total];
    let mut coords = Vec::new();
    let mut z = vec![0usize; d];
    let mut count = 0;
    for (flat, slot) in index.iter_mut().enumerate() {
        let mut rem = flat;
        for c in z.iter_mut() {
            *c = rem % side;
            rem /= side;
        }
        let norm_sq: f64 = z.iter().map(|&c| (c as f64 * h).powi(2)).sum();
        if norm_sq < r * r * (1.0 - 1e-12) {
            *slot = count;
            coords.push(z.clone());
            count += 1;
        }
    }
    let stride: Vec<usize> = (0..d).map(|k| side.pow(k as u32)).collect();
    let mut diag = vec![0.0; count];
    let mut start = Vec::with_capacity(count + 1);
    let mut col = Vec::new();
    let mut val = Vec::new();
    for (i, z) in coords.iter().enumerate() {
        start.push(col.len());
        let x: Vec<f64> = z.iter().map(|&c| c as f64 * h).collect();
        let excess = x.iter().map(|v| v * v).sum::<f64>() - r * r;
        let flat: usize = z.iter().zip(&stride).map(|(&c, &s)| c * s).sum();
        for k in 0..d {
            let disc = (x[k] * x[k] - excess).sqrt();
            // (arm length, neighbour) in the + and − directions.
            let up = if z[k] + 1 < side && index[flat + stride[k]] != usize::MAX {
                (h, Some(index[flat + stride[k]]))
            } else {
                ((-x[k] + disc).min(h), None)
            };
            let down = if z[k] == 0 {
                (h, Some(index[flat + stride[k]]).filter(|&j| j != usize::MAX))
            } else if index[flat - stride[k]] != usize::MAX {
                (h, Some(index[flat - stride[k]]))
            } else {
                ((x[k] + disc).min(h), None)
            };
            // A mirrored neighbour outside the ball can only happen on a
            // grid with one interior node per axis.
            let down = if z[k] == 0 && down.1.is_none() { (up.0, None) } else { down };
            let (b, a) = (up.0, down.0);
            diag[i] += 2.0 / (a * b);
            if let Some(j) = up.1 {
                col.push(j);
                val.push(-2.0 / ((a + b) * b));
            }
            if let Some(j) = down.1 {
                col.push(j);
                val.push(-2.0 / ((a + b) * a));
            }
        }
    }
    start.push(col.len());
    Csr { diag, start, col, val }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Jacobi-preconditioned BiCGSTAB for `A x = b`, starting from `x`.
fn bicgstab(a: &Csr, b: &[f64], x: &mut [f64], tol: f64, max_iter: usize) -> Result<()> {
    let n = b.len();
    let inv: Vec<f64> = a.diag.iter().map(|v| 1.0 / v).collect();
    let mut r = vec![0.0; n];
    a.apply(x, &mut r);
    for i in 0..n {
        r[i] = b[i] - r[i];
    }
    let r0 = r.clone();
    let b_norm = dot(b, b).sqrt().max(f64::MIN_POSITIVE);
    let (mut rho, mut alpha, mut omega) = (1.0, 1.0, 1.0);
    let mut v = vec![0.0; n];
    let mut p = vec![0.0; n];
    let mut ph = vec![0.0; n];
    let mut s = vec![0.0; n];
    let mut sh = vec![0.0; n];
    let mut t = vec![0.0; n];
    for _ in 0..max_iter {
        if dot(&r, &r).sqrt() <= tol * b_norm {
            return Ok(());
        }
        let rho_new = dot(&r0, &r);
        let beta = (rho_new / rho) * (alpha / omega);
        rho = rho_new;
        for i in 0..n {
            p[i] = r[i] + beta * (p[i] - omega * v[i]);
            ph[i] = inv[i] * p[i];
        }
        a.apply(&ph, &mut v);
        alpha = rho / dot(&r0, &v);
        for i in 0..n {
            s[i] = r[i] - alpha * v[i];
            sh[i] = inv[i] * s[i];
        }
        a.apply(&sh, &mut t);
        omega = dot(&t, &s) / dot(&t, &t);
        for i in 0..n {
            x[i] += alpha * ph[i] + omega * sh[i];
            r[i] = s[i] - omega * t[i];
        }
        if !omega.is_finite() || !alpha.is_finite() {
            break;
        }
    }
    if dot(&r, &r).sqrt() <= tol * b_norm * 10.0 {
        Ok(())
    } else {
        Err(Error::Unsupported("BiCGSTAB did not converge".into()))
    }
}

/// Principal eigenvalue of `−(1/2d)Δ` on the unit-volume ball from a
/// finite-difference grid with `m` cells per radius, by inverse iteration.
pub fn lambda_1_grid(d: usize, m: usize) -> Result<f64> {
    if !(2..=6).contains(&d) {
        return Err(Error::invalid(format!("grid eigensolver supports 2 <= d <= 6, got {d}")));
    }
    if m < 4 {
        return Err(Error::invalid("need at least 4 cells per radius"));
    }
    let a = assemble(d, unit_volume_radius(d), m);
    let n = a.diag.len();
    let mut u = vec![1.0; n];
    let mut y = vec![0.0; n];
    let mut mu = f64::NAN;
    for _ in 0..200 {
        let scale = if mu.is_finite() { 1.0 / mu } else { 0.0 };
        y.iter_mut().zip(&u).for_each(|(y, u)| *y = u * scale);
        bicgstab(&a, &u, &mut y, 1e-11, 20 * n.max(100))?;
        let next = dot(&u, &u) / dot(&u, &y);
        let norm = dot(&y, &y).sqrt();
        u.iter_mut().zip(&y).for_each(|(u, y)| *u = y / norm);
        if (next - mu).abs() < 1e-10 * next {
            return Ok(next / (2.0 * d as f64));
        }
        mu = next;
    }
    Err(Error::Unsupported("inverse iteration did not converge".into()))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn two_dimensional_values() {
        let l = lambda_1(2).unwrap();
        assert!((l - 4.5420).abs() < 2e-4, "{l}");
        let c = c_d_constant(2, 1.0).unwrap();
        assert!((c - 2.0 * l.sqrt()).abs() < 1e-12);
        assert!((c - 4.2624).abs() < 1e-4, "{c}");
    }

    #[test]
    fn three_dimensional_zero_is_pi() {
        let r = unit_volume_radius(3);
        assert!((lambda_1(3).unwrap() - (PI / r).powi(2) / 6.0).abs() < 1e-12);
    }

    #[test]
    fn homogeneity() {
        for d in 2..6 {
            let ratio = c_d_constant(d, 2.0).unwrap() / c_d_constant(d, 1.0).unwrap();
            assert!((ratio - 2f64.powf(2.0 / (d as f64 + 2.0))).abs() < 1e-14);
        }
    }

    #[test]
    fn unit_volume() {
        assert!((unit_volume_radius(2) - PI.powf(-0.5)).abs() < 1e-15);
        assert!((4.0 / 3.0 * PI * unit_volume_radius(3).powi(3) - 1.0).abs() < 1e-14);
    }

    #[test]
    fn grid_matches_bessel_route() {
        for (d, m) in [(2, 40), (3, 24), (4, 14)] {
            let grid = lambda_1_grid(d, m).unwrap();
            let exact = lambda_1(d).unwrap();
            assert!((grid / exact - 1.0).abs() < 1e-2, "d = {d}: {grid} vs {exact}");
        }
    }
}
