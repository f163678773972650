//! Heavy-tailed site disorder, evaluated lazily from a counter-based hash.

use crate::error::{Error, Result};
use crate::lattice::{ball_points, in_ball, Point};
use crate::par;
use crate::rng::{open_unit, splitmix64};
use serde::Serialize;

/// Deterministic disorder field `x ↦ ω_x` on Z^d.
///
/// `ω_raw = ±U^{−1/α}` with sign `+` with probability `p`, so
/// `P(ω_raw > t) = p t^{−α}` exactly for `t ≥ 1`. When `α > 1` the exact
/// mean `(p − q) α/(α − 1)` is subtracted.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DisorderField {
    pub seed: u64,
    pub alpha: f64,
    pub p: f64,
    pub q: f64,
    pub centering: f64,
}

impl DisorderField {
    pub fn new(seed: u64, alpha: f64, p: f64) -> Result<Self> {
        let q = 1.0 - p;
        if !(alpha > 0.0 && alpha.is_finite()) {
            return Err(Error::invalid(format!("alpha = {alpha} must be positive")));
        }
        if !(p > 0.0 && q > 0.0) {
            return Err(Error::invalid(format!("p = {p} must lie in (0, 1)")));
        }
        let centering = if alpha > 1.0 {
            (p - q) * alpha / (alpha - 1.0)
        } else {
            0.0
        };
        Ok(DisorderField {
            seed,
            alpha,
            p,
            q,
            centering,
        })
    }

    #[inline]
    fn hash(&self, x: &[i32]) -> u64 {
        let mut h = splitmix64(self.seed ^ 0x5851_F42D_4C95_7F2D);
        for &c in x {
            h = splitmix64(h ^ (c as i64 as u64).wrapping_mul(0x9E37_79B9_7F4A_7C15));
        }
        splitmix64(h ^ x.len() as u64)
    }

    /// Uncentered draw at `x`.
    #[inline]
    pub fn omega_raw_at(&self, x: &[i32]) -> f64 {
        let h = self.hash(x);
        let u = open_unit(h);
        let s = open_unit(splitmix64(h));
        let mag = libm::exp(-libm::log(u) / self.alpha);
        if s < self.p {
            mag
        } else {
            -mag
        }
    }

    /// `ω_x`.
    #[inline]
    pub fn omega_at(&self, x: &[i32]) -> f64 {
        self.omega_raw_at(x) - self.centering
    }

    /// `(x, ω_x)` for every `x ∈ Λ_r`, in lexicographic order of `x`.
    pub fn ball_values(&self, d: usize, r: f64) -> Vec<(Point, f64)> {
        let pts = ball_points(d, r);
        let vals = par::map_indexed(pts.len(), |i| self.omega_at(&pts[i]));
        pts.into_iter().zip(vals).collect()
    }

    /// The `k` largest values of `ω` on `Λ_r`, ties broken by lexicographic
    /// position.
    pub fn order_stats(&self, d: usize, r: f64, k: usize) -> Result<Vec<OrderStat>> {
        let mut all = self.ball_values(d, r);
        if k == 0 || k > all.len() {
            return Err(Error::invalid(format!(
                "rank count k = {k} must lie in [1, {}]",
                all.len()
            )));
        }
        all.sort_by(|a, b| b.1.total_cmp(&a.1).then_with(|| a.0.cmp(&b.0)));
        Ok(all
            .into_iter()
            .take(k)
            .enumerate()
            .map(|(i, (position, value))| OrderStat {
                rank: i + 1,
                value,
                position,
            })
            .collect())
    }

    /// `Σ_{x ∈ Δ} ω_x` for `Δ ⊆ Λ_r`.
    pub fn energy_on(&self, r: f64, delta: &[Point]) -> Result<f64> {
        let mut sum = 0.0;
        for x in delta {
            if !in_ball(x, r) {
                return Err(Error::OutsideBall {
                    radius: r,
                    point: x.clone(),
                });
            }
            sum += self.omega_at(x);
        }
        Ok(sum)
    }
}

/// One entry of the decreasing relabeling of `ω` on a ball.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OrderStat {
    pub rank: usize,
    pub value: f64,
    pub position: Point,
}
