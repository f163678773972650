//! Ordered-set entropy, the budgeted last-passage quantity `L_m^{(B)}`, and
//! empirical checks of the range-entropy tail, the energy-on-a-range bound
//! and the cell-sum estimate used for `γ > ζ + (d−α)/α`.

pub mod energy;
pub mod ensemble;
pub mod lemma;
pub mod tail;

use crate::error::{Error, Result};
use crate::lattice::{norm, Point};
use crate::variational::SubsetPaths;
use rustc_hash::FxHashSet;

pub use energy::{check_energy_bound, EnergyConfig, EnergyReport};
pub use ensemble::{class_ensemble, EnsembleMode, RangeEnsemble};
pub use lemma::{check_lemma_g, cover_log_bound, CellRow, LemmaGConfig, LemmaGReport, LemmaGRow};
pub use tail::{check_l_tail, LTailConfig, LTailReport};

/// Largest point set `l_b` solves exactly.
pub const DEFAULT_EXACT_CAP: usize = 15;

/// Lattice points visited in a given order, starting from the origin.
#[derive(Debug, Clone, PartialEq)]
pub struct OrderedSites {
    pub points: Vec<Point>,
    pub order: Vec<usize>,
}

impl OrderedSites {
    pub fn new(points: Vec<Point>, order: Vec<usize>) -> Result<Self> {
        let s = OrderedSites { points, order };
        s.validate()?;
        Ok(s)
    }

    pub fn validate(&self) -> Result<()> {
        let n = self.points.len();
        let mut seen = vec![false; n];
        if self.order.len() != n {
            return Err(Error::invalid("order must be a permutation of the points"));
        }
        for &i in &self.order {
            if i >= n || seen[i] {
                return Err(Error::invalid("order must be a permutation of the points"));
            }
            seen[i] = true;
        }
        let distinct: FxHashSet<&Point> = self.points.iter().collect();
        if distinct.len() != n {
            return Err(Error::invalid("points must be distinct"));
        }
        Ok(())
    }

    /// `Σ_k ‖x_k − x_{k−1}‖` with `x_0 = 0`.
    pub fn length(&self) -> f64 {
        let mut prev: Option<&Point> = None;
        let mut total = 0.0;
        for &i in &self.order {
            let x = &self.points[i];
            total += match prev {
                None => norm(x),
                Some(y) => lattice_dist(x, y),
            };
            prev = Some(x);
        }
        total
    }
}

fn lattice_dist(x: &[i32], y: &[i32]) -> f64 {
    x.iter().zip(y).map(|(a, b)| ((a - b) as f64).powi(2)).sum::<f64>().sqrt()
}

/// `Ent(Δ) = (d/2)(Σ_k ‖x_k − x_{k−1}‖)²` for the points in `order`.
pub fn ent_ordered(pts: &[Point], order: &[usize], d: usize) -> Result<f64> {
    let s = OrderedSites::new(pts.to_vec(), order.to_vec())?;
    if pts.iter().any(|x| x.len() != d) {
        return Err(Error::invalid(format!("every point must have {d} coordinates")));
    }
    Ok(0.5 * d as f64 * s.length().powi(2))
}

/// Shortest origin-anchored route per subset of `pts`.
pub fn anchored_routes(pts: &[Point], cap: usize) -> Result<SubsetPaths> {
    if pts.len() > cap.min(20) {
        return Err(Error::Budget {
            what: "points in the exact subset search",
            needed: pts.len() as f64,
            limit: cap.min(20) as f64,
        });
    }
    let n = pts.len();
    let mut metric = vec![vec![0.0; n + 1]; n + 1];
    for i in 0..n {
        for j in 0..n {
            metric[i][j] = lattice_dist(&pts[i], &pts[j]);
        }
        metric[n][i] = norm(&pts[i]);
        metric[i][n] = metric[n][i];
    }
    Ok(SubsetPaths::new(&metric))
}

/// The order of the shortest origin-anchored route through all of `pts`.
pub fn best_order(pts: &[Point], cap: usize) -> Result<Vec<usize>> {
    let table = anchored_routes(pts, cap)?;
    Ok(table.route((1usize << pts.len()) - 1))
}

/// `max{|Δ| : Δ ⊆ pts, Ent(Δ) ≤ B}`. Exact; refuses more than `cap` points.
pub fn l_b(pts: &[Point], b: f64, d: usize, cap: usize) -> Result<usize> {
    if !(b >= 0.0) {
        return Err(Error::invalid(format!("entropy budget B = {b} must be >= 0")));
    }
    if pts.iter().any(|x| x.len() != d) {
        return Err(Error::invalid(format!("every point must have {d} coordinates")));
    }
    let table = anchored_routes(pts, cap)?;
    // Compare route lengths rather than entropies, with a relative slack
    // for rounding in the sums.
    let max_len = (2.0 * b / d as f64).sqrt();
    let slack = 1e-12 * max_len.max(1.0);
    Ok(table
        .best
        .iter()
        .enumerate()
        .filter(|(_, &len)| len <= max_len + slack)
        .map(|(set, _)| set.count_ones() as usize)
        .max()
        .unwrap_or(0))
}

/// The entropy budget `B = (d/2) C_d² p⁴ (rs)²`.
pub fn entropy_budget(d: usize, c_d: f64, p: f64, r: f64, s: f64) -> f64 {
    0.5 * d as f64 * c_d * c_d * p.powi(4) * (r * s).powi(2)
}

/// Least-squares slope and intercept of `ln y` against `ln x`.
pub(crate) fn loglog_fit(xs: &[f64], ys: &[f64]) -> Option<(f64, f64)> {
    let pts: Vec<(f64, f64)> = xs
        .iter()
        .zip(ys)
        .filter(|(x, y)| **x > 0.0 && **y > 0.0 && y.is_finite())
        .map(|(x, y)| (x.ln(), y.ln()))
        .collect();
    if pts.len() < 2 {
        return None;
    }
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    if sxx == 0.0 {
        return None;
    }
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let slope = sxy / sxx;
    Some((slope, my - slope * mx))
}


#[cfg(test)]
mod walk_tests {
    use super::*;
    use crate::lattice::ball_points;
    use crate::rng::rng_from_seed;
    use crate::walk::PathClass;
    use rand::seq::index;

    #[test]
    fn walk_collection_never_beats_budgeted_relaxation() {
        // Every walk of the class visits its sites along a path of length
        // at most 2|R_N| ≤ 2p²rs, which is the budget with C_d = 2.
        let (d, n, r, s, p) = (2usize, 8usize, 2.0, 1.5, 1.5);
        let class = PathClass::new(r, s, p).unwrap();
        let ens = class_ensemble(n, d, &class, p * r, EnsembleMode::Enumerate { budget: 1e9 }).unwrap();
        assert!(!ens.is_empty());
        let budget = entropy_budget(d, 2.0, p, r, s);
        let mut rng = rng_from_seed(56);
        let ball = ball_points(d, p * r);
        assert_eq!(ball, ens.sites);
        for _ in 0..40 {
            let pick: Vec<usize> = index::sample(&mut rng, ball.len(), 8).into_vec();
            let mut chosen = vec![0.0; ball.len()];
            pick.iter().for_each(|&i| chosen[i] = 1.0);
            let collected = ens.max_sum(&chosen).unwrap() as usize;
            let pts: Vec<Point> = pick.iter().map(|&i| ball[i].clone()).collect();
            assert!(collected <= l_b(&pts, budget, d, DEFAULT_EXACT_CAP).unwrap());
        }
    }
}
