//! Simple symmetric random walk on Z^d.

pub mod confined;
pub mod enumerate;
pub mod range;
pub mod sample;

pub use confined::{confined_walk_sampler, ConfinedSampler, ConfinedScratch};
pub use enumerate::{enumerate_paths, Leaf, PathVisitor, SiteData, SumVisitor};
pub use range::RangeSet;
pub use sample::{simulate_walk, walk_stats, WalkStats};

use crate::error::{Error, Result};
use crate::lattice::{ball_size, step_axis, Point};
use serde::{Deserialize, Serialize};
use std::collections::HashSet;

/// One walk with its range and maximal displacement.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PathSample {
    pub d: usize,
    /// Step indices; `s` moves by `±e_{s/2}` (`+` for even `s`).
    pub steps: Vec<u8>,
    /// Distinct visited sites, origin first, in order of first visit.
    pub sites: Vec<Point>,
    pub range_size: usize,
    /// `M_N`.
    pub max_disp: f64,
    pub endpoint: Point,
    pub log_weight: f64,
}

impl PathSample {
    /// Rebuild every derived field from the step sequence.
    pub fn from_steps(d: usize, steps: Vec<u8>, log_weight: f64) -> Result<Self> {
        if d == 0 {
            return Err(Error::invalid("dimension must be >= 1"));
        }
        let mut pos = vec![0i32; d];
        let mut seen = HashSet::new();
        let mut sites = vec![pos.clone()];
        seen.insert(pos.clone());
        let mut max_sq = 0i64;
        for &s in &steps {
            if s as usize >= 2 * d {
                return Err(Error::invalid(format!("step index {s} out of range for d = {d}")));
            }
            let (k, dir) = step_axis(s);
            pos[k] += dir;
            max_sq = max_sq.max(crate::lattice::norm_sq(&pos));
            if seen.insert(pos.clone()) {
                sites.push(pos.clone());
            }
        }
        Ok(PathSample {
            d,
            range_size: sites.len(),
            steps,
            sites,
            max_disp: (max_sq as f64).sqrt(),
            endpoint: pos,
            log_weight,
        })
    }

    pub fn len(&self) -> usize {
        self.steps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.steps.is_empty()
    }
}

/// Paths whose displacement is of order `r` and whose range is of order `r·s`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PathClass {
    pub r: f64,
    pub s: f64,
    pub p: f64,
}

const CLASS_TOL: f64 = 1e-9;

impl PathClass {
    pub fn new(r: f64, s: f64, p: f64) -> Result<Self> {
        if !(r > 0.0 && s >= 1.0 && p > 1.0) || !(r.is_finite() && s.is_finite() && p.is_finite()) {
            return Err(Error::invalid(format!(
                "path class needs r > 0, s >= 1, p > 1 (got r = {r}, s = {s}, p = {p})"
            )));
        }
        Ok(PathClass { r, s, p })
    }

    /// `M_N ∈ [r, pr]` and `|R_N| ∈ [rs, p²rs]`.
    pub fn contains(&self, max_disp: f64, range_size: f64) -> bool {
        let tol = |v: f64| CLASS_TOL * v.max(1.0);
        let (lo_m, hi_m) = (self.r, self.p * self.r);
        let (lo_r, hi_r) = (self.r * self.s, self.p * self.p * self.r * self.s);
        max_disp >= lo_m - tol(lo_m)
            && max_disp <= hi_m + tol(hi_m)
            && range_size >= lo_r - tol(lo_r)
            && range_size <= hi_r + tol(hi_r)
    }
}

pub fn class_membership(sample: &PathSample, cls: &PathClass) -> bool {
    cls.contains(sample.max_disp, sample.range_size as f64)
}

/// One cell of the cover of `{M_N > A}` by geometric classes.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CoverCell {
    pub k: u32,
    pub j: u32,
    pub class: PathClass,
}

/// `log_p(|Λ_{p^k A}| / A ∧ N / (p^k A))`.
pub fn range_ratio_cap(n: usize, d: usize, a: f64, p: f64, k: u32) -> f64 {
    let r = p.powi(k as i32) * a;
    let ball = ball_size(d, r) as f64 / a;
    (ball.min(n as f64 / r)).ln() / p.ln()
}

/// Classes `𝓜_p(p^k A, p^j)` for `0 ≤ k ≤ ⌈log_p(N/A)⌉` and
/// `0 ≤ j ≤ ⌈B_k⌉`, where `B_k` is `range_ratio_cap`.
pub fn class_cover(n: usize, d: usize, a: f64, p: f64) -> Result<Vec<CoverCell>> {
    if !(a >= 1.0 && a < n as f64) {
        return Err(Error::invalid(format!("cover base A = {a} must lie in [1, N)")));
    }
    if !(p > 1.0) {
        return Err(Error::invalid("geometric ratio must exceed 1"));
    }
    let kmax = ((n as f64 / a).ln() / p.ln()).ceil().max(0.0) as u32;
    let mut cells = Vec::new();
    for k in 0..=kmax {
        let r = p.powi(k as i32) * a;
        let jmax = range_ratio_cap(n, d, a, p, k).ceil().max(0.0) as u32;
        for j in 0..=jmax {
            cells.push(CoverCell {
                k,
                j,
                class: PathClass::new(r, p.powi(j as i32), p)?,
            });
        }
    }
    Ok(cells)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::walk::enumerate::Leaf;

    #[test]
    fn from_steps_basics() {
        let p = PathSample::from_steps(2, vec![0, 1, 0, 2, 2], 0.5).unwrap();
        assert_eq!(p.range_size, 4);
        assert_eq!(p.endpoint, vec![1, 2]);
        assert!((p.max_disp - 5f64.sqrt()).abs() < 1e-15);
        assert_eq!(p.log_weight, 0.5);
        assert!(PathSample::from_steps(2, vec![4], 0.0).is_err());
    }

    #[test]
    fn closed_interval_membership() {
        let c = PathClass::new(2.0, 1.5, 2.0).unwrap();
        assert!(c.contains(2.0, 3.0));
        assert!(c.contains(4.0, 12.0));
        assert!(!c.contains(5.0, 6.0));
        assert!(!c.contains(3.0, 12.5));
        assert!(!c.contains(1.9, 6.0));
        assert!(PathClass::new(1.0, 0.5, 2.0).is_err());
        let s = PathSample::from_steps(2, vec![0, 0], 0.0).unwrap();
        assert!(class_membership(&s, &PathClass::new(2.0, 1.5, 2.0).unwrap()));
    }

    struct Uncovered {
        cells: Vec<CoverCell>,
        a: f64,
        missed: u64,
        above: u64,
    }

    impl PathVisitor for Uncovered {
        fn visit(&mut self, l: &Leaf<'_>) {
            let m = l.max_disp();
            if m > self.a {
                self.above += 1;
                if !self.cells.iter().any(|c| c.class.contains(m, l.range_size as f64)) {
                    self.missed += 1;
                }
            }
        }
        fn merge(&mut self, other: Self) {
            self.missed += other.missed;
            self.above += other.above;
        }
    }

    #[test]
    fn cover_contains_every_far_path() {
        let n = 8;
        for (d, alpha, p) in [(2usize, 1.5f64, 2.0f64), (2, 1.2, 1.5), (3, 2.0, 2.0)] {
            if d == 3 && leaf_count_too_big(n, d) {
                continue;
            }
            let a = (n as f64).powf(1.0 - alpha / d as f64);
            let cells = class_cover(n, d, a, p).unwrap();
            let v = enumerate_paths(n, d, 1e9, &SiteData::default(), || Uncovered {
                cells: cells.clone(),
                a,
                missed: 0,
                above: 0,
            })
            .unwrap();
            assert!(v.above > 0);
            assert_eq!(v.missed, 0, "d = {d}, alpha = {alpha}, p = {p}");
        }
    }

    fn leaf_count_too_big(n: usize, d: usize) -> bool {
        enumerate::leaf_count(n, d) > 2e6
    }
}
