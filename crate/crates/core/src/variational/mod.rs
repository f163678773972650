//! Continuum variational problems over polylines: `Ent`, `π`, `𝒯_β`,
//! `J_d`, `Ênt` and `𝒯̂_∞`.
//!
//! Both suprema only see a path through the set of atoms it collects and a
//! length functional that straight segments minimize, so the search runs
//! over polylines whose vertices are atoms.

pub mod enthat;
pub mod rate;
pub mod solve;

use crate::error::{Error, Result};
use crate::limits::WeightedPointProcess;
use serde::Serialize;

pub use enthat::ent_hat;
pub use rate::{rate_dual, rate_j, Dual};
pub use solve::{solve_t_beta, solve_t_hat_inf, SolveBudget, SubsetPaths, VarSolution};

/// Polyline from the origin with an optional time allocation per segment.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PolyPath {
    pub vertices: Vec<Vec<f64>>,
    pub times: Option<Vec<f64>>,
}

impl PolyPath {
    /// The constant path at the origin.
    pub fn origin(d: usize) -> Self {
        PolyPath {
            vertices: vec![vec![0.0; d]],
            times: None,
        }
    }

    /// Path from the origin through `points` in order.
    pub fn through(d: usize, points: &[Vec<f64>]) -> Result<Self> {
        let mut vertices = vec![vec![0.0; d]];
        vertices.extend(points.iter().cloned());
        let p = PolyPath { vertices, times: None };
        p.validate(d)?;
        Ok(p)
    }

    pub fn validate(&self, d: usize) -> Result<()> {
        let first = self.vertices.first().ok_or_else(|| Error::invalid("a path needs at least one vertex"))?;
        if self.vertices.iter().any(|v| v.len() != d) {
            return Err(Error::invalid(format!("every vertex must have {d} coordinates")));
        }
        if first.iter().any(|&c| c != 0.0) {
            return Err(Error::invalid("the first vertex must be the origin"));
        }
        if self.vertices.iter().flatten().any(|c| !c.is_finite()) {
            return Err(Error::invalid("vertex coordinates must be finite"));
        }
        if let Some(t) = &self.times {
            if t.len() + 1 != self.vertices.len() {
                return Err(Error::invalid("need one time per segment"));
            }
            if t.iter().any(|&x| !(x > 0.0)) || (t.iter().sum::<f64>() - 1.0).abs() > 1e-9 {
                return Err(Error::invalid("segment times must be positive and sum to 1"));
            }
        }
        Ok(())
    }

    pub fn segments(&self) -> impl Iterator<Item = (&[f64], &[f64])> {
        self.vertices.windows(2).map(|w| (w[0].as_slice(), w[1].as_slice()))
    }

    /// Euclidean arclength.
    pub fn length(&self) -> f64 {
        self.segments().map(|(a, b)| dist(a, b)).sum()
    }

    /// `ℓ¹` arclength.
    pub fn l1_length(&self) -> f64 {
        self.segments().map(|(a, b)| a.iter().zip(b).map(|(x, y)| (x - y).abs()).sum::<f64>()).sum()
    }
}

pub(crate) fn dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).powi(2)).sum::<f64>().sqrt()
}

/// `Ent(s) = (d/2) (arclength)²`.
pub fn ent(path: &PolyPath, d: usize) -> Result<f64> {
    path.validate(d)?;
    Ok(0.5 * d as f64 * path.length().powi(2))
}

fn point_segment_distance(x: &[f64], a: &[f64], b: &[f64]) -> f64 {
    let ab: Vec<f64> = a.iter().zip(b).map(|(p, q)| q - p).collect();
    let len_sq: f64 = ab.iter().map(|v| v * v).sum();
    let t = if len_sq == 0.0 {
        0.0
    } else {
        (x.iter().zip(a).zip(&ab).map(|((xi, ai), di)| (xi - ai) * di).sum::<f64>() / len_sq).clamp(0.0, 1.0)
    };
    x.iter()
        .zip(a)
        .zip(&ab)
        .map(|((xi, ai), di)| (xi - ai - t * di).powi(2))
        .sum::<f64>()
        .sqrt()
}

/// `π(s)`: total weight of atoms within `tol` of the path. `tol = 0` is
/// exact incidence up to floating-point rounding of the projection.
pub fn pi_collect(path: &PolyPath, pp: &WeightedPointProcess, tol: f64) -> Result<f64> {
    if !(tol >= 0.0) {
        return Err(Error::invalid(format!("tol = {tol} must be >= 0")));
    }
    path.validate(pp.d)?;
    let mut total = 0.0;
    for atom in &pp.atoms {
        let scale = 1.0 + atom.x.iter().map(|c| c.abs()).fold(0.0, f64::max);
        let eps = tol.max(1e-12 * scale);
        let hit = if path.vertices.len() == 1 {
            dist(&atom.x, &path.vertices[0]) <= eps
        } else {
            path.segments().any(|(a, b)| point_segment_distance(&atom.x, a, b) <= eps)
        };
        if hit {
            total += atom.w;
        }
    }
    Ok(total)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::limits::Atom;

    pub(crate) fn process(d: usize, atoms: &[(&[f64], f64)]) -> WeightedPointProcess {
        WeightedPointProcess {
            d,
            atoms: atoms.iter().map(|(x, w)| Atom { x: x.to_vec(), w: *w }).collect(),
            half_width: 10.0,
            w_min: 0.1,
            alpha: 1.5,
            p: 0.5,
            q: 0.5,
        }
    }

    #[test]
    fn ent_examples() {
        assert_eq!(ent(&PolyPath::origin(2), 2).unwrap(), 0.0);
        let p = PolyPath::through(2, &[vec![1.0, 0.0]]).unwrap();
        assert_eq!(ent(&p, 2).unwrap(), 1.0);
        let bad = PolyPath {
            vertices: vec![vec![1.0, 0.0]],
            times: None,
        };
        assert!(ent(&bad, 2).is_err());
    }

    #[test]
    fn collect_examples() {
        let pp = process(2, &[(&[1.0, 0.0], 2.0), (&[0.0, 1.0], -1.0), (&[1.0, 1.0], 3.0)]);
        assert_eq!(pi_collect(&PolyPath::origin(2), &process(2, &[]), 0.0).unwrap(), 0.0);
        let p = PolyPath::through(2, &[vec![1.0, 0.0], vec![1.0, 1.0]]).unwrap();
        assert_eq!(pi_collect(&p, &pp, 0.0).unwrap(), 5.0);
        let p = PolyPath::through(2, &[vec![0.5, 0.0]]).unwrap();
        assert_eq!(pi_collect(&p, &pp, 0.0).unwrap(), 0.0);
        assert_eq!(pi_collect(&p, &pp, 0.5).unwrap(), 2.0);
    }
}
