//! Poisson point process with intensity
//! `η(dx, dw) = α p^{1{w>0}} q^{1{w<0}} |w|^{−1−α} dx dw`, restricted to a
//! box and to `|w| ≥ w_min`.

use crate::error::{Error, Result};
use rand::Rng;
use rand_distr::{Distribution, Poisson};
use serde::Serialize;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Atom {
    pub x: Vec<f64>,
    pub w: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct WeightedPointProcess {
    pub d: usize,
    pub atoms: Vec<Atom>,
    /// Half-width of the window `[−L, L]^d`.
    pub half_width: f64,
    pub w_min: f64,
    pub alpha: f64,
    pub p: f64,
    pub q: f64,
}

impl WeightedPointProcess {
    /// `η(box × {|w| ≥ w_min}) = (2L)^d (p + q) w_min^{−α}`.
    pub fn expected_count(&self) -> f64 {
        expected_count(self.d, self.half_width, self.w_min, self.alpha, self.p, self.q)
    }
}

pub fn expected_count(d: usize, half_width: f64, w_min: f64, alpha: f64, p: f64, q: f64) -> f64 {
    (2.0 * half_width).powi(d as i32) * (p + q) * w_min.powf(-alpha)
}

/// Sample the process in `[−L, L]^d` above the cutoff `w_min`.
#[allow(clippy::too_many_arguments)]
pub fn sample_ppp<R: Rng + ?Sized>(
    d: usize,
    half_width: f64,
    w_min: f64,
    alpha: f64,
    p: f64,
    q: f64,
    rng: &mut R,
) -> Result<WeightedPointProcess> {
    if d == 0 {
        return Err(Error::invalid("dimension must be >= 1"));
    }
    if !(half_width > 0.0 && half_width.is_finite()) || !(w_min > 0.0 && w_min.is_finite()) {
        return Err(Error::invalid("need L > 0 and w_min > 0"));
    }
    if !(alpha > 0.0) || !(p >= 0.0 && q >= 0.0 && p + q > 0.0) {
        return Err(Error::invalid("need alpha > 0 and p, q >= 0 with p + q > 0"));
    }
    let mean = expected_count(d, half_width, w_min, alpha, p, q);
    let count = if mean > 0.0 {
        Poisson::new(mean)
            .map_err(|e| Error::invalid(format!("Poisson mean {mean}: {e}")))?
            .sample(rng) as usize
    } else {
        0
    };
    let plus = p / (p + q);
    let atoms = (0..count)
        .map(|_| {
            let x = (0..d).map(|_| rng.random_range(-half_width..half_width)).collect();
            let u: f64 = 1.0 - rng.random::<f64>();
            let mag = w_min * u.powf(-1.0 / alpha);
            let w = if rng.random::<f64>() < plus { mag } else { -mag };
            Atom { x, w }
        })
        .collect();
    Ok(WeightedPointProcess {
        d,
        atoms,
        half_width,
        w_min,
        alpha,
        p,
        q,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::rng_from_seed;

    #[test]
    fn expected_count_example() {
        assert_eq!(expected_count(2, 1.0, 1.0, 1.5, 0.7, 0.3), 4.0);
    }

    #[test]
    fn count_mean_over_replicates() {
        let mut rng = rng_from_seed(11);
        let reps = 1000;
        let mean = expected_count(2, 1.5, 0.8, 1.5, 0.6, 0.4);
        let total: usize = (0..reps)
            .map(|_| sample_ppp(2, 1.5, 0.8, 1.5, 0.6, 0.4, &mut rng).unwrap().atoms.len())
            .sum();
        let sd = (mean / reps as f64).sqrt();
        assert!((total as f64 / reps as f64 - mean).abs() < 4.0 * sd);
    }

    #[test]
    fn marks_and_locations() {
        let mut rng = rng_from_seed(12);
        let (alpha, p, w_min) = (1.5, 0.7, 1.0);
        let mut atoms = Vec::new();
        while atoms.len() < 100_000 {
            atoms.extend(sample_ppp(3, 2.0, w_min, alpha, p, 1.0 - p, &mut rng).unwrap().atoms);
        }
        let n = atoms.len() as f64;
        assert!(atoms.iter().all(|a| a.w.abs() >= w_min && a.x.iter().all(|c| c.abs() <= 2.0)));
        let pos = atoms.iter().filter(|a| a.w > 0.0).count() as f64 / n;
        assert!((pos - p).abs() < 4.0 * (p * (1.0 - p) / n).sqrt());
        let tail = 2f64.powf(-alpha);
        let frac = atoms.iter().filter(|a| a.w.abs() > 2.0).count() as f64 / n;
        assert!((frac - tail).abs() < 4.0 * (tail * (1.0 - tail) / n).sqrt());
    }
}
