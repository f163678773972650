//! `Ênt(s) = inf_φ ∫ J_d((s∘φ)′)` over polylines: a convex allocation of
//! time to segments.
//!
//! With `Δ_k` the `k`-th segment vector and `t_k` its time, the cost is
//! `Σ_k t_k J_d(Δ_k/t_k)` subject to `Σ t_k = 1` and `t_k ≥ ‖Δ_k‖₁`. The
//! derivative of `t ↦ t J_d(Δ/t)` is `−Λ(λ*(Δ/t))`, so the optimum equalizes
//! `Λ(λ*)` across unconstrained segments; the common level is found by
//! bisection.

use super::rate::{rate_dual, rate_j, BOUNDARY_TOL};
use super::PolyPath;
use crate::error::Result;

struct Segment {
    delta: Vec<f64>,
    min_time: f64,
}

impl Segment {
    fn speed(&self, t: f64) -> Vec<f64> {
        self.delta.iter().map(|x| x / t).collect()
    }

    /// Smallest `t ≥ min_time` with `Λ(λ*(Δ/t)) ≤ level`.
    fn time_at_level(&self, level: f64) -> f64 {
        let lmgf = |t: f64| rate_dual(&self.speed(t)).log_mgf;
        let mut lo = self.min_time;
        if lmgf(lo * (1.0 + 1e-15)) <= level {
            return lo;
        }
        let mut hi = lo.max(1e-300) * 2.0;
        while lmgf(hi) > level {
            lo = hi;
            hi *= 2.0;
        }
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if lmgf(mid) > level {
                lo = mid;
            } else {
                hi = mid;
            }
            if hi - lo <= 1e-15 * hi {
                break;
            }
        }
        hi
    }
}

/// `(Ênt(s), optimal segment times)`; `+∞` when the `ℓ¹` length exceeds 1.
pub fn ent_hat_with_times(path: &PolyPath, d: usize) -> Result<(f64, Vec<f64>)> {
    path.validate(d)?;
    let segments: Vec<Segment> = path
        .segments()
        .map(|(a, b)| {
            let delta: Vec<f64> = a.iter().zip(b).map(|(x, y)| y - x).collect();
            let min_time = delta.iter().map(|x| x.abs()).sum();
            Segment { delta, min_time }
        })
        .collect();
    let total_min: f64 = segments.iter().map(|s| s.min_time).sum();
    if total_min > 1.0 + BOUNDARY_TOL {
        return Ok((f64::INFINITY, Vec::new()));
    }
    if total_min == 0.0 {
        let n = segments.len().max(1);
        return Ok((0.0, vec![1.0 / n as f64; segments.len()]));
    }
    let cost = |times: &[f64]| -> f64 {
        segments
            .iter()
            .zip(times)
            .filter(|(s, _)| s.min_time > 0.0)
            .map(|(s, &t)| t * rate_j(&s.speed(t)))
            .sum()
    };
    if total_min >= 1.0 - BOUNDARY_TOL {
        let times: Vec<f64> = segments.iter().map(|s| s.min_time / total_min).collect();
        return Ok((cost(&times), times));
    }
    let moving: Vec<&Segment> = segments.iter().filter(|s| s.min_time > 0.0).collect();
    let used = |level: f64| -> f64 { moving.iter().map(|s| s.time_at_level(level)).sum() };
    // Σ t_k(level) decreases in the level; bracket 1 in log scale.
    let (mut lo, mut hi) = (1e-3f64, 1e-3f64);
    while used(lo) < 1.0 {
        lo *= 0.5;
    }
    while used(hi) > 1.0 {
        hi *= 2.0;
    }
    for _ in 0..200 {
        let mid = (0.5 * (lo.ln() + hi.ln())).exp();
        if used(mid) > 1.0 {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi / lo - 1.0 < 1e-14 {
            break;
        }
    }
    let level = (0.5 * (lo.ln() + hi.ln())).exp();
    let mut times: Vec<f64> = segments.iter().map(|s| if s.min_time > 0.0 { s.time_at_level(level) } else { 0.0 }).collect();
    let sum: f64 = times.iter().sum();
    times.iter_mut().for_each(|t| *t /= sum);
    Ok((cost(&times), times))
}

/// `Ênt(s)`.
pub fn ent_hat(path: &PolyPath, d: usize) -> Result<f64> {
    Ok(ent_hat_with_times(path, d)?.0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::rng_from_seed;
    use rand::Rng;

    #[test]
    fn trivial_paths() {
        assert_eq!(ent_hat(&PolyPath::origin(2), 2).unwrap(), 0.0);
        let p = PolyPath::through(2, &[vec![1.0, 0.0]]).unwrap();
        assert!((ent_hat(&p, 2).unwrap() - 4f64.ln()).abs() < 1e-12);
        let p = PolyPath::through(2, &[vec![0.8, 0.5]]).unwrap();
        assert_eq!(ent_hat(&p, 2).unwrap(), f64::INFINITY);
    }

    #[test]
    fn single_segment_uses_all_time() {
        // For one segment the only allocation is t = 1.
        let p = PolyPath::through(3, &[vec![0.2, -0.1, 0.3]]).unwrap();
        assert!((ent_hat(&p, 3).unwrap() - rate_j(&[0.2, -0.1, 0.3])).abs() < 1e-12);
    }

    #[test]
    fn two_segments_match_allocation_grid() {
        let p = PolyPath::through(2, &[vec![0.3, 0.1], vec![0.1, 0.4]]).unwrap();
        let (value, times) = ent_hat_with_times(&p, 2).unwrap();
        assert!((times.iter().sum::<f64>() - 1.0).abs() < 1e-12);
        let (d1, d2) = ([0.3, 0.1], [-0.2, 0.3]);
        let m1 = 0.4;
        let m2 = 0.5;
        let mut best = f64::INFINITY;
        for i in 0..=20_000 {
            let t = m1 + (1.0 - m1 - m2) * i as f64 / 20_000.0;
            let c = t * rate_j(&[d1[0] / t, d1[1] / t]) + (1.0 - t) * rate_j(&[d2[0] / (1.0 - t), d2[1] / (1.0 - t)]);
            best = best.min(c);
        }
        assert!(value <= best + 1e-10 && value >= best - 1e-6, "{value} vs {best}");
    }

    #[test]
    fn collinear_midpoint_is_invisible() {
        for end in [[0.3, 0.2], [0.6, 0.4], [0.5, 0.0]] {
            let one = PolyPath::through(2, &[end.to_vec()]).unwrap();
            let two = PolyPath::through(2, &[vec![end[0] * 0.3, end[1] * 0.3], end.to_vec()]).unwrap();
            let (a, b) = (ent_hat(&one, 2).unwrap(), ent_hat(&two, 2).unwrap());
            assert!((a - b).abs() < 1e-8, "{end:?}: {a} vs {b}");
        }
    }

    #[test]
    fn bounded_below_by_chord() {
        let mut rng = rng_from_seed(8);
        for _ in 0..30 {
            let d = rng.random_range(2..4);
            let k = rng.random_range(1..5);
            let pts: Vec<Vec<f64>> = (0..k)
                .map(|_| (0..d).map(|_| rng.random_range(-0.3..0.3)).collect())
                .collect();
            let p = PolyPath::through(d, &pts).unwrap();
            let e = ent_hat(&p, d).unwrap();
            if e.is_finite() {
                assert!(e >= rate_j(pts.last().unwrap()) - 1e-10);
            } else {
                assert!(p.l1_length() > 1.0);
            }
        }
    }
}
