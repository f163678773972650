//! Walks conditioned to stay in a Euclidean ball, or in a shell
//! `{r < M_N ≤ R}`, sampled exactly from backward survival tables.
//!
//! `u_m(x)` is the probability of staying in `Λ_R` for `m` more steps from
//! `x`. Tables are stored normalized to a maximum of one with the log
//! scale factors accumulated separately, so long horizons do not
//! underflow.

use super::PathSample;
use crate::error::{Error, Result};
use crate::lattice::{ball_points, in_ball, step_axis, Point};
use rand::Rng;

/// Default cap on table entries `(N + 1)·|Λ_R|`.
pub const DEFAULT_TABLE_BUDGET: f64 = 5e7;

const NONE: u32 = u32::MAX;

/// Survival tables for one `(d, N, R)`.
#[derive(Debug, Clone)]
pub struct ConfinedSampler {
    d: usize,
    n: usize,
    radius: f64,
    points: Vec<Point>,
    origin: u32,
    /// `neighbors[i * 2d + s]`: ball index after step `s` from point `i`.
    neighbors: Vec<u32>,
    inner: f64,
    /// Normalized `u_m`, `m = 0..=N`, each of length `|Λ_R|`.
    tables: Vec<Vec<f64>>,
    /// With an inner radius: `w_m(x)`, the probability of staying in `Λ_R`
    /// for `m` steps and leaving the inner ball at some point (counting
    /// `x` itself), on the same scale as `u_m`.
    exit_tables: Vec<Vec<f64>>,
    outside: Vec<bool>,
    log_stay: f64,
    unconstrained: bool,
}

impl ConfinedSampler {
    pub fn new(d: usize, n: usize, radius: f64) -> Result<Self> {
        Self::with_budget(d, n, radius, DEFAULT_TABLE_BUDGET)
    }

    pub fn with_budget(d: usize, n: usize, radius: f64, budget: f64) -> Result<Self> {
        Self::shell_with_budget(d, n, 0.0, radius, budget)
    }

    /// Walks conditioned on `inner < M_N ≤ outer`. An inner radius below 1
    /// imposes nothing since `M_N ≥ 1`.
    pub fn shell(d: usize, n: usize, inner: f64, outer: f64) -> Result<Self> {
        Self::shell_with_budget(d, n, inner, outer, DEFAULT_TABLE_BUDGET)
    }

    pub fn shell_with_budget(d: usize, n: usize, inner: f64, outer: f64, budget: f64) -> Result<Self> {
        if n == 0 {
            return Err(Error::invalid("walk length must be >= 1"));
        }
        if !(outer >= 1.0) {
            return Err(Error::invalid(format!("confinement radius {outer} must be >= 1")));
        }
        if !(inner >= 0.0 && inner < outer) {
            return Err(Error::invalid(format!(
                "inner radius {inner} must lie in [0, {outer})"
            )));
        }
        let has_inner = inner >= 1.0;
        let unconstrained = outer >= n as f64 && !has_inner;
        let radius = if outer >= n as f64 { n as f64 } else { outer };
        let points = if unconstrained { vec![vec![0; d]] } else { ball_points(d, radius) };
        let entries = (n as f64 + 1.0) * points.len() as f64 * if has_inner { 2.0 } else { 1.0 };
        if !unconstrained && entries > budget {
            return Err(Error::Budget {
                what: "confined survival table entries",
                needed: entries,
                limit: budget,
            });
        }
        let m = radius.floor() as i32;
        let side = (2 * m + 1) as usize;
        let box_index = |x: &[i32]| -> Option<usize> {
            let mut idx = 0usize;
            for &c in x.iter().rev() {
                if c.abs() > m {
                    return None;
                }
                idx = idx * side + (c + m) as usize;
            }
            Some(idx)
        };
        let mut lookup = vec![NONE; if unconstrained { 0 } else { side.pow(d as u32) }];
        if !unconstrained {
            for (i, x) in points.iter().enumerate() {
                lookup[box_index(x).unwrap()] = i as u32;
            }
        }
        let deg = 2 * d;
        let mut neighbors = vec![NONE; if unconstrained { 0 } else { points.len() * deg }];
        if !unconstrained {
            let mut y = vec![0i32; d];
            for (i, x) in points.iter().enumerate() {
                for s in 0..deg as u8 {
                    y.copy_from_slice(x);
                    let (k, dir) = step_axis(s);
                    y[k] += dir;
                    if let Some(b) = box_index(&y) {
                        neighbors[i * deg + s as usize] = lookup[b];
                    }
                }
            }
        }
        let origin = points.iter().position(|x| x.iter().all(|&c| c == 0)).unwrap() as u32;
        let outside: Vec<bool> = if has_inner {
            points.iter().map(|x| !in_ball(x, inner)).collect()
        } else {
            Vec::new()
        };
        let mut tables = Vec::new();
        let mut exit_tables: Vec<Vec<f64>> = Vec::new();
        let mut log_scale = 0.0;
        if !unconstrained {
            tables.reserve(n + 1);
            tables.push(vec![1.0; points.len()]);
            if has_inner {
                exit_tables.reserve(n + 1);
                exit_tables.push(outside.iter().map(|&o| o as u8 as f64).collect());
            }
            let inv = 1.0 / deg as f64;
            for _ in 1..=n {
                let prev = tables.last().unwrap();
                let mut next = vec![0.0; points.len()];
                let mut mx = 0.0f64;
                for (i, out) in next.iter_mut().enumerate() {
                    let mut acc = 0.0;
                    for &j in &neighbors[i * deg..(i + 1) * deg] {
                        if j != NONE {
                            acc += prev[j as usize];
                        }
                    }
                    *out = acc * inv;
                    mx = mx.max(*out);
                }
                if has_inner {
                    let prev_w = exit_tables.last().unwrap();
                    let mut w = vec![0.0; points.len()];
                    for (i, out) in w.iter_mut().enumerate() {
                        if outside[i] {
                            *out = next[i];
                            continue;
                        }
                        let mut acc = 0.0;
                        for &j in &neighbors[i * deg..(i + 1) * deg] {
                            if j != NONE {
                                acc += prev_w[j as usize];
                            }
                        }
                        *out = acc * inv;
                    }
                    for v in w.iter_mut() {
                        *v /= mx;
                    }
                    exit_tables.push(w);
                }
                for v in next.iter_mut() {
                    *v /= mx;
                }
                log_scale += mx.ln();
                tables.push(next);
            }
        }
        let log_stay = if unconstrained {
            0.0
        } else if has_inner {
            log_scale + exit_tables[n][origin as usize].ln()
        } else {
            log_scale + tables[n][origin as usize].ln()
        };
        Ok(ConfinedSampler {
            d,
            n,
            radius: outer,
            inner: if has_inner { inner } else { 0.0 },
            points,
            origin,
            neighbors,
            tables,
            exit_tables,
            outside,
            log_stay,
            unconstrained,
        })
    }

    pub fn inner_radius(&self) -> f64 {
        self.inner
    }

    pub fn radius(&self) -> f64 {
        self.radius
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    /// `log P(M_N ≤ R)`, or `log P(r < M_N ≤ R)` with an inner radius.
    pub fn log_stay_probability(&self) -> f64 {
        self.log_stay
    }

    /// Sample the step sequence of one conditioned walk.
    pub fn sample_steps<R: Rng + ?Sized>(&self, rng: &mut R, steps: &mut Vec<u8>) {
        steps.clear();
        let deg = 2 * self.d;
        if self.unconstrained {
            for _ in 0..self.n {
                steps.push(rng.random_range(0..deg as u32) as u8);
            }
            return;
        }
        let mut cur = self.origin as usize;
        let mut w = [0.0f64; 64];
        let mut exited = self.exit_tables.is_empty();
        for t in 0..self.n {
            let next = if exited {
                &self.tables[self.n - t - 1]
            } else {
                &self.exit_tables[self.n - t - 1]
            };
            let nb = &self.neighbors[cur * deg..(cur + 1) * deg];
            let mut total = 0.0;
            for (s, &j) in nb.iter().enumerate() {
                let v = if j == NONE { 0.0 } else { next[j as usize] };
                total += v;
                w[s] = total;
            }
            let u = rng.random::<f64>() * total;
            let mut s = 0;
            while s + 1 < deg && (w[s] <= u || nb[s] == NONE) {
                s += 1;
            }
            steps.push(s as u8);
            cur = nb[s] as usize;
            exited = exited || self.outside[cur];
        }
    }

    /// Sample a conditioned walk; `log_weight = log P(M_N ≤ R)`.
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> Result<PathSample> {
        let mut steps = Vec::with_capacity(self.n);
        self.sample_steps(rng, &mut steps);
        PathSample::from_steps(self.d, steps, self.log_stay)
    }

    /// Range size and squared maximal displacement of a sampled walk,
    /// tracked on the ball index with a reusable visit stamp.
    pub fn sample_stats<R: Rng + ?Sized>(&self, rng: &mut R, scratch: &mut ConfinedScratch) -> (u32, i64) {
        self.sample_steps(rng, &mut scratch.steps);
        if self.unconstrained {
            let p = PathSample::from_steps(self.d, scratch.steps.clone(), 0.0).expect("valid steps");
            return (p.range_size as u32, (p.max_disp * p.max_disp).round() as i64);
        }
        if scratch.stamp.len() != self.points.len() {
            scratch.stamp = vec![0; self.points.len()];
            scratch.generation = 0;
        }
        scratch.generation += 1;
        let g = scratch.generation;
        let deg = 2 * self.d;
        let mut cur = self.origin as usize;
        scratch.stamp[cur] = g;
        let mut range = 1u32;
        let mut max_sq = 0i64;
        for &s in &scratch.steps {
            cur = self.neighbors[cur * deg + s as usize] as usize;
            if scratch.stamp[cur] != g {
                scratch.stamp[cur] = g;
                range += 1;
                let nsq = crate::lattice::norm_sq(&self.points[cur]);
                max_sq = max_sq.max(nsq);
            }
        }
        (range, max_sq)
    }
}

/// Reusable buffers for `ConfinedSampler::sample_stats`.
#[derive(Debug, Default, Clone)]
pub struct ConfinedScratch {
    steps: Vec<u8>,
    stamp: Vec<u32>,
    generation: u32,
}

/// One walk of `n` steps conditioned to stay in `Λ_R`.
pub fn confined_walk_sampler<R: Rng + ?Sized>(n: usize, d: usize, radius: f64, rng: &mut R) -> Result<PathSample> {
    ConfinedSampler::new(d, n, radius)?.sample(rng)
}
