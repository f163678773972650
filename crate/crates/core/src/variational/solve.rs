//! `𝒯_β = sup {β π(s) − Ent(s)}` and `𝒯̂_∞ = sup {π(s) : Ênt(s) < ∞}`
//! over polylines through atoms.
//!
//! Both reduce to choosing an ordered subset of positive atoms. Up to
//! `exact_max_atoms` atoms a Held–Karp table gives the shortest route
//! from the origin through every subset; beyond that a beam search over
//! partial routes returns a lower bound.

use super::{dist, PolyPath};
use crate::error::{Error, Result};
use crate::limits::WeightedPointProcess;
use serde::Serialize;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SolveBudget {
    /// Largest positive-atom count solved exactly (at most 20).
    pub exact_max_atoms: usize,
    /// Partial routes kept per depth by the beam search.
    pub beam_width: usize,
}

impl Default for SolveBudget {
    fn default() -> Self {
        SolveBudget {
            exact_max_atoms: 14,
            beam_width: 256,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct VarSolution {
    pub value: f64,
    pub path: PolyPath,
    /// `false` when the beam search was used; the value is then a lower
    /// bound.
    pub exact: bool,
    pub n_candidates: usize,
}

fn l1(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).sum()
}

/// Held–Karp table over a metric on `n` points plus the origin (index
/// `n`): for every subset, the shortest route from the origin visiting
/// exactly that subset.
pub struct SubsetPaths {
    n: usize,
    /// Shortest route length per subset bitmask (0 for the empty set).
    pub best: Vec<f64>,
    last: Vec<usize>,
    parent: Vec<Vec<u8>>,
}

impl SubsetPaths {
    /// `metric` is `(n+1) × (n+1)` with the origin last; `n ≤ 20`.
    pub fn new(metric: &[Vec<f64>]) -> Self {
        let n = metric.len() - 1;
        assert!(n <= 20, "subset table limited to 20 points");
        let full = 1usize << n;
        let mut cost = vec![f64::INFINITY; full * n.max(1)];
        let mut parent = vec![vec![u8::MAX; n]; full];
        for j in 0..n {
            cost[(1 << j) * n + j] = metric[n][j];
        }
        for set in 1..full {
            for j in 0..n {
                let c = cost[set * n + j];
                if set & (1 << j) == 0 || !c.is_finite() {
                    continue;
                }
                for k in 0..n {
                    if set & (1 << k) != 0 {
                        continue;
                    }
                    let next = set | (1 << k);
                    let v = c + metric[j][k];
                    if v < cost[next * n + k] {
                        cost[next * n + k] = v;
                        parent[next][k] = j as u8;
                    }
                }
            }
        }
        let mut best = vec![0.0; full];
        let mut last = vec![usize::MAX; full];
        for set in 1..full {
            let row = &cost[set * n..(set + 1) * n];
            let (j, &c) = row.iter().enumerate().min_by(|a, b| a.1.total_cmp(b.1)).expect("nonempty");
            best[set] = c;
            last[set] = j;
        }
        SubsetPaths { n, best, last, parent }
    }

    /// Visiting order of the shortest route through `set`.
    pub fn route(&self, set: usize) -> Vec<usize> {
        let mut order = Vec::new();
        if set == 0 {
            return order;
        }
        let (mut s, mut j) = (set, self.last[set]);
        while s != 0 {
            order.push(j);
            let p = self.parent[s][j];
            s &= !(1 << j);
            j = p as usize;
        }
        order.reverse();
        debug_assert!(order.iter().all(|&i| i < self.n));
        order
    }
}

struct Instance<'a> {
    d: usize,
    points: Vec<&'a [f64]>,
    weights: Vec<f64>,
    /// `metric[i][j]` with index `n` for the origin.
    metric: Vec<Vec<f64>>,
}

impl<'a> Instance<'a> {
    fn new(pp: &'a WeightedPointProcess, metric: fn(&[f64], &[f64]) -> f64) -> Self {
        let (points, weights): (Vec<&[f64]>, Vec<f64>) =
            pp.atoms.iter().filter(|a| a.w > 0.0).map(|a| (a.x.as_slice(), a.w)).unzip();
        let n = points.len();
        let origin = vec![0.0; pp.d];
        let at = |i: usize| if i == n { origin.as_slice() } else { points[i] };
        let metric = (0..=n).map(|i| (0..=n).map(|j| metric(at(i), at(j))).collect()).collect();
        Instance {
            d: pp.d,
            points,
            weights,
            metric,
        }
    }

    fn n(&self) -> usize {
        self.points.len()
    }

    fn path(&self, order: &[usize]) -> PolyPath {
        let mut vertices = vec![vec![0.0; self.d]];
        vertices.extend(order.iter().map(|&i| self.points[i].to_vec()));
        PolyPath { vertices, times: None }
    }

    fn subset_weight(&self, set: usize) -> f64 {
        (0..self.n()).filter(|&i| set & (1 << i) != 0).map(|i| self.weights[i]).sum()
    }

    fn solve_exact(&self, score: impl Fn(f64, f64) -> f64) -> VarSolution {
        let n = self.n();
        let table = SubsetPaths::new(&self.metric);
        let mut top = (0.0, 0usize);
        for set in 1..(1usize << n) {
            let v = score(self.subset_weight(set), table.best[set]);
            if v > top.0 {
                top = (v, set);
            }
        }
        let order = table.route(top.1);
        VarSolution {
            value: top.0,
            path: self.path(&order),
            exact: true,
            n_candidates: n,
        }
    }

    /// Extend partial routes one atom at a time, keeping the `width` best
    /// by current score; the best score seen anywhere is returned.
    fn solve_beam(&self, width: usize, score: impl Fn(f64, f64) -> f64) -> VarSolution {
        #[derive(Clone)]
        struct Partial {
            order: Vec<usize>,
            visited: Vec<bool>,
            weight: f64,
            length: f64,
        }
        let n = self.n();
        let mut beam = vec![Partial {
            order: Vec::new(),
            visited: vec![false; n],
            weight: 0.0,
            length: 0.0,
        }];
        let mut top = (0.0, Vec::new());
        for _ in 0..n {
            let mut next: Vec<(f64, Partial)> = Vec::new();
            for p in &beam {
                let from = p.order.last().copied().unwrap_or(n);
                for k in (0..n).filter(|&k| !p.visited[k]) {
                    let length = p.length + self.metric[from][k];
                    let weight = p.weight + self.weights[k];
                    let s = score(weight, length);
                    if s == f64::NEG_INFINITY {
                        continue;
                    }
                    let mut q = p.clone();
                    q.order.push(k);
                    q.visited[k] = true;
                    q.length = length;
                    q.weight = weight;
                    if s > top.0 {
                        top = (s, q.order.clone());
                    }
                    next.push((s, q));
                }
            }
            if next.is_empty() {
                break;
            }
            next.sort_by(|a, b| b.0.total_cmp(&a.0));
            next.truncate(width.max(1));
            beam = next.into_iter().map(|(_, p)| p).collect();
        }
        VarSolution {
            value: top.0,
            path: self.path(&top.1),
            exact: false,
            n_candidates: n,
        }
    }

    fn solve(&self, budget: &SolveBudget, score: impl Fn(f64, f64) -> f64) -> Result<VarSolution> {
        if budget.exact_max_atoms > 20 {
            return Err(Error::Budget {
                what: "exact subset table",
                needed: budget.exact_max_atoms as f64,
                limit: 20.0,
            });
        }
        if self.n() == 0 {
            return Ok(VarSolution {
                value: 0.0,
                path: PolyPath::origin(self.d),
                exact: true,
                n_candidates: 0,
            });
        }
        if self.n() <= budget.exact_max_atoms {
            Ok(self.solve_exact(score))
        } else {
            Ok(self.solve_beam(budget.beam_width, score))
        }
    }
}

/// `𝒯_β`: maximize `β w(Δ) − (d/2) L(Δ)²` over ordered subsets `Δ`.
pub fn solve_t_beta(pp: &WeightedPointProcess, beta: f64, budget: &SolveBudget) -> Result<VarSolution> {
    if !(beta >= 0.0 && beta.is_finite()) {
        return Err(Error::invalid(format!("beta = {beta} must be finite and >= 0")));
    }
    let inst = Instance::new(pp, dist);
    let half_d = 0.5 * pp.d as f64;
    inst.solve(budget, |w, l| beta * w - half_d * l * l)
}

/// `𝒯̂_∞`: maximize the collected weight over routes of `ℓ¹` length at most 1.
pub fn solve_t_hat_inf(pp: &WeightedPointProcess, budget: &SolveBudget) -> Result<VarSolution> {
    let inst = Instance::new(pp, l1);
    let limit = 1.0 + 1e-12;
    inst.solve(budget, |w, l| if l <= limit { w } else { f64::NEG_INFINITY })
}
