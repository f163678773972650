//! Empirical cell sum for the energy on ranges when `γ > ζ + (d−α)/α`.
//!
//! With `A_N = N^{1−α/d}`, the cells are `A_{j,k} = 𝓜_p(p^k A_N, p^j)` and
//! the events are `max_{S ∈ A_{j,k}} Ω_{p^{k+1}A_N}(R_N(S)) > ε² p^{k+j}
//! (h_N/β_N) A_N`.

use super::ensemble::{class_ensemble, EnsembleMode, RangeEnsemble};
use super::loglog_fit;
use crate::environment::DisorderField;
use crate::error::{Error, Result};
use crate::params::ModelParams;
use crate::par;
use crate::rng::Streams;
use crate::walk::{class_cover, range_ratio_cap};
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LemmaGConfig {
    pub params: ModelParams,
    pub n_grid: Vec<usize>,
    pub p: f64,
    pub eps: f64,
    pub seeds: u64,
    /// Sampled walks per cell.
    pub walks: u64,
    pub seed: u64,
    pub slack: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CellRow {
    pub k: u32,
    pub j: u32,
    pub threshold: f64,
    pub prob: f64,
    pub n_ranges: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LemmaGRow {
    pub n: usize,
    pub a_n: f64,
    pub cells: Vec<CellRow>,
    /// `Σ_{j,k}` of the empirical cell probabilities.
    pub sum: f64,
    /// Probability that at least one cell event occurs.
    pub union_prob: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LemmaGReport {
    pub rows: Vec<LemmaGRow>,
    /// `−αd/(α+d) · (γ − ζ − (d−α)/α)`.
    pub exponent: f64,
    /// Log-log slope of the sum against `N` over the positive entries.
    pub slope: Option<f64>,
    pub passes_rate: bool,
    /// Sums nonincreasing along the grid and strictly smaller at the end.
    pub decreasing: bool,
}

/// Largest `B_{N,k}` over the cover and the ratio to `ln N`.
pub fn cover_log_bound(n: usize, d: usize, a: f64, p: f64) -> Result<(f64, f64)> {
    let cells = class_cover(n, d, a, p)?;
    let kmax = cells.iter().map(|c| c.k).max().unwrap_or(0);
    let b = (0..=kmax).map(|k| range_ratio_cap(n, d, a, p, k)).fold(f64::NEG_INFINITY, f64::max);
    Ok((b, b / (n as f64).ln()))
}

struct Cell {
    k: u32,
    j: u32,
    threshold: f64,
    ens: RangeEnsemble,
}

pub fn check_lemma_g(cfg: &LemmaGConfig) -> Result<LemmaGReport> {
    let par_ = &cfg.params;
    par_.validate_numeric()?;
    let (d, alpha) = (par_.d, par_.alpha);
    let df = d as f64;
    let gap = par_.gamma - par_.zeta - (df - alpha) / alpha;
    if !(gap > 0.0) {
        return Err(Error::invalid(format!(
            "the cell-sum estimate needs γ > ζ + (d−α)/α (γ = {}, ζ = {}, (d−α)/α = {})",
            par_.gamma,
            par_.zeta,
            (df - alpha) / alpha
        )));
    }
    if !(cfg.eps > 0.0 && cfg.eps < 1.0) || !(cfg.p > 1.0) {
        return Err(Error::invalid("need ε ∈ (0,1) and p > 1"));
    }
    if !(par_.beta_hat > 0.0) {
        return Err(Error::invalid("beta_hat must be > 0"));
    }
    if cfg.seeds == 0 || cfg.walks == 0 || cfg.n_grid.is_empty() {
        return Err(Error::invalid("need seeds, walks and a nonempty N grid"));
    }
    let root = Streams::new(cfg.seed);
    let mut rows = Vec::new();
    for (ni, &n) in cfg.n_grid.iter().enumerate() {
        let a_n = (n as f64).powf(1.0 - alpha / df);
        if a_n > n as f64 {
            return Err(Error::invalid("A_N must not exceed N"));
        }
        let ratio = par_.h_n(n) / par_.beta_n(n);
        let cover = class_cover(n, d, a_n.max(1.0), cfg.p)?;
        let walk_streams = root.child(ni as u64);
        let mut cells = Vec::new();
        for (ci, c) in cover.iter().enumerate() {
            let radius = c.class.p * c.class.r;
            let mode = EnsembleMode::Sample {
                walks: cfg.walks,
                seed: walk_streams.child(ci as u64).seed(),
            };
            cells.push(Cell {
                k: c.k,
                j: c.j,
                threshold: cfg.eps * cfg.eps * cfg.p.powi((c.k + c.j) as i32) * ratio * a_n,
                ens: class_ensemble(n, d, &c.class, radius, mode)?,
            });
        }
        let seed_streams = root.child(1_000_003);
        let hits = par::map_indexed(cfg.seeds as usize, |s| {
            let field = DisorderField::new(seed_streams.child(s as u64).seed(), alpha, par_.p).expect("validated");
            let mut cached: Option<(usize, Vec<f64>)> = None;
            cells
                .iter()
                .map(|c| {
                    if c.ens.is_empty() {
                        return false;
                    }
                    // Cells of one k share their ball; reuse its values.
                    let len = c.ens.sites.len();
                    if cached.as_ref().is_none_or(|(l, _)| *l != len) {
                        cached = Some((len, c.ens.sites.iter().map(|x| field.omega_at(x)).collect()));
                    }
                    let values = &cached.as_ref().expect("filled").1;
                    c.ens.max_sum(values).expect("nonempty") > c.threshold
                })
                .collect::<Vec<bool>>()
        });
        let seeds = cfg.seeds as f64;
        let cell_rows: Vec<CellRow> = cells
            .iter()
            .enumerate()
            .map(|(i, c)| CellRow {
                k: c.k,
                j: c.j,
                threshold: c.threshold,
                prob: hits.iter().filter(|h| h[i]).count() as f64 / seeds,
                n_ranges: c.ens.ranges.len(),
            })
            .collect();
        let sum = cell_rows.iter().map(|c| c.prob).sum();
        let union_prob = hits.iter().filter(|h| h.iter().any(|&b| b)).count() as f64 / seeds;
        rows.push(LemmaGRow {
            n,
            a_n,
            cells: cell_rows,
            sum,
            union_prob,
        });
    }
    let exponent = -alpha * df / (alpha + df) * gap;
    let ns: Vec<f64> = rows.iter().map(|r| r.n as f64).collect();
    let sums: Vec<f64> = rows.iter().map(|r| r.sum).collect();
    let slope = loglog_fit(&ns, &sums).map(|f| f.0);
    let decreasing = sums.windows(2).all(|w| w[1] <= w[0]) && sums.last() < sums.first();
    Ok(LemmaGReport {
        rows,
        exponent,
        slope,
        passes_rate: slope.is_some_and(|s| s <= exponent + cfg.slack),
        decreasing,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::walk::class_cover;

    pub(crate) fn example(seeds: u64) -> LemmaGConfig {
        LemmaGConfig {
            params: ModelParams::new(2, 1.5, 0.7, 1.0, 1.0, 1.0, -1.5),
            n_grid: vec![8, 12, 16],
            p: 1.5,
            eps: 0.5,
            seeds,
            walks: 1000,
            seed: 5,
            slack: 0.25,
        }
    }

    #[test]
    fn hypothesis_is_enforced() {
        let mut cfg = example(10);
        cfg.params.gamma = -2.0;
        let err = check_lemma_g(&cfg).unwrap_err();
        assert!(err.to_string().contains("γ > ζ + (d−α)/α"));
    }

    #[test]
    fn sums_are_bounded_by_cell_count() {
        let mut cfg = example(50);
        cfg.n_grid = vec![8];
        cfg.walks = 300;
        let rep = check_lemma_g(&cfg).unwrap();
        let row = &rep.rows[0];
        assert!(row.sum >= 0.0 && row.sum <= row.cells.len() as f64);
        assert!(row.union_prob <= row.sum + 1e-12);
        for c in &row.cells {
            if c.n_ranges == 0 {
                assert_eq!(c.prob, 0.0);
            }
        }
    }

    #[test]
    fn cover_depth_is_logarithmic() {
        for d in [2usize, 3] {
            for p in [1.3, 1.5, 2.0] {
                for n in [8usize, 16, 64, 256, 1024] {
                    let a = (n as f64).powf(1.0 - 1.5 / d as f64).max(1.0);
                    let (_, ratio) = cover_log_bound(n, d, a, p).unwrap();
                    assert!(ratio <= 1.0 / p.ln() + 1e-12, "d={d} p={p} n={n}: {ratio}");
                    let cells = class_cover(n, d, a, p).unwrap().len() as f64;
                    let logp = (n as f64).ln() / p.ln();
                    assert!(cells <= (logp + 2.0).powi(2));
                }
            }
        }
    }

    #[test]
    fn decreasing_in_n() {
        let rep = check_lemma_g(&example(400)).unwrap();
        let sums: Vec<f64> = rep.rows.iter().map(|r| r.sum).collect();
        assert!(rep.decreasing, "{sums:?}");
    }
}
