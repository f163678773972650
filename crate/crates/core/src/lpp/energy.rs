//! Tail of the largest energy `Ω_r(R_N)` collected by a walk of `𝓜(r,s)`.

use super::ensemble::{class_ensemble, EnsembleMode};
use super::loglog_fit;
use crate::environment::DisorderField;
use crate::error::{Error, Result};
use crate::par;
use crate::rng::Streams;
use crate::walk::PathClass;
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EnergyConfig {
    pub d: usize,
    pub alpha: f64,
    /// Probability of a positive sign in the disorder law.
    pub p_plus: f64,
    pub r: f64,
    pub s: f64,
    pub p: f64,
    pub n: usize,
    pub t_grid: Vec<f64>,
    pub seeds: u64,
    pub mode: EnsembleMode,
    pub seed: u64,
    /// Allowed excess of the fitted slope over `−αd/(α+d)`.
    pub slack: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EnergyReport {
    pub threshold_unit: f64,
    pub t_grid: Vec<f64>,
    /// `P(max Ω_r(R_N) > r^{d/α} s t)` per `t`.
    pub prob: Vec<f64>,
    pub slope: Option<f64>,
    pub theory_slope: f64,
    pub passes: bool,
    pub n_ranges: usize,
    /// `false` when the max runs over a sampled sub-ensemble, which makes
    /// every probability a lower bound.
    pub exhaustive: bool,
}

pub fn check_energy_bound(cfg: &EnergyConfig) -> Result<EnergyReport> {
    let d = cfg.d;
    if cfg.t_grid.is_empty() || cfg.t_grid.iter().any(|&t| !(t > 0.0)) {
        return Err(Error::invalid("t grid must be nonempty and positive"));
    }
    if cfg.seeds == 0 {
        return Err(Error::invalid("need at least one disorder seed"));
    }
    DisorderField::new(0, cfg.alpha, cfg.p_plus)?;
    let class = PathClass::new(cfg.r, cfg.s, cfg.p)?;
    let ens = class_ensemble(cfg.n, d, &class, cfg.r, cfg.mode)?;
    if ens.is_empty() {
        return Err(Error::invalid(format!(
            "the class M(r = {}, s = {}) has no walks of length {} in the ensemble",
            cfg.r, cfg.s, cfg.n
        )));
    }
    let unit = cfg.r.powf(d as f64 / cfg.alpha) * cfg.s;
    let seeds = Streams::new(cfg.seed);
    let maxima = par::map_indexed(cfg.seeds as usize, |i| {
        let field = DisorderField::new(seeds.child(i as u64).seed(), cfg.alpha, cfg.p_plus).expect("validated");
        let values: Vec<f64> = ens.sites.iter().map(|x| field.omega_at(x)).collect();
        ens.max_sum(&values).expect("nonempty")
    });
    let prob: Vec<f64> = cfg
        .t_grid
        .iter()
        .map(|&t| maxima.iter().filter(|&&m| m > unit * t).count() as f64 / cfg.seeds as f64)
        .collect();
    let a = cfg.alpha;
    let theory_slope = -a * d as f64 / (a + d as f64);
    let (xs, ys): (Vec<f64>, Vec<f64>) = cfg
        .t_grid
        .iter()
        .zip(&prob)
        .filter(|(_, &q)| q > 0.0 && q < 1.0)
        .map(|(&t, &q)| (t, q))
        .unzip();
    let slope = loglog_fit(&xs, &ys).map(|f| f.0);
    Ok(EnergyReport {
        threshold_unit: unit,
        t_grid: cfg.t_grid.clone(),
        prob,
        slope,
        theory_slope,
        passes: slope.is_some_and(|s| s <= theory_slope + cfg.slack),
        n_ranges: ens.ranges.len(),
        exhaustive: ens.exhaustive,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    pub(crate) fn example(mode: EnsembleMode, seeds: u64) -> EnergyConfig {
        EnergyConfig {
            d: 2,
            alpha: 1.5,
            p_plus: 0.7,
            r: 4.0,
            s: 1.5,
            p: 1.5,
            n: 12,
            t_grid: vec![0.5, 1.0, 2.0, 4.0, 8.0],
            seeds,
            mode,
            seed: 11,
            slack: 0.25,
        }
    }

    #[test]
    fn probabilities_behave() {
        let mut cfg = example(EnsembleMode::Sample { walks: 2000, seed: 2 }, 100);
        cfg.t_grid = vec![1e-9, 0.5, 1.0, 2.0, 4.0];
        let rep = check_energy_bound(&cfg).unwrap();
        assert_eq!(rep.prob[0], 1.0);
        assert!(rep.prob.windows(2).all(|w| w[1] <= w[0]));
        assert!(!rep.exhaustive);
    }

    #[test]
    fn empty_class_is_reported() {
        let mut cfg = example(EnsembleMode::Sample { walks: 100, seed: 2 }, 10);
        cfg.n = 3;
        assert!(check_energy_bound(&cfg).is_err());
    }

    #[test]
    fn slope_on_enumerated_class() {
        let rep = check_energy_bound(&example(EnsembleMode::Enumerate { budget: 1e8 }, 400)).unwrap();
        assert!(rep.exhaustive);
        assert!(rep.passes, "{rep:?}");
    }

    #[test]
    fn slope_on_sampled_class() {
        let rep = check_energy_bound(&example(EnsembleMode::Sample { walks: 20_000, seed: 4 }, 400)).unwrap();
        assert!(rep.passes, "{rep:?}");
    }
}
