//! Expectations under the polymer measure
//! `dP_N ∝ exp(β_N Σ_{x∈R_N} ω_x − h_N |R_N|) dP`.

use super::exact::exact_sums;
use super::{check_field, Coupling, Event, PathFeatures};
use crate::environment::DisorderField;
use crate::error::{Error, Result};
use crate::lattice::{pack_wide, step_axis};
use crate::par;
use crate::params::ModelParams;
use crate::rng::Streams;
use crate::walk::enumerate::DEFAULT_LEAF_BUDGET;
use crate::walk::sample::draw_step;
use rand::Rng;
use rustc_hash::FxHashMap;
use serde::Serialize;

type Undo = Box<dyn Fn(&mut Vec<u8>)>;

/// Nonnegative path functionals.
#[derive(Debug, Clone)]
pub enum Observable {
    One,
    RangeSize,
    MaxDisp,
    Indicator(Event),
    /// `| |R_N|/N − c |`
    RangeDensityGap(f64),
}

impl Observable {
    #[inline]
    pub fn value(&self, x: &PathFeatures<'_>) -> f64 {
        match self {
            Observable::One => 1.0,
            Observable::RangeSize => x.range_size as f64,
            Observable::MaxDisp => x.max_disp(),
            Observable::Indicator(e) => e.test(x) as u8 as f64,
            Observable::RangeDensityGap(c) => (x.range_size as f64 / x.n as f64 - c).abs(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct McmcConfig {
    pub chains: usize,
    /// Sweeps of `N` proposals discarded before recording.
    pub burn_in_sweeps: usize,
    pub sweeps: usize,
    pub seed: u64,
}

impl Default for McmcConfig {
    fn default() -> Self {
        McmcConfig {
            chains: 4,
            burn_in_sweeps: 2000,
            sweeps: 20_000,
            seed: 0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ExpectationMethod {
    Exact,
    Mcmc(McmcConfig),
}

/// Convergence diagnostics of the Metropolis chains.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct McmcDiagnostics {
    /// Per-chain means of the observable.
    pub chain_means: Vec<f64>,
    /// Per-chain means of `|R_N|`.
    pub chain_range_means: Vec<f64>,
    /// Largest deviation of a chain's `|R_N|` mean from the pooled mean.
    pub range_disagreement: f64,
    /// Root-mean-square of the per-chain batch-means standard errors of `|R_N|`.
    pub range_pooled_sigma: f64,
    pub acceptance_rate: f64,
    /// `range_disagreement ≤ 2 · range_pooled_sigma`.
    pub converged: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Expectation {
    pub value: f64,
    pub std_err: f64,
    pub method: &'static str,
    pub diagnostics: Option<McmcDiagnostics>,
}

/// `E_{P_N}[obs]`, by enumeration or by Metropolis sampling.
pub fn polymer_expectation(
    field: &DisorderField,
    params: &ModelParams,
    n: usize,
    observable: &Observable,
    method: ExpectationMethod,
) -> Result<Expectation> {
    check_field(field, params)?;
    let c = Coupling::at(params, n);
    match method {
        ExpectationMethod::Exact => {
            let (z, zo) = exact_sums(Some(field), params.d, n, &[c], None, Some(observable), DEFAULT_LEAF_BUDGET)?;
            Ok(Expectation {
                value: (zo[0] - z[0]).exp(),
                std_err: 0.0,
                method: "exact",
                diagnostics: None,
            })
        }
        ExpectationMethod::Mcmc(cfg) => mcmc(field, params.d, n, c, observable, &cfg),
    }
}

/// Step sequence with visit counts of its sites, updated in place.
struct Chain<'a> {
    d: usize,
    n: usize,
    field: &'a DisorderField,
    c: Coupling,
    steps: Vec<u8>,
    /// `S_0, …, S_N` flattened.
    pos: Vec<i32>,
    counts: FxHashMap<u128, u32>,
    range: u64,
    omega: f64,
    /// Scratch copy of the sites being moved.
    saved: Vec<i32>,
}

impl<'a> Chain<'a> {
    fn new<R: Rng>(rng: &mut R, d: usize, n: usize, field: &'a DisorderField, c: Coupling) -> Result<Self> {
        let steps: Vec<u8> = (0..n).map(|_| draw_step(rng, d)).collect();
        let mut ch = Chain {
            d,
            n,
            field,
            c,
            steps,
            pos: vec![0; (n + 1) * d],
            counts: FxHashMap::default(),
            range: 0,
            omega: 0.0,
            saved: Vec::new(),
        };
        ch.rebuild_positions(0, n);
        for t in 0..=n {
            ch.add_site(t)?;
        }
        Ok(ch)
    }

    fn site(&self, t: usize) -> &[i32] {
        &self.pos[t * self.d..(t + 1) * self.d]
    }

    /// Recompute `S_{a+1}, …, S_b` from `S_a` and the steps.
    fn rebuild_positions(&mut self, a: usize, b: usize) {
        let d = self.d;
        for t in a..b {
            let (k, dir) = step_axis(self.steps[t]);
            for i in 0..d {
                self.pos[(t + 1) * d + i] = self.pos[t * d + i];
            }
            self.pos[(t + 1) * d + k] += dir;
        }
    }

    fn key(x: &[i32]) -> Result<u128> {
        pack_wide(x).ok_or_else(|| Error::Unsupported("walk coordinate exceeds the packed site-key width".into()))
    }

    fn add_site(&mut self, t: usize) -> Result<()> {
        let x = &self.pos[t * self.d..(t + 1) * self.d];
        let key = Self::key(x)?;
        let c = self.counts.entry(key).or_insert(0);
        if *c == 0 {
            self.range += 1;
            self.omega += self.field.omega_at(x);
        }
        *c += 1;
        Ok(())
    }

    fn remove_site(&mut self, t: usize) -> Result<()> {
        let x = &self.pos[t * self.d..(t + 1) * self.d];
        let key = Self::key(x)?;
        let c = self.counts.get_mut(&key).expect("site present");
        *c -= 1;
        if *c == 0 {
            self.counts.remove(&key);
            self.range -= 1;
            self.omega -= self.field.omega_at(x);
        }
        Ok(())
    }

    fn log_weight(&self) -> f64 {
        self.c.log_weight(self.omega, self.range)
    }

    /// Replace the sites `S_{a+1}, …, S_b` after the steps in `a..b` have
    /// been rewritten.
    fn resite(&mut self, a: usize, b: usize) -> Result<()> {
        for t in a + 1..=b {
            self.remove_site(t)?;
        }
        self.rebuild_positions(a, b);
        for t in a + 1..=b {
            self.add_site(t)?;
        }
        Ok(())
    }

    /// One Metropolis proposal; returns whether it was accepted.
    fn step<R: Rng>(&mut self, rng: &mut R) -> Result<bool> {
        let before = self.log_weight();
        let omega_before = self.omega;
        let deg = 2 * self.d as u32;
        let (a, b, undo): (usize, usize, Undo) = if self.n < 2 || rng.random::<bool>() {
            // Change the direction of one step; the suffix is translated.
            let t = rng.random_range(0..self.n);
            let old = self.steps[t];
            let shift = rng.random_range(1..deg) as u8;
            self.steps[t] = (old + shift) % deg as u8;
            (t, self.n, Box::new(move |s: &mut Vec<u8>| s[t] = old))
        } else {
            // Reverse the steps of a segment; its end sites are unchanged.
            let i = rng.random_range(0..self.n);
            let mut j = rng.random_range(0..self.n - 1);
            if j >= i {
                j += 1;
            }
            let (lo, hi) = if i < j { (i, j + 1) } else { (j, i + 1) };
            self.steps[lo..hi].reverse();
            (lo, hi, Box::new(move |s: &mut Vec<u8>| s[lo..hi].reverse()))
        };
        self.saved.clear();
        self.saved.extend_from_slice(&self.pos[(a + 1) * self.d..(b + 1) * self.d]);
        self.resite(a, b)?;
        let delta = self.log_weight() - before;
        if delta >= 0.0 || rng.random::<f64>() < delta.exp() {
            return Ok(true);
        }
        undo(&mut self.steps);
        self.resite(a, b)?;
        debug_assert_eq!(&self.pos[(a + 1) * self.d..(b + 1) * self.d], &self.saved[..]);
        // Undo the rounding drift of the incremental energy sum.
        self.omega = omega_before;
        Ok(false)
    }

    fn features(&self) -> (u64, i64) {
        let max_sq = (1..=self.n)
            .map(|t| crate::lattice::norm_sq(self.site(t)))
            .max()
            .unwrap_or(0);
        (self.range, max_sq)
    }
}

struct ChainResult {
    obs: Vec<f64>,
    range: Vec<f64>,
    accepted: u64,
    proposed: u64,
}

fn batch_means(xs: &[f64]) -> (f64, f64) {
    let n = xs.len();
    let mean = xs.iter().sum::<f64>() / n as f64;
    let batches = 20.min(n / 2).max(2);
    let size = n / batches;
    let bm: Vec<f64> = (0..batches)
        .map(|b| xs[b * size..(b + 1) * size].iter().sum::<f64>() / size as f64)
        .collect();
    let bmean = bm.iter().sum::<f64>() / batches as f64;
    let var = bm.iter().map(|x| (x - bmean).powi(2)).sum::<f64>() / (batches - 1) as f64;
    (mean, (var / batches as f64).sqrt())
}

fn mcmc(
    field: &DisorderField,
    d: usize,
    n: usize,
    c: Coupling,
    observable: &Observable,
    cfg: &McmcConfig,
) -> Result<Expectation> {
    if cfg.chains < 2 || cfg.sweeps < 40 {
        return Err(Error::invalid("MCMC needs at least 2 chains and 40 recorded sweeps"));
    }
    if n == 0 {
        return Err(Error::invalid("walk length must be >= 1"));
    }
    let streams = Streams::new(cfg.seed);
    let results = par::map_indexed(cfg.chains, |i| -> Result<ChainResult> {
        let mut rng = streams.stream(i as u64);
        let mut ch = Chain::new(&mut rng, d, n, field, c)?;
        let mut out = ChainResult {
            obs: Vec::with_capacity(cfg.sweeps),
            range: Vec::with_capacity(cfg.sweeps),
            accepted: 0,
            proposed: 0,
        };
        for sweep in 0..cfg.burn_in_sweeps + cfg.sweeps {
            for _ in 0..n {
                let acc = ch.step(&mut rng)?;
                if sweep >= cfg.burn_in_sweeps {
                    out.accepted += acc as u64;
                    out.proposed += 1;
                }
            }
            if sweep >= cfg.burn_in_sweeps {
                let (range, max_sq) = ch.features();
                let x = PathFeatures {
                    n,
                    range_size: range,
                    max_disp_sq: max_sq,
                    endpoint: ch.site(n),
                };
                out.obs.push(observable.value(&x));
                out.range.push(range as f64);
            }
        }
        Ok(out)
    });
    let results: Vec<ChainResult> = results.into_iter().collect::<Result<_>>()?;
    let k = results.len() as f64;
    let obs_stats: Vec<(f64, f64)> = results.iter().map(|r| batch_means(&r.obs)).collect();
    let range_stats: Vec<(f64, f64)> = results.iter().map(|r| batch_means(&r.range)).collect();
    let value = obs_stats.iter().map(|s| s.0).sum::<f64>() / k;
    let std_err = (obs_stats.iter().map(|s| s.1 * s.1).sum::<f64>()).sqrt() / k;
    let range_mean = range_stats.iter().map(|s| s.0).sum::<f64>() / k;
    let range_disagreement = range_stats.iter().map(|s| (s.0 - range_mean).abs()).fold(0.0, f64::max);
    let range_pooled_sigma = (range_stats.iter().map(|s| s.1 * s.1).sum::<f64>() / k).sqrt();
    let accepted: u64 = results.iter().map(|r| r.accepted).sum();
    let proposed: u64 = results.iter().map(|r| r.proposed).sum();
    Ok(Expectation {
        value,
        std_err,
        method: "mcmc",
        diagnostics: Some(McmcDiagnostics {
            chain_means: obs_stats.iter().map(|s| s.0).collect(),
            chain_range_means: range_stats.iter().map(|s| s.0).collect(),
            range_disagreement,
            range_pooled_sigma,
            acceptance_rate: accepted as f64 / proposed.max(1) as f64,
            converged: range_disagreement <= 2.0 * range_pooled_sigma,
        }),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::walk::enumerate::{enumerate_paths, leaf_count, Leaf, SiteData, SumVisitor};

    #[test]
    fn normalization_and_free_walk() {
        let f = DisorderField::new(1, 1.5, 0.7).unwrap();
        let p = ModelParams::new(2, 1.5, 0.7, 0.5, 0.5, 0.5, 0.5);
        let one = polymer_expectation(&f, &p, 8, &Observable::One, ExpectationMethod::Exact).unwrap();
        assert!((one.value - 1.0).abs() < 1e-13);
        let free = ModelParams::new(2, 1.5, 0.7, 0.0, 0.5, 0.0, 0.5);
        let e = polymer_expectation(&f, &free, 8, &Observable::RangeSize, ExpectationMethod::Exact).unwrap();
        let w = leaf_count(8, 2).recip();
        let direct = enumerate_paths(8, 2, 1e9, &SiteData::default(), || SumVisitor {
            f: move |l: &Leaf<'_>| w * l.range_size as f64,
            total: 0.0,
        })
        .unwrap()
        .total;
        assert!((e.value - direct).abs() < 1e-12);
    }

    #[test]
    fn strong_penalty_pins_two_sites() {
        let f = DisorderField::new(2, 1.5, 0.7).unwrap();
        let p = ModelParams::new(2, 1.5, 0.7, 1.0, 5.0, 1.0, -3.0);
        let e = polymer_expectation(&f, &p, 10, &Observable::Indicator(Event::RangeEq(2)), ExpectationMethod::Exact).unwrap();
        assert!(e.value >= 0.99);
    }

    #[test]
    fn chain_bookkeeping_matches_recomputation() {
        let f = DisorderField::new(3, 1.5, 0.7).unwrap();
        let mut rng = crate::rng::rng_from_seed(5);
        let mut ch = Chain::new(&mut rng, 3, 40, &f, Coupling::new(0.3, 0.1)).unwrap();
        for _ in 0..5000 {
            ch.step(&mut rng).unwrap();
            let p = crate::walk::PathSample::from_steps(3, ch.steps.clone(), 0.0).unwrap();
            assert_eq!(p.range_size as u64, ch.range);
            let omega: f64 = p.sites.iter().map(|x| f.omega_at(x)).sum();
            assert!((omega - ch.omega).abs() < 1e-8 * omega.abs().max(1.0));
            assert_eq!(ch.site(40), &p.endpoint[..]);
        }
    }

    #[test]
    fn mcmc_matches_enumeration() {
        let f = DisorderField::new(4, 1.5, 0.7).unwrap();
        let p = ModelParams::new(2, 1.5, 0.7, 0.5, 0.5, 0.5, 0.0);
        let exact = polymer_expectation(&f, &p, 10, &Observable::RangeSize, ExpectationMethod::Exact).unwrap();
        let cfg = McmcConfig {
            chains: 4,
            burn_in_sweeps: 500,
            sweeps: 20_000,
            seed: 11,
        };
        let m = polymer_expectation(&f, &p, 10, &Observable::RangeSize, ExpectationMethod::Mcmc(cfg)).unwrap();
        assert!((m.value - exact.value).abs() < 4.0 * m.std_err, "{} vs {} ± {}", m.value, exact.value, m.std_err);
        assert!(m.diagnostics.unwrap().acceptance_rate > 0.05);
    }
}
