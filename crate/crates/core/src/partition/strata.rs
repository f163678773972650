//! Homogeneous partition function `E[e^{−h|R_N|}]` stratified by the
//! maximal displacement.
//!
//! With radii `R_1 < … < R_K`, stratum `i` is `{R_{i−1} < M_N ≤ R_i}`
//! (`R_0 = 0`). Its probability comes exactly from survival tables, and
//! the conditional mean of the weight is estimated from walks drawn
//! exactly from the law conditioned on the stratum.

use super::{Method, PartitionEstimate};
use crate::error::{Error, Result};
use crate::logspace::{LogMoments, LogSum};
use crate::par;
use crate::rng::Streams;
use crate::walk::confined::{ConfinedSampler, ConfinedScratch};

/// Samples per generator stream.
const CHUNK: u64 = 1024;

/// Geometric radii with ratio 1.5 from `⌈N^{1/(d+2)}⌉`, ending at `r_max`.
pub fn default_radii(n: usize, d: usize, r_max: f64) -> Vec<f64> {
    let mut r = (n as f64).powf(1.0 / (d as f64 + 2.0)).ceil().max(1.0);
    let mut out = Vec::new();
    while r < r_max {
        out.push(r);
        r *= 1.5;
    }
    out.push(r_max);
    out
}

/// Stratified estimate of `E[e^{−h |R_N|}]` over `{M_N ≤ R_K}`; the
/// discarded tail is bounded by `e^{−h⌈R_K⌉}` since `|R_N| ≥ ⌈M_N⌉ + 1`.
pub fn partition_homogeneous_strata(
    n: usize,
    d: usize,
    h: f64,
    radii: &[f64],
    n_per_stratum: u64,
    streams: &Streams,
) -> Result<PartitionEstimate> {
    if radii.is_empty() {
        return Err(Error::invalid("at least one stratum radius is required"));
    }
    if radii.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::invalid("stratum radii must be strictly increasing"));
    }
    if !(h >= 0.0 && h.is_finite()) {
        return Err(Error::invalid(format!("range penalty h = {h} must be finite and >= 0")));
    }
    if n_per_stratum < 2 {
        return Err(Error::invalid("each stratum needs at least 2 samples"));
    }
    let mut total = LogSum::new();
    let mut var = LogSum::new();
    let mut inner = 0.0f64;
    let mut used = 0u64;
    for (i, &r) in radii.iter().enumerate() {
        let sampler = ConfinedSampler::shell(d, n, inner, r)?;
        let log_mass = sampler.log_stay_probability();
        inner = r;
        if log_mass == f64::NEG_INFINITY {
            continue;
        }
        let s = streams.child(i as u64);
        let parts = par::chunks(n_per_stratum, CHUNK);
        let results = par::map_indexed(parts.len(), |c| {
            let (idx, _, len) = parts[c];
            let mut rng = s.stream(idx);
            let mut scratch = ConfinedScratch::default();
            let mut m = LogMoments::new();
            for _ in 0..len {
                let (range, _) = sampler.sample_stats(&mut rng, &mut scratch);
                m.add(-h * range as f64);
            }
            m
        });
        let mut m = LogMoments::new();
        for r in &results {
            m.merge(r);
        }
        total.add(log_mass + m.log_mean());
        var.add(2.0 * (log_mass + m.log_std_err()));
        used += n_per_stratum;
    }
    let r_max = *radii.last().unwrap();
    let truncation_bound = if r_max >= n as f64 { 0.0 } else { (-h * r_max.ceil()).exp() };
    Ok(PartitionEstimate::sampled(
        total.value(),
        0.5 * var.value(),
        used,
        Method::ConfinedStrata,
        truncation_bound,
    ))
}
