//! Scenario presets for the regions with explicit free-energy limits.
//!
//! Each scenario refuses parameters the classifier puts elsewhere and
//! reports `log Z_N` on the scale its limit is stated on.

use super::fit::{fit_exponent, ExponentFit};
use crate::environment::DisorderField;
use crate::error::{Error, Result};
use crate::limits::{c_d_constant, LAMBDA_3};
use crate::params::{classify_region, ModelParams, Region, RegionReport};
use crate::partition::{
    default_radii, log_partition_exact, partition_exact, partition_homogeneous_strata, partition_mc,
    polymer_expectation, two_site_log_partition, Coupling, Event, ExpectationMethod, Observable,
};
use crate::par;
use crate::rng::Streams;
use crate::walk::{walk_stats, RangeSet};
use serde::{Deserialize, Serialize};

fn require_region(params: &ModelParams, expected: Region) -> Result<RegionReport> {
    let rep = classify_region(params, false)?;
    if rep.region != expected {
        return Err(Error::RegionMismatch {
            expected: expected.to_string(),
            found: rep.region.to_string(),
        });
    }
    Ok(rep)
}

/// Disorder seed `i` of a scenario.
pub(crate) fn field_seed(seed: u64, i: u64) -> u64 {
    Streams::new(seed).child(i).seed()
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LogZRow {
    pub n: usize,
    pub seed: u64,
    pub method: String,
    pub log_z: f64,
    /// Standard error of `log Z`.
    pub log_z_err: f64,
    /// `log Z_N / N^ρ` with `ρ` the region's scaling exponent.
    pub scaled: f64,
}

// ---------------------------------------------------------------- R4

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct R4Config {
    pub params: ModelParams,
    pub exact_n: Vec<usize>,
    pub mc_n: Vec<usize>,
    pub mc_samples: u64,
    pub seeds: u64,
    pub ldp_n: Vec<u64>,
    pub ldp_samples: Vec<u64>,
    pub delta: f64,
    pub seed: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LdpRow {
    pub n: u64,
    pub samples: u64,
    pub mean_range: f64,
    /// Frequency of `|R_N| − E|R_N| ≤ −δN`, with `E|R_N|` the sample mean.
    pub frequency: f64,
    pub std_err: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct R4Report {
    pub region: RegionReport,
    /// `−ĥ γ_d`, the limit of `N^{ζ−1} log Z_N`.
    pub target: f64,
    pub gamma_d: f64,
    pub logz: Vec<LogZRow>,
    /// `E_{P_N} | |R_N|/N − γ_d |` per `(N, seed)` by enumeration.
    pub range_gap: Vec<(usize, u64, f64)>,
    pub ldp: Vec<LdpRow>,
    pub ldp_decreasing: bool,
}

pub fn scenario_r4(cfg: &R4Config) -> Result<R4Report> {
    let p = &cfg.params;
    let region = require_region(p, Region::R4)?;
    if p.d != 3 {
        return Err(Error::Unsupported(format!(
            "the cached range density is for d = 3, got d = {}",
            p.d
        )));
    }
    if cfg.ldp_n.len() != cfg.ldp_samples.len() {
        return Err(Error::invalid("ldp_n and ldp_samples must have equal lengths"));
    }
    let gamma_d = LAMBDA_3;
    let rho = region.logz_scale_exponent.expect("interior region");
    let mut logz = Vec::new();
    let mut range_gap = Vec::new();
    for s in 0..cfg.seeds {
        let seed = field_seed(cfg.seed, s);
        let field = DisorderField::new(seed, p.alpha, p.p)?;
        for &n in &cfg.exact_n {
            let z = partition_exact(&field, p, n, None)?;
            logz.push(LogZRow {
                n,
                seed,
                method: "exact".into(),
                log_z: z.log_value,
                log_z_err: 0.0,
                scaled: z.log_value / (n as f64).powf(rho),
            });
            let gap = polymer_expectation(&field, p, n, &Observable::RangeDensityGap(gamma_d), ExpectationMethod::Exact)?;
            range_gap.push((n, seed, gap.value));
        }
        for &n in &cfg.mc_n {
            let z = partition_mc(&field, p, n, cfg.mc_samples, &Streams::new(seed).child(n as u64), None)?;
            logz.push(LogZRow {
                n,
                seed,
                method: "plain_mc".into(),
                log_z: z.log_value,
                log_z_err: z.log_scale_err(),
                scaled: z.log_value / (n as f64).powf(rho),
            });
        }
    }
    let mut ldp = Vec::new();
    for (i, (&n, &samples)) in cfg.ldp_n.iter().zip(&cfg.ldp_samples).enumerate() {
        ldp.push(ldp_row(p.d, n, samples, cfg.delta, &Streams::new(cfg.seed).child(1000 + i as u64))?);
    }
    let ldp_decreasing = ldp.windows(2).all(|w| w[1].frequency <= w[0].frequency);
    Ok(R4Report {
        region,
        target: -p.h_hat * gamma_d,
        gamma_d,
        logz,
        range_gap,
        ldp,
        ldp_decreasing,
    })
}

const LDP_CHUNK: u64 = 64;

fn ldp_row(d: usize, n: u64, samples: u64, delta: f64, streams: &Streams) -> Result<LdpRow> {
    if samples < 2 {
        return Err(Error::invalid("the deviation frequency needs at least 2 samples"));
    }
    let chunks = par::chunks(samples, LDP_CHUNK);
    let parts = par::map_indexed(chunks.len(), |c| -> Result<Vec<u64>> {
        let (ci, _, len) = chunks[c];
        let mut rng = streams.stream(ci);
        let mut set = RangeSet::new(d);
        (0..len).map(|_| Ok(walk_stats(&mut rng, n, d, &mut set)?.range_size)).collect()
    });
    let mut ranges = Vec::with_capacity(samples as usize);
    for p in parts {
        ranges.extend(p?);
    }
    let mean = ranges.iter().map(|&r| r as f64).sum::<f64>() / samples as f64;
    let cut = mean - delta * n as f64;
    let hits = ranges.iter().filter(|&&r| r as f64 <= cut).count() as f64;
    let freq = hits / samples as f64;
    Ok(LdpRow {
        n,
        samples,
        mean_range: mean,
        frequency: freq,
        std_err: (freq * (1.0 - freq) / samples as f64).sqrt(),
    })
}

// ---------------------------------------------------------------- R6

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct R6Config {
    pub params: ModelParams,
    pub n: usize,
    pub seeds: u64,
    pub seed: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct R6Row {
    pub seed: u64,
    /// `N^ζ log Z_N`.
    pub scaled_log_z: f64,
    /// `N^ζ log Z_N(|R_N| = 2)` from the two-site closed form.
    pub scaled_log_z_two: f64,
    /// `P_N(|R_N| = 2)`.
    pub p_two: f64,
    /// `Z_N(|R_N| ≥ 3) / Z_N`.
    pub ratio_three: f64,
    /// `|N^ζ log Z_N + 2ĥ|`.
    pub gap: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct R6Report {
    pub region: RegionReport,
    /// `−2ĥ`.
    pub target: f64,
    /// Size of the leading finite-`N` correction `N^ζ · N log(2d)`.
    pub entropy_correction: f64,
    /// `e^{−ĥ N^{−ζ}/4}`.
    pub ratio_bound: f64,
    pub rows: Vec<R6Row>,
}

pub fn scenario_r6(cfg: &R6Config) -> Result<R6Report> {
    let p = &cfg.params;
    let region = require_region(p, Region::R6)?;
    let n = cfg.n;
    let nf = n as f64;
    let scale = nf.powf(p.zeta);
    let c = Coupling::at(p, n);
    let rows = (0..cfg.seeds)
        .map(|s| -> Result<R6Row> {
            let seed = field_seed(cfg.seed, s);
            let field = DisorderField::new(seed, p.alpha, p.p)?;
            let log_z = log_partition_exact(&field, p.d, n, &[c], None)?[0];
            let log_three = log_partition_exact(&field, p.d, n, &[c], Some(&Event::RangeAtLeast(3)))?[0];
            let log_two = two_site_log_partition(&field, p.d, n, c);
            let scaled_log_z = scale * log_z;
            Ok(R6Row {
                seed,
                scaled_log_z,
                scaled_log_z_two: scale * log_two,
                p_two: (log_two - log_z).exp(),
                ratio_three: (log_three - log_z).exp(),
                gap: (scaled_log_z + 2.0 * p.h_hat).abs(),
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(R6Report {
        region,
        target: -2.0 * p.h_hat,
        entropy_correction: scale * nf * (2.0 * p.d as f64).ln(),
        ratio_bound: (-0.25 * p.h_hat * nf.powf(-p.zeta)).exp(),
        rows,
    })
}

// ---------------------------------------------------------------- R5

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct R5Config {
    pub params: ModelParams,
    pub n_grid: Vec<usize>,
    pub n_per_stratum: u64,
    /// Outer stratum radius as a multiple of `N^{1/(d+2)}`.
    pub radius_factor: f64,
    pub enum_n: usize,
    pub seeds: u64,
    pub seed: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GapRow {
    pub seed: u64,
    pub log_z: f64,
    pub log_z_hom: f64,
    pub rel_gap: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct R5Report {
    pub region: RegionReport,
    /// `c_d(ĥ)`; `−log Z_N / N^{1−2ξ}` approaches it.
    pub c_d: f64,
    pub homogeneous: Vec<LogZRow>,
    pub fit: ExponentFit,
    pub gaps: Vec<GapRow>,
    pub max_rel_gap: f64,
}

pub fn scenario_r5(cfg: &R5Config) -> Result<R5Report> {
    let p = &cfg.params;
    let region = classify_region(p, false)?;
    if region.region != Region::R5 || region.applicable_theorem.is_none() {
        return Err(Error::RegionMismatch {
            expected: "R5 with a limit theorem".into(),
            found: region.region.to_string(),
        });
    }
    let xi = region.xi.expect("interior region");
    let rho = 1.0 - 2.0 * xi;
    let d = p.d;
    let mut homogeneous = Vec::new();
    for (i, &n) in cfg.n_grid.iter().enumerate() {
        let base = (n as f64).powf(1.0 / (d as f64 + 2.0));
        let r_max = (cfg.radius_factor * base).min(n as f64);
        let z = partition_homogeneous_strata(
            n,
            d,
            p.h_n(n),
            &default_radii(n, d, r_max),
            cfg.n_per_stratum,
            &Streams::new(cfg.seed).child(i as u64),
        )?;
        homogeneous.push(LogZRow {
            n,
            seed: cfg.seed,
            method: "confined_strata".into(),
            log_z: z.log_value,
            log_z_err: z.log_scale_err(),
            scaled: -z.log_value / (n as f64).powf(rho),
        });
    }
    let grid: Vec<f64> = homogeneous.iter().map(|r| r.n as f64).collect();
    let vals: Vec<f64> = homogeneous.iter().map(|r| -r.log_z).collect();
    let errs: Vec<f64> = homogeneous.iter().map(|r| r.log_z_err).collect();
    let fit = fit_exponent(&grid, &vals, Some(&errs), "-log Z_N (homogeneous)")?;
    let n = cfg.enum_n;
    let hom = Coupling::new(0.0, p.h_n(n));
    let dis = Coupling::at(p, n);
    let gaps = (0..cfg.seeds)
        .map(|s| -> Result<GapRow> {
            let seed = field_seed(cfg.seed, s);
            let field = DisorderField::new(seed, p.alpha, p.p)?;
            let v = log_partition_exact(&field, d, n, &[dis, hom], None)?;
            Ok(GapRow {
                seed,
                log_z: v[0],
                log_z_hom: v[1],
                rel_gap: ((v[0] - v[1]) / v[1]).abs(),
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let max_rel_gap = gaps.iter().map(|g| g.rel_gap).fold(0.0, f64::max);
    Ok(R5Report {
        region,
        c_d: c_d_constant(d, p.h_hat)?,
        homogeneous,
        fit,
        gaps,
        max_rel_gap,
    })
}
