//! Run a configured experiment into a directory of CSV/JSON outputs plus a
//! manifest that pins everything needed to reproduce them.

use super::config::{Estimator, ExperimentConfig, ExperimentKind};
use super::scenario::{field_seed, scenario_r4, scenario_r5, scenario_r6, R4Config, R5Config, R6Config};
use crate::environment::DisorderField;
use crate::error::{Error, Result};
use crate::params::{classify_region, ModelParams, Region, RegionReport};
use crate::partition::{partition_exact, partition_mc, PartitionEstimate};
use crate::rng::Streams;
use serde::Serialize;
use sha2::{Digest, Sha256};
use std::path::{Path, PathBuf};
use std::time::Instant;

pub const CODE_VERSION: &str = concat!(env!("CARGO_PKG_NAME"), " ", env!("CARGO_PKG_VERSION"));

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OutputFile {
    pub path: String,
    pub sha256: String,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ExperimentManifest {
    pub config: ExperimentConfig,
    pub seeds: Vec<u64>,
    pub code_version: String,
    pub outputs: Vec<OutputFile>,
    pub wall_time: f64,
}

/// One row of the long-format results table.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ResultRow {
    pub n: u64,
    pub seed: u64,
    pub statistic: String,
    pub value: f64,
}

fn row(n: impl TryInto<u64>, seed: u64, statistic: &str, value: f64) -> ResultRow {
    ResultRow {
        n: n.try_into().unwrap_or(u64::MAX),
        seed,
        statistic: statistic.to_string(),
        value,
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PhaseCell {
    pub zeta: f64,
    pub gamma: f64,
    pub region: Region,
    pub xi: Option<f64>,
    pub theorem_tag: Option<String>,
}

/// Classify the centers of a `grid × grid` lattice of cells covering the
/// given `(ζ, γ)` window.
pub fn phase_scan(d: usize, alpha: f64, zeta_range: (f64, f64), gamma_range: (f64, f64), grid: usize) -> Result<Vec<PhaseCell>> {
    if grid == 0 {
        return Err(Error::invalid("phase-scan grid must be positive"));
    }
    let center = |(lo, hi): (f64, f64), i: usize| lo + (hi - lo) * (i as f64 + 0.5) / grid as f64;
    let mut out = Vec::with_capacity(grid * grid);
    for gi in 0..grid {
        for zi in 0..grid {
            let (zeta, gamma) = (center(zeta_range, zi), center(gamma_range, gi));
            let rep = classify_region(&ModelParams::phase_point(d, alpha, zeta, gamma), false)?;
            out.push(PhaseCell {
                zeta,
                gamma,
                region: rep.region,
                xi: rep.xi,
                theorem_tag: rep.applicable_theorem.map(|t| t.to_string()),
            });
        }
    }
    Ok(out)
}

pub fn phase_scan_csv(cells: &[PhaseCell]) -> Result<Vec<u8>> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(["zeta", "gamma", "region", "xi", "theorem_tag"]).map_err(csv_err)?;
    for c in cells {
        w.write_record([
            c.zeta.to_string(),
            c.gamma.to_string(),
            c.region.to_string(),
            c.xi.map(|x| x.to_string()).unwrap_or_default(),
            c.theorem_tag.clone().unwrap_or_default(),
        ])
        .map_err(csv_err)?;
    }
    w.into_inner().map_err(|e| Error::Io(e.to_string()))
}

pub fn results_csv(rows: &[ResultRow]) -> Result<Vec<u8>> {
    let mut w = csv::Writer::from_writer(Vec::new());
    for r in rows {
        w.serialize(r).map_err(csv_err)?;
    }
    w.into_inner().map_err(|e| Error::Io(e.to_string()))
}

fn csv_err(e: csv::Error) -> Error {
    Error::Io(e.to_string())
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PartitionRow {
    pub n: usize,
    pub seed: u64,
    #[serde(flatten)]
    pub estimate: PartitionEstimate,
    /// Standard error of `log Z`.
    pub log_z_err: f64,
    /// `N^{−ρ} log Z_N` on the region's own scale, when it has one.
    pub scaled: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PartitionReport {
    pub region: RegionReport,
    pub rows: Vec<PartitionRow>,
}

/// `log Z_N` over the N grid and disorder seeds.
pub fn partition_sweep(
    params: &ModelParams,
    n_grid: &[usize],
    estimator: Estimator,
    samples: u64,
    seeds: u64,
    seed: u64,
) -> Result<PartitionReport> {
    params.validate_numeric()?;
    let region = classify_region(params, false)?;
    let mut rows = Vec::new();
    for s in 0..seeds {
        let fs = field_seed(seed, s);
        let field = DisorderField::new(fs, params.alpha, params.p)?;
        for &n in n_grid {
            let z = match estimator {
                Estimator::Exact => partition_exact(&field, params, n, None)?,
                Estimator::Mc => partition_mc(&field, params, n, samples, &Streams::new(fs).child(n as u64), None)?,
            };
            rows.push(PartitionRow {
                n,
                seed: fs,
                estimate: z,
                log_z_err: z.log_scale_err(),
                scaled: region.logz_scale_exponent.map(|r| z.log_value / (n as f64).powf(r)),
            });
        }
    }
    Ok(PartitionReport { region, rows })
}

fn digest(bytes: &[u8]) -> String {
    format!("{:x}", Sha256::digest(bytes))
}

fn write(dir: &Path, name: &str, bytes: &[u8], outputs: &mut Vec<OutputFile>) -> Result<()> {
    std::fs::write(dir.join(name), bytes).map_err(|e| Error::Io(format!("{}: {e}", dir.join(name).display())))?;
    outputs.push(OutputFile {
        path: name.to_string(),
        sha256: digest(bytes),
    });
    Ok(())
}

fn to_json<T: Serialize>(value: &T) -> Result<Vec<u8>> {
    let mut v = serde_json::to_vec_pretty(value).map_err(|e| Error::Io(e.to_string()))?;
    v.push(b'\n');
    Ok(v)
}

/// Read, validate and execute the config at `path`.
pub fn run_experiment(path: &Path) -> Result<ExperimentManifest> {
    run_config(&ExperimentConfig::from_path(path)?)
}

pub fn run_config(cfg: &ExperimentConfig) -> Result<ExperimentManifest> {
    cfg.check_budgets()?;
    let start = Instant::now();
    let m = &cfg.method;
    let p = cfg.model;
    let dir: PathBuf = cfg.output_dir.clone();
    std::fs::create_dir_all(&dir).map_err(|e| Error::Io(format!("{}: {e}", dir.display())))?;
    let mut outputs = Vec::new();
    let mut rows = Vec::new();
    let mut seeds = vec![m.seed];
    let field_seeds = || (0..m.seeds).map(|s| field_seed(m.seed, s)).collect::<Vec<_>>();
    let summary = match m.kind {
        ExperimentKind::PhaseScan => {
            let cells = phase_scan(p.d, p.alpha, m.zeta_range, m.gamma_range, m.grid)?;
            write(&dir, "phase_scan.csv", &phase_scan_csv(&cells)?, &mut outputs)?;
            let mut counts = std::collections::BTreeMap::new();
            for c in &cells {
                *counts.entry(c.region.to_string()).or_insert(0u64) += 1;
            }
            to_json(&counts)?
        }
        ExperimentKind::Partition => {
            let rep = partition_sweep(&p, &m.n_grid, m.estimator, m.samples, m.seeds, m.seed)?;
            for r in &rep.rows {
                rows.push(row(r.n, r.seed, "log_z", r.estimate.log_value));
                rows.push(row(r.n, r.seed, "log_z_err", r.log_z_err));
                if let Some(s) = r.scaled {
                    rows.push(row(r.n, r.seed, "scaled_log_z", s));
                }
            }
            seeds.extend(field_seeds());
            to_json(&rep)?
        }
        ExperimentKind::ScenarioR4 => {
            let (exact_n, mc_n) = match m.estimator {
                Estimator::Exact => (m.n_grid.clone(), Vec::new()),
                Estimator::Mc => (Vec::new(), m.n_grid.clone()),
            };
            let rep = scenario_r4(&R4Config {
                params: p,
                exact_n,
                mc_n,
                mc_samples: m.samples,
                seeds: m.seeds,
                ldp_n: m.ldp_n.clone(),
                ldp_samples: m.ldp_samples.clone(),
                delta: m.delta,
                seed: m.seed,
            })?;
            for r in &rep.logz {
                rows.push(row(r.n, r.seed, "log_z", r.log_z));
                rows.push(row(r.n, r.seed, "N^(zeta-1) log_z", r.scaled));
            }
            for &(n, s, g) in &rep.range_gap {
                rows.push(row(n, s, "range_density_gap", g));
            }
            for l in &rep.ldp {
                rows.push(row(l.n, m.seed, "ldp_frequency", l.frequency));
            }
            seeds.extend(field_seeds());
            to_json(&rep)?
        }
        ExperimentKind::ScenarioR5 => {
            let rep = scenario_r5(&R5Config {
                params: p,
                n_grid: m.n_grid.clone(),
                n_per_stratum: m.samples,
                radius_factor: m.radius_factor,
                enum_n: m.enum_n,
                seeds: m.seeds,
                seed: m.seed,
            })?;
            for r in &rep.homogeneous {
                rows.push(row(r.n, r.seed, "neg_log_z_hom", -r.log_z));
                rows.push(row(r.n, r.seed, "log_z_hom_err", r.log_z_err));
                rows.push(row(r.n, r.seed, "-N^(2xi-1) log_z_hom", r.scaled));
            }
            for g in &rep.gaps {
                rows.push(row(m.enum_n, g.seed, "log_z", g.log_z));
                rows.push(row(m.enum_n, g.seed, "log_z_hom", g.log_z_hom));
                rows.push(row(m.enum_n, g.seed, "rel_gap", g.rel_gap));
            }
            seeds.extend(field_seeds());
            to_json(&rep)?
        }
        ExperimentKind::ScenarioR6 => {
            let n = m.n_grid[0];
            let rep = scenario_r6(&R6Config {
                params: p,
                n,
                seeds: m.seeds,
                seed: m.seed,
            })?;
            for r in &rep.rows {
                rows.push(row(n, r.seed, "N^zeta log_z", r.scaled_log_z));
                rows.push(row(n, r.seed, "N^zeta log_z_two_site", r.scaled_log_z_two));
                rows.push(row(n, r.seed, "p_range_two", r.p_two));
                rows.push(row(n, r.seed, "z_ratio_range_ge_3", r.ratio_three));
            }
            seeds.extend(field_seeds());
            to_json(&rep)?
        }
    };
    if m.kind != ExperimentKind::PhaseScan {
        write(&dir, "results.csv", &results_csv(&rows)?, &mut outputs)?;
    }
    write(&dir, "summary.json", &summary, &mut outputs)?;
    let manifest = ExperimentManifest {
        config: cfg.clone(),
        seeds,
        code_version: CODE_VERSION.to_string(),
        outputs,
        wall_time: start.elapsed().as_secs_f64(),
    };
    std::fs::write(dir.join("manifest.json"), to_json(&manifest)?)?;
    Ok(manifest)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::params::Slopes;

    fn config(dir: &Path, body: &str) -> ExperimentConfig {
        let mut cfg = ExperimentConfig::parse(&format!("{body}\n[output]\ndir = \"unused\"\n")).unwrap();
        cfg.output_dir = dir.to_path_buf();
        cfg
    }

    const MC: &str = r#"
[model]
d = 2
alpha = 1.5
p = 0.7
beta_hat = 0.5
gamma = 0.5
h_hat = 0.5
zeta = 0.5
[method]
kind = "partition"
estimator = "mc"
n_grid = [6, 10]
samples = 3000
seeds = 2
seed = 4
"#;

    #[test]
    fn reruns_are_bit_identical() {
        let tmp = tempfile::tempdir().unwrap();
        let a = run_config(&config(&tmp.path().join("a"), MC)).unwrap();
        let b = run_config(&config(&tmp.path().join("b"), MC)).unwrap();
        assert_eq!(a.outputs, b.outputs);
        assert_eq!(a.seeds, b.seeds);
        assert_eq!(a.seeds.len(), 3);
        let csv = std::fs::read_to_string(tmp.path().join("a/results.csv")).unwrap();
        assert!(csv.starts_with("n,seed,statistic,value\n"));
        let per = if classify_region(&a.config.model, false).unwrap().logz_scale_exponent.is_some() { 3 } else { 2 };
        assert_eq!(csv.lines().count(), 1 + 2 * 2 * per);
        let man: serde_json::Value =
            serde_json::from_slice(&std::fs::read(tmp.path().join("a/manifest.json")).unwrap()).unwrap();
        assert_eq!(man["config"]["model"]["alpha"], 1.5);
        assert_eq!(man["code_version"], CODE_VERSION);
    }

    #[test]
    fn worker_count_does_not_change_outputs() {
        let tmp = tempfile::tempdir().unwrap();
        let a = run_config(&config(&tmp.path().join("a"), MC)).unwrap();
        let b = crate::par::sequential(|| run_config(&config(&tmp.path().join("b"), MC))).unwrap();
        assert_eq!(a.outputs, b.outputs);
    }

    #[test]
    fn scenario_r6_run_writes_all_statistics() {
        let tmp = tempfile::tempdir().unwrap();
        let body = MC
            .replace("gamma = 0.5", "gamma = 5.0")
            .replace("zeta = 0.5", "zeta = -3.0")
            .replace("kind = \"partition\"", "kind = \"scenario-r6\"")
            .replace("n_grid = [6, 10]", "n = 7");
        let man = run_config(&config(tmp.path(), &body)).unwrap();
        let names: Vec<&str> = man.outputs.iter().map(|o| o.path.as_str()).collect();
        assert_eq!(names, ["results.csv", "summary.json"]);
        let csv = std::fs::read_to_string(tmp.path().join("results.csv")).unwrap();
        assert_eq!(csv.lines().count(), 1 + 2 * 4);
    }

    #[test]
    fn mismatched_scenario_is_refused() {
        let tmp = tempfile::tempdir().unwrap();
        let body = MC.replace("kind = \"partition\"", "kind = \"scenario-r6\"").replace("n_grid = [6, 10]", "n = 6");
        let err = run_config(&config(tmp.path(), &body)).unwrap_err();
        assert!(matches!(err, Error::RegionMismatch { .. }));
        assert_eq!(err.exit_code(), 2);
    }

    #[test]
    fn phase_scan_adjacency() {
        for (d, alpha) in [(2usize, 1.5), (3, 2.0), (3, 1.25)] {
            let cells = phase_scan(d, alpha, (-3.0, 3.0), (-1.0, 4.0), 50).unwrap();
            assert_eq!(cells.len(), 2500);
            let a = Slopes::new(d, alpha).a;
            let mut seen = std::collections::HashSet::new();
            for c in &cells {
                seen.insert(c.region);
                match c.region {
                    Region::R3 => assert!(c.gamma < c.zeta.min(0.0) + a, "{c:?}"),
                    Region::R6 => assert!(c.zeta < -1.0, "{c:?}"),
                    Region::Boundary => {}
                    _ => assert!(c.gamma > c.zeta.min(0.0) + a - 1e-12 || c.zeta < -1.0, "{c:?}"),
                }
            }
            // R4 needs 2/d < ζ < 1, which is empty for d = 2.
            let expected: &[Region] = if d == 2 {
                &[Region::R1, Region::R3, Region::R5, Region::R6]
            } else {
                &[Region::R1, Region::R3, Region::R4, Region::R5, Region::R6]
            };
            for r in expected {
                assert!(seen.contains(r), "d={d} α={alpha}: no {r}");
            }
        }
    }

    #[test]
    fn phase_scan_run_is_deterministic() {
        let tmp = tempfile::tempdir().unwrap();
        let body = "[model]\nd = 3\nalpha = 2.0\n[method]\nkind = \"phase-scan\"\n";
        let a = run_config(&config(&tmp.path().join("a"), body)).unwrap();
        let b = run_config(&config(&tmp.path().join("b"), body)).unwrap();
        assert_eq!(a.outputs, b.outputs);
        let csv = std::fs::read_to_string(tmp.path().join("a/phase_scan.csv")).unwrap();
        assert!(csv.starts_with("zeta,gamma,region,xi,theorem_tag\n"));
        assert_eq!(csv.lines().count(), 2501);
    }
}
