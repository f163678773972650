//! TOML experiment configuration with `[model]`, `[method]`, `[budgets]`
//! and `[output]` sections.
//!
//! Validation collects every bad field before failing, so one run of the
//! checker reports all of them.

use crate::error::{Error, Result};
use crate::params::ModelParams;
use serde::Serialize;
use std::path::{Path, PathBuf};
use toml::{Table, Value};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum ExperimentKind {
    PhaseScan,
    Partition,
    ScenarioR4,
    ScenarioR5,
    ScenarioR6,
}

impl ExperimentKind {
    fn parse(s: &str) -> Option<Self> {
        Some(match s {
            "phase-scan" => Self::PhaseScan,
            "partition" | "simulate" => Self::Partition,
            "scenario-r4" => Self::ScenarioR4,
            "scenario-r5" => Self::ScenarioR5,
            "scenario-r6" => Self::ScenarioR6,
            _ => return None,
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Estimator {
    Exact,
    Mc,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MethodSpec {
    pub kind: ExperimentKind,
    pub estimator: Estimator,
    pub n_grid: Vec<usize>,
    pub seeds: u64,
    pub seed: u64,
    pub samples: u64,
    /// Phase-scan resolution per axis.
    pub grid: usize,
    pub zeta_range: (f64, f64),
    pub gamma_range: (f64, f64),
    pub delta: f64,
    pub ldp_n: Vec<u64>,
    pub ldp_samples: Vec<u64>,
    pub radius_factor: f64,
    pub enum_n: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Budgets {
    /// Largest `(2d)^N` an exact enumeration may visit.
    pub max_paths: f64,
    /// Largest total number of sampled walks.
    pub max_samples: f64,
}

impl Default for Budgets {
    fn default() -> Self {
        Budgets {
            max_paths: 1e8,
            max_samples: 1e9,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ExperimentConfig {
    pub model: ModelParams,
    pub method: MethodSpec,
    pub budgets: Budgets,
    pub output_dir: PathBuf,
}

struct Fields<'a> {
    table: Option<&'a Table>,
    section: &'static str,
    errors: &'a mut Vec<String>,
}

impl Fields<'_> {
    fn get(&mut self, key: &str) -> Option<&Value> {
        self.table.and_then(|t| t.get(key))
    }

    fn missing(&mut self, key: &str) {
        self.errors.push(format!("[{}] missing field \"{key}\"", self.section));
    }

    fn bad(&mut self, key: &str, why: &str) {
        self.errors.push(format!("[{}] field \"{key}\": {why}", self.section));
    }

    fn float(&mut self, key: &str, default: Option<f64>) -> f64 {
        match self.get(key).cloned() {
            Some(Value::Float(x)) => x,
            Some(Value::Integer(i)) => i as f64,
            Some(_) => {
                self.bad(key, "expected a number");
                f64::NAN
            }
            None => default.unwrap_or_else(|| {
                self.missing(key);
                f64::NAN
            }),
        }
    }

    fn uint(&mut self, key: &str, default: Option<u64>) -> u64 {
        match self.get(key).cloned() {
            Some(Value::Integer(i)) if i >= 0 => i as u64,
            Some(_) => {
                self.bad(key, "expected a nonnegative integer");
                0
            }
            None => default.unwrap_or_else(|| {
                self.missing(key);
                0
            }),
        }
    }

    fn uints(&mut self, key: &str, default: Option<Vec<u64>>) -> Vec<u64> {
        match self.get(key).cloned() {
            Some(Value::Array(a)) => {
                let v: Option<Vec<u64>> = a
                    .iter()
                    .map(|x| x.as_integer().and_then(|i| u64::try_from(i).ok()))
                    .collect();
                v.unwrap_or_else(|| {
                    self.bad(key, "expected an array of nonnegative integers");
                    Vec::new()
                })
            }
            Some(_) => {
                self.bad(key, "expected an array");
                Vec::new()
            }
            None => default.unwrap_or_else(|| {
                self.missing(key);
                Vec::new()
            }),
        }
    }

    fn range(&mut self, key: &str, default: (f64, f64)) -> (f64, f64) {
        match self.get(key).cloned() {
            Some(Value::Array(a)) if a.len() == 2 => {
                let f = |v: &Value| v.as_float().or_else(|| v.as_integer().map(|i| i as f64));
                match (f(&a[0]), f(&a[1])) {
                    (Some(lo), Some(hi)) if lo < hi => (lo, hi),
                    _ => {
                        self.bad(key, "expected [lo, hi] with lo < hi");
                        default
                    }
                }
            }
            Some(_) => {
                self.bad(key, "expected [lo, hi]");
                default
            }
            None => default,
        }
    }

    fn string(&mut self, key: &str, default: Option<&str>) -> Option<String> {
        match self.get(key).cloned() {
            Some(Value::String(s)) => Some(s),
            Some(_) => {
                self.bad(key, "expected a string");
                None
            }
            None => match default {
                Some(d) => Some(d.to_string()),
                None => {
                    self.missing(key);
                    None
                }
            },
        }
    }
}

const SECTIONS: [&str; 4] = ["model", "method", "budgets", "output"];

impl ExperimentConfig {
    pub fn from_path(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
        let mut cfg = Self::parse(&text)?;
        if cfg.output_dir.is_relative() {
            if let Some(parent) = path.parent() {
                cfg.output_dir = parent.join(&cfg.output_dir);
            }
        }
        Ok(cfg)
    }

    pub fn parse(text: &str) -> Result<Self> {
        let root: Table = text.parse().map_err(|e: toml::de::Error| Error::Config(vec![e.message().to_string()]))?;
        let mut errors = Vec::new();
        for k in root.keys() {
            if !SECTIONS.contains(&k.as_str()) {
                errors.push(format!("unknown section [{k}]"));
            }
        }
        let section = |name: &str, errors: &mut Vec<String>| match root.get(name) {
            Some(Value::Table(t)) => Some(t),
            Some(_) => {
                errors.push(format!("[{name}] must be a table"));
                None
            }
            None => None,
        };
        let (m_tab, me_tab, b_tab, o_tab) = (
            section("model", &mut errors),
            section("method", &mut errors),
            section("budgets", &mut errors),
            section("output", &mut errors),
        );

        let mut me = Fields {
            table: me_tab,
            section: "method",
            errors: &mut errors,
        };
        let kind_name = me.string("kind", None);
        let kind = kind_name.as_deref().and_then(|k| {
            let parsed = ExperimentKind::parse(k);
            if parsed.is_none() {
                me.bad("kind", "expected one of phase-scan, partition, scenario-r4, scenario-r5, scenario-r6");
            }
            parsed
        });
        let scan = kind == Some(ExperimentKind::PhaseScan);
        let estimator = match me.string("estimator", Some("exact")).as_deref() {
            Some("exact") | None => Estimator::Exact,
            Some("mc") => Estimator::Mc,
            Some(_) => {
                me.bad("estimator", "expected \"exact\" or \"mc\"");
                Estimator::Exact
            }
        };
        let needs_grid = matches!(kind, Some(ExperimentKind::Partition | ExperimentKind::ScenarioR5));
        let n_grid: Vec<usize> = me
            .uints("n_grid", (!needs_grid).then(Vec::new))
            .into_iter()
            .map(|n| n as usize)
            .collect();
        let n_single = me.uint("n", Some(0)) as usize;
        let method = MethodSpec {
            kind: kind.unwrap_or(ExperimentKind::Partition),
            estimator,
            n_grid: if n_grid.is_empty() && n_single > 0 { vec![n_single] } else { n_grid },
            seeds: me.uint("seeds", Some(1)),
            seed: me.uint("seed", Some(0)),
            samples: me.uint("samples", Some(10_000)),
            grid: me.uint("grid", Some(50)) as usize,
            zeta_range: me.range("zeta_range", (-3.0, 3.0)),
            gamma_range: me.range("gamma_range", (-1.0, 4.0)),
            delta: me.float("delta", Some(0.1)),
            ldp_n: me.uints("ldp_n", Some(Vec::new())),
            ldp_samples: me.uints("ldp_samples", Some(Vec::new())),
            radius_factor: me.float("radius_factor", Some(4.0)),
            enum_n: me.uint("enum_n", Some(10)) as usize,
        };
        if method.seeds == 0 {
            me.bad("seeds", "must be at least 1");
        }
        if scan && method.grid < 2 {
            me.bad("grid", "must be at least 2");
        }
        if method.kind == ExperimentKind::ScenarioR6 && method.n_grid.len() != 1 {
            me.bad("n", "scenario-r6 takes a single N");
        }
        if method.n_grid.contains(&0) {
            me.bad("n_grid", "N must be positive");
        }

        let mut mo = Fields {
            table: m_tab,
            section: "model",
            errors: &mut errors,
        };
        if m_tab.is_none() {
            mo.errors.push("missing section [model]".into());
        }
        let d = mo.uint("d", None) as usize;
        let alpha = mo.float("alpha", None);
        let (p_default, amp_default, exp_default) = if scan { (Some(0.5), Some(1.0), Some(0.0)) } else { (None, None, None) };
        let model = ModelParams::new(
            d,
            alpha,
            mo.float("p", p_default),
            mo.float("beta_hat", amp_default),
            mo.float("gamma", exp_default),
            mo.float("h_hat", amp_default),
            mo.float("zeta", exp_default),
        );
        if !model.alpha.is_nan() && d >= 2 {
            if let Err(e) = model.validate_numeric() {
                mo.errors.push(format!("[model] {e}"));
            }
        }

        let mut bu = Fields {
            table: b_tab,
            section: "budgets",
            errors: &mut errors,
        };
        let def = Budgets::default();
        let budgets = Budgets {
            max_paths: bu.float("max_paths", Some(def.max_paths)),
            max_samples: bu.float("max_samples", Some(def.max_samples)),
        };

        let mut ou = Fields {
            table: o_tab,
            section: "output",
            errors: &mut errors,
        };
        let output_dir = PathBuf::from(ou.string("dir", None).unwrap_or_default());

        if errors.is_empty() {
            Ok(ExperimentConfig {
                model,
                method,
                budgets,
                output_dir,
            })
        } else {
            Err(Error::Config(errors))
        }
    }

    /// Refuse work beyond the configured budgets before starting it.
    pub fn check_budgets(&self) -> Result<()> {
        let m = &self.method;
        let d = self.model.d as f64;
        let enum_n = match m.kind {
            ExperimentKind::Partition if m.estimator == Estimator::Exact => m.n_grid.iter().copied().max(),
            ExperimentKind::ScenarioR4 => m.n_grid.iter().copied().max(),
            ExperimentKind::ScenarioR5 => Some(m.enum_n),
            ExperimentKind::ScenarioR6 => m.n_grid.first().copied(),
            _ => None,
        };
        if let Some(n) = enum_n {
            let paths = (2.0 * d).powi(n as i32);
            if paths > self.budgets.max_paths {
                return Err(Error::Budget {
                    what: "exact enumeration paths",
                    needed: paths,
                    limit: self.budgets.max_paths,
                });
            }
        }
        let seeds = m.seeds as f64;
        let samples = match m.kind {
            ExperimentKind::Partition if m.estimator == Estimator::Mc => seeds * m.samples as f64 * m.n_grid.len() as f64,
            ExperimentKind::ScenarioR4 => m.ldp_samples.iter().map(|&s| s as f64).sum(),
            ExperimentKind::ScenarioR5 => m.samples as f64 * m.n_grid.len() as f64,
            _ => 0.0,
        };
        if samples > self.budgets.max_samples {
            return Err(Error::Budget {
                what: "sampled walks",
                needed: samples,
                limit: self.budgets.max_samples,
            });
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const R6: &str = r#"
[model]
d = 2
alpha = 1.5
p = 0.7
beta_hat = 1.0
gamma = 5.0
h_hat = 1.0
zeta = -3.0

[method]
kind = "scenario-r6"
n = 8
seeds = 3
seed = 7

[output]
dir = "out"
"#;

    #[test]
    fn parses_a_scenario() {
        let cfg = ExperimentConfig::parse(R6).unwrap();
        assert_eq!(cfg.method.kind, ExperimentKind::ScenarioR6);
        assert_eq!(cfg.method.n_grid, vec![8]);
        assert_eq!(cfg.model.zeta, -3.0);
        assert_eq!(cfg.budgets, Budgets::default());
        cfg.check_budgets().unwrap();
    }

    #[test]
    fn missing_alpha_is_named() {
        let text = R6.replace("alpha = 1.5\n", "");
        let err = ExperimentConfig::parse(&text).unwrap_err();
        assert!(err.to_string().contains("\"alpha\""), "{err}");
        assert_eq!(err.exit_code(), 2);
    }

    #[test]
    fn every_bad_field_is_listed() {
        let text = R6
            .replace("alpha = 1.5\n", "")
            .replace("gamma = 5.0", "gamma = \"five\"")
            .replace("seeds = 3", "seeds = 0")
            .replace("dir = \"out\"", "");
        let Error::Config(list) = ExperimentConfig::parse(&text).unwrap_err() else {
            panic!("expected a config error");
        };
        assert_eq!(list.len(), 4, "{list:?}");
        for key in ["alpha", "gamma", "seeds", "dir"] {
            assert!(list.iter().any(|m| m.contains(key)), "{key} in {list:?}");
        }
    }

    #[test]
    fn budget_refusal() {
        let text = R6.replace("n = 8", "n = 14") + "\n[budgets]\nmax_paths = 1e6\n";
        let cfg = ExperimentConfig::parse(&text).unwrap();
        let err = cfg.check_budgets().unwrap_err();
        assert_eq!(err.exit_code(), 3);
    }

    #[test]
    fn phase_scan_needs_only_the_law() {
        let text = "[model]\nd = 3\nalpha = 2.0\n[method]\nkind = \"phase-scan\"\n[output]\ndir = \"x\"\n";
        let cfg = ExperimentConfig::parse(text).unwrap();
        assert_eq!(cfg.method.grid, 50);
        assert_eq!(cfg.model.d, 3);
    }
}
