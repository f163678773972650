use clap::{Parser, Subcommand, ValueEnum};
use polyrange::environment::DisorderField;
use polyrange::exper::{self, ExperimentConfig, ExperimentKind};
use polyrange::limits::{
    c_d_constant, c_d_from_lambda, estimate_w, estimate_x, gamma_d_estimate, lambda_1, lambda_1_grid, sample_ppp, Atom,
    GreenMethod, WeightedPointProcess,
};
use polyrange::lpp::{check_energy_bound, check_l_tail, check_lemma_g, EnergyConfig, LTailConfig, LemmaGConfig};
use polyrange::rng::{rng_from_seed, Streams};
use polyrange::variational::{solve_t_beta, solve_t_hat_inf, SolveBudget};
use polyrange::{par, Error, Result};
use serde::de::DeserializeOwned;
use serde::Serialize;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

#[derive(Parser)]
#[command(name = "polyrange", version, about = "Range-penalized polymers in heavy-tailed random environments")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Classify a grid of (zeta, gamma) points.
    PhaseScan {
        #[arg(long)]
        d: usize,
        #[arg(long)]
        alpha: f64,
        #[arg(long, num_args = 2, default_values_t = [-3.0, 3.0], allow_negative_numbers = true)]
        zeta_range: Vec<f64>,
        #[arg(long, num_args = 2, default_values_t = [-1.0, 4.0], allow_negative_numbers = true)]
        gamma_range: Vec<f64>,
        #[arg(long, default_value_t = 50)]
        grid: usize,
    },
    /// Dump (x, omega_x) for every x in the ball of radius r.
    EnvDump {
        #[arg(long)]
        seed: u64,
        #[arg(long)]
        alpha: f64,
        #[arg(long)]
        p: f64,
        #[arg(long)]
        r: f64,
        #[arg(long, default_value_t = 2)]
        d: usize,
    },
    /// Evaluate log Z_N over the configured N grid and seeds.
    Simulate {
        #[arg(long)]
        config: PathBuf,
    },
    /// Evaluate one of the limit objects.
    Limits {
        #[arg(long, value_enum)]
        object: LimitObject,
        #[arg(long, default_value_t = 3)]
        d: usize,
        #[arg(long, default_value_t = 1.5)]
        alpha: f64,
        #[arg(long, default_value_t = 0.5)]
        p: f64,
        #[arg(long, default_value_t = 1.0)]
        h_hat: f64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Window half-width for W, ball radius for X.
        #[arg(long, default_value_t = 2.0)]
        size: f64,
        /// Weight cutoff for W.
        #[arg(long, default_value_t = 0.05)]
        w_min: f64,
        #[arg(long, default_value_t = 10_000)]
        horizon: u64,
        #[arg(long, default_value_t = 10_000)]
        samples: u64,
        /// Grid cells per radius for the eigensolver route of c_d.
        #[arg(long, default_value_t = 40)]
        grid: usize,
    },
    /// Solve a variational problem over the atoms of a CSV file.
    Variational {
        #[arg(long, value_enum)]
        object: VarObject,
        /// Rows of `x_1, ..., x_d, w`; a header line is allowed.
        #[arg(long)]
        atoms: PathBuf,
        #[arg(long, default_value_t = 1.0)]
        beta: f64,
        #[arg(long)]
        d: usize,
        #[arg(long, default_value_t = 14)]
        exact_max_atoms: usize,
    },
    /// Run an empirical bound check from a TOML or JSON config.
    VerifyBounds {
        #[arg(long, value_enum)]
        which: Bound,
        #[arg(long)]
        config: PathBuf,
    },
    /// Run an experiment config into its output directory.
    Run {
        #[arg(long)]
        config: PathBuf,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum LimitObject {
    #[value(name = "W")]
    W,
    #[value(name = "X")]
    X,
    #[value(name = "cd")]
    Cd,
    #[value(name = "gamma_d")]
    GammaD,
}

#[derive(Clone, Copy, ValueEnum)]
enum VarObject {
    #[value(name = "Tbeta")]
    TBeta,
    #[value(name = "That")]
    THat,
}

#[derive(Clone, Copy, ValueEnum)]
enum Bound {
    #[value(name = "Ltail")]
    LTail,
    #[value(name = "energy")]
    Energy,
    #[value(name = "lemmaG")]
    LemmaG,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let threads = std::env::var("POLYRANGE_THREADS").ok().and_then(|v| v.parse().ok());
    par::init_threads(threads);
    let stdout = std::io::stdout();
    let mut out = stdout.lock();
    match dispatch(cli.command, &mut out) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}

fn io(e: impl std::fmt::Display) -> Error {
    Error::Io(e.to_string())
}

fn json<T: Serialize>(out: &mut impl Write, value: &T) -> Result<()> {
    serde_json::to_writer_pretty(&mut *out, value).map_err(io)?;
    writeln!(out).map_err(io)
}

fn read_config<T: DeserializeOwned>(path: &Path) -> Result<T> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
    if path.extension().is_some_and(|e| e == "json") {
        serde_json::from_str(&text).map_err(|e| Error::Config(vec![e.to_string()]))
    } else {
        toml::from_str(&text).map_err(|e| Error::Config(vec![e.message().to_string()]))
    }
}

fn dispatch(cmd: Command, out: &mut impl Write) -> Result<()> {
    match cmd {
        Command::PhaseScan {
            d,
            alpha,
            zeta_range,
            gamma_range,
            grid,
        } => {
            let cells = exper::phase_scan(d, alpha, (zeta_range[0], zeta_range[1]), (gamma_range[0], gamma_range[1]), grid)?;
            out.write_all(&exper::phase_scan_csv(&cells)?).map_err(io)
        }
        Command::EnvDump { seed, alpha, p, r, d } => {
            let field = DisorderField::new(seed, alpha, p)?;
            let mut w = csv::Writer::from_writer(out);
            let mut header: Vec<String> = (1..=d).map(|i| format!("x{i}")).collect();
            header.push("omega".into());
            w.write_record(&header).map_err(io)?;
            for (x, v) in field.ball_values(d, r) {
                let mut rec: Vec<String> = x.iter().map(|c| c.to_string()).collect();
                rec.push(v.to_string());
                w.write_record(&rec).map_err(io)?;
            }
            w.flush().map_err(io)
        }
        Command::Simulate { config } => {
            let cfg = ExperimentConfig::from_path(&config)?;
            if cfg.method.kind != ExperimentKind::Partition {
                return Err(Error::Config(vec!["simulate needs [method] kind = \"partition\"".into()]));
            }
            cfg.check_budgets()?;
            let m = &cfg.method;
            let rep = exper::partition_sweep(&cfg.model, &m.n_grid, m.estimator, m.samples, m.seeds, m.seed)?;
            json(out, &rep.rows)
        }
        Command::Limits {
            object,
            d,
            alpha,
            p,
            h_hat,
            seed,
            size,
            w_min,
            horizon,
            samples,
            grid,
        } => match object {
            LimitObject::W => {
                let pp = sample_ppp(d, size, w_min, alpha, p, 1.0 - p, &mut rng_from_seed(seed))?;
                json(out, &estimate_w(&pp, d)?)
            }
            LimitObject::X => {
                let field = DisorderField::new(seed, alpha, p)?;
                json(out, &estimate_x(&field, d, size, GreenMethod::BesselTime)?)
            }
            LimitObject::Cd => {
                let bessel = lambda_1(d)?;
                let fd = lambda_1_grid(d, grid)?;
                let value = c_d_constant(d, h_hat)?;
                let grid_value = c_d_from_lambda(d, h_hat, fd);
                json(
                    out,
                    &serde_json::json!({
                        "object": "c_d",
                        "d": d,
                        "h_hat": h_hat,
                        "value": value,
                        "method": "bessel_zero",
                        "lambda_1": bessel,
                        "grid_value": grid_value,
                        "grid_lambda_1": fd,
                        "grid_cells_per_radius": grid,
                        "relative_gap": (grid_value / value - 1.0).abs(),
                    }),
                )
            }
            LimitObject::GammaD => json(out, &gamma_d_estimate(d, horizon, samples, &Streams::new(seed))?),
        },
        Command::Variational {
            object,
            atoms,
            beta,
            d,
            exact_max_atoms,
        } => {
            let pp = read_atoms(&atoms, d)?;
            let budget = SolveBudget {
                exact_max_atoms,
                ..SolveBudget::default()
            };
            let sol = match object {
                VarObject::TBeta => solve_t_beta(&pp, beta, &budget)?,
                VarObject::THat => solve_t_hat_inf(&pp, &budget)?,
            };
            json(out, &sol)
        }
        Command::VerifyBounds { which, config } => {
            let mut w = csv::Writer::from_writer(out);
            w.write_record(["point", "empirical", "theory"]).map_err(io)?;
            match which {
                Bound::LTail => {
                    let rep = check_l_tail(&read_config::<LTailConfig>(&config)?)?;
                    for (k, (t, b)) in rep.tail.iter().zip(&rep.bound).enumerate() {
                        w.write_record([format!("k={k}"), t.to_string(), b.to_string()]).map_err(io)?;
                    }
                }
                Bound::Energy => {
                    let cfg: EnergyConfig = read_config(&config)?;
                    let rep = check_energy_bound(&cfg)?;
                    for (t, q) in rep.t_grid.iter().zip(&rep.prob) {
                        w.write_record([format!("t={t}"), q.to_string(), String::new()]).map_err(io)?;
                    }
                    w.write_record([
                        "slope".to_string(),
                        rep.slope.map(|s| s.to_string()).unwrap_or_default(),
                        rep.theory_slope.to_string(),
                    ])
                    .map_err(io)?;
                }
                Bound::LemmaG => {
                    let rep = check_lemma_g(&read_config::<LemmaGConfig>(&config)?)?;
                    for r in &rep.rows {
                        w.write_record([format!("N={}", r.n), r.sum.to_string(), String::new()]).map_err(io)?;
                    }
                    w.write_record([
                        "slope".to_string(),
                        rep.slope.map(|s| s.to_string()).unwrap_or_default(),
                        rep.exponent.to_string(),
                    ])
                    .map_err(io)?;
                }
            }
            w.flush().map_err(io)
        }
        Command::Run { config } => {
            let manifest = exper::run_experiment(&config)?;
            json(out, &manifest)
        }
    }
}

fn read_atoms(path: &Path, d: usize) -> Result<WeightedPointProcess> {
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(false)
        .trim(csv::Trim::All)
        .from_path(path)
        .map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
    let mut atoms = Vec::new();
    for (i, rec) in rdr.records().enumerate() {
        let rec = rec.map_err(io)?;
        let vals: std::result::Result<Vec<f64>, _> = rec.iter().map(str::parse::<f64>).collect();
        let vals = match vals {
            Ok(v) => v,
            Err(_) if i == 0 => continue,
            Err(e) => return Err(Error::Config(vec![format!("atoms line {}: {e}", i + 1)])),
        };
        if vals.len() != d + 1 {
            return Err(Error::Config(vec![format!(
                "atoms line {}: expected {} columns, got {}",
                i + 1,
                d + 1,
                vals.len()
            )]));
        }
        atoms.push(Atom {
            x: vals[..d].to_vec(),
            w: vals[d],
        });
    }
    let half_width = atoms
        .iter()
        .flat_map(|a| a.x.iter().map(|c| c.abs()))
        .fold(1.0, f64::max);
    let w_min = atoms.iter().map(|a| a.w.abs()).filter(|w| *w > 0.0).fold(f64::INFINITY, f64::min);
    Ok(WeightedPointProcess {
        d,
        atoms,
        half_width,
        w_min: if w_min.is_finite() { w_min } else { 1.0 },
        alpha: 1.0,
        p: 0.5,
        q: 0.5,
    })
}
