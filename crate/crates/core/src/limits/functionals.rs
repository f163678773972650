//! The random limits `𝒲 = ∫ w f(x) (𝒫 − η)(dx, dw)` and
//! `𝒳 = Σ_x ω_x P(x ∈ R_∞)`.

use super::green::{canonical, hit_prob_infty, GreenMethod};
use super::kernel::f_radial;
use super::ppp::WeightedPointProcess;
use crate::environment::DisorderField;
use crate::error::{Error, Result};
use crate::lattice::{ball_points, norm};
use crate::par;
use quadrature::double_exponential::integrate;
use rustc_hash::FxHashMap;
use serde::Serialize;

/// `∫_{[−L,L]^d} g(‖x‖²) dx` by nested quadrature over the positive
/// orthant; the singularity of `f` sits at a corner.
fn box_integral(d: usize, half_width: f64, g: &dyn Fn(f64) -> f64) -> f64 {
    fn nest(level: usize, acc: f64, l: f64, g: &dyn Fn(f64) -> f64) -> f64 {
        if level == 0 {
            return g(acc);
        }
        integrate(|t| nest(level - 1, acc + t * t, l, g), 0.0, l, 1e-11).integral
    }
    2f64.powi(d as i32) * nest(d, 0.0, half_width, g)
}

fn f_or_zero(d: usize, r_sq: f64) -> f64 {
    if r_sq <= 0.0 {
        0.0
    } else {
        f_radial(d, r_sq).unwrap_or(0.0)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct WEstimate {
    pub value: f64,
    /// Standard deviation of the omitted compensated weights `|w| < w_min`.
    pub std_err: f64,
    /// Subtracted `∫_box ∫_{|w| ≥ w_min} w f η` (zero for `α < 1`).
    pub compensator: f64,
    /// For `α < 1`: mean of the dropped `|w| < w_min` atoms,
    /// `(p − q) α/(1 − α) w_min^{1−α} ∫_box f`.
    pub truncation_mean: Option<f64>,
    pub w_min: f64,
    /// Same estimate at cutoff `2 w_min` from the same atoms.
    pub value_at_double_cutoff: f64,
    pub sensitivity: f64,
    pub n_atoms: usize,
}

/// `(∫_box f, ∫_box f²)` for the process window.
pub fn box_kernel_moments(d: usize, half_width: f64) -> (f64, f64) {
    let f1 = box_integral(d, half_width, &|r| f_or_zero(d, r));
    let f2 = box_integral(d, half_width, &|r| f_or_zero(d, r).powi(2));
    (f1, f2)
}

struct Parts {
    value: f64,
    compensator: f64,
    truncation_mean: Option<f64>,
    std_err: f64,
    n_atoms: usize,
}

fn w_at(pp: &WeightedPointProcess, d: usize, cutoff: f64, moments: (f64, f64)) -> Result<Parts> {
    let (alpha, p, q) = (pp.alpha, pp.p, pp.q);
    let mut sum = 0.0;
    let mut n_atoms = 0;
    for a in pp.atoms.iter().filter(|a| a.w.abs() >= cutoff) {
        let r_sq: f64 = a.x.iter().map(|v| v * v).sum();
        sum += a.w * f_radial(d, r_sq)?;
        n_atoms += 1;
    }
    let (f1, f2) = moments;
    let (compensator, truncation_mean) = if alpha > 1.0 {
        ((p - q) * alpha / (alpha - 1.0) * cutoff.powf(1.0 - alpha) * f1, None)
    } else {
        (0.0, Some((p - q) * alpha / (1.0 - alpha) * cutoff.powf(1.0 - alpha) * f1))
    };
    let var = (p + q) * alpha / (2.0 - alpha) * cutoff.powf(2.0 - alpha) * f2;
    Ok(Parts {
        value: sum - compensator,
        compensator,
        truncation_mean,
        std_err: var.sqrt(),
        n_atoms,
    })
}

/// Atom sum minus compensator above `w_min`, with the `w_min` sensitivity.
pub fn estimate_w(pp: &WeightedPointProcess, d: usize) -> Result<WEstimate> {
    if !(d == 2 || d == 3) || pp.d != d {
        return Err(Error::invalid(format!("W is defined for d in {{2, 3}} matching the process, got d = {d}")));
    }
    if (pp.alpha - 1.0).abs() < 1e-12 {
        return Err(Error::invalid("alpha = 1 makes the compensator diverge logarithmically"));
    }
    if pp.alpha >= 2.0 {
        return Err(Error::Unsupported(format!(
            "alpha = {} >= 2: small weights are not square integrable",
            pp.alpha
        )));
    }
    let moments = box_kernel_moments(d, pp.half_width);
    let base = w_at(pp, d, pp.w_min, moments)?;
    let double = w_at(pp, d, 2.0 * pp.w_min, moments)?;
    Ok(WEstimate {
        value: base.value,
        std_err: base.std_err,
        compensator: base.compensator,
        truncation_mean: base.truncation_mean,
        w_min: pp.w_min,
        value_at_double_cutoff: double.value,
        sensitivity: double.value - base.value,
        n_atoms: base.n_atoms,
    })
}

/// `P(x ∈ R_∞)` on a lattice ball, evaluated once per symmetry class.
#[derive(Debug, Clone)]
pub struct HitTable {
    pub d: usize,
    pub cutoff: f64,
    pub method: GreenMethod,
    /// `(site, ‖site‖, hitting probability)`.
    pub entries: Vec<(Vec<i32>, f64, f64)>,
}

impl HitTable {
    pub fn new(d: usize, cutoff: f64, method: GreenMethod) -> Result<Self> {
        if d < 3 {
            return Err(Error::invalid(format!("the walk is recurrent in d = {d}; need d >= 3")));
        }
        if !(cutoff >= 0.0 && cutoff.is_finite()) {
            return Err(Error::invalid(format!("cutoff radius {cutoff} must be finite and >= 0")));
        }
        let points = ball_points(d, cutoff);
        let mut classes: Vec<Vec<u32>> = points.iter().map(|x| canonical(x)).collect();
        classes.sort();
        classes.dedup();
        let values = par::map_indexed(classes.len(), |i| {
            let x: Vec<i32> = classes[i].iter().map(|&v| v as i32).collect();
            hit_prob_infty(d, &x, method).map(|h| h.value)
        });
        let mut lookup = FxHashMap::default();
        for (c, v) in classes.into_iter().zip(values) {
            lookup.insert(c, v?);
        }
        let entries = points
            .into_iter()
            .map(|x| {
                let v = lookup[&canonical(&x)];
                let r = norm(&x);
                (x, r, v)
            })
            .collect();
        Ok(HitTable {
            d,
            cutoff,
            method,
            entries,
        })
    }

    /// Partial sums of `Σ ω_x P(x ∈ R_∞)` over `‖x‖ ≤ cutoff/2` and
    /// `‖x‖ ≤ cutoff`.
    pub fn partial_sums(&self, field: &DisorderField) -> (f64, f64) {
        let half = 0.5 * self.cutoff;
        let mut inner = 0.0;
        let mut outer = 0.0;
        for (x, r, g) in &self.entries {
            let v = field.omega_at(x) * g;
            outer += v;
            if *r <= half + 1e-9 {
                inner += v;
            }
        }
        (inner, outer)
    }

    pub fn estimate(&self, field: &DisorderField) -> XEstimate {
        let (inner, outer) = self.partial_sums(field);
        XEstimate {
            value: outer,
            half_cutoff_value: inner,
            tail_change: outer - inner,
            n_sites: self.entries.len(),
            method: self.method.name(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct XEstimate {
    pub value: f64,
    pub half_cutoff_value: f64,
    /// Change from cutoff/2 to cutoff.
    pub tail_change: f64,
    pub n_sites: usize,
    pub method: &'static str,
}

/// `Σ_{‖x‖ ≤ cutoff} ω_x P(x ∈ R_∞)`.
pub fn estimate_x(field: &DisorderField, d: usize, cutoff: f64, method: GreenMethod) -> Result<XEstimate> {
    Ok(HitTable::new(d, cutoff, method)?.estimate(field))
}

/// Hill estimator of the tail index from the `k` largest of `values`.
pub fn hill_estimator(values: &[f64], k: usize) -> Result<f64> {
    let mut v: Vec<f64> = values.iter().copied().filter(|x| x.is_finite()).collect();
    if k < 2 || k >= v.len() {
        return Err(Error::invalid(format!("Hill estimator needs 2 <= k < n, got k = {k}, n = {}", v.len())));
    }
    v.sort_by(|a, b| b.total_cmp(a));
    let threshold = v[k];
    if threshold <= 0.0 {
        return Err(Error::invalid("the k-th order statistic must be positive"));
    }
    let mean_log = v[..k].iter().map(|x| (x / threshold).ln()).sum::<f64>() / k as f64;
    Ok(1.0 / mean_log)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::limits::ppp::{sample_ppp, Atom};
    use crate::rng::rng_from_seed;

    fn empty(alpha: f64, p: f64) -> WeightedPointProcess {
        WeightedPointProcess {
            d: 2,
            atoms: Vec::new(),
            half_width: 1.0,
            w_min: 1.0,
            alpha,
            p,
            q: 1.0 - p,
        }
    }

    #[test]
    fn symmetric_intensity_has_no_compensator() {
        for alpha in [0.5, 1.5] {
            let w = estimate_w(&empty(alpha, 0.5), 2).unwrap();
            assert_eq!(w.value, 0.0);
            assert_eq!(w.compensator, 0.0);
        }
        let mut pp = empty(1.5, 0.5);
        pp.half_width = 3.7;
        pp.w_min = 0.3;
        assert_eq!(estimate_w(&pp, 2).unwrap().compensator, 0.0);
        assert!(estimate_w(&empty(1.0, 0.7), 2).is_err());
    }

    #[test]
    fn single_atom_below_one() {
        let mut pp = empty(0.5, 0.7);
        pp.atoms.push(Atom { x: vec![0.5, -0.2], w: 2.5 });
        let w = estimate_w(&pp, 2).unwrap();
        let expect = 2.5 * f_radial(2, 0.29).unwrap();
        assert!((w.value - expect).abs() < 1e-15);
        assert!(w.truncation_mean.unwrap() > 0.0);
    }

    #[test]
    fn box_integral_matches_radial_form() {
        // Over all of R^2, ∫ E₁(|x|²/2) dx = 2π.
        let whole = box_kernel_moments(2, 12.0).0;
        assert!((whole - 2.0 * std::f64::consts::PI).abs() < 1e-6, "{whole}");
        // In d = 3, ∫ f = 2λ₃ ∫_0^1 ∫ ρ₃ = 2λ₃.
        let whole = box_kernel_moments(3, 8.0).0;
        assert!((whole - 2.0 * crate::limits::green::LAMBDA_3).abs() < 1e-6, "{whole}");
    }

    #[test]
    fn cutoff_stability() {
        let (alpha, p, l, w_min) = (1.5, 0.7, 3.0, 1.0);
        let mut rng = rng_from_seed(21);
        let reps = 200;
        let mut fine = Vec::new();
        let mut coarse = Vec::new();
        for _ in 0..reps {
            let pp = sample_ppp(2, l, w_min / 2.0, alpha, p, 1.0 - p, &mut rng).unwrap();
            let w = estimate_w(&pp, 2).unwrap();
            fine.push(w.value);
            coarse.push(w.value_at_double_cutoff);
        }
        let stats = |v: &[f64]| {
            let m = v.iter().sum::<f64>() / v.len() as f64;
            let var = v.iter().map(|x| (x - m).powi(2)).sum::<f64>() / (v.len() - 1) as f64;
            (m, var)
        };
        let (m1, v1) = stats(&fine);
        let (m2, v2) = stats(&coarse);
        let pooled = ((v1 + v2) / reps as f64).sqrt();
        assert!((m1 - m2).abs() < 3.0 * pooled, "{m1} vs {m2} ± {pooled}");
    }

    #[test]
    fn x_trivial_cases() {
        let f = DisorderField::new(3, 2.0, 0.9).unwrap();
        let t = HitTable::new(3, 0.0, GreenMethod::Fourier).unwrap();
        let x = t.estimate(&f);
        assert_eq!(x.n_sites, 1);
        assert_eq!(x.value, f.omega_at(&[0, 0, 0]));
        assert!(estimate_x(&f, 2, 3.0, GreenMethod::BesselTime).is_err());
    }

    #[test]
    fn x_tail_index() {
        let (d, alpha) = (5, 2.0);
        let table = HitTable::new(d, 4.0, GreenMethod::BesselTime).unwrap();
        let values: Vec<f64> = (0..200)
            .map(|s| table.estimate(&DisorderField::new(1000 + s, alpha, 0.9).unwrap()).value)
            .collect();
        let hill = hill_estimator(&values, 20).unwrap();
        assert!(hill >= 0.7 * alpha && hill <= 1.3 * alpha, "{hill}");
    }
}
