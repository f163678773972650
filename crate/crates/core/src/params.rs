//! Model parameters, exponent algebra and the (ζ, γ) phase classifier.

use crate::error::{Error, Result};
use serde::{Deserialize, Serialize};
use std::fmt;

/// Distance below which a point counts as lying on a boundary line.
pub const BOUNDARY_TOL: f64 = 1e-12;

/// Full set of couplings of the polymer model.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ModelParams {
    pub d: usize,
    pub alpha: f64,
    pub p: f64,
    pub q: f64,
    pub beta_hat: f64,
    pub gamma: f64,
    pub h_hat: f64,
    pub zeta: f64,
}

impl ModelParams {
    pub fn new(d: usize, alpha: f64, p: f64, beta_hat: f64, gamma: f64, h_hat: f64, zeta: f64) -> Self {
        ModelParams {
            d,
            alpha,
            p,
            q: 1.0 - p,
            beta_hat,
            gamma,
            h_hat,
            zeta,
        }
    }

    /// Parameters with unit amplitudes, convenient for phase scans.
    pub fn phase_point(d: usize, alpha: f64, zeta: f64, gamma: f64) -> Self {
        Self::new(d, alpha, 0.5, 1.0, gamma, 1.0, zeta)
    }

    /// Check every invariant, including strictly positive amplitudes.
    pub fn validate(&self) -> Result<()> {
        self.validate_law()?;
        if !(self.beta_hat > 0.0) {
            return Err(Error::invalid("beta_hat must be > 0"));
        }
        if !(self.h_hat > 0.0) {
            return Err(Error::invalid("h_hat must be > 0"));
        }
        Ok(())
    }

    /// Like `validate` but admits zero amplitudes, which numerical
    /// estimators use for the homogeneous and disorder-free variants.
    pub fn validate_numeric(&self) -> Result<()> {
        self.validate_law()?;
        if !(self.beta_hat >= 0.0 && self.beta_hat.is_finite()) {
            return Err(Error::invalid("beta_hat must be finite and >= 0"));
        }
        if !(self.h_hat >= 0.0 && self.h_hat.is_finite()) {
            return Err(Error::invalid("h_hat must be finite and >= 0"));
        }
        if !self.gamma.is_finite() || !self.zeta.is_finite() {
            return Err(Error::invalid("gamma and zeta must be finite"));
        }
        Ok(())
    }

    fn validate_law(&self) -> Result<()> {
        if self.d < 2 {
            return Err(Error::invalid(format!("dimension d = {} must be >= 2", self.d)));
        }
        if !(self.alpha > 0.0 && self.alpha < self.d as f64) {
            return Err(Error::invalid(format!("alpha = {} must lie in (0, d)", self.alpha)));
        }
        if !(self.p > 0.0 && self.q > 0.0) || (self.p + self.q - 1.0).abs() > 1e-12 {
            return Err(Error::invalid(format!(
                "tail weights p = {}, q = {} must be positive with p + q = 1",
                self.p, self.q
            )));
        }
        Ok(())
    }

    /// Inverse temperature at size `n`: `β̂ n^{−γ}`.
    pub fn beta_n(&self, n: usize) -> f64 {
        self.beta_hat * (n as f64).powf(-self.gamma)
    }

    /// Range penalty at size `n`: `ĥ n^{−ζ}`.
    pub fn h_n(&self, n: usize) -> f64 {
        self.h_hat * (n as f64).powf(-self.zeta)
    }
}

/// Phase-diagram cell.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Region {
    R1,
    R2,
    R3,
    R4,
    R5,
    R6,
    Boundary,
    R5Unsolved,
}

impl fmt::Display for Region {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Region::R1 => "R1",
            Region::R2 => "R2",
            Region::R3 => "R3",
            Region::R4 => "R4",
            Region::R5 => "R5",
            Region::R6 => "R6",
            Region::Boundary => "Boundary",
            Region::R5Unsolved => "R5Unsolved",
        };
        f.write_str(s)
    }
}

/// Which limit theorem governs a point.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum TheoremTag {
    R1a,
    R1bI,
    R1bII,
    R1cI,
    R1cIIa,
    R1cIIb,
    B,
    A,
    R4,
    R5a1,
    R5a2,
    R5a3,
    R6,
}

impl fmt::Display for TheoremTag {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            TheoremTag::R1a => "R1a",
            TheoremTag::R1bI => "R1b-i",
            TheoremTag::R1bII => "R1b-ii",
            TheoremTag::R1cI => "R1c-i",
            TheoremTag::R1cIIa => "R1c-iia",
            TheoremTag::R1cIIb => "R1c-iib",
            TheoremTag::B => "B",
            TheoremTag::A => "A",
            TheoremTag::R4 => "R4",
            TheoremTag::R5a1 => "R5a-1",
            TheoremTag::R5a2 => "R5a-2",
            TheoremTag::R5a3 => "R5a-3",
            TheoremTag::R6 => "R6",
        };
        f.write_str(s)
    }
}

/// Classifier output.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RegionReport {
    pub region: Region,
    /// Predicted end-to-end exponent; absent on boundaries and in the
    /// unsolved part of R5.
    pub xi: Option<f64>,
    /// Exponent `ρ` with `log Z_N ≍ sign · N^ρ`.
    pub logz_scale_exponent: Option<f64>,
    /// Sign of the leading term of `log Z_N`: `-1`, `+1`, or `0` when the
    /// leading term is a centered random fluctuation.
    pub logz_sign: Option<i8>,
    pub applicable_theorem: Option<TheoremTag>,
}

impl RegionReport {
    fn bare(region: Region) -> Self {
        RegionReport {
            region,
            xi: None,
            logz_scale_exponent: None,
            logz_sign: None,
            applicable_theorem: None,
        }
    }
}

/// The three structural constants of the diagram.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Slopes {
    /// `(d − α)/α`
    pub a: f64,
    /// `(2α − d)/(2α)`
    pub b: f64,
    /// `d/(2α)`
    pub c: f64,
}

impl Slopes {
    pub fn new(d: usize, alpha: f64) -> Self {
        let d = d as f64;
        Slopes {
            a: (d - alpha) / alpha,
            b: (2.0 * alpha - d) / (2.0 * alpha),
            c: d / (2.0 * alpha),
        }
    }
}

fn near(x: f64, y: f64) -> bool {
    (x - y).abs() <= BOUNDARY_TOL * (1.0 + y.abs())
}

fn check_critical(d: usize, alpha: f64) -> Result<()> {
    let df = d as f64;
    if d < 2 {
        return Err(Error::invalid(format!("dimension d = {d} must be >= 2")));
    }
    if !(alpha > 0.0 && alpha < df) {
        return Err(Error::invalid(format!("alpha = {alpha} must lie in (0, d)")));
    }
    if near(alpha, df / 2.0) {
        return Err(Error::Unsupported("critical tail exponent alpha = d/2".into()));
    }
    Ok(())
}

/// Tail exponents at which no R1 limit theorem applies.
fn r1_critical(d: usize, alpha: f64) -> bool {
    let df = d as f64;
    near(alpha, 1.0) || near(alpha, 2.0) || (d >= 5 && near(alpha, df / (df - 2.0)))
}

/// Signed margins `g_i` with membership `⇔ g_i > 0` for every `i`.
fn region_margins(d: usize, alpha: f64, zeta: f64, gamma: f64) -> Vec<(Region, Vec<f64>)> {
    let s = Slopes::new(d, alpha);
    let two_d = 2.0 / d as f64;
    let mut out = Vec::with_capacity(6);
    if alpha > d as f64 / 2.0 {
        out.push((Region::R1, vec![zeta - 1.0, gamma - s.c]));
        out.push((
            Region::R2,
            vec![zeta, gamma - s.a, (s.b * zeta + s.a).min(s.c) - gamma],
        ));
        out.push((Region::R3, vec![zeta.min(0.0) + s.a - gamma]));
        out.push((
            Region::R4,
            vec![zeta - two_d, 1.0 - zeta, gamma - (s.b * zeta + s.a)],
        ));
        out.push((
            Region::R5,
            vec![zeta + 1.0, two_d - zeta, gamma - (zeta.min(s.b * zeta) + s.a)],
        ));
    } else {
        out.push((Region::R1, vec![zeta - 1.0, gamma - s.a]));
        out.push((Region::R3, vec![zeta.min(0.0) + s.a - gamma]));
        out.push((Region::R4, vec![zeta - two_d, 1.0 - zeta, gamma - s.a]));
        out.push((
            Region::R5,
            vec![zeta + 1.0, two_d - zeta, gamma - (zeta.min(0.0) + s.a)],
        ));
    }
    out.push((Region::R6, vec![-1.0 - zeta, gamma - (zeta + s.a)]));
    out
}

/// Regions whose defining strict inequalities hold at `(ζ, γ)`, without
/// any boundary tolerance. Exposed for partition checks.
pub fn raw_regions(d: usize, alpha: f64, zeta: f64, gamma: f64) -> Vec<Region> {
    region_margins(d, alpha, zeta, gamma)
        .into_iter()
        .filter(|(_, g)| g.iter().all(|&x| x > 0.0))
        .map(|(r, _)| r)
        .collect()
}

fn xi_of(region: Region, p: &ModelParams) -> Option<f64> {
    let d = p.d as f64;
    match region {
        Region::R1 => Some(0.5),
        Region::R2 => Some(p.alpha * (1.0 - p.gamma) / (2.0 * p.alpha - d)),
        Region::R3 => Some(1.0),
        Region::R4 => Some(p.zeta / 2.0),
        Region::R5 => Some((1.0 + p.zeta) / (d + 2.0)),
        Region::R6 => Some(0.0),
        Region::Boundary | Region::R5Unsolved => None,
    }
}

enum Sub<T> {
    Tag(T),
    OnLine,
}

fn r1_tag(p: &ModelParams, strict: bool) -> Sub<TheoremTag> {
    let d = p.d as f64;
    let alpha = p.alpha;
    let threshold = p.gamma + d * (alpha - 1.0) / (2.0 * alpha);
    let side = |lo: TheoremTag, hi: TheoremTag| {
        if near(p.zeta, threshold) {
            if strict {
                Sub::OnLine
            } else {
                Sub::Tag(lo)
            }
        } else if p.zeta < threshold {
            Sub::Tag(lo)
        } else {
            Sub::Tag(hi)
        }
    };
    if alpha > d / 2.0 {
        if alpha > 2.0 {
            Sub::Tag(TheoremTag::R1a)
        } else {
            side(TheoremTag::R1bI, TheoremTag::R1bII)
        }
    } else if p.d >= 5 && alpha > d / (d - 2.0) {
        Sub::Tag(TheoremTag::R1cI)
    } else {
        side(TheoremTag::R1cIIa, TheoremTag::R1cIIb)
    }
}

/// `Tag(None)` marks the unsolved part of R5.
fn r5_tag(p: &ModelParams, strict: bool) -> Sub<Option<TheoremTag>> {
    let s = Slopes::new(p.d, p.alpha);
    let half = p.d as f64 / 2.0;
    let line1 = p.zeta + s.a;
    if p.alpha >= half {
        if strict && (near(p.gamma, s.c) || (p.zeta > 0.0 && near(p.gamma, line1))) {
            return Sub::OnLine;
        }
        if p.gamma >= s.c {
            return Sub::Tag(Some(TheoremTag::R5a3));
        }
    } else if p.gamma > s.a {
        return Sub::Tag(Some(TheoremTag::R5a2));
    }
    if p.gamma > line1 {
        Sub::Tag(Some(TheoremTag::R5a1))
    } else {
        Sub::Tag(None)
    }
}

/// Exponent of the power of N that `log Z_N` scales with, and its sign.
fn logz_scaling(region: Region, tag: Option<TheoremTag>, xi: f64, p: &ModelParams) -> (f64, i8) {
    let d = p.d as f64;
    let energy = d / (2.0 * p.alpha) - p.gamma;
    match region {
        Region::R1 => match tag {
            Some(TheoremTag::R1a) => {
                let a_exp = if p.d == 3 { 0.25 } else { 0.0 };
                let cands = [(1.0 - p.zeta, -1i8), (1.0 - 2.0 * p.gamma, 1), (a_exp - p.gamma, 0)];
                cands
                    .into_iter()
                    .fold((f64::NEG_INFINITY, 0), |acc, c| if c.0 > acc.0 { c } else { acc })
            }
            Some(TheoremTag::R1cI) => {
                if 1.0 - p.zeta >= -p.gamma {
                    (1.0 - p.zeta, -1)
                } else {
                    (-p.gamma, 0)
                }
            }
            Some(TheoremTag::R1bII) => (energy - if p.d == 3 { 0.5 } else { 0.0 }, 0),
            Some(TheoremTag::R1cIIb) => (energy - if p.d >= 3 { d / 2.0 - 1.0 } else { 0.0 }, 0),
            _ => (1.0 - p.zeta, -1),
        },
        Region::R2 => (2.0 * xi - 1.0, 1),
        Region::R3 => (d / p.alpha - p.gamma, 1),
        Region::R4 | Region::R5 => (1.0 - 2.0 * xi, -1),
        Region::R6 => (-p.zeta, -1),
        Region::Boundary | Region::R5Unsolved => (f64::NAN, 0),
    }
}

/// Locate `(ζ, γ)` in the phase diagram.
///
/// `α = d/2` is rejected. At `α ∈ {1, 2, d/(d−2)}` R1 points carry no
/// theorem tag, since no R1 limit theorem covers those exponents.
///
/// Points within `BOUNDARY_TOL` of a line separating two regions always
/// return `Boundary`. With `strict_interior` the sub-case lines inside R1
/// and R5 that switch the governing theorem also return `Boundary`;
/// otherwise those lines are resolved by the theorems' own inequalities.
pub fn classify_region(params: &ModelParams, strict_interior: bool) -> Result<RegionReport> {
    check_critical(params.d, params.alpha)?;
    if !params.zeta.is_finite() || !params.gamma.is_finite() {
        return Err(Error::invalid("zeta and gamma must be finite"));
    }
    let margins = region_margins(params.d, params.alpha, params.zeta, params.gamma);
    let tol = BOUNDARY_TOL * (1.0 + params.zeta.abs() + params.gamma.abs());
    let hits: Vec<Region> = margins
        .iter()
        .filter(|(_, g)| g.iter().all(|&x| x > tol))
        .map(|(r, _)| *r)
        .collect();
    if hits.len() != 1 {
        return Ok(RegionReport::bare(Region::Boundary));
    }
    let region = hits[0];
    let tag = match region {
        Region::R1 if r1_critical(params.d, params.alpha) => {
            let mut r = RegionReport::bare(Region::R1);
            r.xi = Some(0.5);
            return Ok(r);
        }
        Region::R1 => match r1_tag(params, strict_interior) {
            Sub::Tag(t) => t,
            Sub::OnLine => return Ok(RegionReport::bare(Region::Boundary)),
        },
        Region::R2 => TheoremTag::B,
        Region::R3 => TheoremTag::A,
        Region::R4 => TheoremTag::R4,
        Region::R6 => TheoremTag::R6,
        Region::R5 => match r5_tag(params, strict_interior) {
            Sub::Tag(Some(t)) => t,
            Sub::Tag(None) => return Ok(RegionReport::bare(Region::R5Unsolved)),
            Sub::OnLine => return Ok(RegionReport::bare(Region::Boundary)),
        },
        _ => unreachable!(),
    };
    let xi = xi_of(region, params).expect("interior region has a prediction");
    let (rho, sign) = logz_scaling(region, Some(tag), xi, params);
    Ok(RegionReport {
        region,
        xi: Some(xi),
        logz_scale_exponent: Some(rho),
        logz_sign: Some(sign),
        applicable_theorem: Some(tag),
    })
}

/// Exponents of the energy, range and entropy orders for a trial `ξ`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct HeuristicOrders {
    pub energy_exp: f64,
    pub range_exp: f64,
    pub entropy_exp: f64,
}

pub fn heuristic_orders(params: &ModelParams, xi: f64) -> Result<HeuristicOrders> {
    if !(0.0..=1.0).contains(&xi) {
        return Err(Error::invalid(format!("xi = {xi} must lie in [0, 1]")));
    }
    let d = params.d as f64;
    Ok(HeuristicOrders {
        energy_exp: d * xi / params.alpha - params.gamma,
        range_exp: (d * xi).min(1.0) - params.zeta,
        entropy_exp: (1.0 - 2.0 * xi).abs(),
    })
}

/// A named polyline in the (ζ, γ) plane.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BoundaryCurve {
    pub name: String,
    pub points: Vec<(f64, f64)>,
}

/// Horizontal extent of emitted curves.
pub const CURVE_ZETA_RANGE: (f64, f64) = (-3.0, 3.0);

/// Every boundary segment of the phase diagram for `(d, α)`, clipped to
/// `CURVE_ZETA_RANGE` and to a vertical extent two units above the
/// highest corner.
pub fn boundary_curves(d: usize, alpha: f64) -> Result<Vec<BoundaryCurve>> {
    if d < 2 || !(alpha > 0.0 && alpha < d as f64) {
        return Err(Error::invalid("boundary curves need d >= 2 and alpha in (0, d)"));
    }
    let s = Slopes::new(d, alpha);
    let (z_lo, z_hi) = CURVE_ZETA_RANGE;
    let top = s.a.max(s.c) + 2.0;
    let two_d = 2.0 / d as f64;
    let curve = |name: &str, pts: Vec<(f64, f64)>| BoundaryCurve {
        name: name.to_string(),
        points: pts,
    };
    let mut out = vec![
        curve("gamma=zeta+(d-alpha)/alpha", vec![(z_lo, z_lo + s.a), (0.0, s.a)]),
        curve("gamma=(d-alpha)/alpha", vec![(0.0, s.a), (z_hi, s.a)]),
        curve("zeta=-1", vec![(-1.0, s.a - 1.0), (-1.0, top)]),
    ];
    if alpha > d as f64 / 2.0 {
        out.push(curve(
            "gamma=(2alpha-d)zeta/(2alpha)+(d-alpha)/alpha",
            vec![(0.0, s.a), (1.0, s.c)],
        ));
        out.push(curve("gamma=d/(2alpha)", vec![(1.0, s.c), (z_hi, s.c)]));
        out.push(curve("zeta=2/d", vec![(two_d, s.b * two_d + s.a), (two_d, top)]));
        out.push(curve("zeta=1", vec![(1.0, s.c), (1.0, top)]));
        let unsolved = if s.b < two_d {
            vec![(0.0, s.a), (s.b, s.c), (two_d, s.c)]
        } else {
            vec![(0.0, s.a), (two_d, two_d + s.a)]
        };
        out.push(curve("R5-unsolved-upper", unsolved));
    } else {
        out.push(curve("zeta=2/d", vec![(two_d, s.a), (two_d, top)]));
        out.push(curve("zeta=1", vec![(1.0, s.a), (1.0, top)]));
    }
    Ok(out)
}
