//! Hölder upper and lower bounds on `log Z_N` in terms of the
//! homogeneous and disorder-only partition functions, evaluated exactly.

use super::exact::exact_sums;
use super::{check_field, Coupling};
use crate::environment::DisorderField;
use crate::error::{Error, Result};
use crate::params::ModelParams;
use crate::walk::enumerate::{enumerate_paths, leaf_count, Leaf, SiteData, SumVisitor, DEFAULT_LEAF_BUDGET};
use serde::Serialize;

/// Rounding allowance for the slack checks.
pub const SLACK_FLOOR: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum LowerBoundKind {
    /// Reverse Hölder with exponents `1/(1−ε)` and `1/ε`.
    ReverseHolder,
    /// `ε = 1`: the `ε → 1` limit of the reverse bound,
    /// `log Z ≥ E[β Ω − h |R|]` (Jensen).
    Jensen,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct HolderReport {
    pub eps: f64,
    pub log_z: f64,
    /// `log Z_hom((1+ε)h)`
    pub log_hom_up: f64,
    /// `log Z_dis(((1+ε)/ε) β)`
    pub log_dis_up: f64,
    /// `log Z_hom((1−ε)h)` (absent at `ε = 1`).
    pub log_hom_down: Option<f64>,
    /// `log Z_dis(−((1−ε)/ε) β)` (absent at `ε = 1`).
    pub log_dis_down: Option<f64>,
    pub upper_bound: f64,
    pub lower_bound: f64,
    pub lower_kind: LowerBoundKind,
    pub upper_slack: f64,
    pub lower_slack: f64,
}

impl HolderReport {
    pub fn holds(&self) -> bool {
        self.upper_slack >= -SLACK_FLOOR && self.lower_slack >= -SLACK_FLOOR
    }
}

/// Evaluate the sandwich
/// `(1/(1−ε)) log Z_hom((1−ε)h) − (ε/(1−ε)) log Z_dis(−((1−ε)/ε)β) ≤ log Z
///   ≤ (1/(1+ε)) log Z_hom((1+ε)h) + (ε/(1+ε)) log Z_dis(((1+ε)/ε)β)`
/// by enumeration, for `ε ∈ (0, 1]`.
pub fn holder_sandwich_check(field: &DisorderField, params: &ModelParams, n: usize, eps: f64) -> Result<HolderReport> {
    check_field(field, params)?;
    if !(eps > 0.0 && eps <= 1.0) {
        return Err(Error::invalid(format!("eps = {eps} must lie in (0, 1]")));
    }
    let d = params.d;
    let Coupling { beta, h } = Coupling::at(params, n);
    let mut couplings = vec![
        Coupling::new(beta, h),
        Coupling::new(0.0, (1.0 + eps) * h),
        Coupling::new((1.0 + eps) / eps * beta, 0.0),
    ];
    let reverse = eps < 1.0;
    if reverse {
        couplings.push(Coupling::new(0.0, (1.0 - eps) * h));
        couplings.push(Coupling::new(-(1.0 - eps) / eps * beta, 0.0));
    }
    let (z, _) = exact_sums(Some(field), d, n, &couplings, None, None, DEFAULT_LEAF_BUDGET)?;
    let upper_bound = z[1] / (1.0 + eps) + eps / (1.0 + eps) * z[2];
    let (lower_bound, lower_kind, hom_down, dis_down) = if reverse {
        (
            z[3] / (1.0 - eps) - eps / (1.0 - eps) * z[4],
            LowerBoundKind::ReverseHolder,
            Some(z[3]),
            Some(z[4]),
        )
    } else {
        let p = leaf_count(n, d).recip();
        let omega = |x: &[i32]| field.omega_at(x);
        let data = SiteData {
            value: Some(&omega),
            tag: None,
        };
        let mean = enumerate_paths(n, d, DEFAULT_LEAF_BUDGET, &data, || SumVisitor {
            f: move |l: &Leaf<'_>| p * (beta * l.site_sum - h * l.range_size as f64),
            total: 0.0,
        })?
        .total;
        (mean, LowerBoundKind::Jensen, None, None)
    };
    Ok(HolderReport {
        eps,
        log_z: z[0],
        log_hom_up: z[1],
        log_dis_up: z[2],
        log_hom_down: hom_down,
        log_dis_down: dis_down,
        upper_bound,
        lower_bound,
        lower_kind,
        upper_slack: upper_bound - z[0],
        lower_slack: z[0] - lower_bound,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn params(beta_hat: f64) -> ModelParams {
        ModelParams::new(2, 1.5, 0.7, beta_hat, 0.5, 0.5, 0.5)
    }

    #[test]
    fn sandwich_holds() {
        for seed in 0..4 {
            let f = DisorderField::new(seed, 1.5, 0.7).unwrap();
            for eps in [0.25, 0.5, 1.0] {
                let r = holder_sandwich_check(&f, &params(0.5), 6, eps).unwrap();
                assert!(r.holds(), "{r:?}");
            }
        }
    }

    #[test]
    fn collapses_without_disorder() {
        let f = DisorderField::new(3, 1.5, 0.7).unwrap();
        let mut last = f64::INFINITY;
        for eps in [0.5, 0.1, 0.01, 0.001] {
            let r = holder_sandwich_check(&f, &params(0.0), 6, eps).unwrap();
            assert!(r.log_dis_up.abs() < 1e-12);
            let width = r.upper_slack + r.lower_slack;
            assert!(width >= 0.0 && width < last);
            last = width;
        }
        assert!(last < 1e-2);
    }

    #[test]
    fn reproducible() {
        let f = DisorderField::new(9, 1.5, 0.7).unwrap();
        let a = holder_sandwich_check(&f, &params(0.5), 6, 0.5).unwrap();
        let b = holder_sandwich_check(&f, &params(0.5), 6, 0.5).unwrap();
        assert_eq!(a.upper_slack.to_bits(), b.upper_slack.to_bits());
        assert_eq!(a.lower_slack.to_bits(), b.lower_slack.to_bits());
        assert_eq!(a.lower_kind, LowerBoundKind::ReverseHolder);
        assert!(holder_sandwich_check(&f, &params(0.5), 6, 0.0).is_err());
    }
}
