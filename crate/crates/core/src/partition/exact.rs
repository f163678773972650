//! Partition functions by exhaustive path enumeration.

use super::polymer::Observable;
use super::{check_field, Coupling, Event, PartitionEstimate, PathFeatures};
use crate::environment::DisorderField;
use crate::error::Result;
use crate::logspace::{log_sum_exp, LogSum};
use crate::params::ModelParams;
use crate::walk::enumerate::{enumerate_paths, Leaf, PathVisitor, SiteData, SiteFn, DEFAULT_LEAF_BUDGET};

/// Sums over all paths for several couplings at once.
pub(crate) struct ExactSums<'a> {
    couplings: &'a [Coupling],
    event: Option<&'a Event>,
    observable: Option<&'a Observable>,
    n: usize,
    /// `log Σ w·1_A` per coupling.
    pub z: Vec<LogSum>,
    /// `log Σ w·1_A·obs` per coupling.
    pub zo: Vec<LogSum>,
}

impl PathVisitor for ExactSums<'_> {
    #[inline]
    fn visit(&mut self, l: &Leaf<'_>) {
        let x = PathFeatures {
            n: self.n,
            range_size: l.range_size as u64,
            max_disp_sq: l.max_disp_sq,
            endpoint: l.endpoint,
        };
        if let Some(e) = self.event {
            if !e.test(&x) {
                return;
            }
        }
        let log_obs = self.observable.map(|o| o.value(&x).ln());
        for (i, c) in self.couplings.iter().enumerate() {
            let lw = c.log_weight(l.site_sum, x.range_size);
            self.z[i].add(lw);
            if let Some(lo) = log_obs {
                self.zo[i].add(lw + lo);
            }
        }
    }

    fn merge(&mut self, other: Self) {
        for (a, b) in self.z.iter_mut().zip(&other.z) {
            a.merge(b);
        }
        for (a, b) in self.zo.iter_mut().zip(&other.zo) {
            a.merge(b);
        }
    }
}

/// Exact `log E[w·1_A]` and, with an observable, `log E[w·1_A·obs]` for
/// each coupling.
pub(crate) fn exact_sums(
    field: Option<&DisorderField>,
    d: usize,
    n: usize,
    couplings: &[Coupling],
    event: Option<&Event>,
    observable: Option<&Observable>,
    budget: f64,
) -> Result<(Vec<f64>, Vec<f64>)> {
    let omega = field.map(|f| move |x: &[i32]| f.omega_at(x));
    let value: Option<SiteFn<f64>> = match &omega {
        Some(g) => Some(g),
        None => None,
    };
    let data = SiteData { value, tag: None };
    let sums = enumerate_paths(n, d, budget, &data, || ExactSums {
        couplings,
        event,
        observable,
        n,
        z: vec![LogSum::new(); couplings.len()],
        zo: vec![LogSum::new(); couplings.len()],
    })?;
    let shift = n as f64 * (2.0 * d as f64).ln();
    let z = sums.z.iter().map(|s| s.value() - shift).collect();
    let zo = sums.zo.iter().map(|s| s.value() - shift).collect();
    Ok((z, zo))
}

/// `log Z_N(A)` for each coupling on one disorder realization.
pub fn log_partition_exact(
    field: &DisorderField,
    d: usize,
    n: usize,
    couplings: &[Coupling],
    event: Option<&Event>,
) -> Result<Vec<f64>> {
    let needs_field = couplings.iter().any(|c| c.beta != 0.0);
    let f = if needs_field { Some(field) } else { None };
    Ok(exact_sums(f, d, n, couplings, event, None, DEFAULT_LEAF_BUDGET)?.0)
}

/// Exact `Z_N(A) = E[exp(β_N Σ_{x∈R_N} ω_x − h_N |R_N|) 1_A]`.
pub fn partition_exact(
    field: &DisorderField,
    params: &ModelParams,
    n: usize,
    event: Option<&Event>,
) -> Result<PartitionEstimate> {
    check_field(field, params)?;
    let c = [Coupling::at(params, n)];
    let v = log_partition_exact(field, params.d, n, &c, event)?;
    Ok(PartitionEstimate::exact(v[0]))
}

/// Closed form for the paths whose range is two sites: they bounce
/// between the origin and one neighbour `±e_k`, one path per neighbour.
pub fn two_site_log_partition(field: &DisorderField, d: usize, n: usize, c: Coupling) -> f64 {
    let w0 = field.omega_at(&vec![0; d]);
    let mut terms = Vec::with_capacity(2 * d);
    for k in 0..d {
        for dir in [1, -1] {
            let mut e = vec![0; d];
            e[k] = dir;
            terms.push(c.beta * (w0 + field.omega_at(&e)));
        }
    }
    -2.0 * c.h + log_sum_exp(&terms) - n as f64 * (2.0 * d as f64).ln()
}
