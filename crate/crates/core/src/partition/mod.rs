//! Partition functions of the range-penalized polymer, exact and sampled.

pub mod exact;
pub mod holder;
pub mod mc;
pub mod mgf;
pub mod polymer;
pub mod strata;

pub use exact::{log_partition_exact, partition_exact, two_site_log_partition};
pub use holder::{holder_sandwich_check, HolderReport};
pub use mc::partition_mc;
pub use mgf::truncated_log_mgf;
pub use polymer::{polymer_expectation, Expectation, ExpectationMethod, McmcConfig, Observable};
pub use strata::{default_radii, partition_homogeneous_strata};

use crate::environment::DisorderField;
use crate::error::{Error, Result};
use crate::params::ModelParams;
use crate::walk::PathClass;
use serde::Serialize;
use std::fmt;
use std::sync::Arc;

/// How a partition function was evaluated.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    Exact,
    PlainMc,
    ConfinedStrata,
}

/// Scale on which `std_err` is expressed.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum ErrScale {
    /// Standard error of `Z` itself.
    Linear,
    /// Standard error of `log Z` (delta method), used when `Z` is outside
    /// the floating-point range.
    Log,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PartitionEstimate {
    pub log_value: f64,
    pub std_err: f64,
    pub err_scale: ErrScale,
    pub n_samples: u64,
    pub method: Method,
    /// Upper bound on the mass left out by the estimator.
    pub truncation_bound: f64,
}

impl PartitionEstimate {
    pub(crate) fn exact(log_value: f64) -> Self {
        PartitionEstimate {
            log_value,
            std_err: 0.0,
            err_scale: ErrScale::Linear,
            n_samples: 0,
            method: Method::Exact,
            truncation_bound: 0.0,
        }
    }

    /// Build from the log mean and log standard error of a sample mean.
    pub(crate) fn sampled(log_value: f64, log_se: f64, n_samples: u64, method: Method, truncation_bound: f64) -> Self {
        let (std_err, err_scale) = if log_value.abs() < 700.0 && log_se < 700.0 {
            (log_se.exp(), ErrScale::Linear)
        } else {
            ((log_se - log_value).exp(), ErrScale::Log)
        };
        PartitionEstimate {
            log_value,
            std_err,
            err_scale,
            n_samples,
            method,
            truncation_bound,
        }
    }

    pub fn value(&self) -> f64 {
        self.log_value.exp()
    }

    /// Log of the standard error of `Z`.
    pub fn log_std_err(&self) -> f64 {
        match self.err_scale {
            ErrScale::Linear => self.std_err.ln(),
            ErrScale::Log => self.std_err.ln() + self.log_value,
        }
    }

    /// Standard error of `log Z`.
    pub fn log_scale_err(&self) -> f64 {
        match self.err_scale {
            ErrScale::Linear => self.std_err / self.value(),
            ErrScale::Log => self.std_err,
        }
    }
}

/// What an event or observable sees of a path.
#[derive(Debug, Clone, Copy)]
pub struct PathFeatures<'a> {
    pub n: usize,
    pub range_size: u64,
    pub max_disp_sq: i64,
    pub endpoint: &'a [i32],
}

impl PathFeatures<'_> {
    pub fn max_disp(&self) -> f64 {
        (self.max_disp_sq as f64).sqrt()
    }
}

type Predicate = dyn Fn(&PathFeatures<'_>) -> bool + Send + Sync;

/// Path events used to restrict partition functions.
#[derive(Clone)]
pub enum Event {
    All,
    RangeEq(u64),
    RangeAtLeast(u64),
    RangeAtMost(u64),
    MaxDispAtMost(f64),
    MaxDispAbove(f64),
    InClass(PathClass),
    Not(Box<Event>),
    Custom(Arc<Predicate>),
}

impl fmt::Debug for Event {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Event::All => write!(f, "All"),
            Event::RangeEq(k) => write!(f, "RangeEq({k})"),
            Event::RangeAtLeast(k) => write!(f, "RangeAtLeast({k})"),
            Event::RangeAtMost(k) => write!(f, "RangeAtMost({k})"),
            Event::MaxDispAtMost(r) => write!(f, "MaxDispAtMost({r})"),
            Event::MaxDispAbove(r) => write!(f, "MaxDispAbove({r})"),
            Event::InClass(c) => write!(f, "InClass({c:?})"),
            Event::Not(e) => write!(f, "Not({e:?})"),
            Event::Custom(_) => write!(f, "Custom"),
        }
    }
}

impl Event {
    pub fn custom(f: impl Fn(&PathFeatures<'_>) -> bool + Send + Sync + 'static) -> Self {
        Event::Custom(Arc::new(f))
    }

    #[inline]
    pub fn test(&self, x: &PathFeatures<'_>) -> bool {
        let tol = 1e-9;
        match self {
            Event::All => true,
            Event::RangeEq(k) => x.range_size == *k,
            Event::RangeAtLeast(k) => x.range_size >= *k,
            Event::RangeAtMost(k) => x.range_size <= *k,
            Event::MaxDispAtMost(r) => (x.max_disp_sq as f64) <= r * r + tol,
            Event::MaxDispAbove(r) => (x.max_disp_sq as f64) > r * r + tol,
            Event::InClass(c) => c.contains(x.max_disp(), x.range_size as f64),
            Event::Not(e) => !e.test(x),
            Event::Custom(f) => f(x),
        }
    }
}

/// `(β, h)` pair entering the path weight `exp(β Σ_{x∈R} ω_x − h |R|)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Coupling {
    pub beta: f64,
    pub h: f64,
}

impl Coupling {
    pub fn new(beta: f64, h: f64) -> Self {
        Coupling { beta, h }
    }

    pub fn at(params: &ModelParams, n: usize) -> Self {
        Coupling {
            beta: params.beta_n(n),
            h: params.h_n(n),
        }
    }

    #[inline]
    pub fn log_weight(&self, site_sum: f64, range_size: u64) -> f64 {
        let energy = if self.beta == 0.0 { 0.0 } else { self.beta * site_sum };
        energy - self.h * range_size as f64
    }
}

pub(crate) fn check_field(field: &DisorderField, params: &ModelParams) -> Result<()> {
    params.validate_numeric()?;
    if (field.alpha - params.alpha).abs() > 1e-12 || (field.p - params.p).abs() > 1e-12 {
        return Err(Error::invalid(format!(
            "disorder field (alpha = {}, p = {}) does not match model (alpha = {}, p = {})",
            field.alpha, field.p, params.alpha, params.p
        )));
    }
    Ok(())
}
