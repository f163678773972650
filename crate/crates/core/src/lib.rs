//! Simulation and numerical analysis of random-walk polymers penalized by
//! their range in heavy-tailed random environments on Z^d.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod environment;
pub mod error;
pub mod exper;
pub mod lattice;
pub mod limits;
pub mod logspace;
pub mod lpp;
pub mod par;
pub mod params;
pub mod partition;
pub mod rng;
pub mod variational;
pub mod walk;

pub use error::{Error, Result};
pub use params::{classify_region, ModelParams, Region, RegionReport, TheoremTag};
