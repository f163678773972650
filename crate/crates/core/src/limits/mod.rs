//! Numerical evaluation of the limiting objects: the kernel `f`, the point
//! process `𝒫` and field `𝒲`, the lattice field `𝒳`, the escape
//! probability, hitting probabilities and the constant `c_d(ĥ)`.

pub mod dirichlet;
pub mod functionals;
pub mod gamma;
pub mod green;
pub mod kernel;
pub mod ppp;
pub mod special;

pub use dirichlet::{c_d_constant, c_d_from_lambda, lambda_1, lambda_1_grid, unit_volume_radius};
pub use functionals::{estimate_w, estimate_x, hill_estimator, HitTable, WEstimate, XEstimate};
pub use gamma::{gamma_d_estimate, non_return_estimate, GammaEstimate};
pub use green::{green_function, hit_prob_infty, GreenMethod, HitProb, LAMBDA_3, LAMBDA_3_PROVENANCE};
pub use kernel::{f_kernel, f_radial};
pub use ppp::{sample_ppp, Atom, WeightedPointProcess};
