//! Spectral theory of `L = −(1/V) d²/dx²` for perturbed-periodic step coefficients, and
//! breather ground states of `V u_tt − u_xx = Γ|u|^{p−1}u`.

// `!(x > 0.0)` is used on purpose: it also rejects NaN
#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::needless_range_loop)]

pub mod assumptions;
pub mod bounds;
pub mod breather;
pub mod cli;
pub mod config;
pub mod error;
pub mod exact;
pub mod linalg;
pub mod measure;
pub mod potential;
pub mod quadrature;
pub mod spectrum;
pub mod transfer;
pub mod tridiag;

pub use error::{Error, Result};
pub use potential::{
    make_dislocation, make_dislocation_exact, make_interface, make_periodic, make_periodic_exact,
    NonlinearityProfile, PerturbedPeriodicPotential, Side, StepProfile,
};
