//! Lindeberg swapping bounds and Monte Carlo universality experiments.
//!
//! The library computes influence measures `λ_r` of smooth functions, the
//! invariance bounds they feed, soft-max smoothing of finite families, and
//! paired Monte Carlo estimates that check each bound on random matrices,
//! the Sherrington–Kirkpatrick model, and maxima of random walks.

pub mod distributions;
pub mod error;
pub mod harness;
pub mod numeric;
pub mod rng;
pub mod sk;
pub mod smoothmax;
pub mod swap;
pub mod walks;
pub mod wigner;

pub use distributions::{DistributionFamily, DistributionSpec, MomentProfile, MomentValue};
pub use error::{Error, Result};
