//! Stochastic time-fractional diffusion with a nonlocal jump part:
//! Mittag-Leffler functions, the Fourier symbol, mildness checks, analytic
//! mean and variance fields, and spectral Monte Carlo simulation.
//!
//! Everything is generic over the scalar type; the aliases below fix it to `f64`.

#![allow(clippy::excessive_precision, clippy::neg_cmp_op_on_partial_ord)]

pub mod error;
pub mod fields;
pub mod mildness;
pub mod quad;
pub mod scalar;
pub mod simulate;
pub mod special;
pub mod symbol;
mod tables;

pub use error::{Error, Result};
pub use scalar::Real;

pub type DiffusionParams = symbol::DiffusionParams<f64>;
pub type KernelSpec = symbol::KernelSpec<f64>;
pub type EvalPolicy = special::EvalPolicy<f64>;
pub type MlOrder = special::MlOrder<f64>;
pub type QuadSpec = fields::QuadSpec<f64>;
pub type Profile = fields::Profile<f64>;
pub type CrossCheck = fields::CrossCheck<f64>;
pub type VarianceSeriesSpec = fields::VarianceSeriesSpec<f64>;
pub type ProbeReport = mildness::ProbeReport<f64>;
pub type GridSpec = simulate::GridSpec<f64>;
pub type SamplePath = simulate::SamplePath<f64>;
pub type EnsembleStats = simulate::EnsembleStats<f64>;
