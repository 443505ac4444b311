//! Nondegenerate parametric oscillator driven by two squeezed vacuum reservoirs.
//!
//! [`analytic`] holds the closed-form Gaussian results, [`fock`] an independent
//! truncated-Fock Lindblad simulator, and [`validation`] compares the two.

pub mod analytic;
pub mod error;
pub mod fock;
pub mod params;
pub mod validation;

pub use error::{NdpoError, Result};
pub use params::{
    classify_regime, lambda_coeffs, reservoir_stats, LambdaCoeffs, ModelParams, ParamsConfig,
    Regime, RegimeTag, ReservoirStats,
};

pub const VERSION: &str = env!("CARGO_PKG_VERSION");
