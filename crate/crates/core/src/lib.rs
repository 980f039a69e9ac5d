//! Mixed correlation functions of real and complex zeros of random polynomials
//! with independent, absolutely continuous real coefficients.

pub mod cli;
pub mod closed_forms;
pub mod density;
pub mod engine;
pub mod lab;
pub mod error;
pub mod qmc;
pub mod quadrature;
pub mod rng;
pub mod simplex;
pub mod symmetric;

pub use density::{CoefficientDensity, CoefficientModel};
pub use engine::{Backend, BackendSettings, IntegralEstimate};
pub use error::{Error, Result};
pub use symmetric::{SymmetricProfile, ZeroConfiguration};
