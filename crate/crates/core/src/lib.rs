//! Casimir energy between two plasma-model half-spaces separated by a
//! vacuum gap, in the imaginary-frequency representation and in the
//! real-frequency mode representation, with the tools to cross-check them.
//!
//! Units are ħ = c = 1 throughout.

pub mod analysis;
pub mod config;
pub mod energy_imag;
pub mod energy_real;
pub mod error;
pub mod modes;
pub mod optics;
pub mod quadrature;
mod roots;

pub use config::{dimensionless_lambda, EnergyBreakdown, HalfspaceConfig, Polarization, QuadratureSpec};
pub use error::{Error, Result};
