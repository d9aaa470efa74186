//! Spectral toolkit for free and perturbed massless Dirac operators on
//! periodic grids: Clifford generators, Fourier-multiplier operators, the
//! conjugate operator and its commutators, weighted resolvent estimates,
//! Kato smoothness, and time-domain wave operators.

pub mod clifford;
pub mod commutators;
pub mod error;
pub mod field_io;
pub mod grid;
pub mod lap;
pub mod linalg;
pub mod operators;
pub mod power;
pub mod scattering;

pub use error::{Error, Result};

/// Toolkit version embedded in emitted artifacts.
pub const VERSION: &str = env!("CARGO_PKG_VERSION");
