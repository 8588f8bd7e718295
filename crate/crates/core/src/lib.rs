//! Numerical laboratory for the viscous Hamilton-Jacobi equation
//! u_t = u_xx + |u_x|^p on a half-line or interval, p > 2.
//!
//! Covers the steady states and similarity variables, the spectrum and heat
//! kernels of the linearization around the singular steady state, implicit
//! finite-difference solvers through gradient blow-up and recovery of the
//! boundary condition, intersection tracking, rate fitting, and a decision
//! procedure for the three-strand positive braid monoid.

pub mod braid;
pub mod error;
pub mod grid;
pub mod interp;
pub mod kernel;
pub mod quad;
pub mod rates;
pub mod solver;
pub mod spectral;
pub mod steady_core;
pub mod zeros;

pub use error::{Error, Result};
pub use grid::{Grid, GridFunction};
pub use spectral::{EigenPoly, WeightedSpace};
pub use steady_core::{ModelParams, SimilarityFrame};

/// Crate version, recorded in experiment manifests.
pub const VERSION: &str = env!("CARGO_PKG_VERSION");
