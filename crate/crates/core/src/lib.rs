//! Sweeping (double-sweep optimized Schwarz) preconditioners for
//! time-harmonic waves on tensor-product grids over stratified media.
//!
//! The crate is organised bottom-up:
//!
//! * [`coeffmodel`]: radial material profiles, the separable coefficient
//!   model of the SH-wave and academic disk problems, PML complex scaling
//!   and velocity perturbations.
//! * [`fem`]: 1D Gauss–Lobatto spectral elements, Kronecker assembly of the
//!   2D system, general assembly for non-separable media, loads and norms.
//! * [`linalg`]: banded LU and small dense helpers.
//! * [`sweep`]: layer decomposition and the double-sweep preconditioner.
//! * [`dtn`]: interface transmission operators (moving PML, tensor-product
//!   eigenbasis, exact Schur complement).
//! * [`krylov`]: right-preconditioned full GMRES.
//! * [`sensitivity`]: closed-form and Riccati-based 1D DtN sensitivity.
//! * [`experiment`]: config-driven experiment drivers used by the CLI.

pub mod coeffmodel;
pub mod dtn;
pub mod error;
pub mod experiment;
pub mod fem;
pub mod krylov;
pub mod linalg;
pub mod sensitivity;
pub mod sweep;

pub use error::{Error, Result};
pub use num_complex::Complex64 as C64;

/// Default GMRES tolerance used throughout the experiments.
pub const DEFAULT_TOLERANCE: f64 = 1e-7;
