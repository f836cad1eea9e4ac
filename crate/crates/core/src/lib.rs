//! Numerical workbench for the linear and nonlinear stability of symmetric
//! channel flows `(U(y), 0)` on `y ∈ [-1, 1]` at high Reynolds number.
//!
//! The crate provides, per Fourier mode `α`:
//!
//! * symmetric background profiles with critical-layer geometry ([`profiles`]),
//! * Chebyshev collocation machinery: differentiation, quadrature, Helmholtz
//!   and clamped solves, Sobolev-type norms ([`spectral`]),
//! * the limiting-absorption Rayleigh solver and the coercive / Hardy-type /
//!   single-point inequality checks ([`rayleigh`]),
//! * Orr–Sommerfeld solves under Navier-slip and non-slip boundary
//!   conditions, resolvent-norm sweeps and scaling-law fits
//!   ([`orr_sommerfeld`]),
//! * complex Airy evaluation and the boundary-layer corrector algebra
//!   ([`boundary_layer`]),
//! * linear (viscous and inviscid) time integration with weighted space-time
//!   functionals ([`evolution`]),
//! * a desk-scale pseudo-spectral nonlinear solver and threshold sweeps
//!   ([`nonlinear`]).
//!
//! Every inequality check is recorded as an [`estimate::EstimateCheck`] so
//! sweeps can report the empirical constants behind each bound.

pub mod acceptance;
pub mod boundary_layer;
pub mod estimate;
pub mod evolution;
pub mod linalg;
pub mod nonlinear;
pub mod orr_sommerfeld;
pub mod profiles;
pub mod rayleigh;
pub mod spectral;
pub mod sweep;

pub use estimate::{EstimateCheck, ScalingFit};
pub use profiles::{CriticalLayer, FlowProfile, ProfileKind};
pub use spectral::{Field, NormKind, SpectralWorkspace};

use thiserror::Error;

/// Workbench-wide error type.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid profile: {0}")]
    Profile(String),
    #[error("parameter out of range: {0}")]
    OutOfRange(String),
    #[error("precondition violated: {0}")]
    Precondition(String),
    #[error("linear algebra failure: {0}")]
    Linalg(String),
    #[error("grid too coarse: {0}")]
    Unresolved(String),
    #[error("numerical failure: {0}")]
    Numerical(String),
}

pub type Result<T> = std::result::Result<T, Error>;

impl From<ndarray_linalg::error::LinalgError> for Error {
    fn from(e: ndarray_linalg::error::LinalgError) -> Self {
        Error::Linalg(e.to_string())
    }
}
