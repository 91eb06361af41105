//! Two-phase incompressible flow with a phase-field interface.
//!
//! Each time step solves the variable-density Navier-Stokes equations and
//! the Allen-Cahn equation together through a stabilized fixed-point loop:
//! a linearized phase solve, a density/viscosity update, then a linearized
//! momentum/pressure solve, repeated until the iterates stop moving.
//!
//! Pointwise formulas (mixture laws, manufactured fields, quadrature, bound
//! constants) are generic over [`Scalar`]; assembly and solves use `f64`.

pub mod allen_cahn;
pub mod cli;
pub mod coupling;
pub mod diagnostics;
pub mod discretization;
pub mod error;
pub mod fields;
pub mod mms;
pub mod navier_stokes;
pub mod norms;
pub mod oracle;
pub mod scalar;
pub mod scenario;

pub use error::{Error, Result};
pub use scalar::Scalar;

/// Parameters in double precision.
pub type Params = fields::MixtureParams<f64>;
/// Manufactured solution in double precision.
pub type Mms = mms::ManufacturedSolution<f64>;
/// Quadrature rule in double precision.
pub type Quadrature = discretization::QuadratureRule<f64>;
