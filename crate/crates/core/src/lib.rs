//! Finite-element solver for the Ohta-Kawasaki phase-field model with
//! block preconditioners for the linearized convex-splitting systems.
//!
//! Numerics are generic over [`Real`] (`f32` or `f64`); the aliases below
//! fix the scalar to `f64`.

pub mod diagnostics;
pub mod error;
pub mod fem;
pub mod la;
pub mod precond;
pub mod scheme;

mod scalar;

pub use error::{Error, Result};
pub use scalar::Real;

pub type Mesh = fem::Mesh<f64>;
pub type CsrMatrix = la::CsrMatrix<f64>;
pub type DenseMatrix = la::DenseMatrix<f64>;
pub type Discretization = scheme::Discretization<f64>;
pub type Params = scheme::Params<f64>;
pub type Trajectory = scheme::Trajectory<f64>;
pub type PrecondBuilder = precond::PrecondBuilder<f64>;
pub type NeumannInverse = precond::NeumannInverse<f64>;
