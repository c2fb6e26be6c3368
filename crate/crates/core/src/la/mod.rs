//! Linear algebra kernel: CSR storage, matrix-free operators, Krylov
//! solvers, banded Cholesky, and a small dense eigensolver.

pub mod banded;
pub mod cg;
pub mod dense;
pub mod gmres;
pub mod operator;
pub mod power;
pub mod solver;
pub mod sparse;
pub mod vector;

pub use banded::BandCholesky;
pub use cg::{cg, CgOptions};
pub use dense::{DenseMatrix, DENSE_LIMIT};
pub use gmres::{gmres, gmres_from, GmresOptions, SolveReport};
pub use operator::{IdentityOp, LinearOperator};
pub use power::{power_iteration, PowerEstimate};
pub use solver::{InnerSolverKind, SpdSolver};
pub use sparse::{CooBuilder, CsrMatrix};
