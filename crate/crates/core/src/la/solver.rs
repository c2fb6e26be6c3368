use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::la::banded::BandCholesky;
use crate::la::cg::{cg, CgOptions};
use crate::la::operator::LinearOperator;
use crate::la::sparse::CsrMatrix;
use crate::Real;

/// How SPD inner systems (mass, Schur factors, series splitting) are solved.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum InnerSolverKind {
    /// Banded Cholesky in natural ordering.
    #[default]
    Cholesky,
    /// Jacobi-preconditioned conjugate gradients.
    Cg,
}

enum Backend<T: Real> {
    Cholesky(BandCholesky<T>),
    Cg {
        op: Box<dyn LinearOperator<T> + Send + Sync>,
        diagonal: Vec<T>,
        tol: T,
    },
}

/// Solver for an SPD system; as a [`LinearOperator`] it applies the inverse.
pub struct SpdSolver<T: Real> {
    n: usize,
    label: String,
    backend: Backend<T>,
}

impl<T: Real> std::fmt::Debug for SpdSolver<T> {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let kind = match self.backend {
            Backend::Cholesky(_) => "cholesky",
            Backend::Cg { .. } => "cg",
        };
        f.debug_struct("SpdSolver")
            .field("n", &self.n)
            .field("label", &self.label)
            .field("kind", &kind)
            .finish()
    }
}

impl<T: Real> SpdSolver<T> {
    pub fn new(matrix: CsrMatrix<T>, kind: InnerSolverKind, cg_tol: T, label: impl Into<String>) -> Result<Self> {
        let label = label.into();
        let n = matrix.nrows();
        let backend = match kind {
            InnerSolverKind::Cholesky => Backend::Cholesky(BandCholesky::factor(&matrix, &label)?),
            InnerSolverKind::Cg => {
                let diagonal = matrix.diagonal();
                if let Some(i) = diagonal.iter().position(|&d| !(d > T::zero())) {
                    return Err(Error::NotPositiveDefinite {
                        operator: label,
                        pivot: i,
                        value: diagonal[i].as_f64(),
                    });
                }
                Backend::Cg {
                    op: Box::new(matrix),
                    diagonal,
                    tol: cg_tol,
                }
            }
        };
        Ok(Self { n, label, backend })
    }

    /// CG on an operator that is never assembled.
    pub fn matrix_free(
        op: Box<dyn LinearOperator<T> + Send + Sync>,
        diagonal: Vec<T>,
        cg_tol: T,
        label: impl Into<String>,
    ) -> Self {
        Self {
            n: op.dim(),
            label: label.into(),
            backend: Backend::Cg {
                op,
                diagonal,
                tol: cg_tol,
            },
        }
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn solve(&self, b: &[T]) -> Result<Vec<T>> {
        let mut x = vec![T::zero(); self.n];
        self.apply(b, &mut x)?;
        Ok(x)
    }
}

impl<T: Real> LinearOperator<T> for SpdSolver<T> {
    fn dim(&self) -> usize {
        self.n
    }

    fn apply(&self, b: &[T], x: &mut [T]) -> Result<()> {
        crate::la::operator::check_dims(self.n, b, x)?;
        match &self.backend {
            Backend::Cholesky(f) => {
                x.copy_from_slice(b);
                f.solve_in_place(x);
            }
            Backend::Cg { op, diagonal, tol } => {
                let opts = CgOptions {
                    tol: *tol,
                    diagonal: Some(diagonal),
                    label: &self.label,
                    ..CgOptions::default()
                };
                let (sol, _) = cg(op.as_ref(), b, &opts)?;
                x.copy_from_slice(&sol);
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::la::sparse::CooBuilder;

    fn laplace_plus_shift(n: usize) -> CsrMatrix<f64> {
        let mut b = CooBuilder::new(n, n);
        for i in 0..n {
            b.push(i, i, 2.5);
            if i + 1 < n {
                b.push(i, i + 1, -1.0);
                b.push(i + 1, i, -1.0);
            }
        }
        b.build(false)
    }

    #[test]
    fn both_backends_agree() {
        let a = laplace_plus_shift(20);
        let rhs: Vec<f64> = (0..20).map(|i| (i as f64).sin()).collect();
        let x1 = SpdSolver::new(a.clone(), InnerSolverKind::Cholesky, 1e-12, "a").unwrap().solve(&rhs).unwrap();
        let x2 = SpdSolver::new(a, InnerSolverKind::Cg, 1e-13, "a").unwrap().solve(&rhs).unwrap();
        for (p, q) in x1.iter().zip(&x2) {
            assert!((p - q).abs() < 1e-10);
        }
    }
}
