use std::sync::Arc;

use crate::error::Result;
use crate::la::operator::{check_dims, LinearOperator};
use crate::la::sparse::CsrMatrix;
use crate::la::SpdSolver;
use crate::Real;

type SharedOp<T> = Arc<dyn LinearOperator<T> + Send + Sync>;

/// `K~ = N M^-1 N` with `N = M + eps sqrt(zeta) S`; applying the operator
/// gives `K~^-1 v = N^-1 M N^-1 v`.
pub struct SchurApprox<T: Real> {
    n_solver: SpdSolver<T>,
    n_matrix: CsrMatrix<T>,
    mass: Arc<CsrMatrix<T>>,
}

impl<T: Real> SchurApprox<T> {
    pub fn new(n_solver: SpdSolver<T>, n_matrix: CsrMatrix<T>, mass: Arc<CsrMatrix<T>>) -> Self {
        Self {
            n_solver,
            n_matrix,
            mass,
        }
    }

    /// `N = M + eps sqrt(zeta) S`.
    pub fn factor_matrix(&self) -> &CsrMatrix<T> {
        &self.n_matrix
    }

    /// `K~ v`, which needs an inverse of `M`.
    pub fn forward(&self, minv: &dyn LinearOperator<T>, v: &[T]) -> Result<Vec<T>> {
        let t = minv.apply_vec(&self.n_matrix.try_mul_vec(v)?)?;
        Ok(self.n_matrix.mul_vec(&t))
    }
}

impl<T: Real> LinearOperator<T> for SchurApprox<T> {
    fn dim(&self) -> usize {
        self.mass.nrows()
    }

    fn apply(&self, v: &[T], y: &mut [T]) -> Result<()> {
        let t = self.n_solver.solve(v)?;
        let t = self.mass.mul_vec(&t);
        self.n_solver.apply(&t, y)
    }
}

/// Inverse of the block lower-triangular preconditioner
/// `[(1 + sigma dt) M, 0; -(eps^2 S + L), K~]` for the full system.
pub struct BtPreconditioner<T: Real> {
    pub(crate) minv: Arc<SpdSolver<T>>,
    pub(crate) mass: Arc<CsrMatrix<T>>,
    pub(crate) mass_factor: T,
    /// `eps^2 S + L`.
    pub(crate) a: CsrMatrix<T>,
    pub(crate) schur: Arc<SchurApprox<T>>,
}

impl<T: Real> BtPreconditioner<T> {
    /// Multiplies by the preconditioner matrix itself.
    pub fn forward(&self, x: &[T]) -> Result<Vec<T>> {
        let p = self.a.nrows();
        check_dims(2 * p, x, x)?;
        let (x1, x2) = x.split_at(p);
        let mut y = self.mass.mul_vec(x1);
        y.iter_mut().for_each(|v| *v *= self.mass_factor);
        let ax1 = self.a.mul_vec(x1);
        let kx2 = self.schur.forward(self.minv.as_ref(), x2)?;
        y.extend(kx2.iter().zip(&ax1).map(|(&k, &a)| k - a));
        Ok(y)
    }
}

impl<T: Real> LinearOperator<T> for BtPreconditioner<T> {
    fn dim(&self) -> usize {
        2 * self.a.nrows()
    }

    fn apply(&self, r: &[T], z: &mut [T]) -> Result<()> {
        check_dims(self.dim(), r, z)?;
        let p = self.a.nrows();
        let (r1, r2) = r.split_at(p);
        let (z1, z2) = z.split_at_mut(p);
        self.minv.apply(r1, z1)?;
        let c = T::one() / self.mass_factor;
        z1.iter_mut().for_each(|v| *v *= c);
        let mut t = self.a.mul_vec(z1);
        for (ti, &ri) in t.iter_mut().zip(r2) {
            *ti += ri;
        }
        self.schur.apply(&t, z2)
    }
}

/// Inverse of `[M, zeta S; -eps^2 S, M + 2 eps sqrt(zeta) S]`, whose Schur
/// complement `M + 2 eps sqrt(zeta) S + eps^2 zeta S M^-1 S` is exactly `K~`.
/// It does not depend on `L`.
pub struct ElPreconditioner<T: Real> {
    pub(crate) minv: Arc<SpdSolver<T>>,
    pub(crate) mass: Arc<CsrMatrix<T>>,
    pub(crate) stiffness: Arc<CsrMatrix<T>>,
    pub(crate) eps: T,
    pub(crate) zeta: T,
    pub(crate) schur: Arc<SchurApprox<T>>,
}

impl<T: Real> ElPreconditioner<T> {
    pub fn forward(&self, x: &[T]) -> Result<Vec<T>> {
        let p = self.mass.nrows();
        check_dims(2 * p, x, x)?;
        let (x1, x2) = x.split_at(p);
        let eps2 = self.eps * self.eps;
        let c = T::lit(2.0) * self.eps * self.zeta.sqrt();
        let (mx1, mx2) = (self.mass.mul_vec(x1), self.mass.mul_vec(x2));
        let (sx1, sx2) = (self.stiffness.mul_vec(x1), self.stiffness.mul_vec(x2));
        let mut y: Vec<T> = (0..p).map(|i| mx1[i] + self.zeta * sx2[i]).collect();
        y.extend((0..p).map(|i| -eps2 * sx1[i] + mx2[i] + c * sx2[i]));
        Ok(y)
    }
}

impl<T: Real> LinearOperator<T> for ElPreconditioner<T> {
    fn dim(&self) -> usize {
        2 * self.mass.nrows()
    }

    fn apply(&self, r: &[T], z: &mut [T]) -> Result<()> {
        check_dims(self.dim(), r, z)?;
        let p = self.mass.nrows();
        let (r1, r2) = r.split_at(p);
        let (z1, z2) = z.split_at_mut(p);
        let y = self.minv.solve(r1)?;
        let eps2 = self.eps * self.eps;
        let sy = self.stiffness.mul_vec(&y);
        let t: Vec<T> = r2.iter().zip(&sy).map(|(&a, &b)| a + eps2 * b).collect();
        self.schur.apply(&t, z2)?;
        let corr = self.minv.solve(&self.stiffness.mul_vec(z2))?;
        for ((zi, &yi), &ci) in z1.iter_mut().zip(&y).zip(&corr) {
            *zi = yi - self.zeta * ci;
        }
        Ok(())
    }
}

/// Inverse of `P = (1/alpha) diag(A, alpha I) [alpha I, -M; M, B]` for the
/// saddle form, through the factorization
/// `P = (1/alpha) diag(A, alpha I) [I, 0; M/alpha, I] diag(alpha I, B + M^2/alpha) [I, -M/alpha; 0, I]`.
pub struct MhssPreconditioner<T: Real> {
    pub(crate) a_inv: SharedOp<T>,
    /// `A` itself, used only by [`MhssPreconditioner::forward`].
    pub(crate) a: CsrMatrix<T>,
    pub(crate) mass: Arc<CsrMatrix<T>>,
    /// `B = zeta S`.
    pub(crate) b: CsrMatrix<T>,
    /// Inverse of `B + M^2 / alpha`.
    pub(crate) d_inv: SpdSolver<T>,
    pub(crate) alpha: T,
}

impl<T: Real> MhssPreconditioner<T> {
    /// MHSS with direct solves for `A` and `B + M^2 / alpha`.
    pub fn exact(a: CsrMatrix<T>, mass: Arc<CsrMatrix<T>>, b: CsrMatrix<T>, alpha: T) -> Result<Self> {
        let kind = crate::la::InnerSolverKind::Cholesky;
        let tol = T::lit(1e-12);
        let a_inv: SharedOp<T> = Arc::new(SpdSolver::new(a.clone(), kind, tol, "A")?);
        let d = CsrMatrix::lincomb(T::one(), &b, T::one() / alpha, &mass.matmul(&mass)?)?;
        let d_inv = SpdSolver::new(d, kind, tol, "B + M^2 / alpha")?;
        Ok(Self {
            a_inv,
            a,
            mass,
            b,
            d_inv,
            alpha,
        })
    }

    pub fn alpha(&self) -> T {
        self.alpha
    }

    /// `P x = [A x1 - A M x2 / alpha; M x1 + B x2]`.
    pub fn forward(&self, x: &[T]) -> Result<Vec<T>> {
        let p = self.mass.nrows();
        check_dims(2 * p, x, x)?;
        let (x1, x2) = x.split_at(p);
        let mx2 = self.mass.mul_vec(x2);
        let t: Vec<T> = x1.iter().zip(&mx2).map(|(&a, &b)| a - b / self.alpha).collect();
        let mut y = self.a.mul_vec(&t);
        let mx1 = self.mass.mul_vec(x1);
        let bx2 = self.b.mul_vec(x2);
        y.extend(mx1.iter().zip(&bx2).map(|(&a, &b)| a + b));
        Ok(y)
    }
}

impl<T: Real> LinearOperator<T> for MhssPreconditioner<T> {
    fn dim(&self) -> usize {
        2 * self.mass.nrows()
    }

    fn apply(&self, r: &[T], z: &mut [T]) -> Result<()> {
        check_dims(self.dim(), r, z)?;
        let p = self.mass.nrows();
        let (r1, r2) = r.split_at(p);
        let (s1, s2) = z.split_at_mut(p);
        let inv_alpha = T::one() / self.alpha;
        // s1 = alpha A^-1 r1 is later divided by alpha; only A^-1 r1 is kept
        self.a_inv.apply(r1, s1)?;
        let ms1 = self.mass.mul_vec(s1);
        let t: Vec<T> = r2.iter().zip(&ms1).map(|(&a, &b)| a - b).collect();
        self.d_inv.apply(&t, s2)?;
        let ms2 = self.mass.mul_vec(s2);
        for (a, &b) in s1.iter_mut().zip(&ms2) {
            *a += inv_alpha * b;
        }
        Ok(())
    }
}
