use crate::error::{Error, Result};
use crate::Real;

/// Linear map `x -> A x`, realized by a matrix, a block composition, or a
/// preconditioner application. Applications may fail when they hide inner
/// iterative solves.
pub trait LinearOperator<T: Real> {
    fn dim(&self) -> usize;

    fn apply(&self, x: &[T], y: &mut [T]) -> Result<()>;

    fn apply_vec(&self, x: &[T]) -> Result<Vec<T>> {
        let mut y = vec![T::zero(); self.dim()];
        self.apply(x, &mut y)?;
        Ok(y)
    }
}

impl<T: Real, L: LinearOperator<T> + ?Sized> LinearOperator<T> for &L {
    fn dim(&self) -> usize {
        (**self).dim()
    }
    fn apply(&self, x: &[T], y: &mut [T]) -> Result<()> {
        (**self).apply(x, y)
    }
}

impl<T: Real, L: LinearOperator<T> + ?Sized> LinearOperator<T> for std::sync::Arc<L> {
    fn dim(&self) -> usize {
        (**self).dim()
    }
    fn apply(&self, x: &[T], y: &mut [T]) -> Result<()> {
        (**self).apply(x, y)
    }
}

impl<T: Real, L: LinearOperator<T> + ?Sized> LinearOperator<T> for Box<L> {
    fn dim(&self) -> usize {
        (**self).dim()
    }
    fn apply(&self, x: &[T], y: &mut [T]) -> Result<()> {
        (**self).apply(x, y)
    }
}

#[derive(Clone, Copy, Debug)]
pub struct IdentityOp(pub usize);

impl<T: Real> LinearOperator<T> for IdentityOp {
    fn dim(&self) -> usize {
        self.0
    }
    fn apply(&self, x: &[T], y: &mut [T]) -> Result<()> {
        check_dims(self.0, x, y)?;
        y.copy_from_slice(x);
        Ok(())
    }
}

/// `y = a * op(x)`, used to scale preconditioner blocks without copying matrices.
pub struct Scaled<T, L> {
    pub factor: T,
    pub op: L,
}

impl<T: Real, L: LinearOperator<T>> LinearOperator<T> for Scaled<T, L> {
    fn dim(&self) -> usize {
        self.op.dim()
    }
    fn apply(&self, x: &[T], y: &mut [T]) -> Result<()> {
        self.op.apply(x, y)?;
        for v in y.iter_mut() {
            *v *= self.factor;
        }
        Ok(())
    }
}

/// Closure-backed operator.
pub struct FnOp<F> {
    pub n: usize,
    pub f: F,
}

impl<T: Real, F: Fn(&[T], &mut [T]) -> Result<()>> LinearOperator<T> for FnOp<F> {
    fn dim(&self) -> usize {
        self.n
    }
    fn apply(&self, x: &[T], y: &mut [T]) -> Result<()> {
        check_dims(self.n, x, y)?;
        (self.f)(x, y)
    }
}

pub(crate) fn check_dims<T>(n: usize, x: &[T], y: &[T]) -> Result<()> {
    if x.len() != n || y.len() != n {
        return Err(Error::DimensionMismatch(format!(
            "operator of size {n} applied to x len {} into y len {}",
            x.len(),
            y.len()
        )));
    }
    Ok(())
}
