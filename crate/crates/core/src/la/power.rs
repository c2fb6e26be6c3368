use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::error::Result;
use crate::la::operator::LinearOperator;
use crate::la::vector::{norm2, scale};
use crate::Real;

#[derive(Clone, Copy, Debug, Serialize)]
pub struct PowerEstimate<T> {
    pub value: T,
    pub converged: bool,
    pub iterations: usize,
}

/// Spectral-radius estimate `||A x_k||` from a seeded random start vector.
///
/// Accurate for symmetric operators; for nonsymmetric ones the result is only
/// a safeguard estimate. An unconverged run still returns its best value.
pub fn power_iteration<T: Real>(
    a: &dyn LinearOperator<T>,
    tol: T,
    max_iter: usize,
    seed: u64,
) -> Result<PowerEstimate<T>> {
    let n = a.dim();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut x: Vec<T> = (0..n).map(|_| T::lit(rng.gen_range(-1.0..1.0))).collect();
    let nx = norm2(&x);
    if n == 0 || nx == T::zero() {
        return Ok(PowerEstimate {
            value: T::zero(),
            converged: true,
            iterations: 0,
        });
    }
    scale(T::one() / nx, &mut x);
    let mut y = vec![T::zero(); n];
    let mut value = T::zero();
    for it in 1..=max_iter {
        a.apply(&x, &mut y)?;
        let ny = norm2(&y);
        if ny == T::zero() {
            return Ok(PowerEstimate {
                value: T::zero(),
                converged: true,
                iterations: it,
            });
        }
        let done = (ny - value).abs() <= tol * ny;
        value = ny;
        std::mem::swap(&mut x, &mut y);
        scale(T::one() / ny, &mut x);
        if done {
            return Ok(PowerEstimate {
                value,
                converged: true,
                iterations: it,
            });
        }
    }
    Ok(PowerEstimate {
        value,
        converged: false,
        iterations: max_iter,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::la::sparse::CsrMatrix;

    #[test]
    fn dominant_diagonal_entry() {
        let a = CsrMatrix::<f64>::from_diagonal(&[5.0, 1.0]);
        let est = power_iteration(&a, 1e-12, 500, 1).unwrap();
        assert!(est.converged);
        assert!((est.value - 5.0).abs() < 1e-8);
    }

    #[test]
    fn zero_operator() {
        let a = CsrMatrix::from_diagonal(&[0.0, 0.0, 0.0]);
        let est = power_iteration(&a, 1e-12, 10, 1).unwrap();
        assert_eq!(est.value, 0.0);
    }
}
