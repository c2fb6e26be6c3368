use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::la::operator::{check_dims, LinearOperator};
use crate::la::sparse::CsrMatrix;
use crate::scheme::Params;
use crate::Real;

/// Which of the equivalent 2p x 2p systems is being applied.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum BlockForm {
    /// `[(1 + sigma dt) M, dt S; -eps^2 S - L, M]`
    Full,
    /// First block row of `Full` divided by `1 + sigma dt`:
    /// `[M, zeta S; -eps^2 S - L, M]`.
    Scaled,
    /// `[eps^2 S + L, -M; M, zeta S]`.
    Saddle,
}

impl BlockForm {
    /// Right-hand side of this form given the vectors `F` and `E` of the
    /// full system. All three forms share the solution `(U, W)`.
    pub fn rhs<T: Real>(self, f: &[T], e: &[T], params: &Params<T>) -> Vec<T> {
        let c = T::one() / params.mass_factor();
        let mut out = Vec::with_capacity(f.len() + e.len());
        match self {
            BlockForm::Full => {
                out.extend_from_slice(f);
                out.extend_from_slice(e);
            }
            BlockForm::Scaled => {
                out.extend(f.iter().map(|&v| v * c));
                out.extend_from_slice(e);
            }
            BlockForm::Saddle => {
                out.extend(e.iter().map(|&v| -v));
                out.extend(f.iter().map(|&v| v * c));
            }
        }
        out
    }
}

/// Matrix-free block operator over `M`, `S` and `L`.
#[derive(Clone, Copy, Debug)]
pub struct BlockOperator<'a, T: Real> {
    pub form: BlockForm,
    pub mass: &'a CsrMatrix<T>,
    pub stiffness: &'a CsrMatrix<T>,
    pub weighted: &'a CsrMatrix<T>,
    pub params: &'a Params<T>,
}

impl<'a, T: Real> BlockOperator<'a, T> {
    pub fn new(
        form: BlockForm,
        mass: &'a CsrMatrix<T>,
        stiffness: &'a CsrMatrix<T>,
        weighted: &'a CsrMatrix<T>,
        params: &'a Params<T>,
    ) -> Result<Self> {
        let p = mass.nrows();
        for (name, m) in [("stiffness", stiffness), ("weighted mass", weighted)] {
            if m.nrows() != p || m.ncols() != p {
                return Err(Error::DimensionMismatch(format!(
                    "{name} matrix is {}x{}, mass matrix is {p}x{p}",
                    m.nrows(),
                    m.ncols()
                )));
            }
        }
        Ok(Self {
            form,
            mass,
            stiffness,
            weighted,
            params,
        })
    }

    pub fn p(&self) -> usize {
        self.mass.nrows()
    }
}

impl<T: Real> LinearOperator<T> for BlockOperator<'_, T> {
    fn dim(&self) -> usize {
        2 * self.p()
    }

    fn apply(&self, x: &[T], y: &mut [T]) -> Result<()> {
        check_dims(self.dim(), x, y)?;
        let p = self.p();
        let (x1, x2) = x.split_at(p);
        let (y1, y2) = y.split_at_mut(p);
        let eps2 = self.params.eps() * self.params.eps();
        let mx1 = self.mass.mul_vec(x1);
        let mx2 = self.mass.mul_vec(x2);
        let sx1 = self.stiffness.mul_vec(x1);
        let sx2 = self.stiffness.mul_vec(x2);
        let lx1 = self.weighted.mul_vec(x1);
        // a_i = ((eps^2 S + L) x1)_i
        let a = |i: usize| eps2 * sx1[i] + lx1[i];
        match self.form {
            BlockForm::Full => {
                let c = self.params.mass_factor();
                let dt = self.params.dt();
                for i in 0..p {
                    y1[i] = c * mx1[i] + dt * sx2[i];
                    y2[i] = mx2[i] - a(i);
                }
            }
            BlockForm::Scaled => {
                let z = self.params.zeta();
                for i in 0..p {
                    y1[i] = mx1[i] + z * sx2[i];
                    y2[i] = mx2[i] - a(i);
                }
            }
            BlockForm::Saddle => {
                let z = self.params.zeta();
                for i in 0..p {
                    y1[i] = a(i) - mx2[i];
                    y2[i] = mx1[i] + z * sx2[i];
                }
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fem::{assemble_mass, assemble_stiffness, assemble_weighted_mass, Mesh};
    use crate::la::vector::norm2;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn saddle_rows_are_permuted_scaled_full_rows() {
        let mesh = Mesh::<f64>::new(1, 30).unwrap();
        let m = assemble_mass(&mesh);
        let s = assemble_stiffness(&mesh);
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let u: Vec<f64> = (0..31).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let l = assemble_weighted_mass(&mesh, &u).unwrap();
        let params = Params::new(0.1, 100.0, 0.01, 0.0).unwrap();
        let full = BlockOperator::new(BlockForm::Full, &m, &s, &l, &params).unwrap();
        let scaled = BlockOperator::new(BlockForm::Scaled, &m, &s, &l, &params).unwrap();
        let saddle = BlockOperator::new(BlockForm::Saddle, &m, &s, &l, &params).unwrap();
        let x: Vec<f64> = (0..62).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let yf = full.apply_vec(&x).unwrap();
        let ys = saddle.apply_vec(&x).unwrap();
        let yc = scaled.apply_vec(&x).unwrap();
        let c = params.mass_factor();
        let mut diff = 0.0f64;
        for i in 0..31 {
            diff = diff.max((ys[i] + yf[31 + i]).abs());
            diff = diff.max((ys[31 + i] - yf[i] / c).abs());
            diff = diff.max((yc[i] - yf[i] / c).abs());
            diff = diff.max((yc[31 + i] - yf[31 + i]).abs());
        }
        assert!(diff <= 1e-12 * norm2(&yf));
    }

    #[test]
    fn rhs_transforms_match_row_operations() {
        let params = Params::new(0.1, 100.0, 0.01, 0.0).unwrap();
        let f = [1.0, 2.0];
        let e = [3.0, -4.0];
        assert_eq!(BlockForm::Full.rhs(&f, &e, &params), vec![1.0, 2.0, 3.0, -4.0]);
        assert_eq!(BlockForm::Saddle.rhs(&f, &e, &params), vec![-3.0, 4.0, 0.5, 1.0]);
        assert_eq!(BlockForm::Scaled.rhs(&f, &e, &params), vec![0.5, 1.0, 3.0, -4.0]);
    }
}
