use crate::error::{Error, Result};
use crate::la::sparse::CsrMatrix;
use crate::Real;

/// Cholesky factorization of a symmetric positive definite band matrix in
/// natural ordering. Storage is `n * (bw + 1)`: row `i` holds
/// `L[i, i - bw ..= i]`.
#[derive(Clone, Debug)]
pub struct BandCholesky<T> {
    n: usize,
    bw: usize,
    l: Vec<T>,
}

impl<T: Real> BandCholesky<T> {
    pub fn factor(a: &CsrMatrix<T>, label: &str) -> Result<Self> {
        let n = a.nrows();
        if a.ncols() != n {
            return Err(Error::DimensionMismatch(format!("`{label}` is not square")));
        }
        let bw = a.bandwidth();
        let w = bw + 1;
        let mut l = vec![T::zero(); n * w];
        // L[i, j] stored at l[i * w + (j + bw - i)]
        for i in 0..n {
            let (cols, vals) = a.row(i);
            for (&j, &v) in cols.iter().zip(vals) {
                if j <= i {
                    l[i * w + (j + bw - i)] = v;
                }
            }
        }
        for j in 0..n {
            let k0 = j.saturating_sub(bw);
            let mut d = l[j * w + bw];
            for k in k0..j {
                let v = l[j * w + (k + bw - j)];
                d -= v * v;
            }
            if !(d > T::zero()) {
                return Err(Error::NotPositiveDefinite {
                    operator: label.to_string(),
                    pivot: j,
                    value: d.as_f64(),
                });
            }
            let djj = d.sqrt();
            l[j * w + bw] = djj;
            for i in j + 1..(j + bw + 1).min(n) {
                let k0 = i.saturating_sub(bw);
                let mut s = l[i * w + (j + bw - i)];
                for k in k0..j {
                    s -= l[i * w + (k + bw - i)] * l[j * w + (k + bw - j)];
                }
                l[i * w + (j + bw - i)] = s / djj;
            }
        }
        Ok(Self { n, bw, l })
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn bandwidth(&self) -> usize {
        self.bw
    }

    /// Solves `A x = b` in place.
    pub fn solve_in_place(&self, x: &mut [T]) {
        let (n, bw, w) = (self.n, self.bw, self.bw + 1);
        for i in 0..n {
            let mut s = x[i];
            for k in i.saturating_sub(bw)..i {
                s -= self.l[i * w + (k + bw - i)] * x[k];
            }
            x[i] = s / self.l[i * w + bw];
        }
        for i in (0..n).rev() {
            let mut s = x[i];
            for k in i + 1..(i + bw + 1).min(n) {
                s -= self.l[k * w + (i + bw - k)] * x[k];
            }
            x[i] = s / self.l[i * w + bw];
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::la::sparse::CooBuilder;

    #[test]
    fn tridiagonal_solve() {
        let n = 6;
        let mut b = CooBuilder::new(n, n);
        for i in 0..n {
            b.push(i, i, 4.0);
            if i + 1 < n {
                b.push(i, i + 1, -1.0);
                b.push(i + 1, i, -1.0);
            }
        }
        let a = b.build(false);
        let f = BandCholesky::factor(&a, "t").unwrap();
        assert_eq!(f.bandwidth(), 1);
        let x_true: Vec<f64> = (0..n).map(|i| i as f64 - 2.0).collect();
        let mut x = a.mul_vec(&x_true);
        f.solve_in_place(&mut x);
        for (a, b) in x.iter().zip(&x_true) {
            assert!((a - b).abs() < 1e-13);
        }
    }

    #[test]
    fn indefinite_is_rejected() {
        let a = CsrMatrix::from_diagonal(&[1.0, -1.0]);
        assert!(matches!(
            BandCholesky::factor(&a, "bad"),
            Err(Error::NotPositiveDefinite { pivot: 1, .. })
        ));
    }
}
