use std::time::Instant;

use crate::error::{Error, Result};
use crate::la::gmres::SolveReport;
use crate::la::operator::LinearOperator;
use crate::la::vector::{axpy, dot, norm2};
use crate::Real;

#[derive(Clone, Debug)]
pub struct CgOptions<'a, T> {
    pub tol: T,
    /// `None` means `2 n + 100`.
    pub max_iter: Option<usize>,
    /// Jacobi preconditioner: the operator diagonal.
    pub diagonal: Option<&'a [T]>,
    pub x0: Option<&'a [T]>,
    /// Removes the constant component of the residual each iteration, for
    /// consistent singular systems whose kernel is the constants.
    pub project_constants: bool,
    pub label: &'a str,
}

impl<T: Real> Default for CgOptions<'_, T> {
    fn default() -> Self {
        Self {
            tol: T::lit(1e-12),
            max_iter: None,
            diagonal: None,
            x0: None,
            project_constants: false,
            label: "A",
        }
    }
}

fn remove_mean<T: Real>(r: &mut [T]) {
    let n = T::from_usize_lossy(r.len());
    let mean = r.iter().copied().sum::<T>() / n;
    for v in r.iter_mut() {
        *v -= mean;
    }
}

/// Preconditioned conjugate gradients for SPD operators.
///
/// Fails with [`Error::Indefinite`] as soon as a search direction has
/// nonpositive curvature, and with [`Error::NotConverged`] when the relative
/// residual does not reach `tol`.
pub fn cg<T: Real>(a: &dyn LinearOperator<T>, b: &[T], opts: &CgOptions<'_, T>) -> Result<(Vec<T>, SolveReport)> {
    let start = Instant::now();
    let n = a.dim();
    if b.len() != n {
        return Err(Error::DimensionMismatch(format!(
            "cg on `{}`: operator size {n}, rhs length {}",
            opts.label,
            b.len()
        )));
    }
    let max_iter = opts.max_iter.unwrap_or(2 * n + 100);
    let mut x = match opts.x0 {
        Some(x0) => x0.to_vec(),
        None => vec![T::zero(); n],
    };
    let bnorm = norm2(b);
    let mut report = SolveReport::default();
    if bnorm == T::zero() {
        x.iter_mut().for_each(|v| *v = T::zero());
        report.converged = true;
        report.wall_time_s = start.elapsed().as_secs_f64();
        return Ok((x, report));
    }

    let mut r = b.to_vec();
    let mut ap = vec![T::zero(); n];
    if opts.x0.is_some() {
        a.apply(&x, &mut ap)?;
        for (ri, &v) in r.iter_mut().zip(&ap) {
            *ri -= v;
        }
    }
    if opts.project_constants {
        remove_mean(&mut r);
    }
    let precond = |r: &[T], z: &mut [T]| match opts.diagonal {
        Some(d) => {
            for ((zi, &ri), &di) in z.iter_mut().zip(r).zip(d) {
                *zi = ri / di;
            }
        }
        None => z.copy_from_slice(r),
    };
    let mut z = vec![T::zero(); n];
    precond(&r, &mut z);
    let mut p = z.clone();
    let mut rz = dot(&r, &z);
    let mut rel = norm2(&r) / bnorm;
    report.residual_history.push(rel.as_f64());

    while rel > opts.tol {
        if report.iterations >= max_iter {
            report.wall_time_s = start.elapsed().as_secs_f64();
            return Err(Error::NotConverged {
                solver: "CG",
                operator: opts.label.to_string(),
                iterations: report.iterations,
                residual: rel.as_f64(),
            });
        }
        a.apply(&p, &mut ap)?;
        let curv = dot(&p, &ap);
        if !(curv > T::zero()) {
            return Err(Error::Indefinite {
                operator: opts.label.to_string(),
                curvature: curv.as_f64(),
            });
        }
        let alpha = rz / curv;
        axpy(alpha, &p, &mut x);
        axpy(-alpha, &ap, &mut r);
        if opts.project_constants {
            remove_mean(&mut r);
        }
        precond(&r, &mut z);
        let rz_new = dot(&r, &z);
        let beta = rz_new / rz;
        rz = rz_new;
        for (pi, &zi) in p.iter_mut().zip(&z) {
            *pi = zi + beta * *pi;
        }
        report.iterations += 1;
        rel = norm2(&r) / bnorm;
        report.residual_history.push(rel.as_f64());
    }
    report.converged = true;
    report.final_residual = rel.as_f64();
    report.wall_time_s = start.elapsed().as_secs_f64();
    Ok((x, report))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::la::dense::DenseMatrix;
    use crate::la::sparse::{CooBuilder, CsrMatrix};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn diagonal_system_in_three_steps() {
        let a = CsrMatrix::<f64>::from_diagonal(&[1.0, 2.0, 3.0]);
        let (x, rep) = cg(&a, &[1.0, 2.0, 3.0], &CgOptions::default()).unwrap();
        assert!(rep.iterations <= 3);
        for v in x {
            assert!((v - 1.0).abs() < 1e-12);
        }
        // Jacobi makes it exact in one step
        let d = a.diagonal();
        let opts = CgOptions {
            diagonal: Some(&d),
            ..CgOptions::default()
        };
        let (_, rep) = cg(&a, &[1.0, 2.0, 3.0], &opts).unwrap();
        assert_eq!(rep.iterations, 1);
    }

    #[test]
    fn singular_inconsistent_system_fails() {
        // 1D Neumann Laplacian; rhs with nonzero mean is outside the range
        let n = 8;
        let mut b = CooBuilder::new(n, n);
        for i in 0..n - 1 {
            b.push(i, i, 1.0);
            b.push(i + 1, i + 1, 1.0);
            b.push(i, i + 1, -1.0);
            b.push(i + 1, i, -1.0);
        }
        let s = b.build(false);
        let rhs = vec![1.0; n];
        let opts = CgOptions {
            max_iter: Some(200),
            ..CgOptions::default()
        };
        let err = cg(&s, &rhs, &opts).unwrap_err();
        assert!(matches!(err, Error::NotConverged { .. } | Error::Indefinite { .. }));
    }

    #[test]
    fn indefinite_detected() {
        let a = CsrMatrix::from_diagonal(&[1.0, -2.0]);
        let err = cg(&a, &[0.0, 1.0], &CgOptions { label: "bad", ..CgOptions::default() }).unwrap_err();
        match err {
            Error::Indefinite { operator, .. } => assert_eq!(operator, "bad"),
            e => panic!("unexpected {e}"),
        }
    }

    #[test]
    fn agrees_with_dense_solve_on_random_spd() {
        let mut rng = ChaCha8Rng::seed_from_u64(42);
        for _ in 0..5 {
            let n = 50;
            let r = DenseMatrix::from_fn(n, n, |_, _| rng.gen_range(-1.0..1.0));
            let a = r.matmul(&r.transpose()).add(&DenseMatrix::identity(n).scaled(n as f64 * 0.1));
            let b: Vec<f64> = (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect();
            let sparse = CsrMatrix::from_dense(&a);
            let (x, _) = cg(&sparse, &b, &CgOptions::default()).unwrap();
            let bd = DenseMatrix::from_columns(&[b.clone()]);
            let xd = a.solve(&bd).unwrap().column(0);
            let num: f64 = x.iter().zip(&xd).map(|(a, b)| (a - b).powi(2)).sum::<f64>().sqrt();
            let den: f64 = xd.iter().map(|v| v * v).sum::<f64>().sqrt();
            assert!(num / den < 1e-8);
        }
    }
}
