use std::time::Instant;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::la::operator::LinearOperator;
use crate::la::vector::{axpy, dot, norm2, scale};
use crate::Real;

/// Outcome of an iterative solve. Residuals are relative to `||b||`.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct SolveReport {
    pub iterations: usize,
    pub converged: bool,
    pub residual_history: Vec<f64>,
    pub wall_time_s: f64,
    /// True relative residual `||b - A x|| / ||b||` of the returned iterate.
    #[serde(default)]
    pub final_residual: f64,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct GmresOptions<T> {
    pub tol: T,
    pub max_iter: usize,
    /// `None` runs a single unrestarted cycle of up to `max_iter` steps.
    pub restart: Option<usize>,
}

impl<T: Real> Default for GmresOptions<T> {
    fn default() -> Self {
        Self {
            tol: T::lit(1e-10),
            max_iter: 300,
            restart: None,
        }
    }
}

const BREAKDOWN: f64 = 1e-300;

/// Right-preconditioned GMRES with modified Gram-Schmidt plus one
/// reorthogonalization pass. Since the preconditioner acts on the right,
/// the Arnoldi residual estimate is the residual of the original system.
///
/// Running out of iterations is not an error: the report comes back with
/// `converged == false`. Errors are reserved for dimension mismatches and
/// failures inside operator applications.
pub fn gmres<T: Real>(
    a: &dyn LinearOperator<T>,
    b: &[T],
    precond: Option<&dyn LinearOperator<T>>,
    opts: &GmresOptions<T>,
) -> Result<(Vec<T>, SolveReport)> {
    let start = Instant::now();
    let n = a.dim();
    if b.len() != n || precond.is_some_and(|p| p.dim() != n) {
        return Err(Error::DimensionMismatch(format!(
            "gmres: operator size {n}, rhs length {}",
            b.len()
        )));
    }
    if !(opts.tol > T::zero()) {
        return Err(Error::InvalidParameter("gmres tolerance must be positive".into()));
    }
    let mut report = SolveReport::default();
    let mut x = vec![T::zero(); n];
    let bnorm = norm2(b);
    if bnorm == T::zero() {
        report.converged = true;
        report.residual_history.push(0.0);
        report.wall_time_s = start.elapsed().as_secs_f64();
        return Ok((x, report));
    }

    let mut w = vec![T::zero(); n];
    let mut z = vec![T::zero(); n];
    let mut r = b.to_vec();
    let mut first = true;
    let mut broke_down = false;
    loop {
        if !first {
            a.apply(&x, &mut w)?;
            for ((ri, &bi), &wi) in r.iter_mut().zip(b).zip(&w) {
                *ri = bi - wi;
            }
        }
        let beta = norm2(&r);
        let rel = beta / bnorm;
        report.final_residual = rel.as_f64();
        if first {
            report.residual_history.push(rel.as_f64());
            first = false;
        }
        if rel <= opts.tol {
            report.converged = true;
            break;
        }
        if broke_down || report.iterations >= opts.max_iter {
            break;
        }

        let m = opts
            .restart
            .unwrap_or(opts.max_iter)
            .min(opts.max_iter - report.iterations)
            .max(1);
        let mut basis: Vec<Vec<T>> = Vec::with_capacity(m + 1);
        let mut v0 = r.clone();
        scale(T::one() / beta, &mut v0);
        basis.push(v0);
        let mut hcols: Vec<Vec<T>> = Vec::with_capacity(m);
        let mut cs: Vec<T> = Vec::with_capacity(m);
        let mut sn: Vec<T> = Vec::with_capacity(m);
        let mut g = vec![T::zero(); m + 1];
        g[0] = beta;

        for j in 0..m {
            let vj = &basis[j];
            match precond {
                Some(p) => {
                    p.apply(vj, &mut z)?;
                    a.apply(&z, &mut w)?;
                }
                None => a.apply(vj, &mut w)?,
            }
            let mut h = vec![T::zero(); j + 2];
            for _pass in 0..2 {
                for (i, vi) in basis.iter().enumerate() {
                    let c = dot(&w, vi);
                    h[i] += c;
                    axpy(-c, vi, &mut w);
                }
            }
            let hnext = norm2(&w);
            h[j + 1] = hnext;
            for i in 0..j {
                let t = cs[i] * h[i] + sn[i] * h[i + 1];
                h[i + 1] = -sn[i] * h[i] + cs[i] * h[i + 1];
                h[i] = t;
            }
            let rr = h[j].hypot(h[j + 1]);
            let (c, s) = if rr == T::zero() {
                (T::one(), T::zero())
            } else {
                (h[j] / rr, h[j + 1] / rr)
            };
            cs.push(c);
            sn.push(s);
            h[j] = rr;
            h[j + 1] = T::zero();
            g[j + 1] = -s * g[j];
            g[j] = c * g[j];
            hcols.push(h);
            report.iterations += 1;
            let rel = g[j + 1].abs() / bnorm;
            report.residual_history.push(rel.as_f64());

            if hnext.as_f64() < BREAKDOWN {
                broke_down = true;
                break;
            }
            if rel <= opts.tol {
                break;
            }
            let mut vnext = w.clone();
            scale(T::one() / hnext, &mut vnext);
            basis.push(vnext);
        }

        // back substitution on the k x k triangle
        let k = hcols.len();
        let mut y = vec![T::zero(); k];
        for i in (0..k).rev() {
            let mut s = g[i];
            for (jj, col) in hcols.iter().enumerate().skip(i + 1) {
                s -= col[i] * y[jj];
            }
            let d = hcols[i][i];
            y[i] = if d == T::zero() { T::zero() } else { s / d };
        }
        let mut u = vec![T::zero(); n];
        for (yi, vi) in y.iter().zip(&basis) {
            axpy(*yi, vi, &mut u);
        }
        match precond {
            Some(p) => {
                p.apply(&u, &mut z)?;
                axpy(T::one(), &z, &mut x);
            }
            None => axpy(T::one(), &u, &mut x),
        }
    }
    report.wall_time_s = start.elapsed().as_secs_f64();
    Ok((x, report))
}

/// GMRES started from `x0`. Solves for the correction with a tolerance
/// rescaled so that the stopping test is still `||b - A x|| <= tol ||b||`;
/// the reported residuals are relative to `||b||`. Returns `x0` untouched
/// with zero iterations when it already satisfies the test, and starts from
/// zero instead when `||b - A x0|| >= ||b||`.
pub fn gmres_from<T: Real>(
    a: &dyn LinearOperator<T>,
    b: &[T],
    x0: &[T],
    precond: Option<&dyn LinearOperator<T>>,
    opts: &GmresOptions<T>,
) -> Result<(Vec<T>, SolveReport)> {
    let n = a.dim();
    if x0.len() != n {
        return Err(Error::DimensionMismatch(format!(
            "gmres: operator size {n}, initial guess length {}",
            x0.len()
        )));
    }
    let start = Instant::now();
    let mut r0 = b.to_vec();
    axpy(-T::one(), &a.apply_vec(x0)?, &mut r0);
    let bnorm = norm2(b);
    let rnorm = norm2(&r0);
    if bnorm == T::zero() {
        return gmres(a, b, precond, opts);
    }
    if rnorm <= opts.tol * bnorm {
        let rel = (rnorm / bnorm).as_f64();
        let report = SolveReport {
            iterations: 0,
            converged: true,
            residual_history: vec![rel],
            wall_time_s: start.elapsed().as_secs_f64(),
            final_residual: rel,
        };
        return Ok((x0.to_vec(), report));
    }
    if rnorm >= bnorm {
        // a guess worse than zero would only raise the bar for the correction
        return gmres(a, b, precond, opts);
    }
    let ratio = rnorm / bnorm;
    let inner = GmresOptions {
        tol: opts.tol / ratio,
        ..*opts
    };
    let (dx, mut report) = gmres(a, &r0, precond, &inner)?;
    let mut x = x0.to_vec();
    axpy(T::one(), &dx, &mut x);
    let r = ratio.as_f64();
    report.residual_history.iter_mut().for_each(|h| *h *= r);
    report.final_residual *= r;
    report.wall_time_s = start.elapsed().as_secs_f64();
    Ok((x, report))
}
