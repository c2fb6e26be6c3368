//! Dense spectral diagnostics: preconditioned spectra, condition numbers and
//! the eigenvalue bounds the block preconditioners are known to satisfy.
//! Everything here materializes `2p x 2p` matrices and is meant for small
//! meshes only.

mod certificates;

use num_complex::Complex;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::la::dense::{dense_eigenvalues, generalized_symmetric_eigenvalues, DENSE_LIMIT};
use crate::la::{DenseMatrix, LinearOperator};
use crate::precond::{AInverseKind, PrecondBuilder, PrecondConfig, PrecondKind};
use crate::scheme::{BlockOperator, Discretization, Params};
use crate::fem::assemble_weighted_mass;
use crate::Real;

pub use certificates::{
    theorem_certificates, AdaptiveCertificate, CertificateBundle, SigmaCurve, SpectraMatch,
};

/// Default tolerance on imaginary parts and on interval endpoints.
pub const REAL_TOL: f64 = 1e-7;

#[derive(Clone, Debug, Default, Serialize, PartialEq)]
pub struct SpectralReport {
    pub label: String,
    /// `[re, im]` pairs sorted by real part.
    pub eigenvalues: Vec<[f64; 2]>,
    pub bound: Option<[f64; 2]>,
    pub violations: usize,
    pub real_claimed: bool,
    pub max_imag: f64,
    /// Eigenvalues within the tolerance of 1; reported for MHSS.
    pub unit_count: Option<usize>,
    pub lambda_plus: Option<f64>,
    pub zeta: Option<f64>,
    pub alpha: Option<f64>,
    pub sigma1: Option<f64>,
    pub sigma_p: Option<f64>,
    pub c1: Option<f64>,
    pub c_p: Option<f64>,
    pub theta1: Option<f64>,
    pub theta_p: Option<f64>,
}

impl SpectralReport {
    /// No violations and, for MHSS, at least half the eigenvalues equal to 1.
    pub fn passed(&self) -> bool {
        let units_ok = match self.unit_count {
            Some(k) => 2 * k >= self.eigenvalues.len(),
            None => true,
        };
        self.violations == 0 && units_ok
    }

    pub fn spectral_radius(&self) -> f64 {
        self.eigenvalues.iter().map(|&[re, im]| re.hypot(im)).fold(0.0, f64::max)
    }
}

fn check_size(n: usize) -> Result<()> {
    if n > DENSE_LIMIT {
        return Err(Error::TooLarge { size: n, limit: DENSE_LIMIT });
    }
    Ok(())
}

/// Dense matrix of `op`, one column per unit vector.
pub fn materialize<T: Real>(op: &dyn LinearOperator<T>) -> Result<DenseMatrix<T>> {
    materialize_product(op, None)
}

/// Dense `P^-1 A`: each column of `A` is pushed through the preconditioner.
pub fn materialize_product<T: Real>(
    a: &dyn LinearOperator<T>,
    precond: Option<&dyn LinearOperator<T>>,
) -> Result<DenseMatrix<T>> {
    let n = a.dim();
    check_size(n)?;
    if let Some(pc) = precond {
        if pc.dim() != n {
            return Err(Error::DimensionMismatch(format!("operator size {n}, preconditioner size {}", pc.dim())));
        }
    }
    let mut out = DenseMatrix::zeros(n, n);
    let mut e = vec![T::zero(); n];
    let mut col = vec![T::zero(); n];
    let mut pcol = vec![T::zero(); n];
    for j in 0..n {
        e[j] = T::one();
        a.apply(&e, &mut col)?;
        e[j] = T::zero();
        let c = match precond {
            Some(pc) => {
                pc.apply(&col, &mut pcol)?;
                &pcol
            }
            None => &col,
        };
        for (i, &v) in c.iter().enumerate() {
            out[(i, j)] = v;
        }
    }
    Ok(out)
}

/// 2-norm condition number from the extreme eigenvalues of `A^T A`.
pub fn condition_number<T: Real>(a: &DenseMatrix<T>) -> Result<T> {
    if !a.is_square() {
        return Err(Error::DimensionMismatch("condition number of a non-square matrix".into()));
    }
    let ata = a.transpose().matmul(a);
    let eig = ata.symmetric_eigenvalues()?;
    let lo = eig.first().copied().unwrap_or(T::zero());
    let hi = eig.last().copied().unwrap_or(T::zero());
    if !(lo > T::zero()) {
        return Ok(T::infinity());
    }
    Ok((hi / lo).sqrt())
}

/// Condition number of the full block system assembled at `u`.
pub fn system_condition_number<T: Real>(disc: &Discretization<T>, params: &Params<T>, u: &[T]) -> Result<T> {
    check_size(2 * disc.p())?;
    let l = assemble_weighted_mass(disc.mesh(), u)?;
    let op = BlockOperator::new(crate::scheme::BlockForm::Full, disc.mass(), disc.stiffness(), &l, params)?;
    condition_number(&materialize(&op)?)
}

fn to_pairs<T: Real>(eig: &[Complex<T>]) -> Vec<[f64; 2]> {
    eig.iter().map(|z| [z.re.as_f64(), z.im.as_f64()]).collect()
}

/// Counts eigenvalues outside `[lo - tol, hi + tol]` or, when `real` is set,
/// with `|Im| > tol`.
pub fn count_violations(eigs: &[[f64; 2]], bound: Option<[f64; 2]>, real: bool, tol: f64) -> usize {
    eigs.iter()
        .filter(|&&[re, im]| {
            let outside = bound.is_some_and(|[lo, hi]| re < lo - tol || re > hi + tol);
            outside || (real && im.abs() > tol)
        })
        .count()
}

fn extremes<T: Real>(v: &[T]) -> (f64, f64) {
    let lo = v.first().map(|x| x.as_f64()).unwrap_or(0.0);
    let hi = v.last().map(|x| x.as_f64()).unwrap_or(0.0);
    (lo, hi)
}

/// Spectrum of the preconditioned system selected by `config.kind`, with the
/// matching eigenvalue interval. BT uses the full system, EL the scaled one
/// and MHSS the saddle form with an exact inner solve for `A`; `None`
/// reports the unpreconditioned full system without a bound.
pub fn preconditioned_spectrum<T: Real>(
    disc: &Discretization<T>,
    params: &Params<T>,
    u_state: &[T],
    config: &PrecondConfig,
    tol: f64,
) -> Result<SpectralReport> {
    let p = disc.p();
    check_size(2 * p)?;
    let mut config = config.clone();
    if config.kind == PrecondKind::Mhss {
        config.a_inverse = AInverseKind::Exact;
    }
    let l = assemble_weighted_mass(disc.mesh(), u_state)?;
    let mut builder = PrecondBuilder::new(disc, params, &config)?;
    let op = BlockOperator::new(builder.form(), disc.mass(), disc.stiffness(), &l, params)?;
    let (pc, info) = builder.build(&l, u_state)?;
    let dense = materialize_product(&op, pc.as_ref().map(|b| b.as_ref() as &dyn LinearOperator<T>))?;
    let eig = dense_eigenvalues(&dense, None)?;
    let eigenvalues = to_pairs(&eig);
    let max_imag = eigenvalues.iter().map(|z| z[1].abs()).fold(0.0, f64::max);
    let mut report = SpectralReport {
        label: format!("{} preconditioned", config.kind.name()),
        eigenvalues,
        max_imag,
        zeta: Some(params.zeta().as_f64()),
        ..SpectralReport::default()
    };
    match config.kind {
        PrecondKind::None => {
            report.label = "unpreconditioned".into();
        }
        PrecondKind::Bt | PrecondKind::El => {
            let lambda_plus = generalized_symmetric_eigenvalues(&l.to_dense(), &disc.mass().to_dense())?
                .last()
                .map(|x| x.as_f64())
                .unwrap_or(0.0);
            let zeta = params.zeta().as_f64();
            let eps = params.eps().as_f64();
            let hi = 1.0 + zeta.sqrt() * lambda_plus / (4.0 * eps);
            report.lambda_plus = Some(lambda_plus);
            report.bound = Some([0.5, hi]);
            report.real_claimed = true;
            report.violations = count_violations(&report.eigenvalues, report.bound, true, tol);
        }
        PrecondKind::Mhss => {
            let alpha = info.alpha.expect("MHSS build selects alpha");
            let eps2 = params.eps() * params.eps();
            let a = disc.stiffness().scaled(eps2).to_dense().add(&l.to_dense());
            let b = disc.stiffness().scaled(params.zeta()).to_dense();
            let (sigma_p, sigma1) = extremes(&b.symmetric_eigenvalues()?);
            let (c_p, c1) = extremes(&disc.mass().to_dense().symmetric_eigenvalues()?);
            let (theta_p, theta1) = extremes(&a.symmetric_eigenvalues()?);
            let lo = alpha * c_p * c_p / (theta1 * (c1 * c1 + alpha * sigma1));
            let hi = alpha * (sigma1 * theta_p + c1 * c1) / (theta_p * c_p * c_p);
            report.alpha = Some(alpha);
            report.sigma1 = Some(sigma1);
            report.sigma_p = Some(sigma_p);
            report.c1 = Some(c1);
            report.c_p = Some(c_p);
            report.theta1 = Some(theta1);
            report.theta_p = Some(theta_p);
            report.bound = Some([lo, hi]);
            report.real_claimed = true;
            report.unit_count = Some(report.eigenvalues.iter().filter(|z| (z[0] - 1.0).hypot(z[1]) <= tol).count());
            // the p eigenvalues closest to 1 are the unit block; the rest
            // must be real and inside the interval
            let mut by_distance = report.eigenvalues.clone();
            by_distance.sort_by(|x, y| (x[0] - 1.0).hypot(x[1]).total_cmp(&(y[0] - 1.0).hypot(y[1])));
            report.violations = count_violations(&by_distance[p..], report.bound, true, tol);
        }
    }
    Ok(report)
}
