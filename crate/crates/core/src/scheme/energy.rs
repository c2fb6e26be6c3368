use crate::error::{Error, Result};
use crate::fem::integrate_nodal;
use crate::la::cg::{cg, CgOptions};
use crate::la::sparse::CsrMatrix;
use crate::la::vector::{dot, norm_inf};
use crate::scheme::{Discretization, Params};
use crate::Real;

fn mean_tolerance<T: Real>() -> T {
    T::lit(1e-10).max(T::lit(10.0) * T::epsilon())
}

/// Solves `S phi = M v` for mean-free `v`, normalized so that
/// `1^T M phi = 0`.
///
/// CG runs on the consistent singular system with the constant component
/// projected out of every residual, so no node is pinned.
pub fn inverse_laplacian_zero_mean<T: Real>(s: &CsrMatrix<T>, m: &CsrMatrix<T>, v: &[T]) -> Result<Vec<T>> {
    let rhs = m.try_mul_vec(v)?;
    let ones = vec![T::one(); v.len()];
    let m1 = m.mul_vec(&ones);
    let volume: T = m1.iter().copied().sum();
    let mean = rhs.iter().copied().sum::<T>() / volume;
    if mean.abs() > mean_tolerance::<T>() * norm_inf(v).max(T::one()) {
        return Err(Error::NonzeroMean(mean.as_f64()));
    }
    let diagonal = s.diagonal();
    let tol = T::lit(1e-12).max(T::lit(100.0) * T::epsilon());
    let opts = CgOptions {
        tol,
        diagonal: Some(&diagonal),
        project_constants: true,
        label: "S (mean-free)",
        ..CgOptions::default()
    };
    let (mut phi, _) = cg(s, &rhs, &opts)?;
    let shift = dot(&m1, &phi) / volume;
    phi.iter_mut().for_each(|x| *x -= shift);
    Ok(phi)
}

/// Bulk potential `(1 - u^2)^2 / 4`.
pub fn bulk_potential<T: Real>(u: T) -> T {
    let a = T::one() - u * u;
    a * a / T::lit(4.0)
}

/// Discrete free energy: gradient term, bulk term integrated with the same
/// degree-4 rule as the weighted mass matrix, and the nonlocal term
/// `(sigma / 2) (U - m)^T M phi` with `S phi = M (U - m)`.
///
/// The nonlocal term uses the mean-free part of `U - m`, so round-off drift
/// of the mean does not make the inverse Laplacian fail.
pub fn discrete_energy<T: Real>(disc: &Discretization<T>, u: &[T], params: &Params<T>) -> Result<T> {
    let eps = params.eps();
    let su = disc.stiffness().try_mul_vec(u)?;
    let gradient = eps * eps / T::lit(2.0) * dot(u, &su);
    let bulk = integrate_nodal(disc.mesh(), u, bulk_potential)?;
    let nonlocal = if params.sigma() > T::zero() {
        let mut w: Vec<T> = u.iter().map(|&x| x - params.m()).collect();
        let drift = disc.mean(&w);
        w.iter_mut().for_each(|x| *x -= drift);
        let phi = inverse_laplacian_zero_mean(disc.stiffness(), disc.mass(), &w)?;
        params.sigma() / T::lit(2.0) * dot(&w, &disc.mass().mul_vec(&phi))
    } else {
        T::zero()
    };
    Ok(gradient + bulk + nonlocal)
}
