use log::warn;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::la::dense::DenseMatrix;
use crate::la::operator::LinearOperator;
use crate::la::power::power_iteration;
use crate::la::sparse::CsrMatrix;
use crate::la::vector::{dot, norm_inf};
use crate::precond::AlphaStrategy;
use crate::scheme::Params;
use crate::Real;

/// Power-iteration estimate of `rho(M)` for a symmetric matrix. The
/// tolerance only has to sit well inside the `eps_tilde` safety margin.
pub fn spectral_radius<T: Real>(m: &CsrMatrix<T>, seed: u64) -> Result<T> {
    let est = power_iteration(m, T::lit(1e-7).max(T::lit(10.0) * T::epsilon()), 5000, seed)?;
    if !est.converged {
        warn!("power iteration for rho(M) stopped after {} iterations", est.iterations);
    }
    Ok(est.value)
}

/// `eps_tilde = c_s max|u|^2 rho(M)`. Since the P1 basis is nonnegative,
/// `x^T L x <= max|u|^2 x^T M x`, so `eps_tilde I - L` is positive definite.
pub fn eps_tilde_from_radius<T: Real>(u: &[T], rho_m: T, safety: T) -> Result<T> {
    if !(safety > T::one()) {
        return Err(Error::InvalidParameter("eps_tilde safety factor must exceed 1".into()));
    }
    let umax = norm_inf(u);
    if umax == T::zero() {
        warn!("weight field vanishes; L = 0 and eps_tilde falls back to the machine floor");
        return Ok(safety * rho_m * T::epsilon());
    }
    Ok(safety * umax * umax * rho_m)
}

pub fn select_eps_tilde<T: Real>(u: &[T], m: &CsrMatrix<T>, safety: T) -> Result<T> {
    eps_tilde_from_radius(u, spectral_radius(m, 17)?, safety)
}

/// Minimizer of `max_i |1 - alpha / lambda_i|` over the extremal eigenvalues
/// of `A`.
pub fn optimal_alpha<T: Real>(lambda_max: T, lambda_min: T) -> T {
    T::lit(2.0) * lambda_max * lambda_min / (lambda_max + lambda_min)
}

/// Upper bound `max_i |1 - alpha / lambda_i(A)|` on the spectral radius of
/// the MHSS iteration matrix.
pub fn sigma_tilde<T: Real>(alpha: T, eigenvalues_a: &[T]) -> T {
    eigenvalues_a
        .iter()
        .map(|&l| (T::one() - alpha / l).abs())
        .fold(T::zero(), T::max)
}

/// Inputs of an alpha selection.
pub struct AlphaInputs<'a, T: Real> {
    pub mass: &'a CsrMatrix<T>,
    pub stiffness: &'a CsrMatrix<T>,
    pub weighted: &'a CsrMatrix<T>,
    pub params: &'a Params<T>,
    /// Needed only by `TraceM4`.
    pub a_inverse: Option<&'a dyn LinearOperator<T>>,
    pub probes: usize,
    pub seed: u64,
}

pub fn select_alpha<T: Real>(strategy: AlphaStrategy, inp: &AlphaInputs<'_, T>) -> Result<T> {
    let p = T::from_usize_lossy(inp.mass.nrows());
    let eps2 = inp.params.eps() * inp.params.eps();
    let alpha = match strategy {
        AlphaStrategy::Fixed(a) => T::lit(a),
        AlphaStrategy::TraceA => (eps2 * inp.stiffness.trace() + inp.weighted.trace()) / p,
        AlphaStrategy::TraceM4 => {
            let a_inv = inp.a_inverse.ok_or_else(|| {
                Error::InvalidParameter("trace_m4 alpha needs an approximate inverse of A".into())
            })?;
            trace_m4_ratio(inp.mass, a_inv, inp.probes, inp.seed)?
        }
    };
    if !(alpha > T::zero()) || !alpha.is_finite() {
        return Err(Error::InvalidParameter(format!("selected alpha {alpha:e} is not positive")));
    }
    Ok(alpha)
}

/// Hutchinson estimate of `trace(M^4) / trace(M^4 A^-1)` with Rademacher
/// probes `z`, using `trace(M^2 A^-1 M^2) = E[(M^2 z)^T A^-1 (M^2 z)]`.
pub fn trace_m4_ratio<T: Real>(
    mass: &CsrMatrix<T>,
    a_inv: &dyn LinearOperator<T>,
    probes: usize,
    seed: u64,
) -> Result<T> {
    let n = mass.nrows();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let (mut num, mut den) = (T::zero(), T::zero());
    for _ in 0..probes.max(1) {
        let z: Vec<T> = (0..n)
            .map(|_| if rng.gen::<bool>() { T::one() } else { -T::one() })
            .collect();
        let y = mass.mul_vec(&mass.mul_vec(&z));
        num += dot(&y, &y);
        den += dot(&y, &a_inv.apply_vec(&y)?);
    }
    Ok(num / den)
}

/// Exact `trace(M^4) / trace(M^4 A^-1)` for dense diagnostics.
pub fn trace_m4_ratio_dense<T: Real>(m: &DenseMatrix<T>, a: &DenseMatrix<T>) -> Result<T> {
    let m2 = m.matmul(m);
    let m4 = m2.matmul(&m2);
    let m4_ainv = m4.matmul(&a.inverse()?);
    Ok(m4.trace() / m4_ainv.trace())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fem::{assemble_mass, assemble_weighted_mass, Mesh};

    #[test]
    fn optimal_alpha_two_point() {
        assert!((optimal_alpha(3.0, 1.0) - 1.5f64).abs() < 1e-15);
        let s = sigma_tilde(1.5, &[1.0, 3.0]);
        assert!((s - 0.5f64).abs() < 1e-15);
        for a in [1.0, 1.2, 1.8, 2.0] {
            assert!(sigma_tilde(a, &[1.0, 3.0]) >= s);
        }
        assert_eq!(sigma_tilde(2.0, &[2.0, 2.0, 2.0]), 0.0);
    }

    #[test]
    fn eps_tilde_dominates_weighted_mass() {
        let mesh = Mesh::<f64>::new(1, 40).unwrap();
        let m = assemble_mass(&mesh);
        let u: Vec<f64> = (0..41).map(|i| (i as f64 * 0.37).sin() * 1.3).collect();
        let et = select_eps_tilde(&u, &m, 1.01).unwrap();
        let l = assemble_weighted_mass(&mesh, &u).unwrap();
        let lmax = l.to_dense().symmetric_eigenvalues().unwrap().last().copied().unwrap();
        assert!(lmax < et);
        let ones = vec![1.0; 41];
        let rho = m.to_dense().symmetric_eigenvalues().unwrap().last().copied().unwrap();
        let e1 = select_eps_tilde(&ones, &m, 1.01).unwrap();
        // power iteration approaches rho(M) from below; the safety factor
        // must still cover the gap
        assert!((e1 - 1.01 * rho).abs() < 1e-3 * rho);
        assert!(e1 > rho);
        let e0 = select_eps_tilde(&vec![0.0; 41], &m, 1.01).unwrap();
        assert!(e0 > 0.0 && e0 < 1e-15);
    }

    #[test]
    fn hutchinson_matches_exact_on_small_instance() {
        let mesh = Mesh::<f64>::new(1, 12).unwrap();
        let m = assemble_mass(&mesh);
        let a = m.shifted(0.3);
        let exact = trace_m4_ratio_dense(&m.to_dense(), &a.to_dense()).unwrap();
        let inv = CsrMatrix::from_dense(&a.to_dense().inverse().unwrap());
        let est = trace_m4_ratio(&m, &inv, 400, 1).unwrap();
        assert!((est - exact).abs() < 0.05 * exact, "{est} vs {exact}");
    }
}
