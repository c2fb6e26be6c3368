use std::sync::Arc;

use log::warn;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::la::dense::{generalized_symmetric_eigenvalues, DenseMatrix};
use crate::la::operator::{check_dims, LinearOperator};
use crate::la::sparse::CsrMatrix;
use crate::la::vector::{dot, norm2};
use crate::la::{InnerSolverKind, SpdSolver};
use crate::precond::SeriesMode;
use crate::Real;

type SharedOp<T> = Arc<dyn LinearOperator<T> + Send + Sync>;

/// Truncated Neumann-series approximation of `A^-1` for `A = eps^2 S + L`.
///
/// With `P = eps^2 S + eps_tilde I`, `Q = eps_tilde I - L` and `G = P^-1 Q`,
/// the static operator is `P_d = (I + G + ... + G^{d-1}) P^-1`, so that
/// `P_d A = I - G^d`. The adaptive operator expands around an earlier
/// operator `A_k` instead: with `H = A_k^-1 (L_k - L_{k+1})` it applies
/// `(I + H + ... + H^{d-1}) A_k^-1`, where `A_k^-1` is whatever inverse was
/// used for `A_k`.
///
/// Both are evaluated by Horner's rule `y <- B (C y) + B v` with
/// `(B, C) = (P^-1, Q)` or `(A_k^-1, L_k - L_{k+1})`. The depth is fixed at
/// build time, so the operator is linear.
pub struct NeumannInverse<T: Real> {
    inner: SharedOp<T>,
    coupling: CsrMatrix<T>,
    depth: usize,
    mode: SeriesMode,
    eps_tilde: T,
    increments: Vec<f64>,
}

impl<T: Real> std::fmt::Debug for NeumannInverse<T> {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("NeumannInverse")
            .field("n", &self.coupling.nrows())
            .field("depth", &self.depth)
            .field("mode", &self.mode)
            .field("eps_tilde", &self.eps_tilde)
            .finish()
    }
}

/// Settings for fixing the series depth.
#[derive(Clone, Copy, Debug)]
pub struct DepthRule<T> {
    /// Stop once the latest term is below `tol` times the partial sum.
    pub tol: T,
    pub max_depth: usize,
    pub seed: u64,
}

/// `d = floor(log_{||G||} eps1) + 1`, the depth that guarantees
/// `||I - P_d A|| < eps1` when `||G|| < 1` is known.
pub fn depth_from_norm(g_norm: f64, eps1: f64) -> Result<usize> {
    if !(g_norm < 1.0) {
        return Err(Error::SeriesDivergence {
            depth: 0,
            ratio: g_norm,
        });
    }
    if g_norm <= 0.0 {
        return Ok(1);
    }
    Ok((eps1.ln() / g_norm.ln()).floor() as usize + 1)
}

fn energy_norm<T: Real>(w: Option<&CsrMatrix<T>>, v: &[T]) -> T {
    match w {
        Some(w) => dot(v, &w.mul_vec(v)).max(T::zero()).sqrt(),
        None => norm2(v),
    }
}

/// Runs the series on a seeded random vector and returns the depth at which
/// the increment drops below `tol` relative to the partial sum, with the
/// increment norms. Norms are taken in `weight` when given: `G` is
/// self-adjoint in the `P` inner product and `H` in the `A_k` inner product,
/// so increments contract monotonically there unless the spectral radius
/// reaches one.
fn probe_depth<T: Real>(
    inner: &dyn LinearOperator<T>,
    coupling: &CsrMatrix<T>,
    weight: Option<&CsrMatrix<T>>,
    rule: &DepthRule<T>,
) -> Result<(usize, Vec<f64>)> {
    let n = coupling.nrows();
    let mut rng = ChaCha8Rng::seed_from_u64(rule.seed);
    let v: Vec<T> = (0..n).map(|_| T::lit(rng.gen_range(-1.0..1.0))).collect();
    let mut term = inner.apply_vec(&v)?;
    let mut sum = term.clone();
    let mut prev = energy_norm(weight, &term);
    let mut history = vec![prev.as_f64()];
    if prev == T::zero() {
        return Ok((1, history));
    }
    let growth = T::one() + T::lit(1e-6).max(T::lit(100.0) * T::epsilon());
    for d in 1..rule.max_depth {
        term = inner.apply_vec(&coupling.mul_vec(&term))?;
        let norm = energy_norm(weight, &term);
        history.push(norm.as_f64());
        if norm > growth * prev {
            return Err(Error::SeriesDivergence {
                depth: d,
                ratio: (norm / prev).as_f64(),
            });
        }
        for (s, t) in sum.iter_mut().zip(&term) {
            *s += *t;
        }
        if norm <= rule.tol * energy_norm(weight, &sum) {
            return Ok((d + 1, history));
        }
        prev = norm;
    }
    warn!(
        "Neumann series did not reach tolerance {:e} within {} terms (last ratio {:.4})",
        rule.tol.as_f64(),
        rule.max_depth,
        history[history.len() - 1] / history[history.len() - 2].max(f64::MIN_POSITIVE)
    );
    Ok((rule.max_depth, history))
}

/// `eps^2 S + eps_tilde I` and `eps_tilde I - L`.
pub fn splitting<T: Real>(
    s: &CsrMatrix<T>,
    l: &CsrMatrix<T>,
    eps: T,
    eps_tilde: T,
) -> Result<(CsrMatrix<T>, CsrMatrix<T>)> {
    let p = s.scaled(eps * eps).shifted(eps_tilde);
    let q = l.scaled(-T::one()).shifted(eps_tilde);
    if p.nrows() != q.nrows() {
        return Err(Error::DimensionMismatch("S and L differ in size".into()));
    }
    Ok((p, q))
}

impl<T: Real> NeumannInverse<T> {
    /// Static series with depth chosen by the probe.
    #[allow(clippy::too_many_arguments)]
    pub fn build_static(
        s: &CsrMatrix<T>,
        l: &CsrMatrix<T>,
        eps: T,
        eps_tilde: T,
        rule: &DepthRule<T>,
        inner: InnerSolverKind,
        cg_tol: T,
    ) -> Result<Self> {
        let (p, q) = splitting(s, l, eps, eps_tilde)?;
        let solver: SharedOp<T> = Arc::new(SpdSolver::new(p.clone(), inner, cg_tol, "P = eps^2 S + eps_tilde I")?);
        let (depth, increments) = probe_depth(solver.as_ref(), &q, Some(&p), rule)?;
        Ok(Self {
            inner: solver,
            coupling: q,
            depth,
            mode: SeriesMode::Static,
            eps_tilde,
            increments,
        })
    }

    /// Static series with a prescribed depth.
    pub fn static_with_depth(
        s: &CsrMatrix<T>,
        l: &CsrMatrix<T>,
        eps: T,
        eps_tilde: T,
        depth: usize,
        inner: InnerSolverKind,
        cg_tol: T,
    ) -> Result<Self> {
        let (p, q) = splitting(s, l, eps, eps_tilde)?;
        let solver = Arc::new(SpdSolver::new(p, inner, cg_tol, "P = eps^2 S + eps_tilde I")?);
        Ok(Self {
            inner: solver,
            coupling: q,
            depth: depth.max(1),
            mode: SeriesMode::Static,
            eps_tilde,
            increments: Vec::new(),
        })
    }

    /// Adaptive series around `A_k = a_base`, whose inverse is applied by
    /// `base`. The depth probe measures increments in the `A_k` norm.
    pub fn build_adaptive(
        base: SharedOp<T>,
        a_base: &CsrMatrix<T>,
        l_base: &CsrMatrix<T>,
        l_new: &CsrMatrix<T>,
        eps_tilde: T,
        rule: &DepthRule<T>,
    ) -> Result<Self> {
        let diff = CsrMatrix::lincomb(T::one(), l_base, -T::one(), l_new)?;
        let (depth, increments) = probe_depth(base.as_ref(), &diff, Some(a_base), rule)?;
        Ok(Self {
            inner: base,
            coupling: diff,
            depth,
            mode: SeriesMode::Adaptive,
            eps_tilde,
            increments,
        })
    }

    pub fn adaptive_with_depth(
        base: SharedOp<T>,
        l_base: &CsrMatrix<T>,
        l_new: &CsrMatrix<T>,
        eps_tilde: T,
        depth: usize,
    ) -> Result<Self> {
        let diff = CsrMatrix::lincomb(T::one(), l_base, -T::one(), l_new)?;
        Ok(Self {
            inner: base,
            coupling: diff,
            depth: depth.max(1),
            mode: SeriesMode::Adaptive,
            eps_tilde,
            increments: Vec::new(),
        })
    }

    pub fn depth(&self) -> usize {
        self.depth
    }

    pub fn mode(&self) -> SeriesMode {
        self.mode
    }

    pub fn eps_tilde(&self) -> T {
        self.eps_tilde
    }

    /// Increment norms recorded by the depth probe.
    pub fn increments(&self) -> &[f64] {
        &self.increments
    }
}

impl<T: Real> LinearOperator<T> for NeumannInverse<T> {
    fn dim(&self) -> usize {
        self.coupling.nrows()
    }

    fn apply(&self, v: &[T], y: &mut [T]) -> Result<()> {
        check_dims(self.dim(), v, y)?;
        let w = self.inner.apply_vec(v)?;
        y.copy_from_slice(&w);
        let mut cy = vec![T::zero(); v.len()];
        let mut t = vec![T::zero(); v.len()];
        for _ in 1..self.depth {
            self.coupling.spmv(y, &mut cy);
            self.inner.apply(&cy, &mut t)?;
            for ((yi, &ti), &wi) in y.iter_mut().zip(&t).zip(&w) {
                *yi = ti + wi;
            }
        }
        Ok(())
    }
}

/// Result of comparing the adaptive and static series contraction factors.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct AdvantageReport {
    /// `rho((I - G_k)^-1 (G_{k+1} - G_k)) = rho(A_k^-1 (L_k - L_{k+1}))`.
    pub rho_adaptive: f64,
    /// `rho(G_{k+1})`.
    pub rho_static: f64,
    /// Whether `L_k - L_{k+1}` is positive semidefinite.
    pub hypothesis_holds: bool,
}

impl AdvantageReport {
    /// `rho_adaptive <= rho_static < 1`, asserted only under the hypothesis.
    pub fn ordering_holds(&self) -> bool {
        self.hypothesis_holds && self.rho_adaptive <= self.rho_static * (1.0 + 1e-12) + 1e-14 && self.rho_static < 1.0
    }
}

/// Dense spectral radii of the adaptive and static iteration matrices for
/// `P = eps^2 S + eps_tilde I`.
pub fn adaptive_advantage_check<T: Real>(
    l_k: &DenseMatrix<T>,
    l_k1: &DenseMatrix<T>,
    p: &DenseMatrix<T>,
    eps_tilde: T,
) -> Result<AdvantageReport> {
    let n = p.nrows();
    let shift = DenseMatrix::identity(n).scaled(eps_tilde);
    let a_k = p.sub(&shift).add(l_k);
    let diff = l_k.sub(l_k1);
    let q_k1 = shift.sub(l_k1);
    let rho = |v: Vec<T>| v.iter().fold(0.0f64, |m, x| m.max(x.as_f64().abs()));
    let rho_adaptive = rho(generalized_symmetric_eigenvalues(&diff, &a_k)?);
    let rho_static = rho(generalized_symmetric_eigenvalues(&q_k1, p)?);
    let scale = diff.max_abs().as_f64().max(l_k.max_abs().as_f64());
    let min_diff = diff
        .symmetric_eigenvalues()?
        .first()
        .map(|x| x.as_f64())
        .unwrap_or(0.0);
    Ok(AdvantageReport {
        rho_adaptive,
        rho_static,
        hypothesis_holds: min_diff >= -1e-12 * scale.max(f64::MIN_POSITIVE),
    })
}
