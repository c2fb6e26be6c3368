use std::sync::Arc;

use log::debug;

use crate::error::{Error, Result};
use crate::la::operator::{check_dims, LinearOperator};
use crate::la::sparse::CsrMatrix;
use crate::la::{InnerSolverKind, SpdSolver};
use crate::precond::blocks::{BtPreconditioner, ElPreconditioner, MhssPreconditioner, SchurApprox};
use crate::precond::neumann::{DepthRule, NeumannInverse};
use crate::precond::selection::{eps_tilde_from_radius, select_alpha, spectral_radius, AlphaInputs};
use crate::precond::{AInverseKind, PrecondConfig, PrecondKind, SeriesMode};
use crate::scheme::{BlockForm, Discretization, Params};
use crate::Real;

pub type BoxedOp<T> = Box<dyn LinearOperator<T> + Send + Sync>;
type SharedOp<T> = Arc<dyn LinearOperator<T> + Send + Sync>;

/// What went into one preconditioner build.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct BuildInfo {
    pub alpha: Option<f64>,
    pub eps_tilde: Option<f64>,
    pub depth: Option<usize>,
    pub series: Option<SeriesMode>,
}

/// Counters accumulated over a run.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct BuilderStats {
    pub builds: usize,
    pub static_series: usize,
    pub adaptive_series: usize,
    pub depth_total: usize,
}

struct StaticState<T: Real> {
    inverse: Arc<NeumannInverse<T>>,
    weighted: CsrMatrix<T>,
    a: CsrMatrix<T>,
    eps_tilde: T,
}

/// `y = B x + M (M x) / alpha`, never forming `M^2`.
struct ShiftedSquare<T: Real> {
    b: CsrMatrix<T>,
    mass: Arc<CsrMatrix<T>>,
    inv_alpha: T,
}

impl<T: Real> LinearOperator<T> for ShiftedSquare<T> {
    fn dim(&self) -> usize {
        self.b.nrows()
    }
    fn apply(&self, x: &[T], y: &mut [T]) -> Result<()> {
        check_dims(self.dim(), x, y)?;
        let mmx = self.mass.mul_vec(&self.mass.mul_vec(x));
        self.b.spmv(x, y);
        for (yi, &v) in y.iter_mut().zip(&mmx) {
            *yi += self.inv_alpha * v;
        }
        Ok(())
    }
}

/// Builds the preconditioner for each fixed-point iteration. Pieces that
/// depend only on `M` and `S` are factored once per run.
pub struct PrecondBuilder<T: Real> {
    config: PrecondConfig,
    eps: T,
    zeta: T,
    mass_factor: T,
    cg_tol: T,
    mass: Arc<CsrMatrix<T>>,
    stiffness: Arc<CsrMatrix<T>>,
    minv: Option<Arc<SpdSolver<T>>>,
    schur: Option<Arc<SchurApprox<T>>>,
    el: Option<Arc<ElPreconditioner<T>>>,
    rho_m: Option<T>,
    mass_sq: Option<CsrMatrix<T>>,
    last_static: Option<StaticState<T>>,
    stats: BuilderStats,
}

impl<T: Real> PrecondBuilder<T> {
    pub fn new(disc: &Discretization<T>, params: &Params<T>, config: &PrecondConfig) -> Result<Self> {
        config.validate()?;
        let mass = Arc::new(disc.mass().clone());
        let stiffness = Arc::new(disc.stiffness().clone());
        let eps = params.eps();
        let zeta = params.zeta();
        let inner = config.inner;
        let cg_tol = params.cg_tol;
        let mut b = Self {
            config: config.clone(),
            eps,
            zeta,
            mass_factor: params.mass_factor(),
            cg_tol,
            mass: mass.clone(),
            stiffness: stiffness.clone(),
            minv: None,
            schur: None,
            el: None,
            rho_m: None,
            mass_sq: None,
            last_static: None,
            stats: BuilderStats::default(),
        };
        match config.kind {
            PrecondKind::None => {}
            PrecondKind::Bt | PrecondKind::El => {
                let minv = Arc::new(SpdSolver::new((*mass).clone(), inner, cg_tol, "M")?);
                let n_matrix = CsrMatrix::lincomb(T::one(), &mass, eps * zeta.sqrt(), &stiffness)?;
                let n_solver = SpdSolver::new(n_matrix.clone(), inner, cg_tol, "M + eps sqrt(zeta) S")?;
                let schur = Arc::new(SchurApprox::new(n_solver, n_matrix, mass.clone()));
                if config.kind == PrecondKind::El {
                    b.el = Some(Arc::new(ElPreconditioner {
                        minv: minv.clone(),
                        mass: mass.clone(),
                        stiffness: stiffness.clone(),
                        eps,
                        zeta,
                        schur: schur.clone(),
                    }));
                }
                b.minv = Some(minv);
                b.schur = Some(schur);
            }
            PrecondKind::Mhss => {
                if config.a_inverse == AInverseKind::Neumann {
                    b.rho_m = Some(spectral_radius(&mass, config.seed)?);
                }
                if inner == InnerSolverKind::Cholesky {
                    b.mass_sq = Some(mass.matmul(&mass)?);
                }
            }
        }
        Ok(b)
    }

    pub fn config(&self) -> &PrecondConfig {
        &self.config
    }

    pub fn form(&self) -> BlockForm {
        self.config.kind.form()
    }

    pub fn stats(&self) -> BuilderStats {
        self.stats
    }

    /// Preconditioner for the system whose weighted mass `L` was assembled
    /// from `u_weight`. `None` for the unpreconditioned solver.
    pub fn build(&mut self, weighted: &CsrMatrix<T>, u_weight: &[T]) -> Result<(Option<BoxedOp<T>>, BuildInfo)> {
        self.stats.builds += 1;
        let eps2 = self.eps * self.eps;
        match self.config.kind {
            PrecondKind::None => Ok((None, BuildInfo::default())),
            PrecondKind::El => {
                let el = self.el.clone().expect("EL pieces built in new()");
                Ok((Some(Box::new(el)), BuildInfo::default()))
            }
            PrecondKind::Bt => {
                let a = CsrMatrix::lincomb(eps2, &self.stiffness, T::one(), weighted)?;
                let bt = BtPreconditioner {
                    minv: self.minv.clone().expect("BT pieces built in new()"),
                    mass: self.mass.clone(),
                    mass_factor: self.mass_factor,
                    a,
                    schur: self.schur.clone().expect("BT pieces built in new()"),
                };
                Ok((Some(Box::new(bt)), BuildInfo::default()))
            }
            PrecondKind::Mhss => {
                let (m, info) = self.build_mhss(weighted, u_weight)?;
                Ok((Some(Box::new(m)), info))
            }
        }
    }

    fn a_inverse(&mut self, a: &CsrMatrix<T>, weighted: &CsrMatrix<T>, u: &[T], info: &mut BuildInfo) -> Result<SharedOp<T>> {
        let cfg = &self.config;
        if cfg.a_inverse == AInverseKind::Exact {
            return Ok(Arc::new(SpdSolver::new(a.clone(), cfg.inner, self.cg_tol, "A = eps^2 S + L")?));
        }
        let rho_m = self.rho_m.expect("rho(M) estimated in new()");
        let eps_tilde = eps_tilde_from_radius(u, rho_m, T::lit(cfg.safety))?;
        let seed = cfg.seed.wrapping_add(self.stats.builds as u64);
        if cfg.series == SeriesMode::Adaptive {
            if let Some(last) = &self.last_static {
                let diff = CsrMatrix::lincomb(T::one(), &last.weighted, -T::one(), weighted)?.frobenius_norm();
                let threshold = match cfg.eps2 {
                    Some(e) => T::lit(e),
                    None => T::lit(0.1) * last.weighted.frobenius_norm(),
                };
                // the base splitting stays certified while its eps_tilde still
                // dominates the bound for the new L
                let certified = last.eps_tilde * T::lit(cfg.safety) >= eps_tilde;
                if diff < threshold && certified {
                    let rule = DepthRule {
                        tol: T::lit(cfg.eps1_adaptive),
                        max_depth: cfg.max_depth,
                        seed,
                    };
                    let base: SharedOp<T> = last.inverse.clone();
                    match NeumannInverse::build_adaptive(base, &last.a, &last.weighted, weighted, last.eps_tilde, &rule) {
                        Ok(inv) => {
                            self.stats.adaptive_series += 1;
                            self.stats.depth_total += inv.depth();
                            info.depth = Some(inv.depth());
                            info.series = Some(SeriesMode::Adaptive);
                            info.eps_tilde = Some(last.eps_tilde.as_f64());
                            return Ok(Arc::new(inv));
                        }
                        Err(Error::SeriesDivergence { depth, ratio }) => {
                            debug!("adaptive series diverged at depth {depth} (ratio {ratio:.3}); rebuilding statically");
                        }
                        Err(e) => return Err(e),
                    }
                }
            }
        }
        let rule = DepthRule {
            tol: T::lit(cfg.eps1),
            max_depth: cfg.max_depth,
            seed,
        };
        let inv = Arc::new(NeumannInverse::build_static(
            &self.stiffness,
            weighted,
            self.eps,
            eps_tilde,
            &rule,
            cfg.inner,
            self.cg_tol,
        )?);
        self.stats.static_series += 1;
        self.stats.depth_total += inv.depth();
        info.depth = Some(inv.depth());
        info.series = Some(SeriesMode::Static);
        info.eps_tilde = Some(eps_tilde.as_f64());
        if cfg.series == SeriesMode::Adaptive {
            self.last_static = Some(StaticState {
                inverse: inv.clone(),
                weighted: weighted.clone(),
                a: a.clone(),
                eps_tilde,
            });
        }
        Ok(inv)
    }

    fn build_mhss(&mut self, weighted: &CsrMatrix<T>, u: &[T]) -> Result<(MhssPreconditioner<T>, BuildInfo)> {
        let mut info = BuildInfo::default();
        let eps2 = self.eps * self.eps;
        let a = CsrMatrix::lincomb(eps2, &self.stiffness, T::one(), weighted)?;
        let a_inv = self.a_inverse(&a, weighted, u, &mut info)?;
        let params_view = Params::new(self.eps, T::zero(), T::one(), T::zero())?;
        let alpha = select_alpha(
            self.config.alpha,
            &AlphaInputs {
                mass: &self.mass,
                stiffness: &self.stiffness,
                weighted,
                params: &params_view,
                a_inverse: Some(a_inv.as_ref()),
                probes: self.config.probes,
                seed: self.config.seed,
            },
        )?;
        info.alpha = Some(alpha.as_f64());
        let b = self.stiffness.scaled(self.zeta);
        let inv_alpha = T::one() / alpha;
        let label = "B + M^2 / alpha";
        let d_inv = match &self.mass_sq {
            Some(m2) => SpdSolver::new(CsrMatrix::lincomb(T::one(), &b, inv_alpha, m2)?, InnerSolverKind::Cholesky, self.cg_tol, label)?,
            None => {
                let diag_b = b.diagonal();
                let diagonal: Vec<T> = (0..b.nrows())
                    .map(|i| {
                        let (_, vals) = self.mass.row(i);
                        diag_b[i] + inv_alpha * vals.iter().map(|&v| v * v).sum::<T>()
                    })
                    .collect();
                let op = ShiftedSquare {
                    b: b.clone(),
                    mass: self.mass.clone(),
                    inv_alpha,
                };
                SpdSolver::matrix_free(Box::new(op), diagonal, self.cg_tol, label)
            }
        };
        Ok((
            MhssPreconditioner {
                a_inv,
                a,
                mass: self.mass.clone(),
                b,
                d_inv,
                alpha,
            },
            info,
        ))
    }
}
