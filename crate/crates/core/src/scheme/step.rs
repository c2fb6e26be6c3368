use std::time::Instant;

use log::warn;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fem::{assemble_rhs, assemble_weighted_mass};
use crate::la::gmres::gmres_from;
use crate::la::operator::LinearOperator;
use crate::la::vector::{norm2, norm_inf};
use crate::precond::PrecondBuilder;
use crate::scheme::{BlockOperator, Discretization, Params};
use crate::Real;

/// Per-time-step record.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct StepStats {
    /// Time index `n >= 1`.
    pub step: usize,
    pub t: f64,
    /// Fixed-point iterations used, each one linear solve.
    pub fp_iters: usize,
    pub fp_converged: bool,
    /// GMRES iterations of each linear solve.
    pub gmres_iters: Vec<usize>,
    pub energy: f64,
    /// Discrete mean `1^T M u / 1^T M 1`.
    pub mass: f64,
    /// `||u^n - u^{n-1}||_M`.
    pub update_norm: f64,
    pub max_abs_u: f64,
    /// Series depths of the approximate inverse, when one was built.
    pub depths: Vec<usize>,
    pub alphas: Vec<f64>,
    /// Wall time of the whole step, including preconditioner builds.
    pub wall_s: f64,
    /// Wall time spent inside GMRES.
    pub gmres_s: f64,
}

impl StepStats {
    pub fn gmres_total(&self) -> usize {
        self.gmres_iters.iter().sum()
    }

    pub fn gmres_avg(&self) -> f64 {
        if self.gmres_iters.is_empty() {
            0.0
        } else {
            self.gmres_total() as f64 / self.gmres_iters.len() as f64
        }
    }
}

/// Result of one time step.
#[derive(Clone, Debug)]
pub struct StepOutcome<T> {
    pub u: Vec<T>,
    pub w: Vec<T>,
    pub stats: StepStats,
}

/// Advances one time step. Starting from `U^{n,0} = U^{n-1}`, each iteration
/// assembles `L` from the previous iterate, solves the linearized block
/// system with preconditioned GMRES, warm-started from the previous
/// iterate, and stops once
/// `||U^{n,k} - U^{n,k-1}||_M <= fp_tol` or after `fp_max` iterations.
///
/// The concave part of the bulk energy is taken at `U^{n-1}`, so `E` is
/// fixed for the whole step.
pub fn fixed_point_step<T: Real>(
    disc: &Discretization<T>,
    params: &Params<T>,
    builder: &mut PrecondBuilder<T>,
    u_prev: &[T],
    w_prev: &[T],
    step: usize,
) -> Result<StepOutcome<T>> {
    let start = Instant::now();
    let p = disc.p();
    if u_prev.len() != p || w_prev.len() != p {
        return Err(Error::DimensionMismatch(format!(
            "state vectors of length {}/{} on a mesh with {p} vertices",
            u_prev.len(),
            w_prev.len()
        )));
    }
    let (f, e) = assemble_rhs(disc.mass(), u_prev, u_prev, params)?;
    let form = builder.form();
    let b = form.rhs(&f, &e, params);
    let zero_rhs = norm2(&b) == T::zero();

    let mut stats = StepStats {
        step,
        t: (T::from_usize_lossy(step) * params.dt()).as_f64(),
        ..StepStats::default()
    };
    let mut u = u_prev.to_vec();
    let mut w = w_prev.to_vec();
    let mut last_update = T::infinity();
    for k in 1..=params.fp_max {
        let weighted = assemble_weighted_mass(disc.mesh(), &u)?;
        let op = BlockOperator::new(form, disc.mass(), disc.stiffness(), &weighted, params)?;
        let x = if zero_rhs {
            stats.gmres_iters.push(0);
            vec![T::zero(); 2 * p]
        } else {
            let (pc, info) = builder.build(&weighted, &u)?;
            if let Some(d) = info.depth {
                stats.depths.push(d);
            }
            if let Some(a) = info.alpha {
                stats.alphas.push(a);
            }
            let pc_ref = pc.as_ref().map(|b| b.as_ref() as &dyn LinearOperator<T>);
            let guess: Vec<T> = u.iter().chain(&w).copied().collect();
            let (x, report) = gmres_from(&op, &b, &guess, pc_ref, &params.gmres).map_err(|e| Error::SolverFailure {
                step,
                reason: e.to_string(),
            })?;
            stats.gmres_s += report.wall_time_s;
            stats.gmres_iters.push(report.iterations);
            if !report.converged {
                return Err(Error::SolverFailure {
                    step,
                    reason: format!(
                        "GMRES stopped after {} iterations at relative residual {:e} (fixed-point iteration {k})",
                        report.iterations, report.final_residual
                    ),
                });
            }
            x
        };
        let diff: Vec<T> = x[..p].iter().zip(&u).map(|(&a, &b)| a - b).collect();
        last_update = disc.mass_norm(&diff);
        u.copy_from_slice(&x[..p]);
        w.copy_from_slice(&x[p..]);
        stats.fp_iters = k;
        if !u.iter().all(|v| v.is_finite()) {
            return Err(Error::SolverFailure {
                step,
                reason: "non-finite concentration".into(),
            });
        }
        if last_update <= params.fp_tol {
            stats.fp_converged = true;
            break;
        }
    }
    if !stats.fp_converged {
        warn!(
            "step {step}: fixed-point iteration not converged after {} iterations (update {:e})",
            params.fp_max,
            last_update.as_f64()
        );
    }
    let du: Vec<T> = u.iter().zip(u_prev).map(|(&a, &b)| a - b).collect();
    stats.update_norm = disc.mass_norm(&du).as_f64();
    stats.mass = disc.mean(&u).as_f64();
    stats.max_abs_u = norm_inf(&u).as_f64();
    stats.wall_s = start.elapsed().as_secs_f64();
    Ok(StepOutcome { u, w, stats })
}
