use log::{info, warn};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fem::assemble_weighted_mass;
use crate::la::cg::{cg, CgOptions};
use crate::la::vector::norm_inf;
use crate::precond::{PrecondBuilder, PrecondConfig};
use crate::scheme::step::{fixed_point_step, StepStats};
use crate::scheme::{discrete_energy, Discretization, Params};
use crate::Real;

/// Knobs of a run that are not model parameters.
#[derive(Clone, Debug, PartialEq)]
pub struct RunOptions {
    /// Times at which the state is recorded.
    pub snapshot_times: Vec<f64>,
    /// Evaluate the free energy after every step.
    pub track_energy: bool,
    /// Abort when a step exhausts its fixed-point iterations.
    pub abort_on_stall: bool,
    /// Stop early once `||u^n - u^{n-1}||_M < ss_tol`.
    pub steady_state_stop: bool,
}

impl Default for RunOptions {
    fn default() -> Self {
        Self {
            snapshot_times: Vec::new(),
            track_energy: true,
            abort_on_stall: false,
            steady_state_stop: true,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Snapshot<T> {
    pub step: usize,
    pub t: f64,
    pub u: Vec<T>,
    pub w: Vec<T>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "reason", content = "message")]
pub enum Termination {
    FinalTime,
    SteadyState,
    Failed(String),
}

/// Aggregate metrics of a run.
///
/// `t_pc` counts all fixed-point (predictor-corrector) iterations,
/// `avg_it` is GMRES iterations per fixed-point iteration, `t_g` is
/// fixed-point iterations per time step, `cpu1_s` the wall time per
/// fixed-point iteration and `cpu2_s` the GMRES share of it.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct RunSummary {
    pub steps: usize,
    pub t_final: f64,
    pub t_pc: usize,
    pub gmres_total: usize,
    pub avg_it: f64,
    pub t_g: f64,
    pub cpu1_s: f64,
    pub cpu2_s: f64,
    pub unconverged_steps: usize,
    pub max_abs_u: f64,
    /// `max_n |mean(u^n) - m|`.
    pub max_mass_drift: f64,
    pub initial_energy: f64,
    pub final_energy: f64,
    pub static_series: usize,
    pub adaptive_series: usize,
    pub avg_depth: f64,
    pub termination: Termination,
}

impl Default for Termination {
    fn default() -> Self {
        Termination::FinalTime
    }
}

#[derive(Clone, Debug)]
pub struct Trajectory<T> {
    pub steps: Vec<StepStats>,
    pub snapshots: Vec<Snapshot<T>>,
    pub u: Vec<T>,
    pub w: Vec<T>,
    pub initial_energy: f64,
    pub initial_mass: f64,
    pub summary: RunSummary,
}

impl<T> Trajectory<T> {
    pub fn failed(&self) -> bool {
        matches!(self.summary.termination, Termination::Failed(_))
    }
}

/// L2 projection of `-eps^2 Lap u + u^3 - u`, used as the chemical potential
/// of the initial state.
pub fn initial_potential<T: Real>(disc: &Discretization<T>, u: &[T], params: &Params<T>) -> Result<Vec<T>> {
    let eps2 = params.eps() * params.eps();
    let l = assemble_weighted_mass(disc.mesh(), u)?;
    let su = disc.stiffness().try_mul_vec(u)?;
    let lu = l.mul_vec(u);
    let mu = disc.mass().mul_vec(u);
    let rhs: Vec<T> = (0..u.len()).map(|i| eps2 * su[i] + lu[i] - mu[i]).collect();
    let diag = disc.mass().diagonal();
    let opts = CgOptions {
        tol: params.cg_tol,
        diagonal: Some(&diag),
        label: "M",
        ..CgOptions::default()
    };
    Ok(cg(disc.mass(), &rhs, &opts)?.0)
}

fn wants_snapshot(times: &[f64], t: f64, dt: f64) -> bool {
    times.iter().any(|&s| (s - t).abs() <= 0.5 * dt)
}

/// Integrates from `u0` up to `params.t_final`. Step failures end the run
/// early; the trajectory up to the failure is returned with
/// [`Termination::Failed`].
pub fn run_simulation<T: Real>(
    disc: &Discretization<T>,
    params: &Params<T>,
    precond: &PrecondConfig,
    u0: Vec<T>,
    options: &RunOptions,
) -> Result<Trajectory<T>> {
    params.validate()?;
    if u0.len() != disc.p() {
        return Err(Error::DimensionMismatch(format!(
            "initial state has length {}, mesh has {} vertices",
            u0.len(),
            disc.p()
        )));
    }
    let mut builder = PrecondBuilder::new(disc, params, precond)?;
    let initial_mass = disc.mean(&u0).as_f64();
    if (initial_mass - params.m().as_f64()).abs() > 1e-10 {
        warn!(
            "initial mean {initial_mass} differs from m = {}; the nonlocal term will drive it toward m",
            params.m()
        );
    }
    let initial_energy = if options.track_energy {
        discrete_energy(disc, &u0, params)?.as_f64()
    } else {
        f64::NAN
    };
    let w0 = initial_potential(disc, &u0, params)?;
    let dt = params.dt().as_f64();
    let mut snapshots = Vec::new();
    if wants_snapshot(&options.snapshot_times, 0.0, dt) {
        snapshots.push(Snapshot {
            step: 0,
            t: 0.0,
            u: u0.clone(),
            w: w0.clone(),
        });
    }
    let mut u = u0;
    let mut w = w0;
    let mut steps = Vec::new();
    let mut termination = Termination::FinalTime;
    let n_steps = params.num_steps();
    for n in 1..=n_steps {
        let outcome = match fixed_point_step(disc, params, &mut builder, &u, &w, n) {
            Ok(o) => o,
            Err(e) => {
                warn!("run aborted at step {n}: {e}");
                termination = Termination::Failed(e.to_string());
                break;
            }
        };
        let mut stats = outcome.stats;
        u = outcome.u;
        w = outcome.w;
        if options.track_energy {
            match discrete_energy(disc, &u, params) {
                Ok(e) => stats.energy = e.as_f64(),
                Err(e) => {
                    termination = Termination::Failed(e.to_string());
                    steps.push(stats);
                    break;
                }
            }
        } else {
            stats.energy = f64::NAN;
        }
        if wants_snapshot(&options.snapshot_times, stats.t, dt) {
            snapshots.push(Snapshot {
                step: n,
                t: stats.t,
                u: u.clone(),
                w: w.clone(),
            });
        }
        let stalled = !stats.fp_converged;
        let update = stats.update_norm;
        steps.push(stats);
        if stalled && options.abort_on_stall {
            termination = Termination::Failed(
                Error::FixedPointStalled {
                    iterations: params.fp_max,
                    update,
                }
                .to_string(),
            );
            break;
        }
        if options.steady_state_stop && update < params.ss_tol.as_f64() {
            info!("steady state reached at step {n} (update {update:e})");
            termination = Termination::SteadyState;
            break;
        }
    }
    let summary = summarize(
        &steps,
        &builder,
        initial_energy,
        params.m().as_f64(),
        norm_inf(&u).as_f64(),
        termination,
    );
    Ok(Trajectory {
        steps,
        snapshots,
        u,
        w,
        initial_energy,
        initial_mass,
        summary,
    })
}

fn summarize<T: Real>(
    steps: &[StepStats],
    builder: &PrecondBuilder<T>,
    initial_energy: f64,
    m: f64,
    final_max: f64,
    termination: Termination,
) -> RunSummary {
    let t_pc: usize = steps.iter().map(|s| s.fp_iters).sum();
    let gmres_total: usize = steps.iter().map(|s| s.gmres_total()).sum();
    let wall: f64 = steps.iter().map(|s| s.wall_s).sum();
    let gmres_s: f64 = steps.iter().map(|s| s.gmres_s).sum();
    let per = |x: f64| if t_pc == 0 { 0.0 } else { x / t_pc as f64 };
    let b = builder.stats();
    let series = b.static_series + b.adaptive_series;
    RunSummary {
        steps: steps.len(),
        t_final: steps.last().map_or(0.0, |s| s.t),
        t_pc,
        gmres_total,
        avg_it: per(gmres_total as f64),
        t_g: if steps.is_empty() { 0.0 } else { t_pc as f64 / steps.len() as f64 },
        cpu1_s: per(wall),
        cpu2_s: per(gmres_s),
        unconverged_steps: steps.iter().filter(|s| !s.fp_converged).count(),
        max_abs_u: steps.iter().map(|s| s.max_abs_u).fold(final_max, f64::max),
        max_mass_drift: steps
            .iter()
            .map(|s| (s.mass - m).abs())
            .fold(0.0, f64::max),
        initial_energy,
        final_energy: steps.last().map_or(initial_energy, |s| s.energy),
        static_series: b.static_series,
        adaptive_series: b.adaptive_series,
        avg_depth: if series == 0 { 0.0 } else { b.depth_total as f64 / series as f64 },
        termination,
    }
}
