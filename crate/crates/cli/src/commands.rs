use log::{info, warn};

use okpc::diagnostics::{preconditioned_spectrum, system_condition_number, theorem_certificates};
use okpc::la::DENSE_LIMIT;
use okpc::precond::PrecondConfig;
use okpc::scheme::{initial_condition, run_simulation, Discretization, RunOptions, Snapshot, Termination};

use crate::config::RunConfig;
use crate::output::{
    ensure_dir, snapshot_path, write_bench, write_cond, write_eigenvalues, write_json, write_series,
    write_snapshot, BenchRow, CondRow,
};
use crate::CliError;

fn discretization(dim: usize, n: usize) -> Result<Discretization<f64>, CliError> {
    Discretization::uniform(dim, n).map_err(|e| CliError::Config(e.to_string()))
}

fn initial_state(cfg: &RunConfig, disc: &Discretization<f64>) -> Result<Vec<f64>, CliError> {
    initial_condition(disc.mesh(), cfg.params.m, cfg.params.amplitude, cfg.params.seed).map_err(CliError::from)
}

/// Time integration; writes the energy/mass series, snapshots and stats.
pub fn run(cfg: &RunConfig) -> Result<(), CliError> {
    let params = cfg.model_params()?;
    let disc = discretization(cfg.mesh.dim, cfg.mesh.n)?;
    let u0 = initial_state(cfg, &disc)?;
    let dir = &cfg.output.dir;
    ensure_dir(dir)?;
    let t_end = params.num_steps() as f64 * params.dt();
    let mut times = cfg.output.snapshot_times.clone();
    times.extend([0.0, t_end]);
    let options = RunOptions {
        snapshot_times: times,
        ..RunOptions::default()
    };
    info!("run: {} vertices, {} steps, preconditioner {}", disc.p(), params.num_steps(), cfg.precond.kind);
    let traj = run_simulation(&disc, &params, &cfg.precond, u0, &options)?;
    write_series(&dir.join("series.csv"), &traj)?;
    let mut last: Option<&Snapshot<f64>> = None;
    for s in &traj.snapshots {
        write_snapshot(&snapshot_path(dir, s.step), disc.mesh(), s)?;
        last = Some(s);
    }
    // a failed run still records the last state it reached
    if traj.failed() {
        let step = traj.steps.len();
        if last.map_or(true, |s| s.step != step) {
            let snap = Snapshot {
                step,
                t: step as f64 * params.dt(),
                u: traj.u.clone(),
                w: traj.w.clone(),
            };
            write_snapshot(&snapshot_path(dir, step), disc.mesh(), &snap)?;
        }
    }
    let stats = serde_json::json!({
        "config": cfg,
        "summary": traj.summary,
        "steps": traj.steps,
    });
    write_json(&dir.join("stats.json"), &stats)?;
    match &traj.summary.termination {
        Termination::Failed(msg) => Err(CliError::Solver(msg.clone())),
        _ => Ok(()),
    }
}

/// Dense spectra of the requested operators plus the certificate bundle.
pub fn spectrum(cfg: &RunConfig) -> Result<(), CliError> {
    let spec = cfg.spectrum.clone().unwrap_or_default();
    let params = cfg.model_params()?;
    let disc = discretization(cfg.mesh.dim, cfg.mesh.n)?;
    if 2 * disc.p() > DENSE_LIMIT {
        return Err(CliError::Config(format!(
            "spectrum needs dense {0}x{0} matrices but the limit is {DENSE_LIMIT}; use a mesh with at most {1} vertices",
            2 * disc.p(),
            DENSE_LIMIT / 2
        )));
    }
    let u = initial_state(cfg, &disc)?;
    let dir = &cfg.output.dir;
    ensure_dir(dir)?;
    let mut reports = Vec::new();
    for op in &spec.operators {
        let config = PrecondConfig {
            kind: op.kind(),
            ..cfg.precond.clone()
        };
        let report = preconditioned_spectrum(&disc, &params, &u, &config, spec.tol)?;
        write_eigenvalues(&dir.join(format!("spectrum_{}.csv", op.name())), &report.eigenvalues)?;
        if report.violations > 0 {
            warn!("{}: {} eigenvalues violate the bound", report.label, report.violations);
        }
        reports.push(serde_json::json!({ "operator": op.name(), "report": report }));
    }
    let certificates = if spec.certificates {
        Some(theorem_certificates(&disc, &params, &u, &cfg.precond, spec.tol)?)
    } else {
        None
    };
    write_json(
        &dir.join("certificates.json"),
        &serde_json::json!({ "spectra": reports, "certificates": certificates }),
    )
}

/// Sweep over dof x (eps, sigma) x preconditioner. Failed cells are recorded
/// and the sweep continues.
pub fn bench(cfg: &RunConfig) -> Result<(), CliError> {
    let b = cfg
        .bench
        .as_ref()
        .ok_or_else(|| CliError::Config("bench needs a `bench` section".into()))?;
    let dir = &cfg.output.dir;
    ensure_dir(dir)?;
    let mut rows = Vec::new();
    for &dof in &b.dofs {
        let disc = discretization(cfg.mesh.dim, cfg.cells_for_dof(dof)?)?;
        let u0 = initial_state(cfg, &disc)?;
        for case in &b.cases {
            let dt = b.dt_factor * case.eps * case.eps;
            let mut params = okpc::scheme::Params::new(case.eps, case.sigma, dt, cfg.params.m)?;
            cfg.apply_solver(&mut params);
            params.t_final = b.steps as f64 * dt;
            for &kind in &b.kinds {
                let precond = PrecondConfig {
                    kind,
                    ..cfg.precond.clone()
                };
                info!("bench cell dof={dof} eps={} sigma={} {kind}", case.eps, case.sigma);
                let options = RunOptions {
                    track_energy: false,
                    steady_state_stop: false,
                    ..RunOptions::default()
                };
                let mut row = BenchRow {
                    dof,
                    eps: case.eps,
                    sigma: case.sigma,
                    precond: kind.name().to_string(),
                    t_pc: 0,
                    avg_it: f64::NAN,
                    cpu1_s: f64::NAN,
                    cpu2_s: f64::NAN,
                    status: "ok".into(),
                };
                match run_simulation(&disc, &params, &precond, u0.clone(), &options) {
                    Ok(traj) => {
                        let s = &traj.summary;
                        row.t_pc = s.t_pc;
                        row.avg_it = s.avg_it;
                        row.cpu1_s = s.cpu1_s;
                        row.cpu2_s = s.cpu2_s;
                        if let Termination::Failed(msg) = &s.termination {
                            row.status = format!("failed: {msg}");
                        } else if s.unconverged_steps > 0 {
                            row.status = format!("unconverged fixed point in {} steps", s.unconverged_steps);
                        }
                    }
                    Err(e) => row.status = format!("failed: {e}"),
                }
                if row.status != "ok" {
                    warn!("bench cell dof={dof} eps={} sigma={} {kind}: {}", case.eps, case.sigma, row.status);
                }
                rows.push(row);
                // keep partial results on disk as the sweep progresses
                write_bench(&dir.join("bench.csv"), &rows)?;
            }
        }
    }
    Ok(())
}

/// Condition numbers of the full block system at the first linearization.
pub fn cond_table(cfg: &RunConfig) -> Result<(), CliError> {
    let c = cfg
        .cond
        .as_ref()
        .ok_or_else(|| CliError::Config("cond-table needs a `cond` section".into()))?;
    let params = cfg.model_params()?;
    let dir = &cfg.output.dir;
    ensure_dir(dir)?;
    let mut rows: Vec<CondRow> = Vec::new();
    for &dof in &c.dofs {
        let disc = discretization(1, dof - 1)?;
        let u = initial_state(cfg, &disc)?;
        let kappa = system_condition_number(&disc, &params, &u)?;
        let growth = rows.last().map(|r| kappa / r.kappa);
        info!("cond dof={dof}: {kappa:e}");
        rows.push(CondRow { dof, kappa, growth });
    }
    write_cond(&dir.join("cond.csv"), &rows)
}
