use std::fs::{self, File};
use std::io::Write;
use std::path::{Path, PathBuf};

use serde::Serialize;

use okpc::fem::Mesh;
use okpc::scheme::{Snapshot, Trajectory};

use crate::CliError;

fn io_err(path: &Path, e: impl std::fmt::Display) -> CliError {
    CliError::Config(format!("cannot write {}: {e}", path.display()))
}

pub fn ensure_dir(dir: &Path) -> Result<(), CliError> {
    fs::create_dir_all(dir).map_err(|e| io_err(dir, e))
}

fn csv_writer(path: &Path) -> Result<csv::Writer<File>, CliError> {
    csv::Writer::from_path(path).map_err(|e| io_err(path, e))
}

fn finish(mut w: csv::Writer<File>, path: &Path) -> Result<(), CliError> {
    w.flush().map_err(|e| io_err(path, e))
}

pub fn write_json<S: Serialize>(path: &Path, value: &S) -> Result<(), CliError> {
    let text = serde_json::to_string_pretty(value).map_err(|e| io_err(path, e))?;
    let mut f = File::create(path).map_err(|e| io_err(path, e))?;
    writeln!(f, "{text}").map_err(|e| io_err(path, e))
}

#[derive(Serialize)]
struct SeriesRow {
    step: usize,
    t: f64,
    energy: f64,
    mass: f64,
    fp_iters: usize,
    gmres_avg: f64,
}

/// `step,t,energy,mass,fp_iters,gmres_avg`, starting with the initial state.
pub fn write_series(path: &Path, traj: &Trajectory<f64>) -> Result<(), CliError> {
    let mut w = csv_writer(path)?;
    let mut rows = vec![SeriesRow {
        step: 0,
        t: 0.0,
        energy: traj.initial_energy,
        mass: traj.initial_mass,
        fp_iters: 0,
        gmres_avg: 0.0,
    }];
    rows.extend(traj.steps.iter().map(|s| SeriesRow {
        step: s.step,
        t: s.t,
        energy: s.energy,
        mass: s.mass,
        fp_iters: s.fp_iters,
        gmres_avg: s.gmres_avg(),
    }));
    for r in rows {
        w.serialize(r).map_err(|e| io_err(path, e))?;
    }
    finish(w, path)
}

pub fn snapshot_path(dir: &Path, step: usize) -> PathBuf {
    dir.join(format!("snapshot_{step:06}.csv"))
}

/// `x,u,w` in 1D and `x,y,u,w` in 2D, one row per vertex.
pub fn write_snapshot(path: &Path, mesh: &Mesh<f64>, snap: &Snapshot<f64>) -> Result<(), CliError> {
    let mut w = csv_writer(path)?;
    let header: &[&str] = if mesh.dim() == 1 { &["x", "u", "w"] } else { &["x", "y", "u", "w"] };
    w.write_record(header).map_err(|e| io_err(path, e))?;
    for (i, v) in mesh.vertices().iter().enumerate() {
        let mut rec = vec![v[0].to_string()];
        if mesh.dim() == 2 {
            rec.push(v[1].to_string());
        }
        rec.push(snap.u[i].to_string());
        rec.push(snap.w[i].to_string());
        w.write_record(&rec).map_err(|e| io_err(path, e))?;
    }
    finish(w, path)
}

#[derive(Clone, Debug, Serialize)]
pub struct BenchRow {
    pub dof: usize,
    pub eps: f64,
    pub sigma: f64,
    pub precond: String,
    #[serde(rename = "T_pc")]
    pub t_pc: usize,
    pub avg_it: f64,
    pub cpu1_s: f64,
    pub cpu2_s: f64,
    pub status: String,
}

pub fn write_bench(path: &Path, rows: &[BenchRow]) -> Result<(), CliError> {
    let mut w = csv_writer(path)?;
    for r in rows {
        w.serialize(r).map_err(|e| io_err(path, e))?;
    }
    finish(w, path)
}

#[derive(Clone, Debug, Serialize)]
pub struct CondRow {
    pub dof: usize,
    pub kappa: f64,
    /// `kappa / kappa_previous`, empty on the first row.
    pub growth: Option<f64>,
}

pub fn write_cond(path: &Path, rows: &[CondRow]) -> Result<(), CliError> {
    let mut w = csv_writer(path)?;
    for r in rows {
        w.serialize(r).map_err(|e| io_err(path, e))?;
    }
    finish(w, path)
}

/// `re,im` pairs.
pub fn write_eigenvalues(path: &Path, eigs: &[[f64; 2]]) -> Result<(), CliError> {
    let mut w = csv_writer(path)?;
    w.write_record(["re", "im"]).map_err(|e| io_err(path, e))?;
    for [re, im] in eigs {
        w.write_record([re.to_string(), im.to_string()]).map_err(|e| io_err(path, e))?;
    }
    finish(w, path)
}
