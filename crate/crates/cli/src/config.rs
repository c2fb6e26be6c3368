use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use serde_json::Value;

use okpc::la::{DENSE_LIMIT, GmresOptions};
use okpc::precond::{PrecondConfig, PrecondKind};
use okpc::scheme::Params;

use crate::CliError;

pub const OUTPUT_DIR_ENV: &str = "OK_OUTPUT_DIR";

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub mesh: MeshConfig,
    pub params: ModelConfig,
    #[serde(default)]
    pub precond: PrecondConfig,
    #[serde(default)]
    pub solver: SolverConfig,
    #[serde(default)]
    pub output: OutputConfig,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub bench: Option<BenchConfig>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub spectrum: Option<SpectrumConfig>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub cond: Option<CondConfig>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MeshConfig {
    #[serde(default = "one")]
    pub dim: usize,
    /// Cells per axis.
    pub n: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelConfig {
    pub eps: f64,
    pub sigma: f64,
    pub dt: f64,
    #[serde(default)]
    pub m: f64,
    /// Final time; one step when absent.
    #[serde(rename = "T", default, skip_serializing_if = "Option::is_none")]
    pub t_final: Option<f64>,
    #[serde(default = "default_seed")]
    pub seed: u64,
    #[serde(default = "default_amplitude")]
    pub amplitude: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SolverConfig {
    pub gmres_tol: f64,
    pub gmres_max: usize,
    pub restart: Option<usize>,
    pub cg_tol: f64,
    pub fp_tol: f64,
    pub fp_max: usize,
    pub ss_tol: f64,
}

impl Default for SolverConfig {
    fn default() -> Self {
        Self {
            gmres_tol: 1e-10,
            gmres_max: 300,
            restart: None,
            cg_tol: 1e-12,
            fp_tol: 1e-9,
            fp_max: 50,
            ss_tol: 1e-10,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct OutputConfig {
    pub dir: PathBuf,
    /// Extra snapshot times; the initial and final states are always written.
    pub snapshot_times: Vec<f64>,
}

impl Default for OutputConfig {
    fn default() -> Self {
        Self {
            dir: PathBuf::from("out"),
            snapshot_times: Vec::new(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BenchCase {
    pub eps: f64,
    pub sigma: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BenchConfig {
    /// Degrees of freedom per field (mesh vertices).
    pub dofs: Vec<usize>,
    pub cases: Vec<BenchCase>,
    pub kinds: Vec<PrecondKind>,
    #[serde(default = "default_bench_steps")]
    pub steps: usize,
    /// `dt = dt_factor * eps^2` in every cell.
    #[serde(default = "one_f64")]
    pub dt_factor: f64,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SpectrumOp {
    Raw,
    Bt,
    El,
    Mhss,
}

impl SpectrumOp {
    pub fn kind(self) -> PrecondKind {
        match self {
            SpectrumOp::Raw => PrecondKind::None,
            SpectrumOp::Bt => PrecondKind::Bt,
            SpectrumOp::El => PrecondKind::El,
            SpectrumOp::Mhss => PrecondKind::Mhss,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            SpectrumOp::Raw => "raw",
            other => other.kind().name(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SpectrumConfig {
    pub operators: Vec<SpectrumOp>,
    pub tol: f64,
    pub certificates: bool,
}

impl Default for SpectrumConfig {
    fn default() -> Self {
        Self {
            operators: vec![SpectrumOp::Raw, SpectrumOp::Bt, SpectrumOp::El, SpectrumOp::Mhss],
            tol: okpc::diagnostics::REAL_TOL,
            certificates: true,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CondConfig {
    /// Degrees of freedom per field (mesh vertices), 1D.
    pub dofs: Vec<usize>,
}

fn one() -> usize {
    1
}
fn one_f64() -> f64 {
    1.0
}
fn default_seed() -> u64 {
    1
}
fn default_amplitude() -> f64 {
    0.01
}
fn default_bench_steps() -> usize {
    100
}

fn config_err(msg: impl Into<String>) -> CliError {
    CliError::Config(msg.into())
}

/// Sets `a.b.c = value` in a JSON tree. The value is parsed as JSON when
/// possible and taken as a string otherwise.
pub fn apply_override(root: &mut Value, assignment: &str) -> Result<(), CliError> {
    let (key, raw) = assignment
        .split_once('=')
        .ok_or_else(|| config_err(format!("--set expects key=value, got `{assignment}`")))?;
    let value = serde_json::from_str(raw).unwrap_or_else(|_| Value::String(raw.to_string()));
    let parts: Vec<&str> = key.split('.').collect();
    if parts.iter().any(|p| p.is_empty()) {
        return Err(config_err(format!("bad key `{key}` in --set")));
    }
    let mut node = root;
    for part in &parts[..parts.len() - 1] {
        let obj = node
            .as_object_mut()
            .ok_or_else(|| config_err(format!("--set {key}: `{part}` is inside a non-object")))?;
        node = obj.entry(part.to_string()).or_insert_with(|| Value::Object(Default::default()));
    }
    node.as_object_mut()
        .ok_or_else(|| config_err(format!("--set {key}: parent is not an object")))?
        .insert(parts[parts.len() - 1].to_string(), value);
    Ok(())
}

impl RunConfig {
    /// Parses and validates a configuration, applying `--set` overrides and
    /// the output directory override.
    pub fn from_json(text: &str, overrides: &[String], env_dir: Option<PathBuf>) -> Result<Self, CliError> {
        let mut value: Value = serde_json::from_str(text).map_err(|e| config_err(format!("malformed config: {e}")))?;
        for o in overrides {
            apply_override(&mut value, o)?;
        }
        let mut cfg: RunConfig = serde_json::from_value(value).map_err(|e| config_err(format!("invalid config: {e}")))?;
        if let Some(dir) = env_dir {
            cfg.output.dir = dir;
        }
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path, overrides: &[String]) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path).map_err(|e| config_err(format!("cannot read {}: {e}", path.display())))?;
        let env_dir = std::env::var_os(OUTPUT_DIR_ENV).filter(|v| !v.is_empty()).map(PathBuf::from);
        Self::from_json(&text, overrides, env_dir)
    }

    pub fn validate(&self) -> Result<(), CliError> {
        if !(1..=2).contains(&self.mesh.dim) {
            return Err(config_err(format!("mesh.dim must be 1 or 2, got {}", self.mesh.dim)));
        }
        if self.mesh.n == 0 {
            return Err(config_err("mesh.n must be positive"));
        }
        if !(self.params.amplitude >= 0.0) {
            return Err(config_err("params.amplitude must be nonnegative"));
        }
        self.model_params()?;
        self.precond.validate().map_err(|e| config_err(e.to_string()))?;
        if self.output.snapshot_times.iter().any(|t| !(t.is_finite() && *t >= 0.0)) {
            return Err(config_err("output.snapshot_times must be finite and nonnegative"));
        }
        if let Some(b) = &self.bench {
            if b.dofs.is_empty() || b.cases.is_empty() || b.kinds.is_empty() {
                return Err(config_err("bench sweep lists (dofs, cases, kinds) must be nonempty"));
            }
            if b.steps == 0 || !(b.dt_factor > 0.0) {
                return Err(config_err("bench.steps and bench.dt_factor must be positive"));
            }
            for &d in &b.dofs {
                self.cells_for_dof(d)?;
            }
            for c in &b.cases {
                Params::new(c.eps, c.sigma, b.dt_factor * c.eps * c.eps, self.params.m)
                    .map_err(|e| config_err(format!("bench case eps={} sigma={}: {e}", c.eps, c.sigma)))?;
            }
        }
        if let Some(s) = &self.spectrum {
            if s.operators.is_empty() {
                return Err(config_err("spectrum.operators must be nonempty"));
            }
            if !(s.tol > 0.0) {
                return Err(config_err("spectrum.tol must be positive"));
            }
        }
        if let Some(c) = &self.cond {
            if c.dofs.is_empty() {
                return Err(config_err("cond.dofs must be nonempty"));
            }
            if let Some(&d) = c.dofs.iter().find(|&&d| d < 2 || 2 * d > DENSE_LIMIT) {
                return Err(config_err(format!(
                    "cond.dofs entry {d} is outside 2..={} (dense limit {DENSE_LIMIT} on the 2p x 2p system)",
                    DENSE_LIMIT / 2
                )));
            }
        }
        Ok(())
    }

    /// Cells per axis giving `dof` vertices on this mesh dimension.
    pub fn cells_for_dof(&self, dof: usize) -> Result<usize, CliError> {
        let per_axis = match self.mesh.dim {
            1 => dof,
            _ => {
                let r = (dof as f64).sqrt().round() as usize;
                if r * r != dof {
                    return Err(config_err(format!("2D bench dof {dof} is not a perfect square")));
                }
                r
            }
        };
        if per_axis < 2 {
            return Err(config_err(format!("bench dof {dof} is too small")));
        }
        Ok(per_axis - 1)
    }

    /// Model parameters with the solver settings applied.
    pub fn model_params(&self) -> Result<Params<f64>, CliError> {
        let mp = &self.params;
        let mut p = Params::new(mp.eps, mp.sigma, mp.dt, mp.m).map_err(|e| config_err(e.to_string()))?;
        p.t_final = mp.t_final.unwrap_or(mp.dt);
        self.apply_solver(&mut p);
        p.validate().map_err(|e| config_err(e.to_string()))?;
        Ok(p)
    }

    pub fn apply_solver(&self, p: &mut Params<f64>) {
        let s = &self.solver;
        p.fp_tol = s.fp_tol;
        p.fp_max = s.fp_max;
        p.ss_tol = s.ss_tol;
        p.cg_tol = s.cg_tol;
        p.gmres = GmresOptions {
            tol: s.gmres_tol,
            max_iter: s.gmres_max,
            restart: s.restart,
        };
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const BASE: &str = r#"{"mesh": {"n": 8}, "params": {"eps": 0.1, "sigma": 10, "dt": 0.01}}"#;

    #[test]
    fn defaults_fill_in() {
        let c = RunConfig::from_json(BASE, &[], None).unwrap();
        assert_eq!(c.mesh.dim, 1);
        assert_eq!(c.solver.gmres_max, 300);
        assert_eq!(c.precond.kind, PrecondKind::Mhss);
        assert_eq!(c.model_params().unwrap().num_steps(), 1);
    }

    #[test]
    fn unknown_key_rejected() {
        let text = r#"{"mesh": {"n": 8, "extra": 1}, "params": {"eps": 0.1, "sigma": 10, "dt": 0.01}}"#;
        assert!(matches!(RunConfig::from_json(text, &[], None), Err(CliError::Config(_))));
    }

    #[test]
    fn malformed_json_reports_position() {
        let err = RunConfig::from_json("{\"mesh\": {\"n\": 8,,}", &[], None).unwrap_err();
        let msg = err.to_string();
        assert!(msg.contains("line 1") && msg.contains("column"), "{msg}");
    }

    #[test]
    fn overrides_and_env_dir() {
        let sets = vec!["params.sigma=400".to_string(), "precond.kind=bt".to_string(), "params.T=0.05".to_string()];
        let c = RunConfig::from_json(BASE, &sets, Some(PathBuf::from("/tmp/x"))).unwrap();
        assert_eq!(c.params.sigma, 400.0);
        assert_eq!(c.precond.kind, PrecondKind::Bt);
        assert_eq!(c.params.t_final, Some(0.05));
        assert_eq!(c.output.dir, PathBuf::from("/tmp/x"));
        assert!(RunConfig::from_json(BASE, &["nokey".into()], None).is_err());
    }

    #[test]
    fn empty_sweep_rejected() {
        let text = r#"{"mesh": {"n": 8}, "params": {"eps": 0.1, "sigma": 10, "dt": 0.01},
            "bench": {"dofs": [], "cases": [{"eps": 0.1, "sigma": 1}], "kinds": ["bt"]}}"#;
        assert!(RunConfig::from_json(text, &[], None).is_err());
    }

    #[test]
    fn invalid_model_rejected() {
        assert!(RunConfig::from_json(BASE, &["params.eps=-1".into()], None).is_err());
        assert!(RunConfig::from_json(BASE, &["params.m=2".into()], None).is_err());
    }

    #[test]
    fn dof_to_cells() {
        let c = RunConfig::from_json(BASE, &[], None).unwrap();
        assert_eq!(c.cells_for_dof(1000).unwrap(), 999);
        let c2 = RunConfig::from_json(BASE, &["mesh.dim=2".into()], None).unwrap();
        assert_eq!(c2.cells_for_dof(65 * 65).unwrap(), 64);
        assert!(c2.cells_for_dof(1000).is_err());
    }
}
