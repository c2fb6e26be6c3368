use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::la::InnerSolverKind;
use crate::scheme::BlockForm;

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PrecondKind {
    None,
    Bt,
    El,
    #[default]
    Mhss,
}

impl PrecondKind {
    /// The block system each preconditioner is designed for.
    pub fn form(self) -> BlockForm {
        match self {
            PrecondKind::None | PrecondKind::Bt => BlockForm::Full,
            PrecondKind::El => BlockForm::Scaled,
            PrecondKind::Mhss => BlockForm::Saddle,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            PrecondKind::None => "none",
            PrecondKind::Bt => "bt",
            PrecondKind::El => "el",
            PrecondKind::Mhss => "mhss",
        }
    }
}

impl std::fmt::Display for PrecondKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

impl std::str::FromStr for PrecondKind {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "none" => Ok(PrecondKind::None),
            "bt" => Ok(PrecondKind::Bt),
            "el" => Ok(PrecondKind::El),
            "mhss" => Ok(PrecondKind::Mhss),
            other => Err(Error::Config(format!("unknown preconditioner `{other}`"))),
        }
    }
}

/// How the MHSS parameter is chosen. Serialized as `"trace_a"`,
/// `"trace_m4"`, or a bare number.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "AlphaRepr", into = "AlphaRepr")]
pub enum AlphaStrategy {
    /// `trace(A) / p`.
    #[default]
    TraceA,
    /// `trace(M^4) / trace(M^4 A^-1)`.
    TraceM4,
    Fixed(f64),
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(untagged)]
enum AlphaRepr {
    Value(f64),
    Name(String),
}

impl TryFrom<AlphaRepr> for AlphaStrategy {
    type Error = String;
    fn try_from(r: AlphaRepr) -> Result<Self, String> {
        match r {
            AlphaRepr::Value(v) if v > 0.0 && v.is_finite() => Ok(AlphaStrategy::Fixed(v)),
            AlphaRepr::Value(v) => Err(format!("alpha must be positive, got {v}")),
            AlphaRepr::Name(s) => match s.as_str() {
                "trace_a" => Ok(AlphaStrategy::TraceA),
                "trace_m4" => Ok(AlphaStrategy::TraceM4),
                other => Err(format!("unknown alpha strategy `{other}` (expected trace_a, trace_m4 or a number)")),
            },
        }
    }
}

impl From<AlphaStrategy> for AlphaRepr {
    fn from(a: AlphaStrategy) -> Self {
        match a {
            AlphaStrategy::TraceA => AlphaRepr::Name("trace_a".into()),
            AlphaStrategy::TraceM4 => AlphaRepr::Name("trace_m4".into()),
            AlphaStrategy::Fixed(v) => AlphaRepr::Value(v),
        }
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SeriesMode {
    /// Rebuild the truncated series from `P` and `Q` every iteration.
    #[default]
    Static,
    /// Reuse the last static inverse and expand in `L_k - L_{k+1}` while the
    /// weighted mass changes little.
    Adaptive,
}

/// Approximation of `A^-1 = (eps^2 S + L)^-1` inside MHSS.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum AInverseKind {
    /// Truncated Neumann series.
    #[default]
    Neumann,
    /// Direct solve with `A`.
    Exact,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PrecondConfig {
    pub kind: PrecondKind,
    pub alpha: AlphaStrategy,
    /// Truncation tolerance of the static series.
    pub eps1: f64,
    /// Truncation tolerance of the adaptive series.
    pub eps1_adaptive: f64,
    /// Adaptive switch threshold on `||L_k - L_{k+1}||_F`; `None` means
    /// `0.1 ||L_k||_F`.
    pub eps2: Option<f64>,
    /// Safety factor `c_s > 1` in `eps_tilde = c_s max|u|^2 rho(M)`.
    pub safety: f64,
    pub series: SeriesMode,
    /// Hard cap on the series depth.
    pub max_depth: usize,
    pub a_inverse: AInverseKind,
    pub inner: InnerSolverKind,
    /// Seed of the depth probe and of Hutchinson trace estimates.
    pub seed: u64,
    /// Number of Rademacher probes for `trace_m4`.
    pub probes: usize,
}

impl Default for PrecondConfig {
    fn default() -> Self {
        Self {
            kind: PrecondKind::Mhss,
            alpha: AlphaStrategy::TraceA,
            eps1: 1e-6,
            eps1_adaptive: 1e-6,
            eps2: None,
            safety: 1.01,
            series: SeriesMode::Static,
            max_depth: 2000,
            a_inverse: AInverseKind::Neumann,
            inner: InnerSolverKind::Cholesky,
            seed: 0x5eed,
            probes: 32,
        }
    }
}

impl PrecondConfig {
    pub fn with_kind(kind: PrecondKind) -> Self {
        Self {
            kind,
            ..Self::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::Config(m));
        if !(self.eps1 > 0.0 && self.eps1 < 1.0) {
            return bad(format!("precond.eps1 must lie in (0, 1), got {}", self.eps1));
        }
        if !(self.eps1_adaptive > 0.0 && self.eps1_adaptive < 1.0) {
            return bad(format!("precond.eps1_adaptive must lie in (0, 1), got {}", self.eps1_adaptive));
        }
        if let Some(e) = self.eps2 {
            if !(e > 0.0) {
                return bad(format!("precond.eps2 must be positive, got {e}"));
            }
        }
        if !(self.safety > 1.0 && self.safety.is_finite()) {
            return bad(format!("precond.safety must exceed 1, got {}", self.safety));
        }
        if self.max_depth == 0 {
            return bad("precond.max_depth must be at least 1".into());
        }
        if self.probes == 0 {
            return bad("precond.probes must be at least 1".into());
        }
        if let AlphaStrategy::Fixed(a) = self.alpha {
            if !(a > 0.0 && a.is_finite()) {
                return bad(format!("precond.alpha must be positive, got {a}"));
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn alpha_strategy_json_forms() {
        let a: AlphaStrategy = serde_json::from_str("\"trace_a\"").unwrap();
        assert_eq!(a, AlphaStrategy::TraceA);
        let a: AlphaStrategy = serde_json::from_str("\"trace_m4\"").unwrap();
        assert_eq!(a, AlphaStrategy::TraceM4);
        let a: AlphaStrategy = serde_json::from_str("0.25").unwrap();
        assert_eq!(a, AlphaStrategy::Fixed(0.25));
        assert!(serde_json::from_str::<AlphaStrategy>("-1").is_err());
        assert!(serde_json::from_str::<AlphaStrategy>("\"best\"").is_err());
        assert_eq!(serde_json::to_string(&AlphaStrategy::TraceA).unwrap(), "\"trace_a\"");
    }

    #[test]
    fn config_rejects_unknown_keys_and_bad_values() {
        let c: PrecondConfig = serde_json::from_str(r#"{"kind":"bt","eps1":1e-4}"#).unwrap();
        assert_eq!(c.kind, PrecondKind::Bt);
        assert!(c.validate().is_ok());
        assert!(serde_json::from_str::<PrecondConfig>(r#"{"kinds":"bt"}"#).is_err());
        let c = PrecondConfig {
            safety: 1.0,
            ..PrecondConfig::default()
        };
        assert!(c.validate().is_err());
        let c = PrecondConfig {
            eps1: 1.5,
            ..PrecondConfig::default()
        };
        assert!(c.validate().is_err());
    }

    #[test]
    fn forms_per_kind() {
        assert_eq!(PrecondKind::Bt.form(), BlockForm::Full);
        assert_eq!(PrecondKind::El.form(), BlockForm::Scaled);
        assert_eq!(PrecondKind::Mhss.form(), BlockForm::Saddle);
        assert_eq!("MHSS".parse::<PrecondKind>().unwrap(), PrecondKind::Mhss);
    }
}
