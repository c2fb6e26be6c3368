//! Block preconditioners for the linearized systems and the truncated
//! Neumann-series inverse used inside MHSS.

mod blocks;
mod builder;
mod config;
mod neumann;
mod selection;

pub use blocks::{BtPreconditioner, ElPreconditioner, MhssPreconditioner, SchurApprox};
pub use builder::{BoxedOp, BuildInfo, BuilderStats, PrecondBuilder};
pub use config::{AInverseKind, AlphaStrategy, PrecondConfig, PrecondKind, SeriesMode};
pub use neumann::{adaptive_advantage_check, depth_from_norm, splitting, AdvantageReport, DepthRule, NeumannInverse};
pub use selection::{
    eps_tilde_from_radius, optimal_alpha, select_alpha, select_eps_tilde, sigma_tilde, spectral_radius,
    trace_m4_ratio, trace_m4_ratio_dense, AlphaInputs,
};
