use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid mesh: {0}")]
    InvalidMesh(String),

    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("operator `{operator}` is not positive definite (p^T A p = {curvature:e})")]
    Indefinite { operator: String, curvature: f64 },

    #[error("matrix `{operator}` is not positive definite (Cholesky pivot {pivot} = {value:e})")]
    NotPositiveDefinite {
        operator: String,
        pivot: usize,
        value: f64,
    },

    #[error("{solver} on `{operator}` did not converge in {iterations} iterations (relative residual {residual:e})")]
    NotConverged {
        solver: &'static str,
        operator: String,
        iterations: usize,
        residual: f64,
    },

    #[error("QR iteration did not converge after {0} sweeps")]
    EigenNoConvergence(usize),

    #[error("input has nonzero discrete mean {0:e}")]
    NonzeroMean(f64),

    #[error(
        "Neumann series for A = eps^2 S + L diverges at depth {depth} (increment ratio {ratio:.3}); \
         rho(P^-1 Q) < 1 requires P + Q > 0, i.e. eps_tilde I - L must stay positive definite"
    )]
    SeriesDivergence { depth: usize, ratio: f64 },

    #[error("problem size {size} exceeds the dense threshold {limit}; reduce the mesh for spectral diagnostics")]
    TooLarge { size: usize, limit: usize },

    #[error("fixed-point iteration stalled after {iterations} iterations (update {update:e})")]
    FixedPointStalled { iterations: usize, update: f64 },

    #[error("GMRES failed at step {step}: {reason}")]
    SolverFailure { step: usize, reason: String },

    #[error("configuration error: {0}")]
    Config(String),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
