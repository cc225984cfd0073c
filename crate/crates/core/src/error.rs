use thiserror::Error;

/// Errors raised by the solver and verification routines.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameters: {0}")]
    InvalidParams(String),

    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("block index l = {l} out of range 0..={n}")]
    BlockIndex { l: i64, n: usize },

    #[error("{norm} norm requires an x-independent field (found content at k1 != 0)")]
    NormDomain { norm: &'static str },

    #[error("near-zero pivot {pivot:e} at row {row} (threshold {threshold:e})")]
    Conditioning {
        row: usize,
        pivot: f64,
        threshold: f64,
    },

    #[error("certification failed: {0}")]
    Certification(String),

    #[error("singular Jacobian at lambda = {lambda}")]
    SingularJacobian { lambda: f64 },

    #[error("Newton iteration did not converge after {steps} steps (residual {residual:e})")]
    NewtonFailure { steps: usize, residual: f64 },

    #[error("continuation step underflow at lambda = {lambda} (last accepted point kept)")]
    StepUnderflow { lambda: f64 },

    #[error("no bifurcation detected in the examined range")]
    NoBifurcation,

    #[error("branch switching failed: {0}")]
    BranchSwitch(String),

    #[error("fixed-point iteration did not converge: {0}")]
    Divergence(String),

    #[error("I/O error at {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },

    #[error("serialization error: {0}")]
    Serde(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub(crate) fn io(path: impl AsRef<std::path::Path>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.as_ref().display().to_string(),
            source,
        }
    }
}
