use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, got {got}")]
    Dimension { expected: usize, got: usize },

    #[error("invalid transform size {0}: length must be a nonzero power of two")]
    Size(usize),

    #[error("invalid parameter: {0}")]
    Parameter(String),

    #[error("shape error: {0}")]
    Shape(String),

    #[error(
        "factorization failed: no stable pivot-free elimination within tolerance \
         (best delta {best_delta:e}, relative error {best_error:e})"
    )]
    Factorization { best_delta: f64, best_error: f64 },

    #[error("no step h = 2^-k (k <= {halvings}) meets eps {eps:e}; best sup error {best_error:e}")]
    Selection { eps: f64, halvings: u32, best_error: f64 },

    #[error("compression infeasible at layer {layer}: {reason}")]
    CompressionInfeasible { layer: usize, reason: String },

    #[error("format error: {0}")]
    Format(String),

    #[error("unsupported model format version {found} (expected {expected})")]
    Version { found: u32, expected: u32 },

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    pub(crate) fn dim(expected: usize, got: usize) -> Self {
        Error::Dimension { expected, got }
    }
}
