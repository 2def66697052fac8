use thiserror::Error;

/// Crate-wide error type.
#[derive(Debug, Error)]
pub enum Error {
    /// An argument violates a precondition (non-finite value, empty input, ...).
    #[error("invalid input: {0}")]
    InvalidInput(String),

    /// A request exceeds what the data can support (k > n and similar).
    #[error("capacity exceeded: {0}")]
    Capacity(String),

    /// Mismatched shapes, unknown columns or labels.
    #[error("schema mismatch: {0}")]
    Schema(String),

    /// A CSV row that could not be parsed.
    #[error("parse error at line {line}: {msg}")]
    Parse { line: usize, msg: String },

    /// Linear-algebra failure (indefinite matrix, failed factorization).
    #[error("numerical failure: {0}")]
    Numerical(String),

    /// The design matrix is rank deficient.
    #[error("singular design: {0}")]
    SingularDesign(String),

    /// An observation fell outside the configured band edges.
    #[error("band coverage: {0}")]
    Coverage(String),

    /// Training diverged (non-finite loss).
    #[error("training diverged at epoch {epoch}")]
    Diverged { epoch: usize },

    /// Invalid benchmark or model configuration.
    #[error("config error: {0}")]
    Config(String),

    /// Filesystem / IO failure.
    #[error(transparent)]
    Io(#[from] std::io::Error),

    /// CSV read/write failure.
    #[error(transparent)]
    Csv(#[from] csv::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
