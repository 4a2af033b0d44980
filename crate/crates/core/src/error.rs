use thiserror::Error;

/// Errors raised by the library.
#[derive(Debug, Error)]
pub enum Error {
    /// An argument outside the mathematical domain of a function.
    #[error("domain error: {0}")]
    Domain(String),

    /// Inconsistent inputs, e.g. a point of the wrong dimension.
    #[error("usage error: {0}")]
    Usage(String),

    /// The model does not provide the requested capability.
    #[error("model `{model}` does not support {capability}")]
    Unsupported {
        model: String,
        capability: &'static str,
    },

    #[error("projection onto the boundary is undefined: {0}")]
    UndefinedProjection(String),

    /// The regression design cannot identify the coefficients.
    #[error("degenerate design: {0}")]
    DegenerateDesign(String),

    #[error("|gamma_1| = {value:e} is below the bound 1e-6")]
    NearSingularGamma { value: f64 },

    #[error("fit did not converge after {iterations} iterations (gamma = {gamma:?}, |gradient| = {gradient_norm:e})")]
    NonConvergence {
        iterations: usize,
        gamma: Vec<f64>,
        gradient_norm: f64,
    },

    #[error("ABC denominator {0:e} is too close to zero")]
    AbcSingularity(f64),

    #[error("missing cell: {0}")]
    MissingCell(String),

    /// Replicate generation failed inside a bootstrap cell.
    #[error("cell {cell} ({scales}): {source}")]
    Cell {
        cell: usize,
        scales: String,
        #[source]
        source: Box<Error>,
    },

    /// Numerical routine failed to reach its accuracy target.
    #[error("numerical failure: {0}")]
    Numerical(String),

    #[error("parse error: {0}")]
    Parse(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

/// Coarse classification used for process exit codes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ErrorKind {
    Config,
    Capability,
    Numerical,
}

impl Error {
    pub fn kind(&self) -> ErrorKind {
        match self {
            Error::Unsupported { .. } => ErrorKind::Capability,
            Error::Usage(_) | Error::Parse(_) | Error::Io(_) | Error::Csv(_) | Error::Json(_) => {
                ErrorKind::Config
            }
            Error::MissingCell(_) => ErrorKind::Config,
            Error::Cell { source, .. } => source.kind(),
            _ => ErrorKind::Numerical,
        }
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
