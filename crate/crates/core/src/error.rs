use thiserror::Error;

/// Errors raised across the toolkit.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid vertex letter {0:?}: expected 1, 2, 3 or the root word `e`")]
    InvalidLetter(char),

    #[error("parse error on line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("volume too large for exhaustive enumeration: {sites} free sites (limit {limit}); use the tree dynamic programming route instead")]
    EnumerationCapacity { sites: usize, limit: usize },

    #[error("volume radius {radius} exceeds the dynamic programming limit {limit}")]
    DpCapacity { radius: usize, limit: usize },

    #[error("contract violation: {0}")]
    Contract(String),

    #[error("unsupported: {0}")]
    Unsupported(String),

    #[error("invalid contour decomposition: {0}")]
    InvalidDecomposition(String),

    #[error("unit ball centered at {center} leaves the ground-class set (class {class})")]
    ClassViolation { center: String, class: String },

    #[error("couplings are degenerate (epsilon = 0); the Peierls bound is vacuous")]
    Degenerate,

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
}

impl Error {
    /// True for errors caused by exceeding a computational size limit.
    pub fn is_capacity(&self) -> bool {
        matches!(self, Error::EnumerationCapacity { .. } | Error::DpCapacity { .. })
    }
}

pub type Result<T> = std::result::Result<T, Error>;
