use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    /// Operands live in different number fields or set kinds.
    #[error("domain mismatch: {0}")]
    DomainMismatch(String),

    /// A binary expansion had to be read past its materialization cap.
    #[error("bit {index} requested beyond precision cap {cap}")]
    CapExceeded { index: usize, cap: usize },

    /// The point lies in the measure-zero set where the odometer is undefined.
    #[error("exceptional point: {0}")]
    ExceptionalPoint(String),

    #[error("index out of range: {0}")]
    IndexError(String),

    #[error("set is not aligned to the dyadic interval grid: {0}")]
    AlignmentError(String),

    #[error("rotation number is rational")]
    NotIrrational,

    #[error("precision limit: {0}")]
    PrecisionError(String),

    #[error("tower levels overlap: {0}")]
    Overlap(String),

    #[error("tower height {height} is below the required {required}")]
    HeightError { height: usize, required: usize },

    /// A path visits a state whose label has not been chosen yet.
    #[error("label of state {state} is not defined yet (frontier {frontier})")]
    FrontierError { state: usize, frontier: usize },

    #[error("observation is not generated by any path: {0}")]
    InconsistentObservation(String),

    #[error("value is not a valid label: {0}")]
    InvalidLabel(String),

    #[error("observation cannot be parsed into excursions: {0}")]
    InvalidObservation(String),

    #[error("query point is not covered by the partition")]
    CoverageError,

    #[error("least-squares design is rank deficient")]
    SingularFit,

    #[error("invalid configuration: {0}")]
    ConfigError(String),

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}
