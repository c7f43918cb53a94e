use thiserror::Error;

/// Domain errors shared by every module.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("linear system has no solution")]
    NoSolution,
    #[error("shape mismatch: {0}")]
    ShapeMismatch(String),
    #[error("sampling forced the zero solution")]
    SampleFailed,
    #[error("not reflectable: {0}")]
    NotReflectable(String),
    #[error("quiver is of indefinite type")]
    IndefiniteType,
    #[error("highest weight is not dominant")]
    NonDominantHighestWeight,
    #[error("character table validation failed: {0}")]
    TableValidationFailed(String),
    #[error("non-integral McKay multiplicity between {0} and {1}")]
    NonIntegralMultiplicity(usize, usize),
    #[error("confluence has not been certified for this context")]
    ConfluenceNotCertified,
    #[error("non-positive dimension at vertex {0}")]
    NonPositiveDimension(usize),
    #[error("transversal lift inconsistent: {0}")]
    LiftInconsistent(String),
    #[error("input does not satisfy the moment map equation")]
    PreconditionMomentMap,
    #[error("flag dimension mismatch: {0}")]
    FlagDimensionMismatch(String),
    #[error("invalid partition: {0}")]
    InvalidPartition(String),
    #[error("character class sum is not rational")]
    NonRationalTrace,
    #[error("parameter map is not invertible")]
    NotInvertible,
    #[error("delta relation violated")]
    RelationViolated,
    #[error("vector is not trace zero")]
    NonTraceZero,
    #[error("index out of range: {0}")]
    IndexOutOfRange(String),
    #[error("unsupported: {0}")]
    Unsupported(String),
    #[error("invalid input: {0}")]
    InvalidInput(String),
}

impl Error {
    /// Stable machine-readable tag used in CLI error documents.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::NoSolution => "NoSolution",
            Error::ShapeMismatch(_) => "ShapeMismatch",
            Error::SampleFailed => "SampleFailed",
            Error::NotReflectable(_) => "NotReflectable",
            Error::IndefiniteType => "IndefiniteType",
            Error::NonDominantHighestWeight => "NonDominantHighestWeight",
            Error::TableValidationFailed(_) => "TableValidationFailed",
            Error::NonIntegralMultiplicity(..) => "NonIntegralMultiplicity",
            Error::ConfluenceNotCertified => "ConfluenceNotCertified",
            Error::NonPositiveDimension(_) => "NonPositiveDimension",
            Error::LiftInconsistent(_) => "LiftInconsistent",
            Error::PreconditionMomentMap => "PreconditionMomentMap",
            Error::FlagDimensionMismatch(_) => "FlagDimensionMismatch",
            Error::InvalidPartition(_) => "InvalidPartition",
            Error::NonRationalTrace => "NonRationalTrace",
            Error::NotInvertible => "NotInvertible",
            Error::RelationViolated => "RelationViolated",
            Error::NonTraceZero => "NonTraceZero",
            Error::IndexOutOfRange(_) => "IndexOutOfRange",
            Error::Unsupported(_) => "Unsupported",
            Error::InvalidInput(_) => "InvalidInput",
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
