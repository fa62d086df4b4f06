use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid layout: {0}")]
    InvalidLayout(String),
    #[error("label `{0}` appears in both layouts")]
    LabelCollision(String),
    #[error("unknown label `{0}`")]
    UnknownLabel(String),
    #[error("label sets overlap on `{0}`")]
    OverlappingLabels(String),
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("matrix is not Hermitian (max deviation {0:e})")]
    NotHermitian(f64),
    #[error("matrix is not positive semidefinite (min eigenvalue {0:e})")]
    NotPsd(f64),
    #[error("trace {0} is outside the allowed range")]
    BadTrace(f64),
    #[error("matrix is not unitary (max deviation {0:e})")]
    NotUnitary(f64),
    #[error("operation refuses subnormalized states")]
    Subnormalized,
    #[error("rank {rank} out of range for dimension {dim}")]
    RankOutOfRange { rank: usize, dim: usize },
    #[error("set function check failed: {0}")]
    PropertyCheck(String),
    #[error("infeasible separation at subset {subset:?}: {message}")]
    Infeasible { subset: Vec<usize>, message: String },
    #[error("rate tuple is not strictly inside the region at subset {subset:?} (margin {margin:e})")]
    NotInterior { subset: Vec<usize>, margin: f64 },
    #[error("total dimension {dim} exceeds the budget of {budget}")]
    DimensionOverflow { dim: usize, budget: usize },
    #[error("operator not within [0, I] (eigenvalue {0:e})")]
    OperatorOutOfRange(f64),
    #[error("POVM elements do not sum to the identity (residual {0:e})")]
    Incomplete(f64),
    #[error("rate split inconsistent for sender {sender}: C - D - R = {residual:e}")]
    InconsistentSplit { sender: usize, residual: f64 },
    #[error("degenerate input: {0}")]
    Degenerate(String),
    #[error("problem too large: {0}")]
    TooLarge(String),
    #[error("identity check failed: {0}")]
    Identity(String),
    #[error("{path}: {message}")]
    Validation { path: String, message: String },
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
    #[error(transparent)]
    Csv(#[from] csv::Error),
}

impl Error {
    pub(crate) fn validation(path: impl Into<String>, message: impl Into<String>) -> Self {
        Error::Validation {
            path: path.into(),
            message: message.into(),
        }
    }
}
