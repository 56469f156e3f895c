use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid dimensions: {0}")]
    InvalidDims(String),

    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("matrix is not Hermitian (deviation {0:e})")]
    NotHermitian(f64),

    #[error("trace is {0}, expected 1")]
    Trace(f64),

    #[error("matrix is not positive semidefinite (minimum eigenvalue {0:e})")]
    NotPsd(f64),

    #[error("state is not normalized (squared norm {0})")]
    NotNormalized(f64),

    #[error("partial trace over every subsystem leaves an empty remainder")]
    EmptyRemainder,

    #[error("invalid subsystem set: {0}")]
    InvalidSubsystems(String),

    #[error("invalid bipartition: {0}")]
    InvalidBipartition(String),

    #[error("invalid parameter `{field}`: {reason}")]
    InvalidParameter { field: String, reason: String },

    #[error("loss set violates the {rule} bound: {detail}")]
    LossBound { rule: &'static str, detail: String },

    #[error("invalid network at `{field}`: {reason}")]
    Network { field: String, reason: String },

    #[error("state is not permutationally symmetric (deviation {0:e})")]
    NotSymmetric(f64),

    #[error("state is not genuinely multipartite entangled")]
    NotGenuinelyEntangled,

    #[error("ambient dimension {dim} exceeds the cap {cap}")]
    DimensionCap { dim: usize, cap: usize },

    #[error("schema error at `{field}`: {reason}")]
    Schema { field: String, reason: String },

    #[error("malformed JSON at line {line}, column {column}: {message}")]
    Json {
        line: usize,
        column: usize,
        message: String,
    },

    #[error("state file error: {0}")]
    StateFile(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    pub fn param(field: impl Into<String>, reason: impl Into<String>) -> Self {
        Error::InvalidParameter {
            field: field.into(),
            reason: reason.into(),
        }
    }

    pub fn schema(field: impl Into<String>, reason: impl Into<String>) -> Self {
        Error::Schema {
            field: field.into(),
            reason: reason.into(),
        }
    }

    pub fn network(field: impl Into<String>, reason: impl Into<String>) -> Self {
        Error::Network {
            field: field.into(),
            reason: reason.into(),
        }
    }

    /// The offending input field, when the error can name one.
    pub fn field(&self) -> Option<&str> {
        match self {
            Error::InvalidParameter { field, .. }
            | Error::Network { field, .. }
            | Error::Schema { field, .. } => Some(field),
            _ => None,
        }
    }

    /// Input line of a JSON syntax or type error.
    pub fn line(&self) -> Option<usize> {
        match self {
            Error::Json { line, .. } => Some(*line),
            _ => None,
        }
    }

    /// Short machine-readable category.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::InvalidDims(_) | Error::DimensionMismatch(_) => "dimensions",
            Error::NotHermitian(_) | Error::Trace(_) | Error::NotPsd(_) | Error::NotNormalized(_) => "state",
            Error::EmptyRemainder | Error::InvalidSubsystems(_) | Error::InvalidBipartition(_) => "subsystems",
            Error::InvalidParameter { .. } => "parameter",
            Error::LossBound { .. } => "loss_bound",
            Error::Network { .. } => "network",
            Error::NotSymmetric(_) | Error::NotGenuinelyEntangled => "precondition",
            Error::DimensionCap { .. } => "dimension_cap",
            Error::Schema { .. } | Error::Json { .. } => "schema",
            Error::StateFile(_) => "state_file",
            Error::Io(_) => "io",
        }
    }
}

impl From<serde_json::Error> for Error {
    fn from(e: serde_json::Error) -> Self {
        Error::Json {
            line: e.line(),
            column: e.column(),
            message: e.to_string(),
        }
    }
}
