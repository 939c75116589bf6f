use thiserror::Error;

/// Crate-wide error type.
#[derive(Debug, Error)]
pub enum Error {
    #[error("malformed profile `{label}`: {reason}")]
    MalformedProfile { label: String, reason: String },

    #[error("calibration error: {0}")]
    Calibration(String),

    #[error("unit mismatch: {0}")]
    UnitMismatch(String),

    #[error("domain error: {0}")]
    Domain(String),

    #[error("insufficient data: {0}")]
    InsufficientData(String),

    #[error("collinear feature columns: {}", columns.join(", "))]
    Collinearity { columns: Vec<String> },

    #[error("undefined correlation: {0}")]
    UndefinedCorrelation(String),

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error(
        "communication failure at main iteration {main_iteration}, \
         communication iteration {comm_iteration}: {reason}"
    )]
    Communication {
        main_iteration: u64,
        comm_iteration: u64,
        reason: String,
    },

    #[error("unknown preset label `{0}`")]
    UnknownPreset(String),

    #[error("co-execution of `{label}` failed: {reason}")]
    CoExecution { label: String, reason: String },

    #[error("dataset format error: {0}")]
    DatasetFormat(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error("parse error: {0}")]
    Parse(String),
}

impl Error {
    /// Stable machine-parsable class identifier, used by the CLI for exit
    /// codes and single-line error reporting.
    pub fn class(&self) -> &'static str {
        match self {
            Error::MalformedProfile { .. } => "malformed-profile",
            Error::Calibration(_) => "calibration",
            Error::UnitMismatch(_) => "unit-mismatch",
            Error::Domain(_) => "domain",
            Error::InsufficientData(_) => "insufficient-data",
            Error::Collinearity { .. } => "collinearity",
            Error::UndefinedCorrelation(_) => "undefined-correlation",
            Error::Config(_) => "config",
            Error::Communication { .. } => "communication",
            Error::UnknownPreset(_) => "unknown-label",
            Error::CoExecution { .. } => "co-execution",
            Error::DatasetFormat(_) => "dataset-format",
            Error::Io(_) => "io",
            Error::Parse(_) => "parse",
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;

impl From<serde_json::Error> for Error {
    fn from(err: serde_json::Error) -> Self {
        Error::Parse(err.to_string())
    }
}

impl From<csv::Error> for Error {
    fn from(err: csv::Error) -> Self {
        Error::Parse(err.to_string())
    }
}
