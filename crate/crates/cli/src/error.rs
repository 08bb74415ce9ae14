use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{path}: {source}")]
    Io { path: String, source: std::io::Error },

    #[error("parse error at line {line}, column {col}: {message}")]
    Parse { line: usize, col: usize, message: String },

    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("non-numeric value `{token}` at line {line}, column {col}")]
    NonNumeric { line: usize, col: usize, token: String },

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("{0}")]
    Usage(String),

    #[error(transparent)]
    Numeric(#[from] revembed::Error),
}

impl CliError {
    /// 2 usage, 3 I/O, 4 malformed input, 5 numerical or validation failure.
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Usage(_) | CliError::Config(_) => 2,
            CliError::Io { .. } => 3,
            CliError::Parse { .. } | CliError::DimensionMismatch(_) | CliError::NonNumeric { .. } => 4,
            CliError::Numeric(_) => 5,
        }
    }
}
