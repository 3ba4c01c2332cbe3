use floquet_core::FloquetError;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum HarnessError {
    /// Bad or inconsistent configuration; the message starts with the field path.
    #[error("config: {0}")]
    Config(String),
    #[error("model: {0}")]
    Model(FloquetError),
    #[error("numerical failure: {0}")]
    Numerical(FloquetError),
    #[error("i/o: {0}")]
    Io(#[from] std::io::Error),
    #[error("output: {0}")]
    Output(String),
}

impl HarnessError {
    /// 1 config, 2 model construction, 3 numerical failure.
    pub fn exit_code(&self) -> i32 {
        match self {
            Self::Config(_) => 1,
            Self::Model(_) => 2,
            Self::Numerical(_) | Self::Io(_) | Self::Output(_) => 3,
        }
    }

    pub fn field(path: &str, msg: impl std::fmt::Display) -> Self {
        Self::Config(format!("{path}: {msg}"))
    }
}

impl From<FloquetError> for HarnessError {
    fn from(e: FloquetError) -> Self {
        match e {
            FloquetError::Config(msg) => Self::Config(msg),
            e if e.is_numerical() => Self::Numerical(e),
            e => Self::Model(e),
        }
    }
}

impl From<csv::Error> for HarnessError {
    fn from(e: csv::Error) -> Self {
        Self::Output(e.to_string())
    }
}

impl From<serde_json::Error> for HarnessError {
    fn from(e: serde_json::Error) -> Self {
        Self::Output(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, HarnessError>;
