use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("config: {0}")]
    Config(String),

    #[error(transparent)]
    Core(#[from] nongauss::Error),

    #[error("io: {0}")]
    Io(#[from] std::io::Error),

    #[error("serialization: {0}")]
    Json(#[from] serde_json::Error),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) => 2,
            CliError::Core(e) if e.is_numerical() => 3,
            CliError::Core(
                nongauss::Error::InvalidParameter(_)
                | nongauss::Error::InvalidVariance(_)
                | nongauss::Error::NoDensity(_),
            ) => 2,
            _ => 4,
        }
    }
}

pub type CliResult<T> = Result<T, CliError>;
