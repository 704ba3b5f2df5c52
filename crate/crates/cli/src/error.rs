use thiserror::Error;

/// Everything a command can fail with, mapped onto the process exit code.
#[derive(Debug, Error)]
pub enum CliError {
    /// Bad flags, config or output location.
    #[error("{0}")]
    Config(String),

    #[error(transparent)]
    Core(#[from] auscult_core::Error),
}

impl CliError {
    /// 1 for configuration problems, 2 for bad or missing input data.
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Core(e) if e.is_data_error() => 2,
            _ => 1,
        }
    }
}

pub type CliResult<T> = std::result::Result<T, CliError>;
