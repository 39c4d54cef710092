use std::path::PathBuf;

/// Command failures, each mapped to a process exit code.
#[derive(Debug, thiserror::Error)]
pub enum CliError {
    /// Invalid configuration or command-line values (exit 2).
    #[error("config error: {field}: {message}")]
    Config { field: String, message: String },
    /// A file exists but cannot be parsed (exit 2).
    #[error("{}:{line}: {message}", path.display())]
    Parse { path: PathBuf, line: usize, message: String },
    /// NaN or infinite loss during training (exit 3).
    #[error("numerical abort at epoch {epoch}: loss = {loss}, parameter norm = {param_norm}")]
    Numerical { epoch: usize, loss: f64, param_norm: f64 },
    /// A required input file is absent (exit 4).
    #[error("missing input: {}", .0.display())]
    Missing(PathBuf),
    #[error("{}: {source}", path.display())]
    Io { path: PathBuf, source: std::io::Error },
    #[error(transparent)]
    Core(henonnet_core::Error),
}

impl CliError {
    pub fn config(field: impl Into<String>, message: impl Into<String>) -> Self {
        CliError::Config { field: field.into(), message: message.into() }
    }

    pub fn parse(path: impl Into<PathBuf>, line: usize, message: impl Into<String>) -> Self {
        CliError::Parse { path: path.into(), line, message: message.into() }
    }

    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        let path = path.into();
        if source.kind() == std::io::ErrorKind::NotFound {
            CliError::Missing(path)
        } else {
            CliError::Io { path, source }
        }
    }

    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config { .. } | CliError::Parse { .. } | CliError::Core(_) => 2,
            CliError::Numerical { .. } => 3,
            CliError::Missing(_) => 4,
            CliError::Io { .. } => 1,
        }
    }
}

impl From<henonnet_core::Error> for CliError {
    fn from(e: henonnet_core::Error) -> Self {
        match e {
            henonnet_core::Error::NumericalAbort { epoch, loss, param_norm } => {
                CliError::Numerical { epoch, loss, param_norm }
            }
            other => CliError::Core(other),
        }
    }
}

pub type Result<T> = std::result::Result<T, CliError>;
