use std::fmt;
use std::process::ExitCode;

#[derive(Debug)]
pub enum CliError {
    /// Bad arguments, unreadable or invalid input files.
    Config(String),
    /// A computation failed inside the named module.
    Numerical {
        module: &'static str,
        source: clockforge::Error,
    },
    Io(std::io::Error),
}

impl CliError {
    pub fn exit_code(&self) -> ExitCode {
        match self {
            CliError::Config(_) | CliError::Io(_) => ExitCode::from(2),
            CliError::Numerical { .. } => ExitCode::from(3),
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Config(msg) => write!(f, "config error: {msg}"),
            CliError::Numerical { module, source } => {
                write!(f, "numerical failure in {module}: {source}")
            }
            CliError::Io(e) => write!(f, "i/o error: {e}"),
        }
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Io(e)
    }
}

/// Tags core errors with where they came from.
pub trait Context<T> {
    /// The input was rejected while being built or validated.
    fn input(self) -> Result<T, CliError>;
    /// The computation itself failed.
    fn numerics(self, module: &'static str) -> Result<T, CliError>;
}

impl<T> Context<T> for clockforge::Result<T> {
    fn input(self) -> Result<T, CliError> {
        self.map_err(|e| CliError::Config(e.to_string()))
    }

    fn numerics(self, module: &'static str) -> Result<T, CliError> {
        self.map_err(|source| CliError::Numerical { module, source })
    }
}
