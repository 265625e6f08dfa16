use std::fmt;
use std::path::PathBuf;

use boostqaoa::Error;

#[derive(Debug)]
pub enum CliError {
    Config(String),
    Core { context: String, source: Error },
    Io { path: PathBuf, source: std::io::Error },
}

impl CliError {
    pub fn config(msg: impl Into<String>) -> Self {
        CliError::Config(msg.into())
    }

    /// 2 config error, 3 infeasible instance, 4 resource guard, 1 otherwise.
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) => 2,
            CliError::Core { source, .. } => match source {
                Error::Infeasible(_) | Error::EmptyClass(_) => 3,
                Error::ResourceGuard { .. } => 4,
                Error::InvalidConfig(_)
                | Error::InvalidParams(_)
                | Error::Json(_)
                | Error::NegativeWeight(_)
                | Error::InvalidComponent(_) => 2,
                _ => 1,
            },
            CliError::Io { .. } => 1,
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Config(m) => write!(f, "configuration error: {m}"),
            CliError::Core { context, source } => write!(f, "{context}: {source}"),
            CliError::Io { path, source } => write!(f, "{}: {source}", path.display()),
        }
    }
}

impl std::error::Error for CliError {}

pub type CliResult<T> = std::result::Result<T, CliError>;

/// Attaches a short description of the failing step to core errors.
pub trait Context<T> {
    fn context(self, what: &str) -> CliResult<T>;
}

impl<T> Context<T> for boostqaoa::Result<T> {
    fn context(self, what: &str) -> CliResult<T> {
        self.map_err(|source| CliError::Core {
            context: what.to_string(),
            source,
        })
    }
}
