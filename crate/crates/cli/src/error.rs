use std::fmt;

/// Failure of a subcommand, sorted by the exit code it maps to.
#[derive(Debug)]
pub enum CliError {
    /// Bad flags, config file or spec (exit 1).
    Config(String),
    /// Inputs that cannot be read or used (exit 2).
    Data(String),
    /// Anything else, including failures to write outputs (exit 3).
    Internal(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) => 1,
            CliError::Data(_) => 2,
            CliError::Internal(_) => 3,
        }
    }

    pub fn config(msg: impl Into<String>) -> Self {
        CliError::Config(msg.into())
    }

    pub fn data(msg: impl Into<String>) -> Self {
        CliError::Data(msg.into())
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Config(m) => write!(f, "config error: {m}"),
            CliError::Data(m) => write!(f, "data error: {m}"),
            CliError::Internal(m) => write!(f, "internal error: {m}"),
        }
    }
}

impl From<evcharge_core::Error> for CliError {
    fn from(e: evcharge_core::Error) -> Self {
        use evcharge_core::Error as E;
        match e {
            E::Config(m) => CliError::Config(m),
            E::Data(_) | E::Read { .. } | E::Csv(_) | E::Json(_) => CliError::Data(e.to_string()),
            E::Io(_) => CliError::Internal(e.to_string()),
        }
    }
}

pub type CliResult<T> = Result<T, CliError>;

/// For failures while writing outputs.
pub fn internal(e: impl fmt::Display) -> CliError {
    CliError::Internal(e.to_string())
}
