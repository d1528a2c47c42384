use std::fmt;

use flowout_core::Error as CoreError;

pub const EXIT_CONFIG: u8 = 2;
pub const EXIT_NUMERIC: u8 = 3;

#[derive(Debug)]
pub enum CliError {
    /// Schema or value error, with the offending field path.
    Config { field: String, message: String },
    /// A numerical routine failed or an invariant check did not hold.
    Numeric { context: String, message: String },
}

impl CliError {
    pub fn config(field: &str, message: String) -> Self {
        CliError::Config {
            field: field.to_string(),
            message,
        }
    }

    pub fn numeric(context: impl Into<String>, message: impl Into<String>) -> Self {
        CliError::Numeric {
            context: context.into(),
            message: message.into(),
        }
    }

    /// Wraps a core error; invalid user input counts as a config error.
    pub fn from_core(context: &str, e: CoreError) -> Self {
        match e {
            CoreError::InvalidInput(m) => CliError::config(context, m),
            e => CliError::numeric(context, e.to_string()),
        }
    }

    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Config { .. } => EXIT_CONFIG,
            CliError::Numeric { .. } => EXIT_NUMERIC,
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Config { field, message } => write!(f, "config error at `{field}`: {message}"),
            CliError::Numeric { context, message } => write!(f, "numeric failure in {context}: {message}"),
        }
    }
}

impl std::error::Error for CliError {}

pub trait Context<T> {
    fn ctx(self, context: &str) -> Result<T, CliError>;
}

impl<T> Context<T> for flowout_core::Result<T> {
    fn ctx(self, context: &str) -> Result<T, CliError> {
        self.map_err(|e| CliError::from_core(context, e))
    }
}
