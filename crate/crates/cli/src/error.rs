use std::fmt;

/// Failure classes with their process exit codes.
#[derive(Debug)]
pub enum CliError {
    /// Command line or config could not be parsed (exit 2).
    Parse(String),
    /// Parsed values violate a model precondition (exit 3).
    Validation(String),
    /// Anything failing while running (exit 1).
    Runtime(anyhow::Error),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Parse(_) => 2,
            CliError::Validation(_) => 3,
            CliError::Runtime(_) => 1,
        }
    }

    pub fn kind(&self) -> &'static str {
        match self {
            CliError::Parse(_) => "parse",
            CliError::Validation(_) => "validation",
            CliError::Runtime(_) => "runtime",
        }
    }

    /// `error kind=<kind> exit=<code> message=<json string>`
    pub fn line(&self) -> String {
        let message = crate::config::one_line(&self.to_string());
        format!(
            "error kind={} exit={} message={}",
            self.kind(),
            self.exit_code(),
            serde_json::to_string(&message).expect("string serializes")
        )
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Parse(m) | CliError::Validation(m) => f.write_str(m),
            CliError::Runtime(e) => write!(f, "{e:#}"),
        }
    }
}

impl From<anyhow::Error> for CliError {
    fn from(e: anyhow::Error) -> Self {
        CliError::Runtime(e)
    }
}

pub trait ResultExt<T> {
    fn validation(self) -> Result<T, CliError>;
    fn runtime(self, context: &str) -> Result<T, CliError>;
}

impl<T, E: fmt::Display> ResultExt<T> for Result<T, E> {
    fn validation(self) -> Result<T, CliError> {
        self.map_err(|e| CliError::Validation(e.to_string()))
    }

    fn runtime(self, context: &str) -> Result<T, CliError> {
        self.map_err(|e| CliError::Runtime(anyhow::anyhow!("{context}: {e}")))
    }
}
