use serde::Serialize;
use thiserror::Error;

/// Failure of a command, split along the exit codes: 1 for domain errors
/// (bad input, unreadable files), 2 for numerical failures.
#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Domain(String),
    #[error("{0}")]
    Numerical(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Domain(_) => 1,
            CliError::Numerical(_) => 2,
        }
    }

    /// JSON detail for stderr.
    pub fn detail(&self) -> String {
        #[derive(Serialize)]
        struct Detail<'a> {
            error: &'a str,
            message: String,
            exit_code: i32,
        }
        let kind = match self {
            CliError::Domain(_) => "domain",
            CliError::Numerical(_) => "numerical",
        };
        serde_json::to_string(&Detail {
            error: kind,
            message: self.to_string(),
            exit_code: self.exit_code(),
        })
        .unwrap_or_else(|_| self.to_string())
    }
}

impl From<vhj_core::Error> for CliError {
    fn from(e: vhj_core::Error) -> Self {
        if e.is_numerical() {
            CliError::Numerical(e.to_string())
        } else {
            CliError::Domain(e.to_string())
        }
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Domain(format!("i/o: {e}"))
    }
}

impl From<serde_json::Error> for CliError {
    fn from(e: serde_json::Error) -> Self {
        CliError::Domain(format!("json: {e}"))
    }
}

impl From<csv::Error> for CliError {
    fn from(e: csv::Error) -> Self {
        CliError::Domain(format!("csv: {e}"))
    }
}

impl From<toml::de::Error> for CliError {
    fn from(e: toml::de::Error) -> Self {
        CliError::Domain(format!("config: {e}"))
    }
}

pub fn domain<T>(msg: impl Into<String>) -> Result<T, CliError> {
    Err(CliError::Domain(msg.into()))
}
