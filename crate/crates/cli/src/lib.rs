pub mod commands;
pub mod config;
pub mod render;
pub mod suites;

use std::fmt;

/// Process exit status.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Status {
    Pass = 0,
    SuiteFailure = 1,
    Usage = 2,
    Budget = 3,
}

#[derive(Debug)]
pub enum CliError {
    Usage(String),
    Core(quadweil::Error),
    Io(std::io::Error),
}

impl CliError {
    pub fn status(&self) -> Status {
        match self {
            CliError::Core(quadweil::Error::Budget(_)) => Status::Budget,
            CliError::Usage(_) | CliError::Core(_) | CliError::Io(_) => Status::Usage,
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Usage(m) => write!(f, "usage error: {m}"),
            CliError::Core(e) => write!(f, "{e}"),
            CliError::Io(e) => write!(f, "io error: {e}"),
        }
    }
}

impl std::error::Error for CliError {}

impl From<quadweil::Error> for CliError {
    fn from(e: quadweil::Error) -> Self {
        CliError::Core(e)
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Io(e)
    }
}

pub type CliResult<T> = std::result::Result<T, CliError>;
