//! Configuration-driven front end for `psdo-core`: JSON run configurations, a
//! binary operator container, structured reports and the verification battery.

pub mod commands;
pub mod config;
pub mod container;
pub mod report;
pub mod verify;

use psdo_core::dsl::ParseError;

pub mod exit {
    pub const OK: i32 = 0;
    pub const COMPAT: i32 = 2;
    pub const ELLIPTICITY: i32 = 3;
    pub const INDETERMINATE: i32 = 4;
    pub const INCONSISTENT: i32 = 5;
    pub const CONFIG: i32 = 64;
    pub const PARSE: i32 = 65;
    pub const IO: i32 = 74;
}

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("configuration error: {0}")]
    Config(String),
    #[error("symbol parse error at line {}, column {}: {}", .0.line, .0.column, .0.expected)]
    Parse(ParseError),
    #[error("i/o error: {0}")]
    Io(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) => exit::CONFIG,
            CliError::Parse(_) => exit::PARSE,
            CliError::Io(_) => exit::IO,
        }
    }
}

impl From<psdo_core::Error> for CliError {
    fn from(e: psdo_core::Error) -> Self {
        match e {
            psdo_core::Error::Parse(p) => CliError::Parse(p),
            other => CliError::Config(other.to_string()),
        }
    }
}
