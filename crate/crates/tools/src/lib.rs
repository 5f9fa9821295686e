//! IO companion for the scenario-understanding core: the annotation DSL,
//! trajectory logs, the canonical JSON scenario format, run configuration,
//! fixtures and report rendering. The `scenarium` binary wires these into
//! subcommands.

pub mod config;
pub mod dsl;
pub mod fixtures;
pub mod json;
pub mod report;
pub mod scene;
pub mod trajlog;

/// A located parse problem. Lines and columns are 1-based.
#[derive(Debug, Clone, PartialEq)]
pub struct ParseError {
    pub line: usize,
    pub column: usize,
    pub message: String,
}

impl ParseError {
    pub fn new(line: usize, column: usize, message: impl Into<String>) -> Self {
        ParseError {
            line,
            column: column.max(1),
            message: message.into(),
        }
    }
}

impl std::fmt::Display for ParseError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}:{}: {}", self.line, self.column, self.message)
    }
}

impl std::error::Error for ParseError {}

/// A non-fatal parse note (unknown keys and the like). Warned content never
/// enters scoring.
#[derive(Debug, Clone, PartialEq)]
pub struct ParseWarning {
    pub line: usize,
    pub message: String,
}
