//! Declarative estimand specifications.
//!
//! ```text
//! estimand "primary" {
//!   treatment: experimental vs control
//!   endpoint: disability@t2
//!   population: all
//!   summary: mean_difference
//!   ice concomitant_therapy: hypothetical
//!   ice death: composite(worst=10)
//! }
//! ```
//!
//! A file holds one or more estimands. `#` starts a comment that runs to the
//! end of the line. Parsing stops at the first error.

mod lexer;
mod parser;
mod plan;
mod printer;

use std::fmt;

pub use lexer::{tokenize, Token, TokenKind};
pub use parser::{endpoint_scale, parse_spec};
pub use plan::{plan_of, AnalysisPlan};
pub use printer::{print_spec, print_specs};

/// Position and description of the first problem in a spec source.
#[derive(Clone, Debug, PartialEq, Eq, thiserror::Error)]
pub struct ParseError {
    /// 1-based line.
    pub line: usize,
    /// 1-based column, counted in characters.
    pub column: usize,
    pub message: String,
    /// What would have been accepted at this position; empty for semantic errors.
    pub expected: Vec<String>,
}

impl ParseError {
    pub(crate) fn at(line: usize, column: usize, message: impl Into<String>) -> Self {
        ParseError { line, column, message: message.into(), expected: Vec::new() }
    }
}

impl fmt::Display for ParseError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "line {}, column {}: {}", self.line, self.column, self.message)?;
        match self.expected.as_slice() {
            [] => Ok(()),
            [one] => write!(f, " (expected {one})"),
            many => write!(f, " (expected one of {})", many.join(", ")),
        }
    }
}
