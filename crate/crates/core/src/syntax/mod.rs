//! The `.eplan` problem format: an s-expression syntax for agents, atoms,
//! actions, initial beliefs, goals, observations and settings.
//!
//! Parsing is total: any input yields a [`ProblemFile`] or a [`ParseError`]
//! with a span. Semantic problems (unknown symbols, formulas outside the
//! fragment, ...) are reported separately by [`lint`].

mod ast;
mod lint;
mod parse;
mod print;
pub mod sexp;

use std::fmt;

pub use ast::{ActionBody, ActionDecl, Config, EffectDecl, ProblemFile, SourceMap};
pub use lint::{lint, Diagnostic, Severity};
pub use parse::{parse_formula, parse_problem};
pub use print::serialize_problem;
pub use sexp::SourceSpan;

/// Words with a fixed meaning inside formulas.
pub const RESERVED: &[&str] = &["when", "and", "not", "or", "B"];

/// `[A-Za-z_][A-Za-z0-9_-]*`
pub fn is_symbol(s: &str) -> bool {
    let mut chars = s.chars();
    matches!(chars.next(), Some(c) if c.is_ascii_alphabetic() || c == '_')
        && chars.all(|c| c.is_ascii_alphanumeric() || c == '_' || c == '-')
}

#[derive(Clone, PartialEq, Eq, Debug)]
pub struct ParseError {
    pub span: SourceSpan,
    pub message: String,
    pub expected: Vec<String>,
}

impl ParseError {
    pub fn new(span: SourceSpan, message: impl Into<String>, expected: &[&str]) -> Self {
        ParseError { span, message: message.into(), expected: expected.iter().map(|s| s.to_string()).collect() }
    }

    /// The error with the offending source line and a caret underline.
    pub fn render(&self, src: &str, path: &str) -> String {
        let line_text = src.lines().nth(self.span.line.saturating_sub(1)).unwrap_or("");
        let width = self.span.end.saturating_sub(self.span.start).max(1);
        let width = width.min(line_text.chars().count().saturating_sub(self.span.column.saturating_sub(1)).max(1));
        format!(
            "{path}:{}: error: {self}\n  | {line_text}\n  | {}{}",
            self.span,
            " ".repeat(self.span.column.saturating_sub(1)),
            "^".repeat(width)
        )
    }
}

impl fmt::Display for ParseError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.message)?;
        if !self.expected.is_empty() {
            write!(f, " (expected {})", self.expected.join(", "))?;
        }
        Ok(())
    }
}

impl std::error::Error for ParseError {}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn symbols() {
        assert!(is_symbol("at_act_home"));
        assert!(is_symbol("_x-1"));
        assert!(!is_symbol("1x"));
        assert!(!is_symbol(""));
        assert!(!is_symbol(":pre"));
        assert!(!is_symbol("a(b"));
    }
}
