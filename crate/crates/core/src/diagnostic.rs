//! Findings produced by the parser and the static analyser.

use std::fmt;

use serde::{Deserialize, Serialize};

/// A region of source text. Lines and columns are 1-based and columns count
/// characters, not bytes. The end position is inclusive.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct SourceSpan {
    pub start_line: u32,
    pub start_col: u32,
    pub end_line: u32,
    pub end_col: u32,
}

impl SourceSpan {
    pub fn new(start_line: u32, start_col: u32, end_line: u32, end_col: u32) -> Self {
        SourceSpan {
            start_line,
            start_col,
            end_line,
            end_col,
        }
    }

    /// Smallest span covering both `self` and `other`.
    pub fn join(self, other: SourceSpan) -> SourceSpan {
        let (start_line, start_col) =
            (self.start_line, self.start_col).min((other.start_line, other.start_col));
        let (end_line, end_col) = (self.end_line, self.end_col).max((other.end_line, other.end_col));
        SourceSpan {
            start_line,
            start_col,
            end_line,
            end_col,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Severity {
    Error,
    Warning,
}

impl fmt::Display for Severity {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Severity::Error => f.write_str("ERROR"),
            Severity::Warning => f.write_str("WARNING"),
        }
    }
}

/// Stable diagnostic codes.
pub mod codes {
    pub const LEX_ERROR: &str = "L001";
    pub const SYNTAX_ERROR: &str = "S001";
    pub const MISSING_INCLUDE: &str = "E001";
    pub const UNDECLARED_IDENTIFIER: &str = "E002";
    pub const DUPLICATE_DECLARATION: &str = "E003";
    pub const MISSING_SOLVE_ITEM: &str = "E004";
    pub const BAD_RANGE: &str = "E005";
    pub const INDEX_OUT_OF_BOUNDS: &str = "E006";
    pub const TYPE_MISMATCH: &str = "E007";
    pub const ARITY_MISMATCH: &str = "E008";
    pub const MULTIPLE_SOLVE_ITEMS: &str = "E009";
    pub const EMPTY_MODEL: &str = "E010";
    pub const UNUSED_VARIABLE: &str = "W001";
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Diagnostic {
    pub severity: Severity,
    pub code: String,
    pub message: String,
    pub span: Option<SourceSpan>,
}

impl Diagnostic {
    pub fn error(code: &str, message: impl Into<String>, span: Option<SourceSpan>) -> Self {
        Diagnostic {
            severity: Severity::Error,
            code: code.to_string(),
            message: message.into(),
            span,
        }
    }

    pub fn warning(code: &str, message: impl Into<String>, span: Option<SourceSpan>) -> Self {
        Diagnostic {
            severity: Severity::Warning,
            code: code.to_string(),
            message: message.into(),
            span,
        }
    }

    pub fn is_error(&self) -> bool {
        self.severity == Severity::Error
    }
}

/// `SEVERITY CODE line:col message`; a missing span prints as `-`.
impl fmt::Display for Diagnostic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.span {
            Some(span) => write!(
                f,
                "{} {} {}:{} {}",
                self.severity, self.code, span.start_line, span.start_col, self.message
            ),
            None => write!(f, "{} {} - {}", self.severity, self.code, self.message),
        }
    }
}

pub fn render_lines(diagnostics: &[Diagnostic]) -> String {
    let mut out = String::new();
    for d in diagnostics {
        out.push_str(&d.to_string());
        out.push('\n');
    }
    out
}

pub fn render_json(diagnostics: &[Diagnostic]) -> String {
    serde_json::to_string_pretty(diagnostics).expect("diagnostics always serialize")
}

pub fn has_errors(diagnostics: &[Diagnostic]) -> bool {
    diagnostics.iter().any(Diagnostic::is_error)
}
