//! Shared domain types: the language tag, programs, diagnostics and
//! validation reports used by every validator and scorer.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::codes;

/// One of the three supported target languages.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Language {
    Ansible,
    Bash,
    Sql,
}

impl Language {
    pub const ALL: [Language; 3] = [Language::Ansible, Language::Bash, Language::Sql];

    pub fn as_str(self) -> &'static str {
        match self {
            Language::Ansible => "ansible",
            Language::Bash => "bash",
            Language::Sql => "sql",
        }
    }

    /// Tag used on markdown code fences for this language.
    pub fn fence_tag(self) -> &'static str {
        match self {
            Language::Ansible => "yaml",
            Language::Bash => "bash",
            Language::Sql => "sql",
        }
    }

    /// Human-readable name as it appears in prompts.
    pub fn display_name(self) -> &'static str {
        match self {
            Language::Ansible => "Ansible",
            Language::Bash => "Bash",
            Language::Sql => "SQL",
        }
    }
}

impl fmt::Display for Language {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("unknown language `{0}` (expected ansible, bash or sql)")]
pub struct UnknownLanguage(pub String);

impl FromStr for Language {
    type Err = UnknownLanguage;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim().to_ascii_lowercase().as_str() {
            "ansible" | "yaml" => Ok(Language::Ansible),
            "bash" | "sh" | "shell" => Ok(Language::Bash),
            "sql" => Ok(Language::Sql),
            other => Err(UnknownLanguage(other.to_string())),
        }
    }
}

/// A program text tagged with its language and originating query.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SourceProgram {
    pub id: String,
    pub language: Language,
    pub text: String,
    #[serde(default)]
    pub query: String,
}

/// 1-based source position.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Span {
    pub line: usize,
    pub column: usize,
}

impl Span {
    pub fn new(line: usize, column: usize) -> Self {
        Span { line, column }
    }

    /// Span of the character at byte offset `offset` in `text`.
    pub fn at_offset(text: &str, offset: usize) -> Self {
        let offset = offset.min(text.len());
        let before = &text[..offset];
        let line = before.matches('\n').count() + 1;
        let line_start = before.rfind('\n').map_or(0, |i| i + 1);
        let column = before[line_start..].chars().count() + 1;
        Span { line, column }
    }
}

/// A single validator finding.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Diagnostic {
    pub code: String,
    pub message: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub span: Option<Span>,
}

impl Diagnostic {
    pub fn new(code: &str, message: impl Into<String>) -> Self {
        let message = message.into();
        debug_assert!(codes::lookup(code).is_some(), "undocumented diagnostic code {code}");
        debug_assert!(!message.is_empty());
        Diagnostic {
            code: code.to_string(),
            message,
            span: None,
        }
    }

    pub fn with_span(mut self, span: Span) -> Self {
        self.span = Some(span);
        self
    }

    pub fn at(code: &str, message: impl Into<String>, line: usize, column: usize) -> Self {
        Self::new(code, message).with_span(Span::new(line, column))
    }

    /// Whether this diagnostic makes a program fail validation.
    pub fn is_error(&self) -> bool {
        codes::is_error(&self.code)
    }
}

impl fmt::Display for Diagnostic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.span {
            Some(span) => write!(f, "{} {}:{} {}", self.code, span.line, span.column, self.message),
            None => write!(f, "{} {}", self.code, self.message),
        }
    }
}

/// Pass/fail verdict of a static validator plus its diagnostics.
///
/// `passed` is always derived from the diagnostics: a report passes exactly
/// when none of its diagnostics has an error-severity code.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ValidationReport {
    pub passed: bool,
    pub diagnostics: Vec<Diagnostic>,
}

impl ValidationReport {
    pub fn from_diagnostics(diagnostics: Vec<Diagnostic>) -> Self {
        let passed = !diagnostics.iter().any(Diagnostic::is_error);
        ValidationReport {
            passed,
            diagnostics,
        }
    }

    pub fn pass() -> Self {
        Self::from_diagnostics(Vec::new())
    }

    pub fn errors(&self) -> impl Iterator<Item = &Diagnostic> {
        self.diagnostics.iter().filter(|d| d.is_error())
    }

    /// Codes of error-severity diagnostics, in report order.
    pub fn error_codes(&self) -> Vec<&str> {
        self.errors().map(|d| d.code.as_str()).collect()
    }
}

/// Render a report as repair-prompt feedback: one `CODE line:col message`
/// line per diagnostic, in order. Empty diagnostics render as "".
pub fn render_report(report: &ValidationReport) -> String {
    report
        .diagnostics
        .iter()
        .map(ToString::to_string)
        .collect::<Vec<_>>()
        .join("\n")
}

/// A semantic similarity score in `[0, 1]`.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd, Serialize, Deserialize)]
#[serde(try_from = "f64", into = "f64")]
pub struct SemanticScore(f64);

#[derive(Debug, Clone, Copy, PartialEq, thiserror::Error)]
#[error("semantic score {0} is outside [0, 1]")]
pub struct ScoreOutOfRange(pub f64);

impl SemanticScore {
    pub const ZERO: SemanticScore = SemanticScore(0.0);
    pub const ONE: SemanticScore = SemanticScore(1.0);

    pub fn new(value: f64) -> Result<Self, ScoreOutOfRange> {
        if (0.0..=1.0).contains(&value) {
            Ok(SemanticScore(value))
        } else {
            Err(ScoreOutOfRange(value))
        }
    }

    /// `num / den`, with `den > 0` and `num <= den`.
    pub(crate) fn ratio(num: usize, den: usize) -> Self {
        assert!(den > 0 && num <= den);
        SemanticScore(num as f64 / den as f64)
    }

    /// Mean of scores; callers guarantee a non-empty iterator.
    pub(crate) fn mean(scores: impl IntoIterator<Item = SemanticScore>) -> Self {
        let (sum, n) = scores
            .into_iter()
            .fold((0.0, 0usize), |(s, n), x| (s + x.0, n + 1));
        assert!(n > 0);
        SemanticScore((sum / n as f64).clamp(0.0, 1.0))
    }

    pub fn value(self) -> f64 {
        self.0
    }
}

impl TryFrom<f64> for SemanticScore {
    type Error = ScoreOutOfRange;

    fn try_from(value: f64) -> Result<Self, Self::Error> {
        SemanticScore::new(value)
    }
}

impl From<SemanticScore> for f64 {
    fn from(s: SemanticScore) -> f64 {
        s.0
    }
}

impl fmt::Display for SemanticScore {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}
