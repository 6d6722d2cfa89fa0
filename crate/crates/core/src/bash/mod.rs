//! Single-line Bash: parsing into atomic commands, compile-level
//! validation and the atomic-command similarity score.

mod arity;
mod lex;
mod parse;
mod score;
mod validate;

use std::ops::Range;

use indexmap::IndexMap;
use serde::ser::{SerializeSeq, Serializer};
use serde::Serialize;

use crate::types::Diagnostic;

pub use arity::{ArityError, ArityTable, UtilitySpec};
pub use parse::{parse_bash, parse_bash_with};
pub use score::{bash_score, BashScoreError};
pub use validate::{validate_bash, validate_bash_with};

/// Value bound to an option flag.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum OptionValue {
    Flag,
    Value(String),
    /// A valued flag given more than once, in order.
    Values(Vec<String>),
}

impl OptionValue {
    fn merge(&mut self, next: OptionValue) {
        let merged = match (std::mem::replace(self, OptionValue::Flag), next) {
            (OptionValue::Flag, v) | (v, OptionValue::Flag) => v,
            (OptionValue::Value(a), OptionValue::Value(b)) => OptionValue::Values(vec![a, b]),
            (OptionValue::Values(mut a), OptionValue::Value(b)) => {
                a.push(b);
                OptionValue::Values(a)
            }
            (OptionValue::Value(a), OptionValue::Values(b)) => {
                OptionValue::Values(std::iter::once(a).chain(b).collect())
            }
            (OptionValue::Values(mut a), OptionValue::Values(b)) => {
                a.extend(b);
                OptionValue::Values(a)
            }
        };
        *self = merged;
    }
}

impl Serialize for OptionValue {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        match self {
            OptionValue::Flag => s.serialize_bool(true),
            OptionValue::Value(v) => s.serialize_str(v),
            OptionValue::Values(vs) => {
                let mut seq = s.serialize_seq(Some(vs.len()))?;
                for v in vs {
                    seq.serialize_element(v)?;
                }
                seq.end()
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Redirection {
    /// Operator with any fd prefix: `>`, `2>`, `>>`, `2>&`, `<<<`, ...
    pub op: String,
    pub target: String,
}

/// One utility invocation.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct AtomicCommand {
    pub program: String,
    pub options: IndexMap<String, OptionValue>,
    pub positionals: Vec<String>,
    pub redirections: Vec<Redirection>,
    /// Leading `NAME=value` words.
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub assignments: Vec<(String, String)>,
}

impl AtomicCommand {
    pub fn new(program: impl Into<String>) -> Self {
        AtomicCommand {
            program: program.into(),
            options: IndexMap::new(),
            positionals: Vec::new(),
            redirections: Vec::new(),
            assignments: Vec::new(),
        }
    }

    pub(crate) fn add_option(&mut self, key: String, value: OptionValue) {
        match self.options.get_mut(&key) {
            Some(existing) => existing.merge(value),
            None => {
                self.options.insert(key, value);
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Connector {
    #[serde(rename = ";")]
    Seq,
    #[serde(rename = "&&")]
    And,
    #[serde(rename = "||")]
    Or,
    #[serde(rename = "|")]
    Pipe,
    #[serde(rename = "&")]
    Background,
}

impl Connector {
    pub fn as_str(self) -> &'static str {
        match self {
            Connector::Seq => ";",
            Connector::And => "&&",
            Connector::Or => "||",
            Connector::Pipe => "|",
            Connector::Background => "&",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum GroupKind {
    /// `( .. )`
    Subshell,
    /// `{ ..; }`
    Brace,
}

/// A parenthesized or braced run of atoms. Groups nest: any two are
/// either disjoint or one contains the other.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Group {
    pub kind: GroupKind,
    pub atoms: Range<usize>,
    pub redirections: Vec<Redirection>,
}

/// Atoms in source order joined by `connectors[i]` between atom i and i+1.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct BashCommandList {
    pub atoms: Vec<AtomicCommand>,
    pub connectors: Vec<Connector>,
    pub groups: Vec<Group>,
    /// Trailing `;` or `&`.
    pub terminator: Option<Connector>,
}

impl BashCommandList {
    /// Canonical shell text; parsing it yields an equal list.
    pub fn to_command_string(&self) -> String {
        parse::render(self)
    }
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
#[error("{0}")]
pub struct BashError(pub Diagnostic);

impl BashError {
    pub fn diagnostic(&self) -> &Diagnostic {
        &self.0
    }

    pub fn code(&self) -> &str {
        &self.0.code
    }
}

/// Parse failure before span resolution; `offset` is a byte offset into
/// the outermost text.
#[derive(Debug, Clone, PartialEq, Eq)]
pub(crate) struct Fault {
    pub code: &'static str,
    pub message: String,
    pub offset: usize,
}
