//! Validation, semantic scoring, adaptive rewards and repair orchestration
//! for Ansible playbooks, Bash one-liners and SQL queries.

pub mod ansible;
pub mod bash;
pub mod cli;
pub mod codes;
pub mod metrics;
pub mod modelclient;
pub mod pipeline;
pub mod resources;
pub mod reward;
pub mod sql;
pub mod ted;
pub mod types;

pub use types::{render_report, Diagnostic, Language, SemanticScore, SourceProgram, Span, ValidationReport};
