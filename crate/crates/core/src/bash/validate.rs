use super::arity::ArityTable;
use super::parse::{builtin_table, fault_diagnostic, parse_full};
use super::{BashCommandList, Connector};
use crate::types::{Diagnostic, Span, ValidationReport};

/// Compile-level check with the shipped arity table.
pub fn validate_bash(text: &str) -> ValidationReport {
    validate_bash_with(text, builtin_table())
}

/// A command fails only on errors bash itself would reject before running
/// anything; lint findings are attached as warnings.
pub fn validate_bash_with(text: &str, table: &ArityTable) -> ValidationReport {
    match parse_full(text, table) {
        Err(fault) => ValidationReport::from_diagnostics(vec![fault_diagnostic(text, fault)]),
        Ok((list, lints)) => {
            let mut diags: Vec<Diagnostic> = lints
                .into_iter()
                .map(|l| Diagnostic::new(l.code, l.message).with_span(Span::at_offset(text, l.offset)))
                .collect();
            diags.extend(useless_cats(&list));
            ValidationReport::from_diagnostics(diags)
        }
    }
}

fn useless_cats(list: &BashCommandList) -> Vec<Diagnostic> {
    list.atoms
        .iter()
        .enumerate()
        .filter(|(i, a)| {
            a.program == "cat"
                && a.options.is_empty()
                && a.positionals.len() == 1
                && a.redirections.is_empty()
                && list.connectors.get(*i) == Some(&Connector::Pipe)
        })
        .map(|(_, a)| {
            Diagnostic::new(
                "BASH_USELESS_CAT",
                format!("`cat {}` piped into a command that can read the file itself", a.positionals[0]),
            )
        })
        .collect()
}
