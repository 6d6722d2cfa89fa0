//! Frozen diagnostic code table.
//!
//! Codes are namespaced per language and never renamed; repair prompts and
//! golden tests depend on them byte for byte. `docs/error-codes.md` mirrors
//! this table.

/// Version of the code table. Bump only when codes are added.
pub const CODE_TABLE_VERSION: u32 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Severity {
    Error,
    Warning,
}

#[derive(Debug, Clone, Copy)]
pub struct CodeInfo {
    pub code: &'static str,
    pub severity: Severity,
    pub summary: &'static str,
}

const fn error(code: &'static str, summary: &'static str) -> CodeInfo {
    CodeInfo {
        code,
        severity: Severity::Error,
        summary,
    }
}

const fn warning(code: &'static str, summary: &'static str) -> CodeInfo {
    CodeInfo {
        code,
        severity: Severity::Warning,
        summary,
    }
}

pub const TABLE: &[CodeInfo] = &[
    // Ansible
    error("ANS_YAML", "document is not valid YAML"),
    error("ANS_NOT_A_PLAYBOOK", "document root is not a non-empty list of plays"),
    error("ANS_BAD_PLAY", "play is not a mapping or has a malformed task section"),
    error("ANS_BAD_TASK", "task is not a mapping or has a malformed block"),
    error("ANS_NO_MODULE", "task does not invoke any module"),
    error("ANS_AMBIGUOUS_MODULE", "task invokes more than one module"),
    error("ANS_BAD_ARGS", "module arguments are neither a mapping nor key=value text"),
    error("ANS_UNKNOWN_MODULE", "module is not in the module-spec registry"),
    error("ANS_MISSING_REQUIRED", "a required module argument is missing"),
    error("ANS_MUTUALLY_EXCLUSIVE", "mutually exclusive module arguments are both set"),
    error("ANS_ARG_TYPE", "module argument value has the wrong type"),
    error("ANS_UNDEFINED_VAR", "template references a variable that is never defined"),
    warning("ANS_UNKNOWN_ARG", "argument is not declared for the module"),
    warning("ANS_SHELL_MODULE", "task uses a shell-family module"),
    warning("ANS_UNRESOLVED_VAR", "variable could not be infilled"),
    // Bash
    error("BASH_SYNTAX", "command does not parse"),
    error("BASH_UNBALANCED_PAREN", "parentheses or command substitution are unbalanced"),
    error("BASH_UNBALANCED_BRACE", "brace group is unbalanced"),
    error("BASH_EMPTY_COMMAND", "empty command before or between connectors"),
    error("BASH_TRAILING_CONNECTOR", "connector is missing its right-hand command"),
    error("BASH_REDIRECT_TARGET", "redirection has no target"),
    warning("BASH_UNQUOTED_EXPANSION", "parameter expansion is not quoted"),
    warning("BASH_BACKTICKS", "legacy backtick command substitution"),
    warning("BASH_USELESS_CAT", "cat of a single file piped into a command"),
    // SQL
    error("SQL_SYNTAX", "query does not parse"),
    error("SQL_UNKNOWN_TABLE", "referenced table is not in the schema"),
    error("SQL_UNKNOWN_COLUMN", "referenced column is not in any table in scope"),
];

pub fn lookup(code: &str) -> Option<&'static CodeInfo> {
    TABLE.iter().find(|c| c.code == code)
}

/// Unknown codes count as errors.
pub fn is_error(code: &str) -> bool {
    lookup(code).is_none_or(|c| c.severity == Severity::Error)
}
