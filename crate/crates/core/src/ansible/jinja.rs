//! Just enough Jinja2 scanning to find variable references in templates.

/// One `{{ ... }}` occurrence.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Expr<'a> {
    /// Byte range of the whole `{{ ... }}` in the source string.
    pub start: usize,
    pub end: usize,
    /// Text between the braces, untrimmed.
    pub body: &'a str,
}

impl<'a> Expr<'a> {
    /// The variable name if the expression is a bare identifier.
    pub fn bare_name(&self) -> Option<&'a str> {
        let t = self.body.trim();
        is_identifier(t).then_some(t)
    }
}

pub fn is_identifier(s: &str) -> bool {
    let mut chars = s.chars();
    matches!(chars.next(), Some(c) if c.is_ascii_alphabetic() || c == '_')
        && chars.all(|c| c.is_ascii_alphanumeric() || c == '_')
}

/// All `{{ ... }}` expressions in `s`, left to right. An unclosed `{{` ends
/// the scan.
pub fn expressions(s: &str) -> Vec<Expr<'_>> {
    let mut out = Vec::new();
    let mut pos = 0;
    while let Some(open) = s[pos..].find("{{") {
        let start = pos + open;
        let Some(close) = s[start + 2..].find("}}") else {
            break;
        };
        let end = start + 2 + close + 2;
        out.push(Expr {
            start,
            end,
            body: &s[start + 2..end - 2],
        });
        pos = end;
    }
    out
}

pub fn has_statement(s: &str) -> bool {
    s.contains("{%")
}

const KEYWORDS: &[&str] = &[
    "and", "or", "not", "in", "is", "if", "else", "true", "false", "none", "True", "False",
    "None", "recursive",
];

/// Whether the expression guards against undefined values (`default`
/// filter, `is defined` tests), so its references are optional.
pub fn is_guarded(body: &str) -> bool {
    let compact: String = body.split_whitespace().collect::<Vec<_>>().join(" ");
    compact.contains("default(")
        || compact.contains("| default")
        || compact.contains("|default")
        || compact.contains("| d(")
        || compact.contains("|d(")
        || compact.contains("is defined")
        || compact.contains("is undefined")
        || compact.contains("is not defined")
}

/// Root variable names referenced by an expression body: identifiers that
/// are not attributes, filter or test names, function calls, keywords or
/// inside string literals.
pub fn root_names(body: &str) -> Vec<&str> {
    let bytes = body.as_bytes();
    let mut names = Vec::new();
    let mut i = 0;
    // Last significant token: '.', '|', "is", or other.
    let mut prev: Option<&str> = None;
    while i < bytes.len() {
        let c = bytes[i];
        if c == b'\'' || c == b'"' {
            i += 1;
            while i < bytes.len() && bytes[i] != c {
                if bytes[i] == b'\\' {
                    i += 1;
                }
                i += 1;
            }
            i += 1;
            prev = Some("lit");
        } else if c.is_ascii_alphabetic() || c == b'_' {
            let start = i;
            while i < bytes.len() && (bytes[i].is_ascii_alphanumeric() || bytes[i] == b'_') {
                i += 1;
            }
            let ident = &body[start..i];
            let mut j = i;
            while j < bytes.len() && bytes[j].is_ascii_whitespace() {
                j += 1;
            }
            let is_call = j < bytes.len() && bytes[j] == b'(';
            let skip = matches!(prev, Some(".") | Some("|") | Some("is"))
                || is_call
                || KEYWORDS.contains(&ident);
            if !skip && !names.contains(&ident) {
                names.push(ident);
            }
            prev = Some(if ident == "is" { "is" } else { "ident" });
        } else if c.is_ascii_digit() {
            while i < bytes.len() && (bytes[i].is_ascii_alphanumeric() || bytes[i] == b'.') {
                i += 1;
            }
            prev = Some("lit");
        } else if c.is_ascii_whitespace() {
            i += 1;
        } else {
            prev = Some(match c {
                b'.' => ".",
                b'|' => "|",
                _ => "op",
            });
            i += 1;
        }
    }
    names
}
