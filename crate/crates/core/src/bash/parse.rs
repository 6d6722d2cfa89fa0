use std::sync::OnceLock;

use super::arity::{ArityTable, UtilitySpec};
use super::lex::{tokenize, Kind, Op, Token, Word};
use super::{AtomicCommand, BashCommandList, BashError, Connector, Fault, Group, GroupKind, OptionValue, Redirection};
use crate::types::{Diagnostic, Span};

pub(crate) fn builtin_table() -> &'static ArityTable {
    static TABLE: OnceLock<ArityTable> = OnceLock::new();
    TABLE.get_or_init(ArityTable::builtin)
}

/// Parse with the shipped option-arity table.
pub fn parse_bash(text: &str) -> Result<BashCommandList, BashError> {
    parse_bash_with(text, builtin_table())
}

pub fn parse_bash_with(text: &str, table: &ArityTable) -> Result<BashCommandList, BashError> {
    parse_full(text, table)
        .map(|(list, _)| list)
        .map_err(|f| BashError(fault_diagnostic(text, f)))
}

pub(crate) fn fault_diagnostic(text: &str, f: Fault) -> Diagnostic {
    Diagnostic::new(f.code, f.message).with_span(Span::at_offset(text, f.offset.min(text.len())))
}

/// Non-fatal findings collected while parsing.
#[derive(Debug, Clone, PartialEq, Eq)]
pub(crate) struct Lint {
    pub code: &'static str,
    pub message: String,
    pub offset: usize,
}

pub(crate) fn parse_full(text: &str, table: &ArityTable) -> Result<(BashCommandList, Vec<Lint>), Fault> {
    parse_at(text, 0, table)
}

/// Parse `src`, which starts at byte `base` of the outermost text.
fn parse_at(src: &str, base: usize, table: &ArityTable) -> Result<(BashCommandList, Vec<Lint>), Fault> {
    let tokens = tokenize(src, base)?;
    let mut p = Parser {
        tokens,
        idx: 0,
        end: base + src.len(),
        table,
        list: BashCommandList {
            atoms: Vec::new(),
            connectors: Vec::new(),
            groups: Vec::new(),
            terminator: None,
        },
        lints: Vec::new(),
    };
    p.list(Closer::Eof, base)?;
    // Groups were pushed innermost first; order them by position.
    p.list.groups.sort_by_key(|g| (g.atoms.start, std::cmp::Reverse(g.atoms.end)));
    Ok((p.list, p.lints))
}

#[derive(Clone, Copy, PartialEq, Eq)]
enum Closer {
    Eof,
    Paren,
    Brace,
}

const RESERVED: &[&str] = &[
    "if", "then", "else", "elif", "fi", "for", "while", "until", "do", "done", "case", "esac", "function", "select",
];

struct Parser<'t> {
    tokens: Vec<Token>,
    idx: usize,
    end: usize,
    table: &'t ArityTable,
    list: BashCommandList,
    lints: Vec<Lint>,
}

fn fault(code: &'static str, message: impl Into<String>, offset: usize) -> Fault {
    Fault {
        code,
        message: message.into(),
        offset,
    }
}

fn is_connector(kind: &Kind) -> bool {
    matches!(
        kind,
        Kind::Op(Op::Semi | Op::Amp | Op::And | Op::Or | Op::Pipe | Op::PipeAll)
    )
}

fn op_text(op: &Op) -> &'static str {
    match op {
        Op::Semi => ";",
        Op::And => "&&",
        Op::Or => "||",
        Op::Pipe => "|",
        Op::PipeAll => "|&",
        Op::Amp => "&",
        Op::LParen => "(",
        Op::RParen => ")",
    }
}

impl Parser<'_> {
    fn peek(&self) -> Option<&Token> {
        self.tokens.get(self.idx)
    }

    fn at_closer(&self, closer: Closer) -> bool {
        match (closer, self.peek().map(|t| &t.kind)) {
            (Closer::Paren, Some(Kind::Op(Op::RParen))) => true,
            (Closer::Brace, Some(Kind::Word(w))) => w.is_plain("}"),
            _ => false,
        }
    }

    fn list(&mut self, closer: Closer, open_at: usize) -> Result<(), Fault> {
        loop {
            self.pipeline()?;
            let Some(tok) = self.peek().cloned() else {
                return match closer {
                    Closer::Eof => Ok(()),
                    Closer::Paren => Err(fault("BASH_UNBALANCED_PAREN", "`(` is never closed", open_at)),
                    Closer::Brace => Err(fault("BASH_UNBALANCED_BRACE", "`{` is never closed", open_at)),
                };
            };
            match &tok.kind {
                Kind::Op(Op::RParen) if closer == Closer::Paren => return Ok(()),
                Kind::Op(Op::RParen) => {
                    return Err(fault("BASH_UNBALANCED_PAREN", "unexpected `)`", tok.start));
                }
                Kind::Op(op @ (Op::Semi | Op::Amp)) => {
                    let conn = if *op == Op::Semi { Connector::Seq } else { Connector::Background };
                    self.idx += 1;
                    if self.peek().is_none() {
                        if closer == Closer::Eof {
                            self.list.terminator = Some(conn);
                        }
                        continue_or_close(closer, open_at)?;
                        return Ok(());
                    }
                    if self.at_closer(closer) {
                        return Ok(());
                    }
                    let next = self.peek().expect("checked");
                    if is_connector(&next.kind) {
                        return Err(self.empty_command(next.start, &next.kind));
                    }
                    self.list.connectors.push(conn);
                }
                Kind::Op(op @ (Op::And | Op::Or)) => {
                    let conn = if *op == Op::And { Connector::And } else { Connector::Or };
                    self.idx += 1;
                    match self.peek() {
                        None => {
                            return Err(fault(
                                "BASH_TRAILING_CONNECTOR",
                                format!("`{}` has no command after it", op_text(op)),
                                tok.start,
                            ))
                        }
                        Some(next) if is_connector(&next.kind) || next.kind == Kind::Op(Op::RParen) => {
                            let (start, kind) = (next.start, next.kind.clone());
                            return Err(self.empty_command(start, &kind));
                        }
                        Some(_) => self.list.connectors.push(conn),
                    }
                }
                Kind::Op(Op::LParen) => {
                    return Err(fault("BASH_SYNTAX", "unexpected `(`", tok.start));
                }
                Kind::Op(Op::Pipe | Op::PipeAll) | Kind::Word(_) | Kind::Redirect(_) => {
                    unreachable!("pipeline consumes words, redirections and pipes")
                }
            }
        }
    }

    fn empty_command(&self, at: usize, kind: &Kind) -> Fault {
        let what = match kind {
            Kind::Op(op) => format!("`{}`", op_text(op)),
            _ => "this token".to_string(),
        };
        fault("BASH_EMPTY_COMMAND", format!("empty command before {what}"), at)
    }

    fn pipeline(&mut self) -> Result<(), Fault> {
        if let Some(Kind::Word(w)) = self.peek().map(|t| &t.kind) {
            if w.is_plain("!") {
                self.idx += 1;
            }
        }
        self.command()?;
        while let Some(tok) = self.peek().cloned() {
            let Kind::Op(op @ (Op::Pipe | Op::PipeAll)) = &tok.kind else {
                break;
            };
            self.idx += 1;
            match self.peek() {
                None => {
                    return Err(fault(
                        "BASH_TRAILING_CONNECTOR",
                        format!("`{}` has no command after it", op_text(op)),
                        tok.start,
                    ))
                }
                Some(next) if is_connector(&next.kind) || next.kind == Kind::Op(Op::RParen) => {
                    let (start, kind) = (next.start, next.kind.clone());
                    return Err(self.empty_command(start, &kind));
                }
                Some(_) => {}
            }
            self.list.connectors.push(Connector::Pipe);
            self.command()?;
        }
        Ok(())
    }

    fn command(&mut self) -> Result<(), Fault> {
        let Some(tok) = self.peek().cloned() else {
            return Err(fault("BASH_EMPTY_COMMAND", "empty command", self.end));
        };
        match &tok.kind {
            Kind::Op(Op::LParen) => {
                self.idx += 1;
                if let Some(Kind::Op(Op::RParen)) = self.peek().map(|t| &t.kind) {
                    return Err(fault("BASH_EMPTY_COMMAND", "empty subshell `()`", tok.start));
                }
                let first = self.list.atoms.len();
                self.list(Closer::Paren, tok.start)?;
                self.idx += 1;
                self.group(GroupKind::Subshell, first)
            }
            Kind::Op(Op::RParen) => {
                let prev_open = self.idx > 0 && self.tokens[self.idx - 1].kind == Kind::Op(Op::LParen);
                if prev_open {
                    Err(fault("BASH_EMPTY_COMMAND", "empty subshell `()`", tok.start))
                } else {
                    Err(fault("BASH_UNBALANCED_PAREN", "unexpected `)`", tok.start))
                }
            }
            Kind::Op(op) => Err(self.empty_command(tok.start, &Kind::Op(op.clone()))),
            Kind::Word(w) if w.is_plain("{") => {
                self.idx += 1;
                if let Some(Kind::Word(n)) = self.peek().map(|t| &t.kind) {
                    if n.is_plain("}") {
                        return Err(fault("BASH_EMPTY_COMMAND", "empty brace group", tok.start));
                    }
                }
                let first = self.list.atoms.len();
                self.list(Closer::Brace, tok.start)?;
                self.idx += 1;
                self.group(GroupKind::Brace, first)
            }
            Kind::Word(w) if w.is_plain("}") => Err(fault("BASH_UNBALANCED_BRACE", "unexpected `}`", tok.start)),
            Kind::Word(w) if !w.quoted && RESERVED.contains(&w.text.as_str()) => Err(fault(
                "BASH_SYNTAX",
                format!("compound command `{}` is not supported in one-liners", w.text),
                tok.start,
            )),
            _ => self.simple(),
        }
    }

    fn group(&mut self, kind: GroupKind, first: usize) -> Result<(), Fault> {
        let redirections = self.redirections()?;
        self.list.groups.push(Group {
            kind,
            atoms: first..self.list.atoms.len(),
            redirections,
        });
        Ok(())
    }

    fn redirections(&mut self) -> Result<Vec<Redirection>, Fault> {
        let mut out = Vec::new();
        while let Some(Token {
            kind: Kind::Redirect(op),
            start,
        }) = self.peek().cloned()
        {
            self.idx += 1;
            out.push(self.redirect_target(op, start)?);
        }
        Ok(out)
    }

    fn redirect_target(&mut self, op: String, start: usize) -> Result<Redirection, Fault> {
        match self.peek().cloned() {
            Some(Token {
                kind: Kind::Word(w), ..
            }) => {
                self.idx += 1;
                self.check_word(&w, false)?;
                Ok(Redirection { op, target: w.text })
            }
            _ => Err(fault(
                "BASH_REDIRECT_TARGET",
                format!("redirection `{op}` has no target"),
                start,
            )),
        }
    }

    fn simple(&mut self) -> Result<(), Fault> {
        let mut words: Vec<Word> = Vec::new();
        let mut redirections = Vec::new();
        while let Some(tok) = self.peek().cloned() {
            match tok.kind {
                Kind::Word(w) => {
                    self.idx += 1;
                    words.push(w);
                }
                Kind::Redirect(op) => {
                    self.idx += 1;
                    redirections.push(self.redirect_target(op, tok.start)?);
                }
                _ => break,
            }
        }
        if let Some(Token {
            kind: Kind::Op(Op::LParen),
            start,
        }) = self.peek()
        {
            return Err(fault("BASH_SYNTAX", "unexpected `(`", *start));
        }

        let n_assign = words.iter().take_while(|w| assignment(w).is_some()).count();
        let has_program = n_assign < words.len();
        for (i, w) in words.iter().enumerate() {
            self.check_word(w, i < n_assign && has_program)?;
        }
        let texts: Vec<String> = words.iter().map(|w| w.text.clone()).collect();
        let mut atom = if has_program {
            let mut atom = build_atom(&texts[n_assign..], self.table);
            atom.assignments = words[..n_assign].iter().filter_map(assignment).collect();
            atom
        } else if let Some((first, rest)) = texts.split_first() {
            // Assignment-only command: the first assignment names it.
            let mut atom = AtomicCommand::new(first.clone());
            atom.positionals = rest.to_vec();
            atom
        } else {
            // Redirection-only command behaves like the null command.
            AtomicCommand::new(":")
        };
        atom.redirections = redirections;
        self.list.atoms.push(atom);
        Ok(())
    }

    /// Validate substitutions recursively and collect lints for one word.
    fn check_word(&mut self, w: &Word, is_assignment: bool) -> Result<(), Fault> {
        if !is_assignment {
            for &at in &w.bare_expansions {
                self.lints.push(Lint {
                    code: "BASH_UNQUOTED_EXPANSION",
                    message: "unquoted expansion is subject to word splitting and globbing".into(),
                    offset: at,
                });
            }
        }
        for &at in &w.backticks {
            self.lints.push(Lint {
                code: "BASH_BACKTICKS",
                message: "use $(..) instead of legacy backticks".into(),
                offset: at,
            });
        }
        for (at, inner) in &w.substitutions {
            let (_, lints) = parse_at(inner, *at, self.table)?;
            self.lints.extend(lints);
        }
        Ok(())
    }
}

fn continue_or_close(closer: Closer, open_at: usize) -> Result<(), Fault> {
    match closer {
        Closer::Eof => Ok(()),
        Closer::Paren => Err(fault("BASH_UNBALANCED_PAREN", "`(` is never closed", open_at)),
        Closer::Brace => Err(fault("BASH_UNBALANCED_BRACE", "`{` is never closed", open_at)),
    }
}

fn assignment(w: &Word) -> Option<(String, String)> {
    let (name, value) = w.text.split_once('=')?;
    let valid = !name.is_empty()
        && !name.starts_with(|c: char| c.is_ascii_digit())
        && name.chars().all(|c| c == '_' || c.is_ascii_alphanumeric());
    valid.then(|| (name.to_string(), value.to_string()))
}

fn option_like(s: &str) -> bool {
    s.len() > 1 && s.starts_with('-')
}

fn build_atom(words: &[String], table: &ArityTable) -> AtomicCommand {
    let default = UtilitySpec::default();
    let spec = table.get(&words[0]).unwrap_or(&default);
    let mut atom = AtomicCommand::new(words[0].clone());
    let mut options_done = false;
    let mut i = 1;
    while i < words.len() {
        let w = &words[i];
        i += 1;
        if options_done || !option_like(w) {
            atom.positionals.push(w.clone());
            options_done |= spec.posix_order;
            continue;
        }
        if w == "--" {
            options_done = true;
            continue;
        }
        if w.starts_with("--") {
            if let Some((k, v)) = w.split_once('=') {
                atom.add_option(k.to_string(), OptionValue::Value(v.to_string()));
            } else if spec.valued_flags.contains(w) && i < words.len() {
                atom.add_option(w.clone(), OptionValue::Value(words[i].clone()));
                i += 1;
            } else {
                atom.add_option(w.clone(), OptionValue::Flag);
            }
            continue;
        }
        let whole = spec.single_dash_long
            || w[1..].chars().all(|c| c.is_ascii_digit())
            || spec.valued_flags.contains(w)
            || spec.terminated_flags.contains(w);
        if whole {
            if spec.terminated_flags.contains(w) {
                let mut body = Vec::new();
                while i < words.len() {
                    let t = &words[i];
                    i += 1;
                    body.push(t.as_str());
                    if t == ";" || t == "+" {
                        break;
                    }
                }
                atom.add_option(w.clone(), OptionValue::Value(body.join(" ")));
            } else if spec.valued_flags.contains(w) && i < words.len() {
                atom.add_option(w.clone(), OptionValue::Value(words[i].clone()));
                i += 1;
            } else {
                atom.add_option(w.clone(), OptionValue::Flag);
            }
            continue;
        }
        // Bundled short flags: `-la`, `-xzf archive`, `-n5`.
        let body = &w[1..];
        for (k, c) in body.char_indices() {
            let key = format!("-{c}");
            if spec.valued_flags.contains(&key) {
                let rest = &body[k + c.len_utf8()..];
                if !rest.is_empty() {
                    atom.add_option(key, OptionValue::Value(rest.to_string()));
                } else if i < words.len() {
                    atom.add_option(key, OptionValue::Value(words[i].clone()));
                    i += 1;
                } else {
                    atom.add_option(key, OptionValue::Flag);
                }
                break;
            }
            atom.add_option(key, OptionValue::Flag);
        }
    }
    atom
}

fn quote(s: &str) -> String {
    let safe = !s.is_empty()
        && s
            .chars()
            .all(|c| c.is_ascii_alphanumeric() || "_./:@%+=,-".contains(c));
    if safe {
        s.to_string()
    } else {
        format!("'{}'", s.replace('\'', r"'\''"))
    }
}

fn render_atom(atom: &AtomicCommand, table: &ArityTable) -> String {
    let mut parts: Vec<String> = atom
        .assignments
        .iter()
        .map(|(k, v)| format!("{k}={}", quote(v)))
        .collect();
    // A program that would otherwise read as an assignment or keyword.
    let program = if atom.assignments.is_empty() && atom.program.contains('=') && atom.program != ":" {
        atom.program.split_once('=').map_or_else(
            || quote(&atom.program),
            |(k, v)| format!("{k}={}", quote(v)),
        )
    } else if atom.program == ":" {
        ":".to_string()
    } else {
        quote(&atom.program)
    };
    parts.push(program);
    let default = UtilitySpec::default();
    let spec = table.get(&atom.program).unwrap_or(&default);
    for (key, value) in &atom.options {
        let values: Vec<&String> = match value {
            OptionValue::Flag => {
                parts.push(quote(key));
                continue;
            }
            OptionValue::Value(v) => vec![v],
            OptionValue::Values(vs) => vs.iter().collect(),
        };
        for v in values {
            if key.starts_with("--") && !spec.valued_flags.contains(key) {
                parts.push(quote(&format!("{key}={v}")));
            } else if spec.terminated_flags.contains(key) {
                parts.push(quote(key));
                parts.extend(v.split(' ').map(quote));
            } else {
                parts.push(quote(key));
                parts.push(quote(v));
            }
        }
    }
    let needs_separator = atom.positionals.iter().any(|p| option_like(p))
        && !(spec.posix_order && atom.positionals.first().is_some_and(|p| !option_like(p)));
    if needs_separator {
        parts.push("--".to_string());
    }
    parts.extend(atom.positionals.iter().map(|p| quote(p)));
    for r in &atom.redirections {
        parts.push(format!("{}{}", r.op, quote(&r.target)));
    }
    parts.join(" ")
}

pub(crate) fn render(list: &BashCommandList) -> String {
    let table = builtin_table();
    let mut out = String::new();
    for (i, atom) in list.atoms.iter().enumerate() {
        for g in list.groups.iter().filter(|g| g.atoms.start == i) {
            out.push_str(match g.kind {
                GroupKind::Subshell => "( ",
                GroupKind::Brace => "{ ",
            });
        }
        out.push_str(&render_atom(atom, table));
        let mut closing: Vec<&Group> = list.groups.iter().filter(|g| g.atoms.end == i + 1).collect();
        closing.sort_by_key(|g| std::cmp::Reverse(g.atoms.start));
        for g in closing {
            out.push_str(match g.kind {
                GroupKind::Subshell => " )",
                GroupKind::Brace => "; }",
            });
            for r in &g.redirections {
                out.push(' ');
                out.push_str(&r.op);
                out.push_str(&quote(&r.target));
            }
        }
        if let Some(c) = list.connectors.get(i) {
            out.push(' ');
            out.push_str(c.as_str());
            out.push(' ');
        }
    }
    if let Some(t) = list.terminator {
        out.push_str(if t == Connector::Background { " &" } else { ";" });
    }
    out
}
