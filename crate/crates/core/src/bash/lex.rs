//! Shell tokenizer for one-liners: quoting, escapes, substitutions,
//! operators and redirections.

use super::Fault;

#[derive(Debug, Clone, PartialEq, Eq)]
pub(crate) enum Op {
    Semi,
    And,
    Or,
    Pipe,
    PipeAll,
    Amp,
    LParen,
    RParen,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub(crate) struct Word {
    /// Text after quote removal; expansions are kept verbatim.
    pub text: String,
    pub quoted: bool,
    /// Offsets of unquoted `$name` / `${..}` expansions.
    pub bare_expansions: Vec<usize>,
    /// (offset of the inner text, inner text) for `$(..)` and backticks.
    pub substitutions: Vec<(usize, String)>,
    pub backticks: Vec<usize>,
}

impl Word {
    fn new() -> Self {
        Word {
            text: String::new(),
            quoted: false,
            bare_expansions: Vec::new(),
            substitutions: Vec::new(),
            backticks: Vec::new(),
        }
    }

    pub fn is_plain(&self, s: &str) -> bool {
        !self.quoted && self.text == s
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub(crate) enum Kind {
    Word(Word),
    Op(Op),
    /// Operator including any fd prefix, e.g. `2>`, `>>`, `&>`, `>&`.
    Redirect(String),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub(crate) struct Token {
    pub kind: Kind,
    pub start: usize,
}

pub(crate) fn tokenize(src: &str, base: usize) -> Result<Vec<Token>, Fault> {
    Lexer { src, pos: 0, base }.run()
}

struct Lexer<'a> {
    src: &'a str,
    pos: usize,
    base: usize,
}

fn is_meta(c: char) -> bool {
    matches!(c, ' ' | '\t' | '\n' | '\r' | ';' | '&' | '|' | '(' | ')' | '<' | '>')
}

impl<'a> Lexer<'a> {
    fn peek(&self) -> Option<char> {
        self.src[self.pos..].chars().next()
    }

    fn peek_at(&self, n: usize) -> Option<char> {
        self.src[self.pos..].chars().nth(n)
    }

    fn rest(&self) -> &'a str {
        &self.src[self.pos..]
    }

    fn bump(&mut self) -> Option<char> {
        let c = self.peek()?;
        self.pos += c.len_utf8();
        Some(c)
    }

    fn fault(&self, code: &'static str, message: impl Into<String>, at: usize) -> Fault {
        Fault {
            code,
            message: message.into(),
            offset: self.base + at,
        }
    }

    fn run(mut self) -> Result<Vec<Token>, Fault> {
        let mut out = Vec::new();
        while let Some(c) = self.peek() {
            let start = self.pos;
            match c {
                ' ' | '\t' | '\r' => {
                    self.bump();
                }
                '\n' => {
                    self.bump();
                    // A newline ends a command only when one is open: after
                    // `|`, `&&`, `||`, `;`, `&` or `(` bash keeps reading.
                    let continues = match out.last() {
                        None => true,
                        Some(Token { kind: Kind::Op(op), .. }) => *op != Op::RParen,
                        Some(_) => false,
                    };
                    if !continues {
                        out.push(Token { kind: Kind::Op(Op::Semi), start });
                    }
                }
                '#' => {
                    while self.peek().is_some_and(|c| c != '\n') {
                        self.bump();
                    }
                }
                ';' => {
                    self.bump();
                    if self.peek() == Some(';') {
                        return Err(self.fault("BASH_SYNTAX", "unexpected `;;` outside case", start));
                    }
                    out.push(Token { kind: Kind::Op(Op::Semi), start });
                }
                '&' => {
                    self.bump();
                    let kind = match self.peek() {
                        Some('&') => {
                            self.bump();
                            Kind::Op(Op::And)
                        }
                        Some('>') => {
                            self.bump();
                            if self.peek() == Some('>') {
                                self.bump();
                                Kind::Redirect("&>>".into())
                            } else {
                                Kind::Redirect("&>".into())
                            }
                        }
                        _ => Kind::Op(Op::Amp),
                    };
                    out.push(Token { kind, start });
                }
                '|' => {
                    self.bump();
                    let op = match self.peek() {
                        Some('|') => {
                            self.bump();
                            Op::Or
                        }
                        Some('&') => {
                            self.bump();
                            Op::PipeAll
                        }
                        _ => Op::Pipe,
                    };
                    out.push(Token { kind: Kind::Op(op), start });
                }
                '(' => {
                    self.bump();
                    out.push(Token { kind: Kind::Op(Op::LParen), start });
                }
                ')' => {
                    self.bump();
                    out.push(Token { kind: Kind::Op(Op::RParen), start });
                }
                '<' | '>' if self.peek_at(1) == Some('(') => {
                    let w = self.word()?;
                    out.push(Token { kind: Kind::Word(w), start });
                }
                '<' | '>' => {
                    let op = self.redirect(String::new(), start)?;
                    out.push(Token { kind: Kind::Redirect(op), start });
                }
                _ => {
                    // An all-digit word directly followed by `<` or `>` is an fd prefix.
                    let digits: String = self.rest().chars().take_while(char::is_ascii_digit).collect();
                    let after = self.rest()[digits.len()..].chars().next();
                    if !digits.is_empty() && matches!(after, Some('<' | '>')) && !self.rest()[digits.len() + 1..].starts_with('(') {
                        self.pos += digits.len();
                        let op = self.redirect(digits, start)?;
                        out.push(Token { kind: Kind::Redirect(op), start });
                    } else {
                        let w = self.word()?;
                        out.push(Token { kind: Kind::Word(w), start });
                    }
                }
            }
        }
        Ok(out)
    }

    fn redirect(&mut self, mut op: String, start: usize) -> Result<String, Fault> {
        let c = self.bump().expect("caller checked");
        op.push(c);
        match (c, self.peek()) {
            ('<', Some('<')) => {
                self.bump();
                if self.peek() == Some('<') {
                    self.bump();
                    op.push_str("<<");
                } else {
                    return Err(self.fault("BASH_SYNTAX", "here-documents are not supported in one-liners", start));
                }
            }
            ('>', Some('>')) | ('>', Some('|')) | ('<', Some('>')) | (_, Some('&')) => {
                op.push(self.bump().expect("peeked"));
            }
            _ => {}
        }
        Ok(op)
    }

    fn word(&mut self) -> Result<Word, Fault> {
        let mut w = Word::new();
        while let Some(c) = self.peek() {
            let at = self.pos;
            match c {
                '<' | '>' if self.peek_at(1) == Some('(') && w.text.is_empty() => {
                    self.bump();
                    let inner = self.paren_body(at)?;
                    w.text.push(c);
                    w.text.push('(');
                    w.text.push_str(inner);
                    w.text.push(')');
                    w.substitutions.push((self.base + at + 2, inner.to_string()));
                }
                c if is_meta(c) => break,
                '\\' => {
                    self.bump();
                    match self.bump() {
                        Some('\n') => {}
                        Some(n) => {
                            w.text.push(n);
                            w.quoted = true;
                        }
                        None => w.text.push('\\'),
                    }
                }
                '\'' => {
                    self.bump();
                    w.quoted = true;
                    let body = self.until_char('\'', at)?;
                    w.text.push_str(body);
                }
                '"' => {
                    self.bump();
                    w.quoted = true;
                    self.double_quoted(&mut w, at)?;
                }
                '`' => {
                    self.bump();
                    w.backticks.push(self.base + at);
                    let body = self.backtick_body(at)?;
                    w.text.push('`');
                    w.text.push_str(body);
                    w.text.push('`');
                    w.substitutions.push((self.base + at + 1, unescape_backtick(body)));
                }
                '$' => self.dollar(&mut w, false)?,
                _ => {
                    self.bump();
                    w.text.push(c);
                }
            }
        }
        Ok(w)
    }

    fn until_char(&mut self, close: char, open_at: usize) -> Result<&'a str, Fault> {
        let start = self.pos;
        match self.rest().find(close) {
            Some(i) => {
                self.pos += i + close.len_utf8();
                Ok(&self.src[start..start + i])
            }
            None => Err(self.fault("BASH_SYNTAX", format!("unterminated {} quote", quote_name(close)), open_at)),
        }
    }

    fn double_quoted(&mut self, w: &mut Word, open_at: usize) -> Result<(), Fault> {
        loop {
            let at = self.pos;
            match self.peek() {
                None => return Err(self.fault("BASH_SYNTAX", "unterminated double quote", open_at)),
                Some('"') => {
                    self.bump();
                    return Ok(());
                }
                Some('\\') => {
                    self.bump();
                    match self.bump() {
                        Some(n @ ('$' | '`' | '"' | '\\')) => w.text.push(n),
                        Some('\n') => {}
                        Some(n) => {
                            w.text.push('\\');
                            w.text.push(n);
                        }
                        None => return Err(self.fault("BASH_SYNTAX", "unterminated double quote", open_at)),
                    }
                }
                Some('`') => {
                    self.bump();
                    w.backticks.push(self.base + at);
                    let body = self.backtick_body(at)?;
                    w.text.push('`');
                    w.text.push_str(body);
                    w.text.push('`');
                    w.substitutions.push((self.base + at + 1, unescape_backtick(body)));
                }
                Some('$') => self.dollar(w, true)?,
                Some(c) => {
                    self.bump();
                    w.text.push(c);
                }
            }
        }
    }

    fn backtick_body(&mut self, open_at: usize) -> Result<&'a str, Fault> {
        let start = self.pos;
        loop {
            match self.bump() {
                None => return Err(self.fault("BASH_SYNTAX", "unterminated backquote", open_at)),
                Some('\\') => {
                    self.bump();
                }
                Some('`') => return Ok(&self.src[start..self.pos - 1]),
                Some(_) => {}
            }
        }
    }

    fn dollar(&mut self, w: &mut Word, in_double: bool) -> Result<(), Fault> {
        let at = self.pos;
        self.bump();
        match self.peek() {
            Some('(') if self.peek_at(1) == Some('(') => {
                let inner = self.paren_body(at)?;
                w.text.push('$');
                w.text.push('(');
                w.text.push_str(inner);
                w.text.push(')');
            }
            Some('(') => {
                let inner = self.paren_body(at)?;
                w.text.push_str("$(");
                w.text.push_str(inner);
                w.text.push(')');
                w.substitutions.push((self.base + at + 2, inner.to_string()));
            }
            Some('{') => {
                let start = self.pos;
                let mut depth = 0usize;
                loop {
                    match self.bump() {
                        None => return Err(self.fault("BASH_UNBALANCED_BRACE", "unterminated `${`", at)),
                        Some('{') => depth += 1,
                        Some('}') => {
                            depth -= 1;
                            if depth == 0 {
                                break;
                            }
                        }
                        Some('\\') => {
                            self.bump();
                        }
                        Some(_) => {}
                    }
                }
                w.text.push('$');
                w.text.push_str(&self.src[start..self.pos]);
                if !in_double {
                    w.bare_expansions.push(self.base + at);
                }
            }
            Some('\'') if !in_double => {
                self.bump();
                w.quoted = true;
                let start = self.pos;
                loop {
                    match self.bump() {
                        None => return Err(self.fault("BASH_SYNTAX", "unterminated single quote", at)),
                        Some('\\') => {
                            self.bump();
                        }
                        Some('\'') => break,
                        Some(_) => {}
                    }
                }
                w.text.push_str(&self.src[start..self.pos - 1]);
            }
            Some(c) if c == '_' || c.is_ascii_alphanumeric() => {
                let name: String = self
                    .rest()
                    .chars()
                    .take_while(|c| *c == '_' || c.is_ascii_alphanumeric())
                    .collect();
                let name = if name.starts_with(|c: char| c.is_ascii_digit()) {
                    name[..1].to_string()
                } else {
                    name
                };
                self.pos += name.len();
                w.text.push('$');
                w.text.push_str(&name);
                if !in_double {
                    w.bare_expansions.push(self.base + at);
                }
            }
            Some(c @ ('@' | '*')) => {
                self.bump();
                w.text.push('$');
                w.text.push(c);
                if !in_double {
                    w.bare_expansions.push(self.base + at);
                }
            }
            Some(c @ ('?' | '#' | '$' | '!' | '-')) => {
                self.bump();
                w.text.push('$');
                w.text.push(c);
            }
            _ => w.text.push('$'),
        }
        Ok(())
    }

    /// Consume `( .. )` starting at the current `(`, honoring nesting and
    /// quotes; returns the inner text.
    fn paren_body(&mut self, open_at: usize) -> Result<&'a str, Fault> {
        self.bump();
        let start = self.pos;
        let mut depth = 1usize;
        loop {
            let at = self.pos;
            match self.bump() {
                None => {
                    return Err(self.fault("BASH_UNBALANCED_PAREN", "unterminated `(`", open_at));
                }
                Some('(') => depth += 1,
                Some(')') => {
                    depth -= 1;
                    if depth == 0 {
                        return Ok(&self.src[start..self.pos - 1]);
                    }
                }
                Some('\\') => {
                    self.bump();
                }
                Some('\'') => {
                    self.until_char('\'', at)?;
                }
                Some('"') => {
                    let mut scratch = Word::new();
                    self.double_quoted(&mut scratch, at)?;
                }
                Some('`') => {
                    self.backtick_body(at)?;
                }
                Some('#') if self.src[..at].ends_with([' ', '\t', '(']) => {
                    while self.peek().is_some_and(|c| c != '\n') {
                        self.bump();
                    }
                }
                Some(_) => {}
            }
        }
    }
}

fn quote_name(c: char) -> &'static str {
    match c {
        '\'' => "single",
        _ => "double",
    }
}

fn unescape_backtick(body: &str) -> String {
    let mut out = String::with_capacity(body.len());
    let mut chars = body.chars().peekable();
    while let Some(c) = chars.next() {
        if c == '\\' && matches!(chars.peek(), Some('\\' | '`' | '$')) {
            out.push(chars.next().expect("peeked"));
        } else {
            out.push(c);
        }
    }
    out
}
