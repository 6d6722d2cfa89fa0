use super::SqlError;

#[derive(Debug, Clone, PartialEq)]
pub(crate) enum Tok {
    /// Bare or backtick/bracket-quoted identifier (keywords included).
    Ident { text: String, quoted: bool },
    Number(String),
    Str { value: String, quote: char },
    Sym(&'static str),
}

#[derive(Debug, Clone, PartialEq)]
pub(crate) struct Token {
    pub tok: Tok,
    pub pos: usize,
}

const SYMBOLS: &[&str] = &[
    "<>", "!=", "<=", ">=", "==", "||", "(", ")", ",", ".", "*", "=", "<", ">", "+", "-", "/", "%", ";",
];

pub(crate) fn tokenize(src: &str) -> Result<Vec<Token>, SqlError> {
    let mut out = Vec::new();
    let bytes = src.as_bytes();
    let mut i = 0;
    while i < src.len() {
        let c = src[i..].chars().next().expect("in bounds");
        if c.is_whitespace() {
            i += c.len_utf8();
            continue;
        }
        if src[i..].starts_with("--") {
            i = src[i..].find('\n').map_or(src.len(), |n| i + n);
            continue;
        }
        let pos = i;
        if c == '\'' || c == '"' {
            let (value, end) = quoted(src, i, c)
                .ok_or_else(|| SqlError::syntax(src, pos, format!("unterminated {c}-quoted string")))?;
            out.push(Token {
                tok: Tok::Str { value, quote: c },
                pos,
            });
            i = end;
        } else if c == '`' || c == '[' {
            let found = if c == '`' {
                quoted(src, i, '`')
            } else {
                let rest = &src[i + 1..];
                rest.find(']').map(|n| (rest[..n].to_string(), i + 1 + n + 1))
            };
            let (text, end) = found.ok_or_else(|| SqlError::syntax(src, pos, "unterminated quoted identifier"))?;
            out.push(Token {
                tok: Tok::Ident { text, quoted: true },
                pos,
            });
            i = end;
        } else if c.is_ascii_digit() || (c == '.' && bytes.get(i + 1).is_some_and(u8::is_ascii_digit)) {
            let mut j = i;
            let mut seen_dot = false;
            let mut seen_exp = false;
            while j < src.len() {
                let b = bytes[j];
                if b.is_ascii_digit() {
                    j += 1;
                } else if b == b'.' && !seen_dot && !seen_exp {
                    seen_dot = true;
                    j += 1;
                } else if (b == b'e' || b == b'E') && !seen_exp && j > i {
                    let sign = matches!(bytes.get(j + 1), Some(b'+' | b'-'));
                    let digit_at = j + 1 + usize::from(sign);
                    if bytes.get(digit_at).is_some_and(u8::is_ascii_digit) {
                        seen_exp = true;
                        j = digit_at;
                    } else {
                        break;
                    }
                } else {
                    break;
                }
            }
            if src[j..].starts_with(|c: char| c.is_alphabetic() || c == '_') {
                return Err(SqlError::syntax(src, pos, "malformed number"));
            }
            out.push(Token {
                tok: Tok::Number(src[i..j].to_string()),
                pos,
            });
            i = j;
        } else if c.is_alphabetic() || c == '_' {
            let end = src[i..]
                .char_indices()
                .find(|(_, c)| !(c.is_alphanumeric() || *c == '_' || *c == '$'))
                .map_or(src.len(), |(n, _)| i + n);
            out.push(Token {
                tok: Tok::Ident {
                    text: src[i..end].to_string(),
                    quoted: false,
                },
                pos,
            });
            i = end;
        } else if let Some(sym) = SYMBOLS.iter().find(|s| src[i..].starts_with(**s)) {
            out.push(Token { tok: Tok::Sym(sym), pos });
            i += sym.len();
        } else {
            return Err(SqlError::syntax(src, pos, format!("unexpected character `{c}`")));
        }
    }
    Ok(out)
}

/// Read a quoted run starting at `start` (the opening quote); a doubled
/// closing quote is an escaped quote.
fn quoted(src: &str, start: usize, close: char) -> Option<(String, usize)> {
    let mut value = String::new();
    let mut chars = src[start + 1..].char_indices().peekable();
    while let Some((n, c)) = chars.next() {
        if c == close {
            if chars.peek().map(|(_, c)| *c) == Some(close) {
                chars.next();
                value.push(close);
            } else {
                return Some((value, start + 1 + n + close.len_utf8()));
            }
        } else {
            value.push(c);
        }
    }
    None
}
