use super::diag::{Code, Diagnostic, Diagnostics, SourceSpan};

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Tok {
    Ident(String),
    Int(i64),
    Sym(&'static str),
    Eof,
}

impl std::fmt::Display for Tok {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Tok::Ident(s) => write!(f, "`{s}`"),
            Tok::Int(i) => write!(f, "`{i}`"),
            Tok::Sym(s) => write!(f, "`{s}`"),
            Tok::Eof => write!(f, "end of file"),
        }
    }
}

#[derive(Debug, Clone)]
pub struct Token {
    pub tok: Tok,
    pub start: usize,
    pub end: usize,
}

// Longest symbols first.
const SYMBOLS: &[&str] = &[
    "<==>", "==>", ":=", "==", "!=", "<=", ">=", "&&", "||", "!!", "->", "(", ")", "{", "}", ",",
    ";", ":", ".", "=", "<", ">", "+", "-", "*", "!", "|", "?",
];

pub fn lex(file: &str, src: &str) -> Result<Vec<Token>, Diagnostics> {
    let bytes = src.as_bytes();
    let mut out = Vec::new();
    let mut i = 0;
    while i < bytes.len() {
        let c = bytes[i];
        if c.is_ascii_whitespace() {
            i += 1;
            continue;
        }
        if src[i..].starts_with("//") {
            while i < bytes.len() && bytes[i] != b'\n' {
                i += 1;
            }
            continue;
        }
        if c.is_ascii_alphabetic() || c == b'_' {
            let start = i;
            while i < bytes.len() && (bytes[i].is_ascii_alphanumeric() || bytes[i] == b'_') {
                i += 1;
            }
            out.push(Token {
                tok: Tok::Ident(src[start..i].to_string()),
                start,
                end: i,
            });
            continue;
        }
        if c.is_ascii_digit() {
            let start = i;
            while i < bytes.len() && bytes[i].is_ascii_digit() {
                i += 1;
            }
            let n = src[start..i].parse::<i64>().map_err(|_| {
                Diagnostics::single(Diagnostic::error(
                    Code::Syntax,
                    SourceSpan::new(file, src, start, i),
                    "integer literal out of range",
                ))
            })?;
            out.push(Token {
                tok: Tok::Int(n),
                start,
                end: i,
            });
            continue;
        }
        match SYMBOLS.iter().find(|s| src[i..].starts_with(**s)) {
            Some(s) => {
                out.push(Token {
                    tok: Tok::Sym(s),
                    start: i,
                    end: i + s.len(),
                });
                i += s.len();
            }
            None => {
                let ch = src[i..].chars().next().unwrap();
                return Err(Diagnostics::single(Diagnostic::error(
                    Code::Syntax,
                    SourceSpan::new(file, src, i, i + ch.len_utf8()),
                    format!("unexpected character `{ch}`"),
                )));
            }
        }
    }
    out.push(Token {
        tok: Tok::Eof,
        start: src.len(),
        end: src.len(),
    });
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn longest_match() {
        let toks = lex("t", "a <==> b ==> c <= d := !!").unwrap();
        let syms: Vec<_> = toks
            .iter()
            .filter_map(|t| match &t.tok {
                Tok::Sym(s) => Some(*s),
                _ => None,
            })
            .collect();
        assert_eq!(syms, vec!["<==>", "==>", "<=", ":=", "!!"]);
    }

    #[test]
    fn comments_skipped() {
        let toks = lex("t", "x // hello\ny").unwrap();
        assert_eq!(toks.len(), 3);
    }
}
