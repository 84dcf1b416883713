//! Minimal s-expression reader for solver output.

use std::fmt;

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Sexp {
    Atom(String),
    List(Vec<Sexp>),
}

impl Sexp {
    pub fn atom(&self) -> Option<&str> {
        match self {
            Sexp::Atom(a) => Some(a),
            Sexp::List(_) => None,
        }
    }

    pub fn list(&self) -> Option<&[Sexp]> {
        match self {
            Sexp::List(v) => Some(v),
            Sexp::Atom(_) => None,
        }
    }
}

impl fmt::Display for Sexp {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Sexp::Atom(a) => f.write_str(a),
            Sexp::List(v) => {
                f.write_str("(")?;
                for (i, x) in v.iter().enumerate() {
                    if i > 0 {
                        f.write_str(" ")?;
                    }
                    write!(f, "{x}")?;
                }
                f.write_str(")")
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("malformed s-expression at byte {0}")]
pub struct SexpError(pub usize);

/// Parses every top-level s-expression in `text`. Comments run from `;` to
/// the end of the line; `|quoted|` symbols and `"strings"` are single atoms.
pub fn parse_all(text: &str) -> Result<Vec<Sexp>, SexpError> {
    let b = text.as_bytes();
    let mut stack: Vec<Vec<Sexp>> = vec![vec![]];
    let mut i = 0;
    while i < b.len() {
        let c = b[i];
        match c {
            b';' => {
                while i < b.len() && b[i] != b'\n' {
                    i += 1;
                }
            }
            b'(' => {
                stack.push(vec![]);
                i += 1;
            }
            b')' => {
                if stack.len() < 2 {
                    return Err(SexpError(i));
                }
                let done = stack.pop().unwrap();
                stack.last_mut().unwrap().push(Sexp::List(done));
                i += 1;
            }
            c if c.is_ascii_whitespace() => i += 1,
            b'|' | b'"' => {
                let start = i;
                i += 1;
                while i < b.len() && b[i] != c {
                    i += 1;
                }
                if i >= b.len() {
                    return Err(SexpError(start));
                }
                i += 1;
                stack
                    .last_mut()
                    .unwrap()
                    .push(Sexp::Atom(text[start..i].to_string()));
            }
            _ => {
                let start = i;
                while i < b.len()
                    && !b[i].is_ascii_whitespace()
                    && !matches!(b[i], b'(' | b')' | b';')
                {
                    i += 1;
                }
                stack
                    .last_mut()
                    .unwrap()
                    .push(Sexp::Atom(text[start..i].to_string()));
            }
        }
    }
    if stack.len() != 1 {
        return Err(SexpError(b.len()));
    }
    Ok(stack.pop().unwrap())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn nested_lists_and_comments() {
        let v = parse_all("sat ; c\n((a 1) (b (- 2)))").unwrap();
        assert_eq!(v.len(), 2);
        assert_eq!(v[0], Sexp::Atom("sat".into()));
        assert_eq!(v[1].to_string(), "((a 1) (b (- 2)))");
    }

    #[test]
    fn quoted_symbols_are_atoms() {
        let v = parse_all("(|a b| \"x)y\")").unwrap();
        assert_eq!(v[0].list().unwrap().len(), 2);
    }

    #[test]
    fn unbalanced_is_error() {
        assert!(parse_all("((a)").is_err());
        assert!(parse_all("a)").is_err());
    }
}
