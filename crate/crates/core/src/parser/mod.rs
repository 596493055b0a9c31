//! Recursive-descent parser for the supported C99 subset.

pub mod ast;
mod grammar;
mod unparse;

use std::fmt;

use thiserror::Error;

use crate::frontend::{ExpansionFrame, PPToken};
use crate::source::Loc;

pub use ast::*;
pub use grammar::parse;
pub(crate) use unparse::expr as expr_text;
pub use unparse::{structure, unparse};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ParseErrorKind {
    #[error("expected {expected}, found {found}")]
    Syntax { expected: String, found: String },
    #[error("unsupported construct: {0}")]
    Unsupported(String),
    #[error("invalid constant: {0}")]
    InvalidConstant(String),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ParseError {
    pub kind: ParseErrorKind,
    /// Visible location of the nearest token, if the input had any.
    pub loc: Option<Loc>,
    pub expansion: Vec<ExpansionFrame>,
}

impl ParseError {
    pub(crate) fn near(kind: ParseErrorKind, tok: Option<&PPToken>) -> Self {
        ParseError {
            kind,
            loc: tok.map(|t| t.visible_loc()),
            expansion: tok.map(|t| t.expansion.clone()).unwrap_or_default(),
        }
    }

    pub fn is_unsupported(&self) -> bool {
        matches!(self.kind, ParseErrorKind::Unsupported(_))
    }
}

impl fmt::Display for ParseError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.kind.fmt(f)
    }
}

impl std::error::Error for ParseError {}

/// The three clauses of a `for` statement, `None` where a clause is absent.
/// Returns `None` for any other statement.
pub fn for_clauses(stmt: &Stmt) -> Option<(Option<&ForInit>, Option<&Expr>, Option<&Expr>)> {
    match &stmt.kind {
        StmtKind::For { init, cond, step, .. } => Some((init.as_ref(), cond.as_ref(), step.as_ref())),
        _ => None,
    }
}

/// Decodes the escape sequences in the body of a character constant or
/// string literal (quotes already removed). Returns `None` for malformed or
/// unsupported escapes and for values that do not fit a byte.
pub fn decode_escapes(inner: &str) -> Option<Vec<u8>> {
    let b = inner.as_bytes();
    let mut out = Vec::with_capacity(b.len());
    let mut i = 0;
    while i < b.len() {
        if b[i] != b'\\' {
            out.push(b[i]);
            i += 1;
            continue;
        }
        let c = *b.get(i + 1)?;
        i += 2;
        let v = match c {
            b'n' => b'\n',
            b't' => b'\t',
            b'v' => 0x0b,
            b'b' => 0x08,
            b'r' => b'\r',
            b'f' => 0x0c,
            b'a' => 0x07,
            b'\\' | b'\'' | b'"' | b'?' => c,
            b'0'..=b'7' => {
                let mut v = u32::from(c - b'0');
                let mut n = 1;
                while n < 3 && i < b.len() && (b'0'..=b'7').contains(&b[i]) {
                    v = v * 8 + u32::from(b[i] - b'0');
                    i += 1;
                    n += 1;
                }
                u8::try_from(v).ok()?
            }
            b'x' => {
                let start = i;
                let mut v: u32 = 0;
                while i < b.len() && b[i].is_ascii_hexdigit() {
                    v = v * 16 + (b[i] as char).to_digit(16)?;
                    if v > 0xff {
                        return None;
                    }
                    i += 1;
                }
                if i == start {
                    return None;
                }
                v as u8
            }
            _ => return None,
        };
        out.push(v);
    }
    Some(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn escapes() {
        assert_eq!(decode_escapes("a\\n").unwrap(), b"a\n");
        assert_eq!(decode_escapes("\\0").unwrap(), vec![0]);
        assert_eq!(decode_escapes("\\101\\x41").unwrap(), b"AA");
        assert_eq!(decode_escapes("\\'\\\"\\?\\\\").unwrap(), b"'\"?\\");
        assert_eq!(decode_escapes("\\777"), None);
        assert_eq!(decode_escapes("\\x100"), None);
        assert_eq!(decode_escapes("\\x"), None);
        assert_eq!(decode_escapes("\\q"), None);
        assert_eq!(decode_escapes("\\"), None);
    }
}
