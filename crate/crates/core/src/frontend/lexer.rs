//! Translation phases 1-3: line splicing, comment removal and decomposition
//! into preprocessing tokens.

use super::token::{PPToken, TokenKind};
use super::{FrontendError, FrontendErrorKind};
use crate::source::{Loc, SourceFile};

const PUNCT3: [&str; 3] = ["<<=", ">>=", "..."];
const PUNCT2: [&str; 20] = [
    "->", "++", "--", "<<", ">>", "<=", ">=", "==", "!=", "&&", "||", "*=", "/=", "%=", "+=", "-=", "&=", "^=", "|=",
    "##",
];
const PUNCT1: &[u8] = b"[](){}.&*+-~!/%<>^|?:;=,#";
const DIGRAPHS: [&str; 5] = ["%:", "<:", ":>", "<%", "%>"];

/// A token plus a deferred lexical error. Errors inside groups skipped by
/// conditional inclusion are never reported, so the preprocessor decides.
#[derive(Debug, Clone)]
pub(crate) struct RawToken {
    pub tok: PPToken,
    pub error: Option<FrontendErrorKind>,
}

/// Lexes a whole file. The first lexical error aborts with its location.
pub fn lex(file: &SourceFile) -> Result<Vec<PPToken>, FrontendError> {
    let raw = lex_lenient(file)?;
    let mut out = Vec::with_capacity(raw.len());
    for r in raw {
        if let Some(kind) = r.error {
            return Err(FrontendError::at(kind, r.tok.origin));
        }
        out.push(r.tok);
    }
    Ok(out)
}

/// Spliced logical text with a physical position per byte.
struct Logical {
    bytes: Vec<u8>,
    pos: Vec<(u32, u32)>,
}

fn splice(contents: &str) -> Logical {
    let src = contents.as_bytes();
    let mut bytes = Vec::with_capacity(src.len());
    let mut pos = Vec::with_capacity(src.len());
    let (mut line, mut col) = (1u32, 1u32);
    let mut i = 0;
    while i < src.len() {
        let b = src[i];
        if b == b'\\' {
            let next = src.get(i + 1).copied();
            let crlf = next == Some(b'\r') && src.get(i + 2) == Some(&b'\n');
            if next == Some(b'\n') || crlf {
                i += if crlf { 3 } else { 2 };
                line += 1;
                col = 1;
                continue;
            }
        }
        if b == b'\r' && src.get(i + 1) == Some(&b'\n') {
            i += 1;
            continue;
        }
        bytes.push(b);
        pos.push((line, col));
        if b == b'\n' {
            line += 1;
            col = 1;
        } else {
            col += 1;
        }
        i += 1;
    }
    Logical { bytes, pos }
}

pub(crate) fn lex_lenient(file: &SourceFile) -> Result<Vec<RawToken>, FrontendError> {
    let text = splice(&file.contents);
    let b = &text.bytes;
    let loc_at = |i: usize| {
        let (line, col) = text
            .pos
            .get(i)
            .copied()
            .unwrap_or_else(|| text.pos.last().map(|&(l, c)| (l, c + 1)).unwrap_or((1, 1)));
        Loc::new(file.id, line, col)
    };
    let mut out: Vec<RawToken> = Vec::new();
    let mut i = 0;
    let mut line_start = true;
    let mut leading_space = false;

    while i < b.len() {
        let c = b[i];
        match c {
            b'\n' => {
                line_start = true;
                leading_space = false;
                i += 1;
                continue;
            }
            b' ' | b'\t' | b'\x0b' | b'\x0c' | b'\r' => {
                leading_space = true;
                i += 1;
                continue;
            }
            b'/' if b.get(i + 1) == Some(&b'*') => {
                let start = i;
                i += 2;
                loop {
                    if i + 1 >= b.len() {
                        return Err(FrontendError::at(FrontendErrorKind::UnterminatedComment, loc_at(start)));
                    }
                    if b[i] == b'*' && b[i + 1] == b'/' {
                        i += 2;
                        break;
                    }
                    i += 1;
                }
                leading_space = true;
                continue;
            }
            b'/' if b.get(i + 1) == Some(&b'/') => {
                while i < b.len() && b[i] != b'\n' {
                    i += 1;
                }
                leading_space = true;
                continue;
            }
            _ => {}
        }

        let start = i;
        let mut error = None;
        let kind;
        if let Some(tri) = trigraph_at(b, i) {
            error = Some(FrontendErrorKind::Unsupported(format!("trigraph `{tri}`")));
            kind = TokenKind::Other;
            i += 3;
        } else if (c == b'L' && matches!(b.get(i + 1), Some(b'"') | Some(b'\''))) || c == b'"' || c == b'\'' {
            let quote_at = if c == b'L' { i + 1 } else { i };
            let quote = b[quote_at];
            kind = if quote == b'"' {
                TokenKind::StringLiteral
            } else {
                TokenKind::CharConst
            };
            i = quote_at + 1;
            let mut closed = false;
            while i < b.len() && b[i] != b'\n' {
                if trigraph_at(b, i).is_some() && error.is_none() {
                    error = Some(FrontendErrorKind::Unsupported("trigraph".into()));
                }
                if b[i] == b'\\' && i + 1 < b.len() && b[i + 1] != b'\n' {
                    i += 2;
                    continue;
                }
                if b[i] == quote {
                    i += 1;
                    closed = true;
                    break;
                }
                i += 1;
            }
            if !closed {
                error = Some(if quote == b'"' {
                    FrontendErrorKind::UnterminatedString
                } else {
                    FrontendErrorKind::UnterminatedChar
                });
            } else if kind == TokenKind::CharConst && i - quote_at == 2 && error.is_none() {
                error = Some(FrontendErrorKind::EmptyCharConst);
            }
        } else if is_ident_start(c) {
            while i < b.len() && is_ident_continue(b[i]) {
                i += 1;
            }
            kind = TokenKind::Identifier;
        } else if c.is_ascii_digit() || (c == b'.' && b.get(i + 1).is_some_and(u8::is_ascii_digit)) {
            i += 1;
            while i < b.len() {
                let d = b[i];
                let exponent_sign = matches!(d, b'+' | b'-') && matches!(b[i - 1], b'e' | b'E' | b'p' | b'P');
                if exponent_sign || is_ident_continue(d) || d == b'.' {
                    i += 1;
                } else {
                    break;
                }
            }
            kind = TokenKind::PpNumber;
        } else if let Some(len) = punct_len(b, i) {
            let lexeme = std::str::from_utf8(&b[i..i + len]).unwrap_or("");
            if DIGRAPHS.contains(&lexeme) || (len == 1 && digraph_at(b, i)) {
                error = Some(FrontendErrorKind::Unsupported(format!("digraph `{}`", {
                    let end = (i + 2).min(b.len());
                    String::from_utf8_lossy(&b[i..end])
                })));
            }
            i += len;
            kind = TokenKind::Punctuator;
        } else if c.is_ascii_graphic() {
            i += 1;
            kind = TokenKind::Other;
        } else {
            error = Some(FrontendErrorKind::InvalidByte(c));
            i += 1;
            // keep multi-byte sequences together so the lexeme stays valid text
            while i < b.len() && (b[i] & 0xC0) == 0x80 {
                i += 1;
            }
            kind = TokenKind::Other;
        }

        let lexeme = String::from_utf8_lossy(&b[start..i]).into_owned();
        let mut tok = PPToken::new(kind, lexeme, loc_at(start));
        tok.line_start = line_start;
        tok.leading_space = leading_space;
        out.push(RawToken { tok, error });
        line_start = false;
        leading_space = false;
    }
    Ok(out)
}

fn is_ident_start(c: u8) -> bool {
    c.is_ascii_alphabetic() || c == b'_'
}

fn is_ident_continue(c: u8) -> bool {
    c.is_ascii_alphanumeric() || c == b'_'
}

fn trigraph_at(b: &[u8], i: usize) -> Option<String> {
    if b.get(i) == Some(&b'?') && b.get(i + 1) == Some(&b'?') {
        let third = *b.get(i + 2)?;
        if b"=/'()!<>-".contains(&third) {
            return Some(format!("??{}", third as char));
        }
    }
    None
}

fn digraph_at(b: &[u8], i: usize) -> bool {
    let Some(two) = b.get(i..i + 2) else {
        return false;
    };
    DIGRAPHS.iter().any(|d| d.as_bytes() == two)
}

fn punct_len(b: &[u8], i: usize) -> Option<usize> {
    let rest = &b[i..];
    if PUNCT3.iter().any(|p| rest.starts_with(p.as_bytes())) {
        return Some(3);
    }
    if PUNCT2.iter().any(|p| rest.starts_with(p.as_bytes())) {
        return Some(2);
    }
    if PUNCT1.contains(&rest[0]) {
        return Some(1);
    }
    None
}
