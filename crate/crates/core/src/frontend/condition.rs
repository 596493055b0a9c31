//! `#if` controlling expressions, evaluated in 64-bit signed arithmetic.

use super::preprocess::{resolve_defined, Expander, MacroTable, Tok};
use super::token::{PPToken, TokenKind};
use super::{FrontendError, FrontendErrorKind as K};

/// Resolves `defined`, expands macros, replaces remaining identifiers with 0
/// and evaluates.
pub fn evaluate_pp_condition(tokens: &[PPToken], macros: &MacroTable) -> Result<i64, FrontendError> {
    let resolved = resolve_defined(tokens, |n| macros.contains_key(n))?;
    let expander = Expander { macros, sources: None };
    let expanded: Vec<PPToken> = expander
        .expand(resolved.into_iter().map(Tok::plain).collect())?
        .into_iter()
        .map(|t| t.t)
        .collect();
    eval_tokens(&expanded)
}

pub(crate) fn eval_tokens(tokens: &[PPToken]) -> Result<i64, FrontendError> {
    let mut p = CondParser { toks: tokens, pos: 0 };
    let v = p.conditional()?;
    if let Some(t) = p.peek() {
        return Err(residue(t));
    }
    Ok(v)
}

fn residue(t: &PPToken) -> FrontendError {
    FrontendError::at(K::InvalidCondition(format!("unexpected `{}`", t.lexeme)), t.origin)
}

struct CondParser<'a> {
    toks: &'a [PPToken],
    pos: usize,
}

const BINARY_LEVELS: &[&[&str]] = &[
    &["||"],
    &["&&"],
    &["|"],
    &["^"],
    &["&"],
    &["==", "!="],
    &["<", ">", "<=", ">="],
    &["<<", ">>"],
    &["+", "-"],
    &["*", "/", "%"],
];

impl CondParser<'_> {
    fn peek(&self) -> Option<&PPToken> {
        self.toks.get(self.pos)
    }

    fn eat(&mut self, p: &str) -> bool {
        if self.peek().is_some_and(|t| t.is_punct(p)) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn eof_error(&self) -> FrontendError {
        let loc = self.toks.last().map(|t| t.origin);
        FrontendError {
            kind: K::InvalidCondition("unexpected end of expression".into()),
            loc,
        }
    }

    fn conditional(&mut self) -> Result<i64, FrontendError> {
        let c = self.binary(0)?;
        if self.eat("?") {
            let a = self.conditional()?;
            if !self.eat(":") {
                return Err(match self.peek() {
                    Some(t) => residue(t),
                    None => self.eof_error(),
                });
            }
            let b = self.conditional()?;
            return Ok(if c != 0 { a } else { b });
        }
        Ok(c)
    }

    fn binary(&mut self, level: usize) -> Result<i64, FrontendError> {
        if level == BINARY_LEVELS.len() {
            return self.unary();
        }
        let mut lhs = self.binary(level + 1)?;
        loop {
            let Some(op) = self
                .peek()
                .filter(|t| t.kind == TokenKind::Punctuator)
                .and_then(|t| BINARY_LEVELS[level].iter().find(|o| **o == t.lexeme))
                .copied()
            else {
                return Ok(lhs);
            };
            let op_tok = self.pos;
            self.pos += 1;
            let rhs = self.binary(level + 1)?;
            lhs = match op {
                "||" => ((lhs != 0) || (rhs != 0)) as i64,
                "&&" => ((lhs != 0) && (rhs != 0)) as i64,
                "|" => lhs | rhs,
                "^" => lhs ^ rhs,
                "&" => lhs & rhs,
                "==" => (lhs == rhs) as i64,
                "!=" => (lhs != rhs) as i64,
                "<" => (lhs < rhs) as i64,
                ">" => (lhs > rhs) as i64,
                "<=" => (lhs <= rhs) as i64,
                ">=" => (lhs >= rhs) as i64,
                "<<" => lhs.wrapping_shl((rhs & 63) as u32),
                ">>" => lhs.wrapping_shr((rhs & 63) as u32),
                "+" => lhs.wrapping_add(rhs),
                "-" => lhs.wrapping_sub(rhs),
                "*" => lhs.wrapping_mul(rhs),
                "/" | "%" => {
                    if rhs == 0 {
                        return Err(FrontendError::at(K::DivisionByZero, self.toks[op_tok].origin));
                    }
                    if op == "/" {
                        lhs.wrapping_div(rhs)
                    } else {
                        lhs.wrapping_rem(rhs)
                    }
                }
                _ => unreachable!("operator table"),
            };
        }
    }

    fn unary(&mut self) -> Result<i64, FrontendError> {
        let Some(t) = self.peek().cloned() else {
            return Err(self.eof_error());
        };
        self.pos += 1;
        match t.kind {
            TokenKind::Punctuator => match t.lexeme.as_str() {
                "+" => self.unary(),
                "-" => Ok(self.unary()?.wrapping_neg()),
                "~" => Ok(!self.unary()?),
                "!" => Ok((self.unary()? == 0) as i64),
                "(" => {
                    let v = self.conditional()?;
                    if !self.eat(")") {
                        return Err(match self.peek() {
                            Some(t) => residue(t),
                            None => self.eof_error(),
                        });
                    }
                    Ok(v)
                }
                _ => Err(residue(&t)),
            },
            TokenKind::Identifier => Ok(0),
            TokenKind::PpNumber => parse_pp_integer(&t.lexeme).ok_or_else(|| {
                FrontendError::at(
                    K::InvalidCondition(format!("`{}` is not an integer constant", t.lexeme)),
                    t.origin,
                )
            }),
            TokenKind::CharConst => char_value(&t.lexeme).ok_or_else(|| residue(&t)),
            _ => Err(residue(&t)),
        }
    }
}

/// Integer value of a pp-number, ignoring `u`/`l` suffixes.
pub(crate) fn parse_pp_integer(text: &str) -> Option<i64> {
    let digits = text.trim_end_matches(['u', 'U', 'l', 'L']);
    let (radix, body) = if let Some(h) = digits.strip_prefix("0x").or_else(|| digits.strip_prefix("0X")) {
        (16, h)
    } else if digits.len() > 1 && digits.starts_with('0') {
        (8, &digits[1..])
    } else {
        (10, digits)
    };
    if body.is_empty() {
        return None;
    }
    u64::from_str_radix(body, radix).ok().map(|v| v as i64)
}

/// Value of a character constant under the signed 8-bit `char` model.
pub(crate) fn char_value(lexeme: &str) -> Option<i64> {
    let wide = lexeme.starts_with('L');
    let inner = lexeme.trim_start_matches('L').strip_prefix('\'')?.strip_suffix('\'')?;
    let bytes = crate::parser::decode_escapes(inner)?;
    if bytes.len() != 1 {
        return None;
    }
    let b = bytes[0];
    Some(if wide { b as i64 } else { b as i8 as i64 })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::source::{FileId, SourceFile};

    fn eval(src: &str) -> Result<i64, FrontendError> {
        let toks = crate::frontend::lex(&SourceFile::new(FileId(0), "c", src)).unwrap();
        evaluate_pp_condition(&toks, &MacroTable::new())
    }

    #[test]
    fn masked_shift_count() {
        assert_eq!(eval("32 & 0x1F").unwrap(), 0);
    }

    #[test]
    fn defined_of_undefined_is_zero() {
        assert_eq!(eval("defined(X)").unwrap(), 0);
        assert_eq!(eval("defined X || 1").unwrap(), 1);
    }

    #[test]
    fn precedence() {
        assert_eq!(eval("(1<<4) + 3*2").unwrap(), 22);
        assert_eq!(eval("1 + 2 * 3 == 7 && !0").unwrap(), 1);
        assert_eq!(eval("-1 < 0 ? 10 : 20").unwrap(), 10);
        assert_eq!(eval("~0").unwrap(), -1);
        assert_eq!(eval("010 + 0x10 + 'A'").unwrap(), 8 + 16 + 65);
    }

    #[test]
    fn unknown_identifiers_are_zero() {
        assert_eq!(eval("FOO + 1").unwrap(), 1);
    }

    #[test]
    fn errors() {
        assert_eq!(eval("1 / 0").unwrap_err().kind, K::DivisionByZero);
        assert_eq!(eval("4 % (2 - 2)").unwrap_err().kind, K::DivisionByZero);
        assert!(matches!(eval("1 = 2").unwrap_err().kind, K::InvalidCondition(_)));
        assert!(matches!(eval("\"s\"").unwrap_err().kind, K::InvalidCondition(_)));
        assert!(matches!(eval("1.5").unwrap_err().kind, K::InvalidCondition(_)));
        assert!(matches!(eval("(1").unwrap_err().kind, K::InvalidCondition(_)));
    }

    #[test]
    fn macros_expand_in_conditions() {
        let toks = crate::frontend::lex(&SourceFile::new(FileId(0), "c", "WIDTH > 16")).unwrap();
        let mut table = MacroTable::new();
        let body = crate::frontend::lex(&SourceFile::new(FileId(1), "d", "32")).unwrap();
        table.insert(
            "WIDTH".into(),
            crate::frontend::MacroDef {
                name: "WIDTH".into(),
                kind: crate::frontend::MacroKind::ObjectLike,
                params: vec![],
                body,
                def_site: (FileId(1), 1),
            },
        );
        assert_eq!(evaluate_pp_condition(&toks, &table).unwrap(), 1);
    }
}
