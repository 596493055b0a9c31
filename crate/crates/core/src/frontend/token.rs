use std::fmt;

use serde::Serialize;

use crate::source::Loc;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum TokenKind {
    Identifier,
    PpNumber,
    CharConst,
    StringLiteral,
    Punctuator,
    Other,
}

impl fmt::Display for TokenKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            TokenKind::Identifier => "identifier",
            TokenKind::PpNumber => "pp-number",
            TokenKind::CharConst => "char-const",
            TokenKind::StringLiteral => "string-literal",
            TokenKind::Punctuator => "punctuator",
            TokenKind::Other => "other",
        })
    }
}

/// One step of macro expansion: the macro that was expanded and where its
/// name appeared.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct ExpansionFrame {
    pub macro_name: String,
    pub site: Loc,
}

/// A preprocessing token.
///
/// `origin` is always a physical position. For macro-produced tokens,
/// `expansion` lists the expansions that produced the token, outermost first;
/// the first frame's site is a location the user can see in the
/// unpreprocessed source.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PPToken {
    pub kind: TokenKind,
    pub lexeme: String,
    pub origin: Loc,
    pub expansion: Vec<ExpansionFrame>,
    pub leading_space: bool,
    pub line_start: bool,
}

impl PPToken {
    pub fn new(kind: TokenKind, lexeme: impl Into<String>, origin: Loc) -> Self {
        PPToken {
            kind,
            lexeme: lexeme.into(),
            origin,
            expansion: Vec::new(),
            leading_space: false,
            line_start: false,
        }
    }

    pub fn is_punct(&self, p: &str) -> bool {
        self.kind == TokenKind::Punctuator && self.lexeme == p
    }

    pub fn is_ident(&self, name: &str) -> bool {
        self.kind == TokenKind::Identifier && self.lexeme == name
    }

    pub fn is_macro_produced(&self) -> bool {
        !self.expansion.is_empty()
    }

    /// Where a reader should look for this token: the outermost invocation
    /// site for macro-produced tokens, the origin otherwise.
    pub fn visible_loc(&self) -> Loc {
        self.expansion.first().map_or(self.origin, |f| f.site)
    }
}

/// Renders tokens back to text, one space between tokens that were separated
/// by whitespace and a newline before tokens that started a line.
pub fn render(tokens: &[PPToken]) -> String {
    let mut out = String::new();
    for (i, t) in tokens.iter().enumerate() {
        if i > 0 {
            if t.line_start {
                out.push('\n');
            } else if t.leading_space {
                out.push(' ');
            }
        }
        out.push_str(&t.lexeme);
    }
    out
}
