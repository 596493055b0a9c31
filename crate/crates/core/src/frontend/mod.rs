//! Lexing and a source-tracking C preprocessor.
//!
//! Every token leaving the preprocessor keeps its physical origin and the
//! chain of macro expansions that produced it, so later stages can report a
//! finding where a reader can actually see it.

mod condition;
mod lexer;
mod preprocess;
mod token;

use std::fmt;

use thiserror::Error;

use crate::source::{FileId, Loc};

pub use condition::evaluate_pp_condition;
pub use lexer::lex;
pub use preprocess::{
    command_line_macros, preprocess, MacroTable, MapEntry, Pragma, PreprocessOptions, PreprocessOutput, SourceMap,
    MAX_INCLUDE_DEPTH,
};
pub use token::{render, ExpansionFrame, PPToken, TokenKind};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum FrontendErrorKind {
    #[error("unterminated string literal")]
    UnterminatedString,
    #[error("unterminated character constant")]
    UnterminatedChar,
    #[error("empty character constant")]
    EmptyCharConst,
    #[error("unterminated block comment")]
    UnterminatedComment,
    #[error("invalid byte 0x{0:02x} in source")]
    InvalidByte(u8),
    #[error("unsupported construct: {0}")]
    Unsupported(String),
    #[error("include file not found: {0}")]
    MissingInclude(String),
    #[error("malformed #include directive")]
    MalformedInclude,
    #[error("#include nested too deeply (limit {MAX_INCLUDE_DEPTH})")]
    IncludeDepthExceeded,
    #[error("unterminated conditional directive")]
    UnterminatedConditional,
    #[error("#{0} without matching #if")]
    UnmatchedConditional(String),
    #[error("#{0} after #else")]
    DirectiveAfterElse(String),
    #[error("macro `{0}` redefined with a different body")]
    MacroRedefinition(String),
    #[error("malformed macro definition: {0}")]
    MalformedDefine(String),
    #[error("invalid preprocessing directive #{0}")]
    UnknownDirective(String),
    #[error("#error {0}")]
    ErrorDirective(String),
    #[error("macro `{name}` expects {expected} argument(s), got {got}")]
    MacroArity { name: String, expected: usize, got: usize },
    #[error("unterminated invocation of macro `{0}`")]
    UnterminatedInvocation(String),
    #[error("division by zero in preprocessor expression")]
    DivisionByZero,
    #[error("invalid preprocessor expression: {0}")]
    InvalidCondition(String),
}

/// A frontend failure. It aborts the translation unit being processed.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FrontendError {
    pub kind: FrontendErrorKind,
    pub loc: Option<Loc>,
}

impl FrontendError {
    pub fn at(kind: FrontendErrorKind, loc: Loc) -> Self {
        FrontendError { kind, loc: Some(loc) }
    }

    pub fn bare(kind: FrontendErrorKind) -> Self {
        FrontendError { kind, loc: None }
    }
}

impl std::error::Error for FrontendError {}

impl fmt::Display for FrontendError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.kind.fmt(f)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MacroKind {
    ObjectLike,
    FunctionLike,
}

#[derive(Debug, Clone)]
pub struct MacroDef {
    pub name: String,
    pub kind: MacroKind,
    pub params: Vec<String>,
    pub body: Vec<PPToken>,
    pub def_site: (FileId, u32),
}

impl MacroDef {
    /// Two definitions are the same if kind, parameters, spelling and
    /// whitespace separation of the body all match.
    pub fn same_definition(&self, other: &MacroDef) -> bool {
        self.kind == other.kind
            && self.params == other.params
            && self.body.len() == other.body.len()
            && self
                .body
                .iter()
                .zip(&other.body)
                .enumerate()
                .all(|(i, (a, b))| a.lexeme == b.lexeme && (i == 0 || a.leading_space == b.leading_space))
    }
}
