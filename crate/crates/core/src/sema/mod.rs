//! Name resolution, typing under a fixed integer model, constant
//! evaluation and cross-unit symbol unification.

mod consteval;
mod headers;
mod program;
mod resolve;
mod symbols;
mod types;

use std::collections::HashMap;
use std::fmt;

use serde::Serialize;
use thiserror::Error;

use crate::parser::{Expr, FunctionDef, NodeId, Quals, Span, TranslationUnit};

pub use consteval::{const_eval, ConstEnv, ConstValue};
pub use headers::builtin_headers;
pub use program::{unify, GlobalId, GlobalSymbol, Program};
pub use resolve::resolve;
pub use symbols::{Linkage, Scope, ScopeId, Storage, Symbol, SymbolId, SymbolKind, SymbolTable};
pub use types::{int_range, wrap_to, IntegerModel, ModelError, RecordId, TypeDesc};

/// The C behavior classes a finding can be tagged with.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum BehaviorClass {
    ImplementationDefined,
    Undefined,
    Unspecified,
    LocaleSpecific,
}

impl fmt::Display for BehaviorClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            BehaviorClass::ImplementationDefined => "implementation-defined",
            BehaviorClass::Undefined => "undefined",
            BehaviorClass::Unspecified => "unspecified",
            BehaviorClass::LocaleSpecific => "locale-specific",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SemaErrorKind {
    #[error("use of undeclared identifier `{0}`")]
    Undeclared(String),
    #[error("conflicting redeclaration of `{0}`")]
    ConflictingRedeclaration(String),
    #[error("redefinition of `{0}`")]
    Redefinition(String),
    #[error("called object is not a function")]
    CallOfNonFunction,
    #[error("subscripted value is not an array or pointer")]
    SubscriptOfNonPointer,
    #[error("no member named `{0}`")]
    UnknownMember(String),
    #[error("incomplete type `{0}`")]
    IncompleteType(String),
    #[error("invalid operands: {0}")]
    InvalidOperands(String),
    #[error("expected {expected} argument(s), got {got}")]
    Arity { expected: usize, got: usize },
    #[error("not an integer constant expression: {0}")]
    NotConstant(String),
    #[error("unsupported construct: {0}")]
    Unsupported(String),
    #[error("{0}")]
    Invalid(String),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SemaError {
    pub kind: SemaErrorKind,
    pub span: Span,
}

impl SemaError {
    pub fn new(kind: SemaErrorKind, span: &Span) -> Self {
        SemaError {
            kind,
            span: span.clone(),
        }
    }
}

impl fmt::Display for SemaError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.kind.fmt(f)
    }
}

impl std::error::Error for SemaError {}

#[derive(Debug, Clone)]
pub struct Member {
    pub name: String,
    pub ty: TypeDesc,
    pub quals: Quals,
}

#[derive(Debug, Clone)]
pub struct RecordInfo {
    pub id: RecordId,
    pub tag: Option<String>,
    pub union: bool,
    /// `None` while the type is incomplete.
    pub members: Option<Vec<Member>>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum ConversionKind {
    Explicit,
    Assignment,
    Initialization,
    Argument,
    Return,
}

/// A conversion of the value of `expr` from one type to another.
#[derive(Debug, Clone)]
pub struct Conversion {
    pub expr: NodeId,
    pub span: Span,
    pub from: TypeDesc,
    pub to: TypeDesc,
    pub kind: ConversionKind,
    /// The converted operand is a null pointer constant.
    pub null_constant: bool,
}

#[derive(Debug, Clone)]
pub struct FunctionInfo {
    /// Index of the definition in `TranslationUnit::items`.
    pub item: usize,
    pub symbol: SymbolId,
    pub params: Vec<SymbolId>,
    /// Block-scope objects declared in the body, in declaration order.
    pub locals: Vec<SymbolId>,
}

/// A resolved and typed translation unit.
#[derive(Debug, Clone)]
pub struct TypedTu {
    pub ast: TranslationUnit,
    pub model: IntegerModel,
    pub symbols: SymbolTable,
    pub records: Vec<RecordInfo>,
    /// Type of every expression before array and function decay, and of
    /// every type name.
    pub types: HashMap<NodeId, TypeDesc>,
    /// Qualifiers of the designated object for lvalue expressions.
    pub lvalue_quals: HashMap<NodeId, Quals>,
    /// Identifier expressions to the symbol they denote.
    pub bindings: HashMap<NodeId, SymbolId>,
    /// Declarators to the symbol they declare.
    pub decl_symbols: HashMap<NodeId, SymbolId>,
    /// Sizes computed for `sizeof` nodes.
    pub sizes: HashMap<NodeId, u64>,
    pub conversions: Vec<Conversion>,
    pub behaviors: HashMap<NodeId, BehaviorClass>,
    pub functions: Vec<FunctionInfo>,
}

impl TypedTu {
    pub fn type_of(&self, e: &Expr) -> &TypeDesc {
        self.types
            .get(&e.id)
            .unwrap_or_else(|| panic!("untyped expression {:?}", e.id))
    }

    /// Type of the value of `e` after array-to-pointer and
    /// function-to-pointer conversion.
    pub fn value_type(&self, e: &Expr) -> TypeDesc {
        decay(self.type_of(e), self.lvalue_quals.get(&e.id).copied())
    }

    pub fn symbol_of(&self, e: &Expr) -> Option<&Symbol> {
        self.bindings.get(&e.id).map(|s| self.symbols.get(*s))
    }

    pub fn symbol(&self, id: SymbolId) -> &Symbol {
        self.symbols.get(id)
    }

    pub fn function_def(&self, f: &FunctionInfo) -> &FunctionDef {
        match &self.ast.items[f.item] {
            crate::parser::ExternalDecl::Function(d) => d,
            _ => unreachable!("function info points at a definition"),
        }
    }

    pub fn record(&self, id: RecordId) -> &RecordInfo {
        &self.records[id.0 as usize]
    }

    /// The expression designates a volatile-qualified object.
    pub fn is_volatile_lvalue(&self, e: &Expr) -> bool {
        self.lvalue_quals.get(&e.id).is_some_and(|q| q.is_volatile)
    }

    pub fn const_eval(&self, e: &Expr) -> ConstValue {
        const_eval(self, e)
    }

    /// Integer constant expression with value 0, or such an expression cast
    /// to `void *`.
    pub fn is_null_pointer_constant(&self, e: &Expr) -> bool {
        is_null_constant(self, e)
    }
}

pub(crate) fn decay(t: &TypeDesc, quals: Option<Quals>) -> TypeDesc {
    match t {
        TypeDesc::Array { elem, .. } => TypeDesc::pointer_to((**elem).clone(), quals.unwrap_or_default()),
        TypeDesc::Function { .. } => TypeDesc::pointer_to(t.clone(), Quals::NONE),
        _ => t.clone(),
    }
}

pub(crate) fn is_null_constant(env: &dyn ConstEnv, e: &Expr) -> bool {
    use crate::parser::ExprKind;
    let Some(t) = env.type_of(e.id) else { return false };
    if t.is_integer() {
        return matches!(const_eval(env, e), ConstValue::Int { value: 0, .. });
    }
    if let ExprKind::Cast(_, inner) = &e.kind {
        if let Some(TypeDesc::Pointer { pointee, .. }) = env.type_of(e.id) {
            return **pointee == TypeDesc::Void && is_null_constant(env, inner);
        }
    }
    false
}
