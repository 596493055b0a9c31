//! Abstract syntax tree for the supported C99 subset.

use crate::frontend::ExpansionFrame;
use crate::source::{FileId, Loc};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct NodeId(pub u32);

/// Source range of a node. For macro-expanded code the locations are the
/// invocation site and `expansion` records the chain.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Span {
    pub start: Loc,
    pub end: Loc,
    pub expansion: Vec<ExpansionFrame>,
}

impl Span {
    pub fn point(loc: Loc) -> Self {
        Span {
            start: loc,
            end: loc,
            expansion: Vec::new(),
        }
    }

    pub fn to(&self, other: &Span) -> Span {
        Span {
            start: self.start,
            end: other.end.max(self.start),
            expansion: if self.expansion.is_empty() {
                other.expansion.clone()
            } else {
                self.expansion.clone()
            },
        }
    }

    pub fn file(&self) -> FileId {
        self.start.file
    }
}

#[derive(Debug, Clone)]
pub struct TranslationUnit {
    pub items: Vec<ExternalDecl>,
}

#[derive(Debug, Clone)]
#[allow(clippy::large_enum_variant)]
pub enum ExternalDecl {
    Function(FunctionDef),
    Declaration(Declaration),
}

#[derive(Debug, Clone)]
pub struct FunctionDef {
    pub id: NodeId,
    pub specs: DeclSpecs,
    pub declarator: Declarator,
    pub body: Stmt,
    pub span: Span,
}

impl FunctionDef {
    pub fn name(&self) -> &str {
        self.declarator.name.as_deref().unwrap_or("")
    }

    pub fn params(&self) -> &[ParamDecl] {
        match self.declarator.derived.first() {
            Some(Derived::Function { params, .. }) => params,
            _ => &[],
        }
    }
}

#[derive(Debug, Clone)]
pub struct Declaration {
    pub id: NodeId,
    pub specs: DeclSpecs,
    pub declarators: Vec<InitDeclarator>,
    pub span: Span,
}

#[derive(Debug, Clone)]
pub struct InitDeclarator {
    pub id: NodeId,
    pub declarator: Declarator,
    pub init: Option<Initializer>,
}

#[derive(Debug, Clone)]
pub enum Initializer {
    Expr(Expr),
    List {
        id: NodeId,
        items: Vec<Initializer>,
        span: Span,
    },
}

impl Initializer {
    pub fn span(&self) -> &Span {
        match self {
            Initializer::Expr(e) => &e.span,
            Initializer::List { span, .. } => span,
        }
    }

    /// All expressions in the initializer, in source order.
    pub fn exprs(&self) -> Vec<&Expr> {
        let mut out = Vec::new();
        fn go<'a>(i: &'a Initializer, out: &mut Vec<&'a Expr>) {
            match i {
                Initializer::Expr(e) => out.push(e),
                Initializer::List { items, .. } => items.iter().for_each(|i| go(i, out)),
            }
        }
        go(self, &mut out);
        out
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StorageClass {
    Typedef,
    Extern,
    Static,
    Auto,
    Register,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Quals {
    pub is_const: bool,
    pub is_volatile: bool,
}

impl Quals {
    pub const NONE: Quals = Quals {
        is_const: false,
        is_volatile: false,
    };

    pub fn union(self, other: Quals) -> Quals {
        Quals {
            is_const: self.is_const || other.is_const,
            is_volatile: self.is_volatile || other.is_volatile,
        }
    }
}

#[derive(Debug, Clone)]
pub struct DeclSpecs {
    pub storage: Option<StorageClass>,
    pub quals: Quals,
    pub base: BaseType,
    pub inline: bool,
    pub span: Span,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum BaseType {
    Void,
    Bool,
    /// `None` is plain `char`.
    Char(Option<bool>),
    Short {
        signed: bool,
    },
    Int {
        signed: bool,
    },
    Long {
        signed: bool,
    },
    LongLong {
        signed: bool,
    },
    Float,
    Double,
    LongDouble,
    Record(RecordSpec),
    Enum(EnumSpec),
    TypedefName(String),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RecordSpec {
    pub id: NodeId,
    pub is_union: bool,
    pub tag: Option<String>,
    pub members: Option<Vec<MemberDecl>>,
    pub span: Span,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MemberDecl {
    pub specs: Box<DeclSpecs>,
    pub declarators: Vec<Declarator>,
}

impl PartialEq for DeclSpecs {
    fn eq(&self, other: &Self) -> bool {
        self.storage == other.storage
            && self.quals == other.quals
            && self.base == other.base
            && self.inline == other.inline
    }
}
impl Eq for DeclSpecs {}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EnumSpec {
    pub id: NodeId,
    pub tag: Option<String>,
    pub enumerators: Option<Vec<Enumerator>>,
    pub span: Span,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Enumerator {
    pub id: NodeId,
    pub name: String,
    pub value: Option<Expr>,
    pub span: Span,
}

/// A declarator. `derived` is ordered from the identifier outwards: for
/// `int *a[3]` it is `[Array(3), Pointer]`, read "array of 3 pointers to int".
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Declarator {
    pub id: NodeId,
    pub name: Option<String>,
    pub derived: Vec<Derived>,
    pub span: Span,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Derived {
    Pointer(Quals),
    Array(Option<Box<Expr>>),
    Function {
        params: Vec<ParamDecl>,
        variadic: bool,
        prototype: bool,
    },
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ParamDecl {
    pub id: NodeId,
    pub specs: DeclSpecs,
    pub declarator: Declarator,
    pub span: Span,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TypeName {
    pub id: NodeId,
    pub specs: DeclSpecs,
    pub declarator: Declarator,
    pub span: Span,
}

#[derive(Debug, Clone)]
pub struct Stmt {
    pub id: NodeId,
    pub kind: StmtKind,
    pub span: Span,
}

#[derive(Debug, Clone)]
#[allow(clippy::large_enum_variant)]
pub enum StmtKind {
    Compound(Vec<BlockItem>),
    /// `None` is the null statement.
    Expr(Option<Expr>),
    If {
        cond: Expr,
        then: Box<Stmt>,
        otherwise: Option<Box<Stmt>>,
    },
    Switch {
        cond: Expr,
        body: Box<Stmt>,
    },
    While {
        cond: Expr,
        body: Box<Stmt>,
    },
    DoWhile {
        body: Box<Stmt>,
        cond: Expr,
    },
    For {
        init: Option<ForInit>,
        cond: Option<Expr>,
        step: Option<Expr>,
        body: Box<Stmt>,
    },
    Goto(String),
    Label {
        name: String,
        stmt: Box<Stmt>,
    },
    Case {
        value: Expr,
        stmt: Box<Stmt>,
    },
    Default(Box<Stmt>),
    Break,
    Continue,
    Return(Option<Expr>),
}

#[derive(Debug, Clone)]
pub enum ForInit {
    Expr(Expr),
    Decl(Declaration),
}

#[derive(Debug, Clone)]
#[allow(clippy::large_enum_variant)]
pub enum BlockItem {
    Decl(Declaration),
    Stmt(Stmt),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Expr {
    pub id: NodeId,
    pub kind: ExprKind,
    pub span: Span,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct IntLit {
    pub value: u64,
    pub unsigned: bool,
    /// 0 = no `l` suffix, 1 = `l`, 2 = `ll`.
    pub long: u8,
    pub decimal: bool,
    pub text: String,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ExprKind {
    Ident(String),
    IntConst(IntLit),
    FloatConst {
        text: String,
        is_float: bool,
    },
    CharConst {
        value: i64,
        wide: bool,
    },
    StringLit {
        bytes: Vec<u8>,
        wide: bool,
    },
    Unary(UnaryOp, Box<Expr>),
    Binary(BinaryOp, Box<Expr>, Box<Expr>),
    Assign(Box<Expr>, Box<Expr>),
    CompoundAssign(BinaryOp, Box<Expr>, Box<Expr>),
    IncDec(IncDecOp, Box<Expr>),
    Call(Box<Expr>, Vec<Expr>),
    Index(Box<Expr>, Box<Expr>),
    Member {
        base: Box<Expr>,
        field: String,
        arrow: bool,
    },
    Deref(Box<Expr>),
    AddrOf(Box<Expr>),
    Cast(Box<TypeName>, Box<Expr>),
    Conditional(Box<Expr>, Box<Expr>, Box<Expr>),
    Comma(Box<Expr>, Box<Expr>),
    SizeofExpr(Box<Expr>),
    SizeofType(Box<TypeName>),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum UnaryOp {
    Plus,
    Neg,
    BitNot,
    Not,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum BinaryOp {
    Mul,
    Div,
    Rem,
    Add,
    Sub,
    Shl,
    Shr,
    Lt,
    Gt,
    Le,
    Ge,
    Eq,
    Ne,
    BitAnd,
    BitXor,
    BitOr,
    LogAnd,
    LogOr,
}

impl BinaryOp {
    pub fn symbol(self) -> &'static str {
        use BinaryOp::*;
        match self {
            Mul => "*",
            Div => "/",
            Rem => "%",
            Add => "+",
            Sub => "-",
            Shl => "<<",
            Shr => ">>",
            Lt => "<",
            Gt => ">",
            Le => "<=",
            Ge => ">=",
            Eq => "==",
            Ne => "!=",
            BitAnd => "&",
            BitXor => "^",
            BitOr => "|",
            LogAnd => "&&",
            LogOr => "||",
        }
    }

    pub fn is_shift(self) -> bool {
        matches!(self, BinaryOp::Shl | BinaryOp::Shr)
    }

    pub fn is_comparison(self) -> bool {
        use BinaryOp::*;
        matches!(self, Lt | Gt | Le | Ge | Eq | Ne)
    }

    pub fn is_logical(self) -> bool {
        matches!(self, BinaryOp::LogAnd | BinaryOp::LogOr)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum IncDecOp {
    PreInc,
    PreDec,
    PostInc,
    PostDec,
}

impl IncDecOp {
    pub fn is_increment(self) -> bool {
        matches!(self, IncDecOp::PreInc | IncDecOp::PostInc)
    }

    pub fn is_prefix(self) -> bool {
        matches!(self, IncDecOp::PreInc | IncDecOp::PreDec)
    }
}

impl Expr {
    /// Direct subexpressions in evaluation-neutral source order. Operands of
    /// `sizeof` are included; callers that care about evaluation skip them.
    pub fn children(&self) -> Vec<&Expr> {
        use ExprKind::*;
        match &self.kind {
            Ident(_) | IntConst(_) | FloatConst { .. } | CharConst { .. } | StringLit { .. } => {
                vec![]
            }
            SizeofType(_) => vec![],
            Unary(_, e) | IncDec(_, e) | Deref(e) | AddrOf(e) | Cast(_, e) | SizeofExpr(e) => {
                vec![e]
            }
            Member { base, .. } => vec![base],
            Binary(_, a, b) | Assign(a, b) | CompoundAssign(_, a, b) | Index(a, b) | Comma(a, b) => {
                vec![a, b]
            }
            Conditional(a, b, c) => vec![a, b, c],
            Call(f, args) => {
                let mut v = vec![f.as_ref()];
                v.extend(args.iter());
                v
            }
        }
    }

    /// Pre-order walk over this expression and every subexpression,
    /// skipping `sizeof` operands (they are not evaluated).
    pub fn walk_evaluated<'a>(&'a self, f: &mut impl FnMut(&'a Expr)) {
        f(self);
        if matches!(self.kind, ExprKind::SizeofExpr(_)) {
            return;
        }
        for c in self.children() {
            c.walk_evaluated(f);
        }
    }

    /// Strips redundant grouping: the parser does not keep parentheses, so
    /// this is the identity, kept for call-site readability.
    pub fn ident_name(&self) -> Option<&str> {
        match &self.kind {
            ExprKind::Ident(n) => Some(n),
            _ => None,
        }
    }

    pub fn is_integer_literal(&self) -> bool {
        matches!(self.kind, ExprKind::IntConst(_) | ExprKind::CharConst { .. })
    }
}

impl Stmt {
    /// Direct sub-statements.
    pub fn sub_statements(&self) -> Vec<&Stmt> {
        match &self.kind {
            StmtKind::Compound(items) => items
                .iter()
                .filter_map(|i| match i {
                    BlockItem::Stmt(s) => Some(s),
                    BlockItem::Decl(_) => None,
                })
                .collect(),
            StmtKind::If { then, otherwise, .. } => {
                let mut v = vec![then.as_ref()];
                if let Some(o) = otherwise {
                    v.push(o);
                }
                v
            }
            StmtKind::Switch { body, .. }
            | StmtKind::While { body, .. }
            | StmtKind::DoWhile { body, .. }
            | StmtKind::For { body, .. } => vec![body],
            StmtKind::Label { stmt, .. } | StmtKind::Case { stmt, .. } | StmtKind::Default(stmt) => {
                vec![stmt]
            }
            _ => vec![],
        }
    }
}

/// Every full expression in a function body with the statement it belongs
/// to, in source order. Initializers of block-scope declarations included.
pub fn full_expressions(body: &Stmt) -> Vec<FullExpr<'_>> {
    let mut out = Vec::new();
    collect_full(body, &mut out);
    out
}

#[derive(Debug, Clone, Copy)]
pub enum FullExprRole {
    ExprStmt,
    Initializer,
    Condition,
    ForInit,
    ForStep,
    Return,
    CaseLabel,
}

#[derive(Debug, Clone, Copy)]
pub struct FullExpr<'a> {
    pub expr: &'a Expr,
    pub role: FullExprRole,
}

fn collect_decl<'a>(d: &'a Declaration, out: &mut Vec<FullExpr<'a>>) {
    for id in &d.declarators {
        if let Some(init) = &id.init {
            for e in init.exprs() {
                out.push(FullExpr {
                    expr: e,
                    role: FullExprRole::Initializer,
                });
            }
        }
    }
}

fn collect_full<'a>(s: &'a Stmt, out: &mut Vec<FullExpr<'a>>) {
    use FullExprRole as R;
    let mut push = |e: &'a Expr, role| out.push(FullExpr { expr: e, role });
    match &s.kind {
        StmtKind::Compound(items) => {
            for item in items {
                match item {
                    BlockItem::Decl(d) => collect_decl(d, out),
                    BlockItem::Stmt(st) => collect_full(st, out),
                }
            }
            return;
        }
        StmtKind::Expr(Some(e)) => push(e, R::ExprStmt),
        StmtKind::If { cond, .. } | StmtKind::Switch { cond, .. } | StmtKind::While { cond, .. } => {
            push(cond, R::Condition)
        }
        StmtKind::DoWhile { cond, .. } => {
            // condition evaluated after the body, keep source order
            if let StmtKind::DoWhile { body, .. } = &s.kind {
                collect_full(body, out);
            }
            out.push(FullExpr {
                expr: cond,
                role: R::Condition,
            });
            return;
        }
        StmtKind::For { init, cond, step, .. } => {
            match init {
                Some(ForInit::Expr(e)) => push(e, R::ForInit),
                Some(ForInit::Decl(d)) => collect_decl(d, out),
                None => {}
            }
            if let Some(c) = cond {
                out.push(FullExpr {
                    expr: c,
                    role: R::Condition,
                });
            }
            if let Some(st) = step {
                out.push(FullExpr {
                    expr: st,
                    role: R::ForStep,
                });
            }
        }
        StmtKind::Return(Some(e)) => push(e, R::Return),
        StmtKind::Case { value, .. } => push(value, R::CaseLabel),
        _ => {}
    }
    for sub in s.sub_statements() {
        collect_full(sub, out);
    }
}
