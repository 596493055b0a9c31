use std::collections::HashMap;

use super::ast::*;
use super::{decode_escapes, ParseError, ParseErrorKind};
use crate::frontend::{PPToken, TokenKind};

/// Parses a preprocessed translation unit.
pub fn parse(tokens: &[PPToken]) -> Result<TranslationUnit, ParseError> {
    let mut p = Parser {
        toks: tokens,
        pos: 0,
        next_id: 0,
        scopes: vec![HashMap::new()],
    };
    let mut items = Vec::new();
    while p.pos < p.toks.len() {
        items.push(p.external_decl()?);
    }
    Ok(TranslationUnit { items })
}

const KEYWORDS: &[&str] = &[
    "auto",
    "break",
    "case",
    "char",
    "const",
    "continue",
    "default",
    "do",
    "double",
    "else",
    "enum",
    "extern",
    "float",
    "for",
    "goto",
    "if",
    "inline",
    "int",
    "long",
    "register",
    "restrict",
    "return",
    "short",
    "signed",
    "sizeof",
    "static",
    "struct",
    "switch",
    "typedef",
    "union",
    "unsigned",
    "void",
    "volatile",
    "while",
    "_Bool",
    "_Complex",
    "_Imaginary",
];

const TYPE_WORDS: &[&str] = &[
    "void",
    "char",
    "short",
    "int",
    "long",
    "float",
    "double",
    "signed",
    "unsigned",
    "_Bool",
    "_Complex",
    "_Imaginary",
    "struct",
    "union",
    "enum",
    "const",
    "volatile",
    "restrict",
];

const STORAGE_WORDS: &[&str] = &["typedef", "extern", "static", "auto", "register", "inline"];

const VENDOR_WORDS: &[&str] = &[
    "asm",
    "__asm",
    "__asm__",
    "__attribute__",
    "__extension__",
    "__typeof__",
];

const BINARY_LEVELS: &[&[(&str, BinaryOp)]] = &[
    &[("||", BinaryOp::LogOr)],
    &[("&&", BinaryOp::LogAnd)],
    &[("|", BinaryOp::BitOr)],
    &[("^", BinaryOp::BitXor)],
    &[("&", BinaryOp::BitAnd)],
    &[("==", BinaryOp::Eq), ("!=", BinaryOp::Ne)],
    &[
        ("<", BinaryOp::Lt),
        (">", BinaryOp::Gt),
        ("<=", BinaryOp::Le),
        (">=", BinaryOp::Ge),
    ],
    &[("<<", BinaryOp::Shl), (">>", BinaryOp::Shr)],
    &[("+", BinaryOp::Add), ("-", BinaryOp::Sub)],
    &[("*", BinaryOp::Mul), ("/", BinaryOp::Div), ("%", BinaryOp::Rem)],
];

const ASSIGN_OPS: &[(&str, Option<BinaryOp>)] = &[
    ("=", None),
    ("*=", Some(BinaryOp::Mul)),
    ("/=", Some(BinaryOp::Div)),
    ("%=", Some(BinaryOp::Rem)),
    ("+=", Some(BinaryOp::Add)),
    ("-=", Some(BinaryOp::Sub)),
    ("<<=", Some(BinaryOp::Shl)),
    (">>=", Some(BinaryOp::Shr)),
    ("&=", Some(BinaryOp::BitAnd)),
    ("^=", Some(BinaryOp::BitXor)),
    ("|=", Some(BinaryOp::BitOr)),
];

fn is_keyword(s: &str) -> bool {
    KEYWORDS.contains(&s)
}

#[derive(Clone, Copy, PartialEq, Eq)]
enum Mode {
    Concrete,
    Abstract,
    Either,
}

type PResult<T> = Result<T, ParseError>;

struct Parser<'a> {
    toks: &'a [PPToken],
    pos: usize,
    next_id: u32,
    /// Ordinary-identifier scopes; the flag is true for typedef names.
    scopes: Vec<HashMap<String, bool>>,
}

impl<'a> Parser<'a> {
    fn id(&mut self) -> NodeId {
        self.next_id += 1;
        NodeId(self.next_id)
    }

    fn peek(&self) -> Option<&'a PPToken> {
        self.toks.get(self.pos)
    }

    fn peek_at(&self, n: usize) -> Option<&'a PPToken> {
        self.toks.get(self.pos + n)
    }

    fn at_punct(&self, p: &str) -> bool {
        self.peek().is_some_and(|t| t.is_punct(p))
    }

    fn at_kw(&self, k: &str) -> bool {
        self.peek().is_some_and(|t| t.is_ident(k))
    }

    fn eat_punct(&mut self, p: &str) -> bool {
        let hit = self.at_punct(p);
        if hit {
            self.pos += 1;
        }
        hit
    }

    fn eat_kw(&mut self, k: &str) -> bool {
        let hit = self.at_kw(k);
        if hit {
            self.pos += 1;
        }
        hit
    }

    fn nearest(&self) -> Option<&'a PPToken> {
        self.peek().or_else(|| self.toks.last())
    }

    fn syntax(&self, expected: &str) -> ParseError {
        let found = match self.peek() {
            Some(t) => format!("`{}`", t.lexeme),
            None => "end of input".to_string(),
        };
        ParseError::near(
            ParseErrorKind::Syntax {
                expected: expected.to_string(),
                found,
            },
            self.nearest(),
        )
    }

    fn unsupported(&self, what: &str) -> ParseError {
        ParseError::near(ParseErrorKind::Unsupported(what.to_string()), self.nearest())
    }

    fn expect_punct(&mut self, p: &str) -> PResult<()> {
        if self.eat_punct(p) {
            Ok(())
        } else {
            Err(self.syntax(&format!("`{p}`")))
        }
    }

    fn span_from(&self, start: usize) -> Span {
        let first = &self.toks[start.min(self.toks.len() - 1)];
        let last = &self.toks[self.pos.saturating_sub(1).max(start).min(self.toks.len() - 1)];
        let s = Span::point(first.visible_loc());
        let mut e = Span::point(last.visible_loc());
        e.expansion = last.expansion.clone();
        let mut span = s.to(&e);
        if !first.expansion.is_empty() {
            span.expansion = first.expansion.clone();
        }
        span
    }

    fn ident_name(&self) -> Option<&'a str> {
        self.peek()
            .filter(|t| t.kind == TokenKind::Identifier && !is_keyword(&t.lexeme))
            .map(|t| t.lexeme.as_str())
    }

    fn push_scope(&mut self) {
        self.scopes.push(HashMap::new());
    }

    fn pop_scope(&mut self) {
        self.scopes.pop();
    }

    fn declare(&mut self, name: &str, is_typedef: bool) {
        if let Some(s) = self.scopes.last_mut() {
            s.insert(name.to_string(), is_typedef);
        }
    }

    fn is_typedef_name(&self, name: &str) -> bool {
        self.scopes
            .iter()
            .rev()
            .find_map(|s| s.get(name))
            .copied()
            .unwrap_or(false)
    }

    fn is_type_start(&self, t: Option<&PPToken>) -> bool {
        let Some(t) = t else { return false };
        t.kind == TokenKind::Identifier && (TYPE_WORDS.contains(&t.lexeme.as_str()) || self.is_typedef_name(&t.lexeme))
    }

    fn is_decl_start(&self) -> bool {
        let t = self.peek();
        if t.is_some_and(|t| t.kind == TokenKind::Identifier && STORAGE_WORDS.contains(&t.lexeme.as_str())) {
            return true;
        }
        // `T:` is a label even when T names a type
        self.is_type_start(t) && !self.peek_at(1).is_some_and(|n| n.is_punct(":"))
    }

    fn check_vendor(&self) -> PResult<()> {
        if let Some(t) = self.peek() {
            if t.kind == TokenKind::Identifier && VENDOR_WORDS.contains(&t.lexeme.as_str()) {
                let what = if t.lexeme.contains("asm") {
                    "inline assembly".to_string()
                } else {
                    format!("vendor extension `{}`", t.lexeme)
                };
                return Err(self.unsupported(&what));
            }
        }
        Ok(())
    }

    // ----- declarations -----

    fn external_decl(&mut self) -> PResult<ExternalDecl> {
        let start = self.pos;
        self.check_vendor()?;
        if !self.is_decl_start() {
            return Err(self.syntax("declaration"));
        }
        let specs = self.decl_specs(true)?;
        if self.eat_punct(";") {
            return Ok(ExternalDecl::Declaration(Declaration {
                id: self.id(),
                specs,
                declarators: vec![],
                span: self.span_from(start),
            }));
        }
        let d = self.declarator(Mode::Concrete)?;
        let is_function = matches!(d.derived.first(), Some(Derived::Function { .. }));
        if is_function && self.at_punct("{") {
            if specs.storage == Some(StorageClass::Typedef) {
                return Err(self.syntax("`;` after typedef"));
            }
            let name = d.name.clone().unwrap_or_default();
            self.declare(&name, false);
            self.push_scope();
            if let Some(Derived::Function { params, .. }) = d.derived.first() {
                for p in params {
                    if let Some(n) = &p.declarator.name {
                        self.declare(n, false);
                    }
                }
            }
            let body = self.compound()?;
            self.pop_scope();
            return Ok(ExternalDecl::Function(FunctionDef {
                id: self.id(),
                specs,
                declarator: d,
                body,
                span: self.span_from(start),
            }));
        }
        if is_function && self.is_decl_start() {
            return Err(self.unsupported("K&R function definition"));
        }
        Ok(ExternalDecl::Declaration(self.init_declarators(specs, d, start)?))
    }

    fn declaration(&mut self) -> PResult<Declaration> {
        let start = self.pos;
        self.check_vendor()?;
        let specs = self.decl_specs(true)?;
        if self.eat_punct(";") {
            return Ok(Declaration {
                id: self.id(),
                specs,
                declarators: vec![],
                span: self.span_from(start),
            });
        }
        let d = self.declarator(Mode::Concrete)?;
        self.init_declarators(specs, d, start)
    }

    fn init_declarators(&mut self, specs: DeclSpecs, first: Declarator, start: usize) -> PResult<Declaration> {
        let is_typedef = specs.storage == Some(StorageClass::Typedef);
        let mut declarators = Vec::new();
        let mut d = first;
        loop {
            if let Some(n) = &d.name {
                self.declare(n, is_typedef);
            }
            let init = if self.eat_punct("=") {
                if is_typedef {
                    return Err(self.syntax("`;` after typedef"));
                }
                Some(self.initializer()?)
            } else {
                None
            };
            declarators.push(InitDeclarator {
                id: self.id(),
                declarator: d,
                init,
            });
            if self.eat_punct(",") {
                d = self.declarator(Mode::Concrete)?;
                continue;
            }
            self.check_vendor()?;
            self.expect_punct(";")?;
            break;
        }
        Ok(Declaration {
            id: self.id(),
            specs,
            declarators,
            span: self.span_from(start),
        })
    }

    fn initializer(&mut self) -> PResult<Initializer> {
        let start = self.pos;
        if !self.eat_punct("{") {
            return Ok(Initializer::Expr(self.assignment()?));
        }
        let mut items = Vec::new();
        loop {
            if self.at_punct(".") || self.at_punct("[") {
                return Err(self.unsupported("designated initializer"));
            }
            if items.is_empty() && self.at_punct("}") {
                return Err(self.syntax("initializer"));
            }
            items.push(self.initializer()?);
            if self.eat_punct(",") {
                if self.eat_punct("}") {
                    break;
                }
                continue;
            }
            self.expect_punct("}")?;
            break;
        }
        Ok(Initializer::List {
            id: self.id(),
            items,
            span: self.span_from(start),
        })
    }

    fn decl_specs(&mut self, allow_storage: bool) -> PResult<DeclSpecs> {
        #[derive(Default)]
        struct Counts {
            void: u8,
            bool_: u8,
            char_: u8,
            short: u8,
            int: u8,
            long: u8,
            float: u8,
            double: u8,
            signed: u8,
            unsigned: u8,
        }
        let start = self.pos;
        let mut storage = None;
        let mut quals = Quals::NONE;
        let mut inline = false;
        let mut c = Counts::default();
        let mut other: Option<BaseType> = None;
        let mut any_type = false;
        while let Some(t) = self.peek() {
            if t.kind != TokenKind::Identifier {
                break;
            }
            let word = t.lexeme.as_str();
            let sc = match word {
                "typedef" => Some(StorageClass::Typedef),
                "extern" => Some(StorageClass::Extern),
                "static" => Some(StorageClass::Static),
                "auto" => Some(StorageClass::Auto),
                "register" => Some(StorageClass::Register),
                _ => None,
            };
            if let Some(sc) = sc {
                if !allow_storage {
                    return Err(self.syntax("type specifier"));
                }
                if storage.is_some() {
                    return Err(self.syntax("at most one storage-class specifier"));
                }
                storage = Some(sc);
                self.pos += 1;
                continue;
            }
            match word {
                "const" => quals.is_const = true,
                "volatile" => quals.is_volatile = true,
                "restrict" => {}
                "inline" => inline = true,
                "void" => c.void += 1,
                "_Bool" => c.bool_ += 1,
                "char" => c.char_ += 1,
                "short" => c.short += 1,
                "int" => c.int += 1,
                "long" => c.long += 1,
                "float" => c.float += 1,
                "double" => c.double += 1,
                "signed" => c.signed += 1,
                "unsigned" => c.unsigned += 1,
                "_Complex" | "_Imaginary" => return Err(self.unsupported(&format!("`{word}` types"))),
                "struct" | "union" | "enum" => {
                    if any_type {
                        return Err(self.syntax("a single type specifier"));
                    }
                    let b = if word == "enum" {
                        BaseType::Enum(self.enum_spec()?)
                    } else {
                        BaseType::Record(self.record_spec()?)
                    };
                    other = Some(b);
                    any_type = true;
                    continue;
                }
                w if VENDOR_WORDS.contains(&w) => {
                    self.check_vendor()?;
                }
                w if !any_type && !is_keyword(w) && self.is_typedef_name(w) => {
                    other = Some(BaseType::TypedefName(w.to_string()));
                    any_type = true;
                    self.pos += 1;
                    continue;
                }
                _ => break,
            }
            if matches!(
                word,
                "void" | "_Bool" | "char" | "short" | "int" | "long" | "float" | "double" | "signed" | "unsigned"
            ) {
                if other.is_some() {
                    return Err(self.syntax("a single type specifier"));
                }
                any_type = true;
            }
            self.pos += 1;
        }
        if !any_type {
            return Err(self.syntax("type specifier"));
        }
        let base = match other {
            Some(b) => b,
            None => {
                let bad = || {
                    ParseError::near(
                        ParseErrorKind::Syntax {
                            expected: "a valid combination of type specifiers".into(),
                            found: "conflicting specifiers".into(),
                        },
                        self.toks.get(start),
                    )
                };
                if c.signed > 1 || c.unsigned > 1 || (c.signed > 0 && c.unsigned > 0) {
                    return Err(bad());
                }
                let signed = c.unsigned == 0;
                let sign_given = c.signed + c.unsigned > 0;
                let others = |n: u8| c.void + c.bool_ + c.char_ + c.short + c.int + c.long + c.float + c.double - n;
                if c.void == 1 && others(1) == 0 && !sign_given {
                    BaseType::Void
                } else if c.bool_ == 1 && others(1) == 0 && !sign_given {
                    BaseType::Bool
                } else if c.float == 1 && others(1) == 0 && !sign_given {
                    BaseType::Float
                } else if c.double == 1 && c.long <= 1 && others(1 + c.long) == 0 && !sign_given {
                    if c.long == 1 {
                        BaseType::LongDouble
                    } else {
                        BaseType::Double
                    }
                } else if c.char_ == 1 && others(1) == 0 {
                    BaseType::Char(if sign_given { Some(signed) } else { None })
                } else if c.short == 1 && c.int <= 1 && others(1 + c.int) == 0 {
                    BaseType::Short { signed }
                } else if c.long == 1 && c.int <= 1 && others(1 + c.int) == 0 {
                    BaseType::Long { signed }
                } else if c.long == 2 && c.int <= 1 && others(2 + c.int) == 0 {
                    BaseType::LongLong { signed }
                } else if c.int <= 1 && others(c.int) == 0 {
                    BaseType::Int { signed }
                } else {
                    return Err(bad());
                }
            }
        };
        Ok(DeclSpecs {
            storage,
            quals,
            base,
            inline,
            span: self.span_from(start),
        })
    }

    fn record_spec(&mut self) -> PResult<RecordSpec> {
        let start = self.pos;
        let is_union = self.at_kw("union");
        self.pos += 1;
        let tag = self.ident_name().map(str::to_string);
        if tag.is_some() {
            self.pos += 1;
        }
        let members = if self.eat_punct("{") {
            let mut ms = Vec::new();
            while !self.at_punct("}") {
                if self.peek().is_none() {
                    return Err(self.syntax("`}`"));
                }
                let specs = self.decl_specs(false)?;
                if self.at_punct(";") {
                    return Err(self.unsupported("anonymous struct or union member"));
                }
                let mut ds = Vec::new();
                loop {
                    if self.at_punct(":") {
                        return Err(self.unsupported("bit-field"));
                    }
                    let d = self.declarator(Mode::Concrete)?;
                    if self.at_punct(":") {
                        return Err(self.unsupported("bit-field"));
                    }
                    if matches!(d.derived.first(), Some(Derived::Array(None))) {
                        return Err(self.unsupported("flexible array member"));
                    }
                    ds.push(d);
                    if !self.eat_punct(",") {
                        break;
                    }
                }
                self.expect_punct(";")?;
                ms.push(MemberDecl {
                    specs: Box::new(specs),
                    declarators: ds,
                });
            }
            if ms.is_empty() {
                return Err(self.syntax("member declaration"));
            }
            self.pos += 1;
            Some(ms)
        } else {
            if tag.is_none() {
                return Err(self.syntax("tag or `{`"));
            }
            None
        };
        Ok(RecordSpec {
            id: self.id(),
            is_union,
            tag,
            members,
            span: self.span_from(start),
        })
    }

    fn enum_spec(&mut self) -> PResult<EnumSpec> {
        let start = self.pos;
        self.pos += 1;
        let tag = self.ident_name().map(str::to_string);
        if tag.is_some() {
            self.pos += 1;
        }
        let enumerators = if self.eat_punct("{") {
            let mut es = Vec::new();
            loop {
                let estart = self.pos;
                let Some(name) = self.ident_name() else {
                    return Err(self.syntax("enumerator"));
                };
                self.pos += 1;
                let value = if self.eat_punct("=") {
                    Some(self.conditional()?)
                } else {
                    None
                };
                self.declare(name, false);
                es.push(Enumerator {
                    id: self.id(),
                    name: name.to_string(),
                    value,
                    span: self.span_from(estart),
                });
                if self.eat_punct(",") {
                    if self.eat_punct("}") {
                        break;
                    }
                    continue;
                }
                self.expect_punct("}")?;
                break;
            }
            Some(es)
        } else {
            if tag.is_none() {
                return Err(self.syntax("tag or `{`"));
            }
            None
        };
        Ok(EnumSpec {
            id: self.id(),
            tag,
            enumerators,
            span: self.span_from(start),
        })
    }

    fn pointer_quals(&mut self) -> Quals {
        let mut q = Quals::NONE;
        loop {
            if self.eat_kw("const") {
                q.is_const = true;
            } else if self.eat_kw("volatile") {
                q.is_volatile = true;
            } else if !self.eat_kw("restrict") {
                return q;
            }
        }
    }

    fn paren_starts_nested(&self, mode: Mode) -> bool {
        if mode == Mode::Concrete {
            return true;
        }
        let next = self.peek_at(1);
        if next.is_none_or(|t| t.is_punct(")") || t.is_punct("...")) {
            return false;
        }
        !self.is_type_start(next)
    }

    fn declarator(&mut self, mode: Mode) -> PResult<Declarator> {
        let start = self.pos;
        self.check_vendor()?;
        let mut ptrs = Vec::new();
        while self.eat_punct("*") {
            ptrs.push(Derived::Pointer(self.pointer_quals()));
        }
        let (name, mut derived) = if let Some(n) = self.ident_name().filter(|_| mode != Mode::Abstract) {
            self.pos += 1;
            (Some(n.to_string()), Vec::new())
        } else if self.at_punct("(") && self.paren_starts_nested(mode) {
            self.pos += 1;
            let inner = self.declarator(mode)?;
            self.expect_punct(")")?;
            (inner.name, inner.derived)
        } else if mode == Mode::Concrete {
            return Err(self.syntax("identifier"));
        } else {
            (None, Vec::new())
        };
        loop {
            if self.eat_punct("[") {
                if self.at_kw("static") || self.at_kw("const") || self.at_kw("volatile") || self.at_kw("restrict") {
                    return Err(self.unsupported("qualified array parameter"));
                }
                if self.at_punct("*") && self.peek_at(1).is_some_and(|t| t.is_punct("]")) {
                    return Err(self.unsupported("variable-length array"));
                }
                let size = if self.at_punct("]") {
                    None
                } else {
                    Some(Box::new(self.assignment()?))
                };
                self.expect_punct("]")?;
                derived.push(Derived::Array(size));
            } else if self.eat_punct("(") {
                derived.push(self.param_list()?);
            } else {
                break;
            }
        }
        derived.extend(ptrs.into_iter().rev());
        Ok(Declarator {
            id: self.id(),
            name,
            derived,
            span: self.span_from(start),
        })
    }

    fn param_list(&mut self) -> PResult<Derived> {
        if self.eat_punct(")") {
            return Ok(Derived::Function {
                params: vec![],
                variadic: false,
                prototype: false,
            });
        }
        if self.at_kw("void") && self.peek_at(1).is_some_and(|t| t.is_punct(")")) {
            self.pos += 2;
            return Ok(Derived::Function {
                params: vec![],
                variadic: false,
                prototype: true,
            });
        }
        let mut params = Vec::new();
        let mut variadic = false;
        loop {
            if self.eat_punct("...") {
                if params.is_empty() {
                    return Err(self.syntax("parameter declaration"));
                }
                variadic = true;
                self.expect_punct(")")?;
                break;
            }
            if self.ident_name().is_some_and(|n| !self.is_typedef_name(n)) {
                return Err(self.unsupported("K&R function definition"));
            }
            let start = self.pos;
            let specs = self.decl_specs(true)?;
            if !matches!(specs.storage, None | Some(StorageClass::Register)) {
                return Err(self.syntax("parameter declaration"));
            }
            let declarator = self.declarator(Mode::Either)?;
            params.push(ParamDecl {
                id: self.id(),
                specs,
                declarator,
                span: self.span_from(start),
            });
            if self.eat_punct(",") {
                continue;
            }
            self.expect_punct(")")?;
            break;
        }
        Ok(Derived::Function {
            params,
            variadic,
            prototype: true,
        })
    }

    fn type_name(&mut self) -> PResult<TypeName> {
        let start = self.pos;
        let specs = self.decl_specs(false)?;
        let declarator = self.declarator(Mode::Abstract)?;
        Ok(TypeName {
            id: self.id(),
            specs,
            declarator,
            span: self.span_from(start),
        })
    }

    // ----- statements -----

    fn compound(&mut self) -> PResult<Stmt> {
        let start = self.pos;
        self.expect_punct("{")?;
        self.push_scope();
        let mut items = Vec::new();
        while !self.at_punct("}") {
            if self.peek().is_none() {
                return Err(self.syntax("`}`"));
            }
            if self.is_decl_start() {
                items.push(BlockItem::Decl(self.declaration()?));
            } else {
                items.push(BlockItem::Stmt(self.statement()?));
            }
        }
        self.pos += 1;
        self.pop_scope();
        Ok(Stmt {
            id: self.id(),
            kind: StmtKind::Compound(items),
            span: self.span_from(start),
        })
    }

    fn paren_expr(&mut self) -> PResult<Expr> {
        self.expect_punct("(")?;
        let e = self.expression()?;
        self.expect_punct(")")?;
        Ok(e)
    }

    fn statement(&mut self) -> PResult<Stmt> {
        let start = self.pos;
        self.check_vendor()?;
        let Some(t) = self.peek() else {
            return Err(self.syntax("statement"));
        };
        if t.is_punct("{") {
            return self.compound();
        }
        let kind = if t.kind == TokenKind::Identifier {
            match t.lexeme.as_str() {
                "if" => {
                    self.pos += 1;
                    let cond = self.paren_expr()?;
                    let then = Box::new(self.statement()?);
                    let otherwise = if self.eat_kw("else") {
                        Some(Box::new(self.statement()?))
                    } else {
                        None
                    };
                    StmtKind::If { cond, then, otherwise }
                }
                "switch" => {
                    self.pos += 1;
                    let cond = self.paren_expr()?;
                    StmtKind::Switch {
                        cond,
                        body: Box::new(self.statement()?),
                    }
                }
                "while" => {
                    self.pos += 1;
                    let cond = self.paren_expr()?;
                    StmtKind::While {
                        cond,
                        body: Box::new(self.statement()?),
                    }
                }
                "do" => {
                    self.pos += 1;
                    let body = Box::new(self.statement()?);
                    if !self.eat_kw("while") {
                        return Err(self.syntax("`while`"));
                    }
                    let cond = self.paren_expr()?;
                    self.expect_punct(";")?;
                    StmtKind::DoWhile { body, cond }
                }
                "for" => {
                    self.pos += 1;
                    self.expect_punct("(")?;
                    self.push_scope();
                    let init = if self.eat_punct(";") {
                        None
                    } else if self.is_decl_start() {
                        Some(ForInit::Decl(self.declaration()?))
                    } else {
                        let e = self.expression()?;
                        self.expect_punct(";")?;
                        Some(ForInit::Expr(e))
                    };
                    let cond = if self.at_punct(";") {
                        None
                    } else {
                        Some(self.expression()?)
                    };
                    self.expect_punct(";")?;
                    let step = if self.at_punct(")") {
                        None
                    } else {
                        Some(self.expression()?)
                    };
                    self.expect_punct(")")?;
                    let body = Box::new(self.statement()?);
                    self.pop_scope();
                    StmtKind::For { init, cond, step, body }
                }
                "goto" => {
                    self.pos += 1;
                    let Some(n) = self.ident_name() else {
                        return Err(self.syntax("label name"));
                    };
                    self.pos += 1;
                    self.expect_punct(";")?;
                    StmtKind::Goto(n.to_string())
                }
                "continue" | "break" => {
                    self.pos += 1;
                    self.expect_punct(";")?;
                    if t.lexeme == "break" {
                        StmtKind::Break
                    } else {
                        StmtKind::Continue
                    }
                }
                "return" => {
                    self.pos += 1;
                    let e = if self.at_punct(";") {
                        None
                    } else {
                        Some(self.expression()?)
                    };
                    self.expect_punct(";")?;
                    StmtKind::Return(e)
                }
                "case" => {
                    self.pos += 1;
                    let value = self.conditional()?;
                    self.expect_punct(":")?;
                    StmtKind::Case {
                        value,
                        stmt: Box::new(self.statement()?),
                    }
                }
                "default" => {
                    self.pos += 1;
                    self.expect_punct(":")?;
                    StmtKind::Default(Box::new(self.statement()?))
                }
                w if !is_keyword(w) && self.peek_at(1).is_some_and(|n| n.is_punct(":")) => {
                    self.pos += 2;
                    StmtKind::Label {
                        name: w.to_string(),
                        stmt: Box::new(self.statement()?),
                    }
                }
                _ => self.expr_stmt()?,
            }
        } else {
            self.expr_stmt()?
        };
        Ok(Stmt {
            id: self.id(),
            kind,
            span: self.span_from(start),
        })
    }

    fn expr_stmt(&mut self) -> PResult<StmtKind> {
        if self.eat_punct(";") {
            return Ok(StmtKind::Expr(None));
        }
        let e = self.expression()?;
        self.expect_punct(";")?;
        Ok(StmtKind::Expr(Some(e)))
    }

    // ----- expressions -----

    fn mk(&mut self, kind: ExprKind, start: usize) -> Expr {
        Expr {
            id: self.id(),
            kind,
            span: self.span_from(start),
        }
    }

    fn expression(&mut self) -> PResult<Expr> {
        let start = self.pos;
        let mut e = self.assignment()?;
        while self.eat_punct(",") {
            let r = self.assignment()?;
            e = self.mk(ExprKind::Comma(Box::new(e), Box::new(r)), start);
        }
        Ok(e)
    }

    fn assignment(&mut self) -> PResult<Expr> {
        let start = self.pos;
        let lhs = self.conditional()?;
        let op = self
            .peek()
            .filter(|t| t.kind == TokenKind::Punctuator)
            .and_then(|t| ASSIGN_OPS.iter().find(|(s, _)| *s == t.lexeme));
        let Some(&(_, op)) = op else {
            return Ok(lhs);
        };
        self.pos += 1;
        let rhs = self.assignment()?;
        let kind = match op {
            None => ExprKind::Assign(Box::new(lhs), Box::new(rhs)),
            Some(op) => ExprKind::CompoundAssign(op, Box::new(lhs), Box::new(rhs)),
        };
        Ok(self.mk(kind, start))
    }

    fn conditional(&mut self) -> PResult<Expr> {
        let start = self.pos;
        let c = self.binary(0)?;
        if !self.eat_punct("?") {
            return Ok(c);
        }
        let a = self.expression()?;
        self.expect_punct(":")?;
        let b = self.conditional()?;
        Ok(self.mk(ExprKind::Conditional(Box::new(c), Box::new(a), Box::new(b)), start))
    }

    fn binary(&mut self, level: usize) -> PResult<Expr> {
        if level == BINARY_LEVELS.len() {
            return self.cast();
        }
        let start = self.pos;
        let mut lhs = self.binary(level + 1)?;
        loop {
            let op = self
                .peek()
                .filter(|t| t.kind == TokenKind::Punctuator)
                .and_then(|t| BINARY_LEVELS[level].iter().find(|(s, _)| *s == t.lexeme));
            let Some(&(_, op)) = op else {
                return Ok(lhs);
            };
            self.pos += 1;
            let rhs = self.binary(level + 1)?;
            lhs = self.mk(ExprKind::Binary(op, Box::new(lhs), Box::new(rhs)), start);
        }
    }

    fn cast(&mut self) -> PResult<Expr> {
        if self.at_punct("(") && self.is_type_start(self.peek_at(1)) {
            let start = self.pos;
            self.pos += 1;
            let tn = self.type_name()?;
            self.expect_punct(")")?;
            if self.at_punct("{") {
                return Err(self.unsupported("compound literal"));
            }
            let e = self.cast()?;
            return Ok(self.mk(ExprKind::Cast(Box::new(tn), Box::new(e)), start));
        }
        self.unary()
    }

    fn unary(&mut self) -> PResult<Expr> {
        let start = self.pos;
        let Some(t) = self.peek() else {
            return Err(self.syntax("expression"));
        };
        let kind = if t.kind == TokenKind::Punctuator {
            let op = t.lexeme.as_str();
            match op {
                "++" | "--" => {
                    self.pos += 1;
                    let e = self.unary()?;
                    let op = if op == "++" { IncDecOp::PreInc } else { IncDecOp::PreDec };
                    ExprKind::IncDec(op, Box::new(e))
                }
                "&" => {
                    self.pos += 1;
                    ExprKind::AddrOf(Box::new(self.cast()?))
                }
                "*" => {
                    self.pos += 1;
                    ExprKind::Deref(Box::new(self.cast()?))
                }
                "+" | "-" | "~" | "!" => {
                    self.pos += 1;
                    let u = match op {
                        "+" => UnaryOp::Plus,
                        "-" => UnaryOp::Neg,
                        "~" => UnaryOp::BitNot,
                        _ => UnaryOp::Not,
                    };
                    ExprKind::Unary(u, Box::new(self.cast()?))
                }
                _ => return self.postfix(),
            }
        } else if t.is_ident("sizeof") {
            self.pos += 1;
            if self.at_punct("(") && self.is_type_start(self.peek_at(1)) {
                self.pos += 1;
                let tn = self.type_name()?;
                self.expect_punct(")")?;
                if self.at_punct("{") {
                    return Err(self.unsupported("compound literal"));
                }
                ExprKind::SizeofType(Box::new(tn))
            } else {
                ExprKind::SizeofExpr(Box::new(self.unary()?))
            }
        } else {
            return self.postfix();
        };
        Ok(self.mk(kind, start))
    }

    fn postfix(&mut self) -> PResult<Expr> {
        let start = self.pos;
        let mut e = self.primary()?;
        loop {
            let kind = if self.eat_punct("[") {
                let idx = self.expression()?;
                self.expect_punct("]")?;
                ExprKind::Index(Box::new(e), Box::new(idx))
            } else if self.eat_punct("(") {
                let mut args = Vec::new();
                if !self.eat_punct(")") {
                    loop {
                        args.push(self.assignment()?);
                        if self.eat_punct(",") {
                            continue;
                        }
                        self.expect_punct(")")?;
                        break;
                    }
                }
                ExprKind::Call(Box::new(e), args)
            } else if self.at_punct(".") || self.at_punct("->") {
                let arrow = self.at_punct("->");
                self.pos += 1;
                let Some(field) = self.ident_name() else {
                    return Err(self.syntax("member name"));
                };
                self.pos += 1;
                ExprKind::Member {
                    base: Box::new(e),
                    field: field.to_string(),
                    arrow,
                }
            } else if self.at_punct("++") || self.at_punct("--") {
                let op = if self.at_punct("++") {
                    IncDecOp::PostInc
                } else {
                    IncDecOp::PostDec
                };
                self.pos += 1;
                ExprKind::IncDec(op, Box::new(e))
            } else {
                return Ok(e);
            };
            e = self.mk(kind, start);
        }
    }

    fn primary(&mut self) -> PResult<Expr> {
        let start = self.pos;
        self.check_vendor()?;
        let Some(t) = self.peek() else {
            return Err(self.syntax("expression"));
        };
        let kind = match t.kind {
            TokenKind::Identifier if !is_keyword(&t.lexeme) && !self.is_typedef_name(&t.lexeme) => {
                self.pos += 1;
                ExprKind::Ident(t.lexeme.clone())
            }
            TokenKind::PpNumber => {
                self.pos += 1;
                number(&t.lexeme).map_err(|m| ParseError::near(ParseErrorKind::InvalidConstant(m), Some(t)))?
            }
            TokenKind::CharConst => {
                self.pos += 1;
                let wide = t.lexeme.starts_with('L');
                let inner = &t.lexeme[usize::from(wide) + 1..t.lexeme.len() - 1];
                let bytes = decode_escapes(inner).ok_or_else(|| {
                    ParseError::near(
                        ParseErrorKind::InvalidConstant(format!("bad escape in {}", t.lexeme)),
                        Some(t),
                    )
                })?;
                if bytes.len() != 1 {
                    return Err(ParseError::near(
                        ParseErrorKind::Unsupported("multi-character constant".into()),
                        Some(t),
                    ));
                }
                ExprKind::CharConst {
                    value: i64::from(bytes[0]),
                    wide,
                }
            }
            TokenKind::StringLiteral => {
                let mut bytes = Vec::new();
                let mut wide = false;
                while let Some(s) = self.peek().filter(|s| s.kind == TokenKind::StringLiteral) {
                    let w = s.lexeme.starts_with('L');
                    wide |= w;
                    let inner = &s.lexeme[usize::from(w) + 1..s.lexeme.len() - 1];
                    let b = decode_escapes(inner).ok_or_else(|| {
                        ParseError::near(
                            ParseErrorKind::InvalidConstant(format!("bad escape in {}", s.lexeme)),
                            Some(s),
                        )
                    })?;
                    bytes.extend(b);
                    self.pos += 1;
                }
                ExprKind::StringLit { bytes, wide }
            }
            TokenKind::Punctuator if t.lexeme == "(" => {
                self.pos += 1;
                if self.at_punct("{") {
                    return Err(self.unsupported("statement expression"));
                }
                let e = self.expression()?;
                self.expect_punct(")")?;
                return Ok(e);
            }
            _ => return Err(self.syntax("expression")),
        };
        Ok(self.mk(kind, start))
    }
}

/// Classifies and decodes a pp-number appearing in an expression.
fn number(text: &str) -> Result<ExprKind, String> {
    let lower = text.to_ascii_lowercase();
    let hex = lower.starts_with("0x");
    let is_float = lower.contains('.') || (if hex { lower.contains('p') } else { lower.contains('e') });
    if is_float {
        let (body, suffix) = match lower.chars().last() {
            Some('f') if !hex || lower.contains('p') => (&text[..text.len() - 1], "f"),
            Some('l') => (&text[..text.len() - 1], "l"),
            _ => (text, ""),
        };
        if hex {
            return Err(format!("hexadecimal floating constant `{text}` is not supported"));
        }
        if suffix == "l" {
            return Err(format!("long double constant `{text}` is not supported"));
        }
        if body.parse::<f64>().is_err() {
            return Err(format!("malformed floating constant `{text}`"));
        }
        return Ok(ExprKind::FloatConst {
            text: text.to_string(),
            is_float: suffix == "f",
        });
    }
    let digits_end = lower
        .char_indices()
        .rev()
        .take_while(|(_, c)| *c == 'u' || *c == 'l')
        .last()
        .map_or(lower.len(), |(i, _)| i);
    let (digits, suffix) = (&lower[..digits_end], &text[digits_end..]);
    let sl = suffix.to_ascii_lowercase();
    let unsigned = sl.contains('u');
    let long_part: String = suffix.chars().filter(|c| *c == 'l' || *c == 'L').collect();
    let long = match long_part.as_str() {
        "" => 0,
        "l" | "L" => 1,
        "ll" | "LL" => 2,
        _ => return Err(format!("invalid suffix on `{text}`")),
    };
    if sl.matches('u').count() > 1 || (long == 2 && !sl.contains("ll")) {
        return Err(format!("invalid suffix on `{text}`"));
    }
    let (radix, body, decimal) = if let Some(h) = digits.strip_prefix("0x") {
        (16, h, false)
    } else if digits.len() > 1 && digits.starts_with('0') {
        (8, &digits[1..], false)
    } else {
        (10, digits, true)
    };
    if body.is_empty() || !body.chars().all(|c| c.is_digit(radix)) {
        return Err(format!("malformed integer constant `{text}`"));
    }
    let value = u64::from_str_radix(body, radix).map_err(|_| format!("integer constant `{text}` is too large"))?;
    Ok(ExprKind::IntConst(IntLit {
        value,
        unsigned,
        long,
        decimal,
        text: text.to_string(),
    }))
}
