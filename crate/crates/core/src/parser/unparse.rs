//! Printing an AST back to C, and a location-free structural dump used to
//! compare trees.

use std::fmt::Write;

use super::ast::*;

/// Renders a translation unit as C source. Every compound subexpression is
/// parenthesized, so reparsing the output gives back the same tree.
pub fn unparse(tu: &TranslationUnit) -> String {
    let mut p = Printer::default();
    for item in &tu.items {
        match item {
            ExternalDecl::Declaration(d) => {
                p.declaration(d);
                p.out.push('\n');
            }
            ExternalDecl::Function(f) => {
                p.specs(&f.specs);
                p.out.push(' ');
                let d = declarator(&f.declarator);
                p.out.push_str(&d);
                p.out.push('\n');
                p.stmt(&f.body);
            }
        }
    }
    p.out
}

/// A dump of the tree with node ids and spans removed. Two trees with the
/// same structure produce the same string.
pub fn structure(tu: &TranslationUnit) -> String {
    let raw = format!("{:?}", tu.items);
    strip(&raw)
}

fn strip(raw: &str) -> String {
    let mut out = String::with_capacity(raw.len());
    let mut rest = raw;
    loop {
        let span = rest.find("span: Span {");
        let id = rest.find("id: NodeId(");
        let next = match (span, id) {
            (Some(a), Some(b)) => Some(a.min(b)),
            (a, b) => a.or(b),
        };
        let Some(at) = next else {
            out.push_str(rest);
            return out;
        };
        out.push_str(&rest[..at]);
        let tail = &rest[at..];
        let (open, close) = if tail.starts_with("span") {
            ('{', '}')
        } else {
            ('(', ')')
        };
        let mut depth = 0usize;
        let mut end = tail.len();
        for (i, c) in tail.char_indices() {
            if c == open {
                depth += 1;
            } else if c == close {
                depth -= 1;
                if depth == 0 {
                    end = i + 1;
                    break;
                }
            }
        }
        rest = &tail[end..];
        rest = rest.strip_prefix(", ").unwrap_or(rest);
    }
}

#[derive(Default)]
struct Printer {
    out: String,
    indent: usize,
}

fn quals(q: Quals) -> String {
    let mut s = String::new();
    if q.is_const {
        s.push_str("const ");
    }
    if q.is_volatile {
        s.push_str("volatile ");
    }
    s
}

/// Renders a declarator around its (possibly absent) name.
fn declarator(d: &Declarator) -> String {
    let mut s = d.name.clone().unwrap_or_default();
    let mut last_pointer = false;
    for part in &d.derived {
        match part {
            Derived::Pointer(q) => {
                s = format!("*{}{}", quals(*q), s);
                last_pointer = true;
            }
            Derived::Array(n) => {
                if last_pointer {
                    s = format!("({s})");
                }
                s.push('[');
                if let Some(n) = n {
                    s.push_str(&expr(n));
                }
                s.push(']');
                last_pointer = false;
            }
            Derived::Function {
                params,
                variadic,
                prototype,
            } => {
                if last_pointer {
                    s = format!("({s})");
                }
                let mut ps: Vec<String> = params
                    .iter()
                    .map(|p| {
                        let d = declarator(&p.declarator);
                        format!("{} {}", specs_text(&p.specs), d).trim_end().to_string()
                    })
                    .collect();
                if *variadic {
                    ps.push("...".into());
                }
                if ps.is_empty() && *prototype {
                    ps.push("void".into());
                }
                let _ = write!(s, "({})", ps.join(", "));
                last_pointer = false;
            }
        }
    }
    s
}

fn specs_text(sp: &DeclSpecs) -> String {
    let mut p = Printer::default();
    p.specs(sp);
    p.out
}

fn type_name(t: &TypeName) -> String {
    format!("{} {}", specs_text(&t.specs), declarator(&t.declarator))
        .trim_end()
        .to_string()
}

fn escape(bytes: &[u8], quote: u8) -> String {
    let mut s = String::new();
    for &b in bytes {
        match b {
            b'\\' => s.push_str("\\\\"),
            b'\n' => s.push_str("\\n"),
            b'\t' => s.push_str("\\t"),
            _ if b == quote => {
                s.push('\\');
                s.push(b as char);
            }
            0x20..=0x7e => s.push(b as char),
            _ => {
                let _ = write!(s, "\\{b:03o}");
            }
        }
    }
    s
}

fn operand(e: &Expr) -> String {
    match &e.kind {
        ExprKind::Ident(_)
        | ExprKind::IntConst(_)
        | ExprKind::FloatConst { .. }
        | ExprKind::CharConst { .. }
        | ExprKind::StringLit { .. } => expr(e),
        _ => format!("({})", expr(e)),
    }
}

/// Renders an expression; subexpressions are parenthesized unless primary.
pub(crate) fn expr(e: &Expr) -> String {
    use ExprKind::*;
    match &e.kind {
        Ident(n) => n.clone(),
        IntConst(l) => l.text.clone(),
        FloatConst { text, .. } => text.clone(),
        CharConst { value, wide } => {
            format!("{}'{}'", if *wide { "L" } else { "" }, escape(&[*value as u8], b'\''))
        }
        StringLit { bytes, wide } => format!("{}\"{}\"", if *wide { "L" } else { "" }, escape(bytes, b'"')),
        Unary(op, a) => {
            let o = match op {
                UnaryOp::Plus => "+",
                UnaryOp::Neg => "-",
                UnaryOp::BitNot => "~",
                UnaryOp::Not => "!",
            };
            format!("{o}{}", operand(a))
        }
        Binary(op, a, b) => format!("{} {} {}", operand(a), op.symbol(), operand(b)),
        Assign(a, b) => format!("{} = {}", operand(a), operand(b)),
        CompoundAssign(op, a, b) => format!("{} {}= {}", operand(a), op.symbol(), operand(b)),
        IncDec(op, a) => {
            let s = if op.is_increment() { "++" } else { "--" };
            if op.is_prefix() {
                format!("{s}{}", operand(a))
            } else {
                format!("{}{s}", operand(a))
            }
        }
        Call(f, args) => format!(
            "{}({})",
            operand(f),
            args.iter().map(operand).collect::<Vec<_>>().join(", ")
        ),
        Index(a, i) => format!("{}[{}]", operand(a), expr(i)),
        Member { base, field, arrow } => {
            format!("{}{}{field}", operand(base), if *arrow { "->" } else { "." })
        }
        Deref(a) => format!("*{}", operand(a)),
        AddrOf(a) => format!("&{}", operand(a)),
        Cast(t, a) => format!("({}){}", type_name(t), operand(a)),
        Conditional(c, a, b) => format!("{} ? {} : {}", operand(c), operand(a), operand(b)),
        Comma(a, b) => format!("{}, {}", operand(a), operand(b)),
        SizeofExpr(a) => format!("sizeof {}", operand(a)),
        SizeofType(t) => format!("sizeof({})", type_name(t)),
    }
}

impl Printer {
    fn line(&mut self, s: &str) {
        for _ in 0..self.indent {
            self.out.push_str("    ");
        }
        self.out.push_str(s);
        self.out.push('\n');
    }

    fn specs(&mut self, sp: &DeclSpecs) {
        if let Some(sc) = sp.storage {
            self.out.push_str(match sc {
                StorageClass::Typedef => "typedef ",
                StorageClass::Extern => "extern ",
                StorageClass::Static => "static ",
                StorageClass::Auto => "auto ",
                StorageClass::Register => "register ",
            });
        }
        if sp.inline {
            self.out.push_str("inline ");
        }
        self.out.push_str(&quals(sp.quals));
        let base = match &sp.base {
            BaseType::Void => "void".to_string(),
            BaseType::Bool => "_Bool".to_string(),
            BaseType::Char(None) => "char".to_string(),
            BaseType::Char(Some(true)) => "signed char".to_string(),
            BaseType::Char(Some(false)) => "unsigned char".to_string(),
            BaseType::Short { signed } => format!("{}short", if *signed { "" } else { "unsigned " }),
            BaseType::Int { signed } => format!("{}int", if *signed { "" } else { "unsigned " }),
            BaseType::Long { signed } => format!("{}long", if *signed { "" } else { "unsigned " }),
            BaseType::LongLong { signed } => format!("{}long long", if *signed { "" } else { "unsigned " }),
            BaseType::Float => "float".to_string(),
            BaseType::Double => "double".to_string(),
            BaseType::LongDouble => "long double".to_string(),
            BaseType::TypedefName(n) => n.clone(),
            BaseType::Record(r) => {
                let mut s = format!("{} ", if r.is_union { "union" } else { "struct" });
                if let Some(t) = &r.tag {
                    s.push_str(t);
                }
                if let Some(ms) = &r.members {
                    s.push_str(" { ");
                    for m in ms {
                        let ds: Vec<String> = m.declarators.iter().map(declarator).collect();
                        let _ = write!(s, "{} {}; ", specs_text(&m.specs), ds.join(", "));
                    }
                    s.push('}');
                }
                s
            }
            BaseType::Enum(e) => {
                let mut s = "enum ".to_string();
                if let Some(t) = &e.tag {
                    s.push_str(t);
                }
                if let Some(es) = &e.enumerators {
                    let items: Vec<String> = es
                        .iter()
                        .map(|en| match &en.value {
                            Some(v) => format!("{} = {}", en.name, operand(v)),
                            None => en.name.clone(),
                        })
                        .collect();
                    let _ = write!(s, " {{ {} }}", items.join(", "));
                }
                s
            }
        };
        self.out.push_str(&base);
    }

    fn init_text(i: &Initializer) -> String {
        match i {
            Initializer::Expr(e) => operand(e),
            Initializer::List { items, .. } => {
                format!(
                    "{{ {} }}",
                    items.iter().map(Self::init_text).collect::<Vec<_>>().join(", ")
                )
            }
        }
    }

    fn declaration_text(d: &Declaration) -> String {
        let mut s = specs_text(&d.specs);
        let ds: Vec<String> = d
            .declarators
            .iter()
            .map(|id| {
                let mut t = declarator(&id.declarator);
                if let Some(i) = &id.init {
                    t.push_str(" = ");
                    t.push_str(&Self::init_text(i));
                }
                t
            })
            .collect();
        if !ds.is_empty() {
            s.push(' ');
            s.push_str(&ds.join(", "));
        }
        s.push(';');
        s
    }

    fn declaration(&mut self, d: &Declaration) {
        self.out.push_str(&Self::declaration_text(d));
    }

    fn stmt(&mut self, s: &Stmt) {
        match &s.kind {
            StmtKind::Compound(items) => {
                self.line("{");
                self.indent += 1;
                for item in items {
                    match item {
                        BlockItem::Decl(d) => {
                            let t = Self::declaration_text(d);
                            self.line(&t);
                        }
                        BlockItem::Stmt(st) => self.stmt(st),
                    }
                }
                self.indent -= 1;
                self.line("}");
            }
            StmtKind::Expr(None) => self.line(";"),
            StmtKind::Expr(Some(e)) => self.line(&format!("{};", expr(e))),
            StmtKind::If { cond, then, otherwise } => {
                self.line(&format!("if ({})", expr(cond)));
                self.nested(then);
                if let Some(o) = otherwise {
                    self.line("else");
                    self.nested(o);
                }
            }
            StmtKind::Switch { cond, body } => {
                self.line(&format!("switch ({})", expr(cond)));
                self.nested(body);
            }
            StmtKind::While { cond, body } => {
                self.line(&format!("while ({})", expr(cond)));
                self.nested(body);
            }
            StmtKind::DoWhile { body, cond } => {
                self.line("do");
                self.nested(body);
                self.line(&format!("while ({});", expr(cond)));
            }
            StmtKind::For { init, cond, step, body } => {
                let i = match init {
                    None => ";".to_string(),
                    Some(ForInit::Expr(e)) => format!("{};", expr(e)),
                    Some(ForInit::Decl(d)) => Self::declaration_text(d),
                };
                let c = cond.as_ref().map(expr).unwrap_or_default();
                let st = step.as_ref().map(expr).unwrap_or_default();
                self.line(&format!("for ({i} {c}; {st})"));
                self.nested(body);
            }
            StmtKind::Goto(l) => self.line(&format!("goto {l};")),
            StmtKind::Label { name, stmt } => {
                self.line(&format!("{name}:"));
                self.stmt(stmt);
            }
            StmtKind::Case { value, stmt } => {
                self.line(&format!("case {}:", expr(value)));
                self.stmt(stmt);
            }
            StmtKind::Default(stmt) => {
                self.line("default:");
                self.stmt(stmt);
            }
            StmtKind::Break => self.line("break;"),
            StmtKind::Continue => self.line("continue;"),
            StmtKind::Return(None) => self.line("return;"),
            StmtKind::Return(Some(e)) => self.line(&format!("return {};", expr(e))),
        }
    }

    fn nested(&mut self, s: &Stmt) {
        if matches!(s.kind, StmtKind::Compound(_)) {
            self.stmt(s);
        } else {
            self.indent += 1;
            self.stmt(s);
            self.indent -= 1;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::parser::parse;
    use crate::source::{FileId, SourceFile};

    fn round_trip(src: &str) {
        let lex = |s: &str| crate::frontend::lex(&SourceFile::new(FileId(0), "t.c", s)).unwrap();
        let a = parse(&lex(src)).unwrap();
        let text = unparse(&a);
        let b = parse(&lex(&text)).unwrap_or_else(|e| panic!("reparse failed: {e:?}\n{text}"));
        assert_eq!(structure(&a), structure(&b), "\n{text}");
    }

    #[test]
    fn round_trips() {
        round_trip("int a, *b[3], (*c)[4]; static const volatile unsigned long long d = 5ULL;");
        round_trip("typedef struct node { int v; struct node *next; } node_t; node_t n = { 1, 0 };");
        round_trip("enum color { RED, GREEN = 4, BLUE }; int (*fp(void))(int, char *, ...);");
        round_trip(
            "int f(int x) { int i = -x; if (x) if (i) i++; else --i; \
             for (;;) { break; } while (x > 0) x -= (1 << 2) ? 'a' : '\\n'; \
             do ; while (0); switch (x) { case 1: default: return sizeof(int) + sizeof x; } \
             lbl: goto lbl; return (unsigned char)x, *&i; }",
        );
        round_trip("void g(void) { char s[] = \"a\\\"b\\001\"; int m[2][2] = { { 1, 2 }, { 3, 4 } }; }");
    }

    #[test]
    fn structure_ignores_locations() {
        let lex = |s: &str| crate::frontend::lex(&SourceFile::new(FileId(0), "t.c", s)).unwrap();
        let a = parse(&lex("int x = 1;")).unwrap();
        let b = parse(&lex("\n\n   int   x=1 ;")).unwrap();
        assert_eq!(structure(&a), structure(&b));
        let c = parse(&lex("int x = 2;")).unwrap();
        assert_ne!(structure(&a), structure(&c));
    }
}
