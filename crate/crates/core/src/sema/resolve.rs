use std::collections::{HashMap, HashSet};

use super::consteval::{const_eval, const_eval_tagged, ConstEnv, ConstValue};
use super::symbols::*;
use super::types::*;
use super::{
    decay, is_null_constant, Conversion, ConversionKind, FunctionInfo, Member, RecordInfo, SemaError,
    SemaErrorKind as K, TypedTu,
};
use crate::parser::*;

type R<T> = Result<T, SemaError>;

/// Resolves names and types every expression of a translation unit.
pub fn resolve(ast: TranslationUnit, model: &IntegerModel) -> Result<TypedTu, SemaError> {
    let mut r = Resolver {
        m: *model,
        table: SymbolTable::default(),
        scope: ScopeId::FILE,
        records: Vec::new(),
        types: HashMap::new(),
        lvalue_quals: HashMap::new(),
        bindings: HashMap::new(),
        decl_symbols: HashMap::new(),
        sizes: HashMap::new(),
        conversions: Vec::new(),
        functions: Vec::new(),
        fn_ctx: None,
        initialized: HashSet::new(),
    };
    for (idx, item) in ast.items.iter().enumerate() {
        match item {
            ExternalDecl::Declaration(d) => r.declaration(d, true)?,
            ExternalDecl::Function(f) => r.function(f, idx)?,
        }
    }
    let mut tu = TypedTu {
        ast,
        model: r.m,
        symbols: r.table,
        records: r.records,
        types: r.types,
        lvalue_quals: r.lvalue_quals,
        bindings: r.bindings,
        decl_symbols: r.decl_symbols,
        sizes: r.sizes,
        conversions: r.conversions,
        behaviors: HashMap::new(),
        functions: r.functions,
    };
    tag_behaviors(&mut tu);
    Ok(tu)
}

/// Records undefined operations found by constant evaluation of every full
/// expression.
fn tag_behaviors(tu: &mut TypedTu) {
    let mut tags = Vec::new();
    let mut roots: Vec<&Expr> = Vec::new();
    for item in &tu.ast.items {
        match item {
            ExternalDecl::Function(f) => roots.extend(full_expressions(&f.body).into_iter().map(|fe| fe.expr)),
            ExternalDecl::Declaration(d) => {
                for id in &d.declarators {
                    if let Some(i) = &id.init {
                        roots.extend(i.exprs());
                    }
                }
            }
        }
    }
    for e in roots {
        const_eval_tagged(tu, e, &mut tags);
    }
    for (id, b) in tags {
        tu.behaviors.entry(id).or_insert(b);
    }
}

struct FnCtx {
    ret: TypeDesc,
    locals: Vec<SymbolId>,
}

struct Resolver {
    m: IntegerModel,
    table: SymbolTable,
    scope: ScopeId,
    records: Vec<RecordInfo>,
    types: HashMap<NodeId, TypeDesc>,
    lvalue_quals: HashMap<NodeId, Quals>,
    bindings: HashMap<NodeId, SymbolId>,
    decl_symbols: HashMap<NodeId, SymbolId>,
    sizes: HashMap<NodeId, u64>,
    conversions: Vec<Conversion>,
    functions: Vec<FunctionInfo>,
    fn_ctx: Option<FnCtx>,
    initialized: HashSet<SymbolId>,
}

impl ConstEnv for Resolver {
    fn type_of(&self, id: NodeId) -> Option<&TypeDesc> {
        self.types.get(&id)
    }

    fn enum_value(&self, id: NodeId) -> Option<i128> {
        self.bindings.get(&id).and_then(|s| self.table.get(*s).enum_value)
    }

    fn is_volatile(&self, id: NodeId) -> bool {
        self.lvalue_quals.get(&id).is_some_and(|q| q.is_volatile)
    }

    fn sizeof_value(&self, id: NodeId) -> Option<u64> {
        self.sizes.get(&id).copied()
    }

    fn model(&self) -> &IntegerModel {
        &self.m
    }
}

fn err<T>(kind: K, span: &Span) -> R<T> {
    Err(SemaError::new(kind, span))
}

fn invalid<T>(msg: impl Into<String>, span: &Span) -> R<T> {
    err(K::InvalidOperands(msg.into()), span)
}

/// Composite of two compatible types, `None` when they are incompatible.
fn composite(a: &TypeDesc, b: &TypeDesc) -> Option<TypeDesc> {
    if a == b {
        return Some(a.clone());
    }
    match (a, b) {
        (TypeDesc::Array { elem: ea, len: la }, TypeDesc::Array { elem: eb, len: lb }) => {
            let elem = composite(ea, eb)?;
            let len = match (la, lb) {
                (Some(x), Some(y)) if x != y => return None,
                (Some(x), _) | (_, Some(x)) => Some(*x),
                _ => None,
            };
            Some(TypeDesc::Array {
                elem: Box::new(elem),
                len,
            })
        }
        (TypeDesc::Pointer { pointee: pa, quals: qa }, TypeDesc::Pointer { pointee: pb, quals: qb }) if qa == qb => {
            Some(TypeDesc::pointer_to(composite(pa, pb)?, *qa))
        }
        (
            TypeDesc::Function {
                ret: ra,
                params: pa,
                variadic: va,
                prototype: proto_a,
            },
            TypeDesc::Function {
                ret: rb,
                params: pb,
                variadic: vb,
                prototype: proto_b,
            },
        ) => {
            let ret = composite(ra, rb)?;
            match (proto_a, proto_b) {
                (true, true) => {
                    if va != vb || pa.len() != pb.len() {
                        return None;
                    }
                    let params = pa
                        .iter()
                        .zip(pb)
                        .map(|(x, y)| composite(x, y))
                        .collect::<Option<Vec<_>>>()?;
                    Some(TypeDesc::Function {
                        ret: Box::new(ret),
                        params,
                        variadic: *va,
                        prototype: true,
                    })
                }
                (true, false) | (false, true) => {
                    let (p, v) = if *proto_a { (pa, va) } else { (pb, vb) };
                    Some(TypeDesc::Function {
                        ret: Box::new(ret),
                        params: p.clone(),
                        variadic: *v,
                        prototype: true,
                    })
                }
                (false, false) => Some(TypeDesc::Function {
                    ret: Box::new(ret),
                    params: vec![],
                    variadic: false,
                    prototype: false,
                }),
            }
        }
        _ => None,
    }
}

fn adjust_param(t: TypeDesc, q: Quals) -> (TypeDesc, Quals) {
    match t {
        TypeDesc::Array { elem, .. } => (TypeDesc::pointer_to(*elem, q), Quals::NONE),
        TypeDesc::Function { .. } => (TypeDesc::pointer_to(t, Quals::NONE), Quals::NONE),
        other => (other, q),
    }
}

impl Resolver {
    fn push_scope(&mut self) {
        self.scope = self.table.new_scope(self.scope);
    }

    fn pop_scope(&mut self) {
        self.scope = self.table.scope(self.scope).parent.unwrap_or(ScopeId::FILE);
    }

    fn record_layout(&self, id: RecordId) -> Option<(u64, u64)> {
        let rec = &self.records[id.0 as usize];
        let members = rec.members.as_ref()?;
        let mut size = 0u64;
        let mut align = 1u64;
        for mem in members {
            let (s, a) = self.m.layout(&mem.ty, &|r| self.record_layout(r))?;
            align = align.max(a);
            if rec.union {
                size = size.max(s);
            } else {
                size = size.div_ceil(a) * a + s;
            }
        }
        Some((size.div_ceil(align) * align, align))
    }

    fn size_of(&self, t: &TypeDesc) -> Option<u64> {
        self.m.size_of(t, &|r| self.record_layout(r))
    }

    fn is_complete_object(&self, t: &TypeDesc) -> bool {
        !matches!(t, TypeDesc::Function { .. }) && self.size_of(t).is_some()
    }

    fn new_symbol(&self, name: &str, kind: SymbolKind, ty: TypeDesc, span: &Span) -> Symbol {
        Symbol {
            id: SymbolId(0),
            name: name.to_string(),
            kind,
            ty,
            quals: Quals::NONE,
            scope: self.scope,
            storage: Storage::Automatic,
            linkage: Linkage::None,
            def_span: span.clone(),
            defined: false,
            is_param: false,
            enum_value: None,
        }
    }

    /// Declares an ordinary identifier in the current scope, merging with a
    /// compatible earlier declaration of the same entity.
    fn declare(&mut self, sym: Symbol, span: &Span) -> R<SymbolId> {
        let name = sym.name.clone();
        if let Some(&prev_id) = self.table.scope(self.scope).ordinary.get(&name) {
            let prev = self.table.get(prev_id).clone();
            let linkable = |s: &Symbol| s.linkage != Linkage::None || s.storage == Storage::Extern;
            let same_entity = prev.kind == sym.kind
                && matches!(sym.kind, SymbolKind::Object | SymbolKind::Function)
                && (self.scope == ScopeId::FILE || (linkable(&prev) && linkable(&sym)));
            if !same_entity {
                return err(K::ConflictingRedeclaration(name), span);
            }
            let Some(ty) = composite(&prev.ty, &sym.ty) else {
                return err(K::ConflictingRedeclaration(name), span);
            };
            if prev.quals != sym.quals {
                return err(K::ConflictingRedeclaration(name), span);
            }
            if prev.linkage == Linkage::External && sym.linkage == Linkage::Internal {
                return err(K::ConflictingRedeclaration(name), span);
            }
            if sym.kind == SymbolKind::Function && prev.defined && sym.defined {
                return err(K::Redefinition(name), span);
            }
            let p = self.table.get_mut(prev_id);
            p.ty = ty;
            if sym.defined && !p.defined {
                p.defined = true;
                p.def_span = sym.def_span.clone();
            }
            if sym.storage != Storage::Extern && p.storage == Storage::Extern {
                p.storage = sym.storage;
            }
            return Ok(prev_id);
        }
        let scope = self.scope;
        let id = self.table.push(sym);
        self.table.scope_mut(scope).ordinary.insert(name, id);
        Ok(id)
    }

    // ----- declarations -----

    fn specs(&mut self, s: &DeclSpecs, standalone: bool) -> R<(TypeDesc, Quals)> {
        let m = self.m;
        let t = match &s.base {
            BaseType::Void => TypeDesc::Void,
            BaseType::Bool => TypeDesc::Bool,
            BaseType::Char(None) => m.char_type(),
            BaseType::Char(Some(signed)) => TypeDesc::int(*signed, 8),
            BaseType::Short { signed } => TypeDesc::int(*signed, m.short_bits),
            BaseType::Int { signed } => TypeDesc::int(*signed, m.int_bits),
            BaseType::Long { signed } => TypeDesc::int(*signed, m.long_bits),
            BaseType::LongLong { signed } => TypeDesc::int(*signed, m.long_long_bits),
            BaseType::Float => TypeDesc::Float,
            BaseType::Double => TypeDesc::Double,
            BaseType::LongDouble => return err(K::Unsupported("long double".into()), &s.span),
            BaseType::TypedefName(n) => {
                let Some(id) = self.table.lookup(self.scope, n) else {
                    return err(K::Undeclared(n.clone()), &s.span);
                };
                let sym = self.table.get(id);
                if sym.kind != SymbolKind::Typedef {
                    return err(K::Invalid(format!("`{n}` is not a type name")), &s.span);
                }
                return Ok((sym.ty.clone(), sym.quals.union(s.quals)));
            }
            BaseType::Record(r) => self.record_spec(r, standalone)?,
            BaseType::Enum(e) => self.enum_spec(e)?,
        };
        Ok((t, s.quals))
    }

    fn new_record(&mut self, tag: Option<String>, union: bool, span: &Span) -> TypeDesc {
        let id = RecordId(self.records.len() as u32);
        self.records.push(RecordInfo {
            id,
            tag: tag.clone(),
            union,
            members: None,
        });
        let ty = TypeDesc::Record {
            id,
            tag: tag.clone(),
            union,
        };
        if let Some(t) = tag {
            let sym = self.new_symbol(&t, SymbolKind::Tag, ty.clone(), span);
            let scope = self.scope;
            let sid = self.table.push(sym);
            self.table.scope_mut(scope).tags.insert(t, sid);
        }
        ty
    }

    fn record_spec(&mut self, r: &RecordSpec, standalone: bool) -> R<TypeDesc> {
        let in_current = r
            .tag
            .as_ref()
            .and_then(|t| self.table.scope(self.scope).tags.get(t).copied());
        let visible = r.tag.as_ref().and_then(|t| self.table.lookup_tag(self.scope, t));
        let check_kind = |this: &Self, sid: SymbolId| -> R<TypeDesc> {
            let ty = this.table.get(sid).ty.clone();
            match &ty {
                TypeDesc::Record { union, .. } if *union == r.is_union => Ok(ty),
                _ => err(
                    K::Invalid(format!(
                        "`{}` used with the wrong kind of tag",
                        r.tag.as_deref().unwrap_or("")
                    )),
                    &r.span,
                ),
            }
        };
        let Some(members) = &r.members else {
            let existing = if standalone { in_current } else { visible };
            return match existing {
                Some(sid) => check_kind(self, sid),
                None => Ok(self.new_record(r.tag.clone(), r.is_union, &r.span)),
            };
        };
        let ty = match in_current {
            Some(sid) => {
                let ty = check_kind(self, sid)?;
                let TypeDesc::Record { id, .. } = &ty else {
                    unreachable!()
                };
                if self.records[id.0 as usize].members.is_some() {
                    return err(K::Redefinition(r.tag.clone().unwrap_or_default()), &r.span);
                }
                ty
            }
            None => self.new_record(r.tag.clone(), r.is_union, &r.span),
        };
        let TypeDesc::Record { id, .. } = &ty else {
            unreachable!()
        };
        let mut list: Vec<Member> = Vec::new();
        for md in members {
            let (bt, bq) = self.specs(&md.specs, false)?;
            for d in &md.declarators {
                let (mt, mq) = self.declarator_type(bt.clone(), bq, d)?;
                let name = d.name.clone().unwrap_or_default();
                if list.iter().any(|x| x.name == name) {
                    return err(K::Invalid(format!("duplicate member `{name}`")), &d.span);
                }
                if !self.is_complete_object(&mt) {
                    return err(K::IncompleteType(mt.to_string()), &d.span);
                }
                list.push(Member {
                    name,
                    ty: mt,
                    quals: mq,
                });
            }
        }
        self.records[id.0 as usize].members = Some(list);
        Ok(ty)
    }

    fn enum_spec(&mut self, e: &EnumSpec) -> R<TypeDesc> {
        let ty = TypeDesc::Enum { tag: e.tag.clone() };
        let Some(list) = &e.enumerators else {
            return match e.tag.as_ref().and_then(|t| self.table.lookup_tag(self.scope, t)) {
                Some(sid) if matches!(self.table.get(sid).ty, TypeDesc::Enum { .. }) => Ok(ty),
                Some(_) => err(K::Invalid("tag used with the wrong kind".into()), &e.span),
                // forward references to enums are not C99
                None => err(K::IncompleteType(ty.to_string()), &e.span),
            };
        };
        if let Some(t) = &e.tag {
            if self.table.scope(self.scope).tags.contains_key(t) {
                return err(K::Redefinition(t.clone()), &e.span);
            }
            let sym = self.new_symbol(t, SymbolKind::Tag, ty.clone(), &e.span);
            let scope = self.scope;
            let sid = self.table.push(sym);
            self.table.scope_mut(scope).tags.insert(t.clone(), sid);
        }
        let mut next: i128 = 0;
        let (lo, hi) = int_range(true, self.m.int_bits);
        for en in list {
            let v = match &en.value {
                Some(x) => {
                    self.expr(x)?;
                    match const_eval(self, x) {
                        ConstValue::Int { value, .. } => value,
                        ConstValue::NotConstant => {
                            return err(K::NotConstant(format!("value of `{}`", en.name)), &x.span)
                        }
                    }
                }
                None => next,
            };
            if v < lo || v > hi {
                return err(
                    K::Invalid(format!("enumerator `{}` out of range for int", en.name)),
                    &en.span,
                );
            }
            next = v + 1;
            let mut sym = self.new_symbol(&en.name, SymbolKind::EnumConstant, self.m.int_type(), &en.span);
            sym.enum_value = Some(v);
            sym.defined = true;
            self.declare(sym, &en.span)?;
        }
        Ok(ty)
    }

    /// Applies a declarator's derivations to a base type; returns the type
    /// and the qualifiers of the declared object itself.
    fn declarator_type(&mut self, base: TypeDesc, bq: Quals, d: &Declarator) -> R<(TypeDesc, Quals)> {
        let mut t = base;
        let mut q = bq;
        for part in d.derived.iter().rev() {
            match part {
                Derived::Pointer(pq) => {
                    t = TypeDesc::pointer_to(t, q);
                    q = *pq;
                }
                Derived::Array(size) => {
                    if matches!(t, TypeDesc::Function { .. } | TypeDesc::Void) {
                        return invalid(format!("array of {t}"), &d.span);
                    }
                    if !self.is_complete_object(&t) {
                        return err(K::IncompleteType(t.to_string()), &d.span);
                    }
                    let len = match size {
                        None => None,
                        Some(e) => {
                            let et = self.value(e)?;
                            if !et.is_integer() {
                                return invalid("array size is not an integer", &e.span);
                            }
                            match const_eval(self, e) {
                                ConstValue::Int { value, .. } if value > 0 => Some(value as u64),
                                ConstValue::Int { .. } => {
                                    return err(K::Invalid("array size must be positive".into()), &e.span)
                                }
                                ConstValue::NotConstant => {
                                    return err(K::Unsupported("variable-length array".into()), &e.span)
                                }
                            }
                        }
                    };
                    t = TypeDesc::Array { elem: Box::new(t), len };
                }
                Derived::Function {
                    params,
                    variadic,
                    prototype,
                } => {
                    if matches!(t, TypeDesc::Function { .. } | TypeDesc::Array { .. }) {
                        return invalid(format!("function returning {t}"), &d.span);
                    }
                    self.push_scope();
                    let mut ps = Vec::new();
                    for p in params {
                        let (pt, pq) = self.specs(&p.specs, false)?;
                        let (pt, pq) = self.declarator_type(pt, pq, &p.declarator)?;
                        if pt == TypeDesc::Void {
                            self.pop_scope();
                            return invalid("parameter of type void", &p.span);
                        }
                        ps.push(adjust_param(pt, pq).0);
                    }
                    self.pop_scope();
                    t = TypeDesc::Function {
                        ret: Box::new(t),
                        params: ps,
                        variadic: *variadic,
                        prototype: *prototype,
                    };
                    q = Quals::NONE;
                }
            }
        }
        Ok((t, q))
    }

    fn declaration(&mut self, d: &Declaration, file_scope: bool) -> R<()> {
        let (base, bq) = self.specs(&d.specs, d.declarators.is_empty())?;
        for idecl in &d.declarators {
            let dspan = &idecl.declarator.span;
            let (ty, q) = self.declarator_type(base.clone(), bq, &idecl.declarator)?;
            let name = idecl.declarator.name.clone().unwrap_or_default();
            if d.specs.storage == Some(StorageClass::Typedef) {
                let mut sym = self.new_symbol(&name, SymbolKind::Typedef, ty, dspan);
                sym.quals = q;
                sym.defined = true;
                let sid = self.declare_typedef(sym, dspan)?;
                self.decl_symbols.insert(idecl.declarator.id, sid);
                continue;
            }
            let is_fn = ty.is_function();
            let (storage, linkage) = match (file_scope, is_fn, d.specs.storage) {
                (true, true, Some(StorageClass::Static)) => (Storage::Static, Linkage::Internal),
                (false, true, Some(StorageClass::Static)) => {
                    return invalid("static function declared at block scope", dspan)
                }
                (_, true, Some(StorageClass::Auto | StorageClass::Register)) => {
                    return invalid("invalid storage class for a function", dspan)
                }
                (_, true, _) => (Storage::Extern, self.prior_linkage(&name)),
                (true, false, Some(StorageClass::Static)) => (Storage::Static, Linkage::Internal),
                (true, false, Some(StorageClass::Extern)) => (Storage::Extern, self.prior_linkage(&name)),
                (true, false, Some(_)) => return invalid("automatic storage at file scope", dspan),
                (true, false, None) => (Storage::Static, Linkage::External),
                (false, false, Some(StorageClass::Static)) => (Storage::Static, Linkage::None),
                (false, false, Some(StorageClass::Extern)) => (Storage::Extern, self.prior_linkage(&name)),
                (false, false, _) => (Storage::Automatic, Linkage::None),
            };
            if !is_fn {
                if ty == TypeDesc::Void {
                    return invalid(format!("variable `{name}` declared void"), dspan);
                }
                let array_unsized = matches!(ty, TypeDesc::Array { len: None, .. });
                if storage != Storage::Extern
                    && !self.is_complete_object(&ty)
                    && !(array_unsized && (idecl.init.is_some() || file_scope))
                {
                    return err(K::IncompleteType(ty.to_string()), dspan);
                }
            } else if idecl.init.is_some() {
                return invalid(format!("function `{name}` initialized like a variable"), dspan);
            }
            let mut sym = self.new_symbol(
                &name,
                if is_fn {
                    SymbolKind::Function
                } else {
                    SymbolKind::Object
                },
                ty.clone(),
                dspan,
            );
            sym.quals = q;
            sym.storage = storage;
            sym.linkage = linkage;
            sym.defined = !is_fn && (storage != Storage::Extern || idecl.init.is_some());
            let sid = self.declare(sym, dspan)?;
            self.decl_symbols.insert(idecl.declarator.id, sid);
            if !is_fn && !file_scope {
                if let Some(ctx) = &mut self.fn_ctx {
                    if !ctx.locals.contains(&sid) {
                        ctx.locals.push(sid);
                    }
                }
            }
            if let Some(init) = &idecl.init {
                if storage == Storage::Extern && !file_scope {
                    return invalid("block-scope extern declaration has an initializer", dspan);
                }
                if !self.initialized.insert(sid) {
                    return err(K::Redefinition(name), dspan);
                }
                let declared = self.table.get(sid).ty.clone();
                let final_ty = self.initializer(init, &declared)?;
                self.table.get_mut(sid).ty = final_ty;
            }
        }
        Ok(())
    }

    fn declare_typedef(&mut self, sym: Symbol, span: &Span) -> R<SymbolId> {
        if self.table.scope(self.scope).ordinary.contains_key(&sym.name) {
            return err(K::ConflictingRedeclaration(sym.name), span);
        }
        let scope = self.scope;
        let name = sym.name.clone();
        let id = self.table.push(sym);
        self.table.scope_mut(scope).ordinary.insert(name, id);
        Ok(id)
    }

    /// Linkage for an `extern` declaration: that of a visible prior
    /// declaration, external otherwise.
    fn prior_linkage(&self, name: &str) -> Linkage {
        match self.table.lookup(self.scope, name).map(|s| self.table.get(s)) {
            Some(s) if s.linkage != Linkage::None => s.linkage,
            _ => Linkage::External,
        }
    }

    fn initializer(&mut self, init: &Initializer, target: &TypeDesc) -> R<TypeDesc> {
        match (init, target) {
            (Initializer::Expr(e), TypeDesc::Array { elem, len })
                if matches!(e.kind, ExprKind::StringLit { .. }) && matches!(**elem, TypeDesc::Int { .. }) =>
            {
                let ExprKind::StringLit { bytes, wide } = &e.kind else {
                    unreachable!()
                };
                let want = if *wide { 32 } else { 8 };
                if !matches!(**elem, TypeDesc::Int { width, .. } if width == want) {
                    return invalid(format!("cannot initialize {target} from a string literal"), &e.span);
                }
                self.expr(e)?;
                let n = bytes.len() as u64 + 1;
                if let Some(l) = len {
                    if *l + 1 < n {
                        return invalid("initializer string is too long", &e.span);
                    }
                }
                Ok(TypeDesc::Array {
                    elem: elem.clone(),
                    len: Some(len.unwrap_or(n)),
                })
            }
            (Initializer::Expr(e), TypeDesc::Array { .. }) => {
                invalid(format!("array {target} initialized from an expression"), &e.span)
            }
            (Initializer::Expr(e), t) => {
                let et = self.expr(e)?;
                self.convert_for_assignment(e, &et, t, ConversionKind::Initialization)?;
                Ok(t.clone())
            }
            (Initializer::List { items, span, .. }, TypeDesc::Array { elem, len }) => {
                if let Some(n) = len {
                    if items.len() as u64 > *n {
                        return invalid("too many initializers", span);
                    }
                }
                for it in items {
                    self.initializer(it, elem)?;
                }
                Ok(TypeDesc::Array {
                    elem: elem.clone(),
                    len: Some(len.unwrap_or(items.len() as u64)),
                })
            }
            (Initializer::List { items, span, .. }, TypeDesc::Record { id, union, .. }) => {
                let Some(members) = self.records[id.0 as usize].members.clone() else {
                    return err(K::IncompleteType(target.to_string()), span);
                };
                let limit = if *union { 1 } else { members.len() };
                if items.len() > limit {
                    return invalid("too many initializers", span);
                }
                for (it, m) in items.iter().zip(&members) {
                    self.initializer(it, &m.ty)?;
                }
                Ok(target.clone())
            }
            (Initializer::List { items, span, .. }, t) => {
                if items.len() != 1 {
                    return invalid(format!("scalar {t} initialized from a list of {}", items.len()), span);
                }
                self.initializer(&items[0], t)?;
                Ok(t.clone())
            }
        }
    }

    fn function(&mut self, f: &FunctionDef, item: usize) -> R<()> {
        let (base, bq) = self.specs(&f.specs, false)?;
        let (ty, _) = self.declarator_type(base, bq, &f.declarator)?;
        let TypeDesc::Function { ret, .. } = &ty else {
            return invalid("function definition without a function type", &f.declarator.span);
        };
        let ret = (**ret).clone();
        if !matches!(ret, TypeDesc::Void) && !self.is_complete_object(&ret) {
            return err(K::IncompleteType(ret.to_string()), &f.declarator.span);
        }
        let name = f.name().to_string();
        let (storage, linkage) = match f.specs.storage {
            Some(StorageClass::Static) => (Storage::Static, Linkage::Internal),
            Some(StorageClass::Extern) | None => (Storage::Extern, self.prior_linkage(&name)),
            Some(_) => return invalid("invalid storage class for a function", &f.declarator.span),
        };
        let mut sym = self.new_symbol(&name, SymbolKind::Function, ty.clone(), &f.declarator.span);
        sym.storage = storage;
        sym.linkage = linkage;
        sym.defined = true;
        let sid = self.declare(sym, &f.declarator.span)?;
        self.decl_symbols.insert(f.declarator.id, sid);

        self.push_scope();
        let mut params = Vec::new();
        for p in f.params() {
            let (pt, pq) = self.specs(&p.specs, false)?;
            let (pt, pq) = self.declarator_type(pt, pq, &p.declarator)?;
            let (pt, pq) = adjust_param(pt, pq);
            let Some(pname) = &p.declarator.name else {
                return invalid("parameter name omitted in a function definition", &p.span);
            };
            if !self.is_complete_object(&pt) {
                return err(K::IncompleteType(pt.to_string()), &p.span);
            }
            let mut psym = self.new_symbol(pname, SymbolKind::Object, pt, &p.declarator.span);
            psym.quals = pq;
            psym.is_param = true;
            psym.defined = true;
            let psid = self.declare(psym, &p.declarator.span)?;
            self.decl_symbols.insert(p.declarator.id, psid);
            params.push(psid);
        }
        self.fn_ctx = Some(FnCtx {
            ret,
            locals: Vec::new(),
        });
        let StmtKind::Compound(items) = &f.body.kind else {
            unreachable!("function bodies are compound statements")
        };
        for it in items {
            self.block_item(it)?;
        }
        let ctx = self.fn_ctx.take().expect("function context");
        self.pop_scope();
        self.functions.push(FunctionInfo {
            item,
            symbol: sid,
            params,
            locals: ctx.locals,
        });
        Ok(())
    }

    // ----- statements -----

    fn block_item(&mut self, it: &BlockItem) -> R<()> {
        match it {
            BlockItem::Decl(d) => self.declaration(d, false),
            BlockItem::Stmt(s) => self.stmt(s),
        }
    }

    fn condition(&mut self, e: &Expr) -> R<()> {
        let t = self.value(e)?;
        if !t.is_scalar() {
            return invalid(format!("controlling expression has non-scalar type {t}"), &e.span);
        }
        Ok(())
    }

    fn stmt(&mut self, s: &Stmt) -> R<()> {
        match &s.kind {
            StmtKind::Compound(items) => {
                self.push_scope();
                for it in items {
                    self.block_item(it)?;
                }
                self.pop_scope();
            }
            StmtKind::Expr(Some(e)) => {
                self.expr(e)?;
            }
            StmtKind::Expr(None) | StmtKind::Goto(_) | StmtKind::Break | StmtKind::Continue => {}
            StmtKind::If { cond, then, otherwise } => {
                self.condition(cond)?;
                self.stmt(then)?;
                if let Some(o) = otherwise {
                    self.stmt(o)?;
                }
            }
            StmtKind::Switch { cond, body } => {
                let t = self.value(cond)?;
                if !t.is_integer() {
                    return invalid("switch quantity is not an integer", &cond.span);
                }
                self.stmt(body)?;
            }
            StmtKind::While { cond, body } | StmtKind::DoWhile { body, cond } => {
                self.condition(cond)?;
                self.stmt(body)?;
            }
            StmtKind::For { init, cond, step, body } => {
                self.push_scope();
                match init {
                    Some(ForInit::Decl(d)) => self.declaration(d, false)?,
                    Some(ForInit::Expr(e)) => {
                        self.expr(e)?;
                    }
                    None => {}
                }
                if let Some(c) = cond {
                    self.condition(c)?;
                }
                if let Some(st) = step {
                    self.expr(st)?;
                }
                self.stmt(body)?;
                self.pop_scope();
            }
            StmtKind::Return(e) => {
                let ret = self.fn_ctx.as_ref().map(|c| c.ret.clone()).unwrap_or(TypeDesc::Void);
                match (e, &ret) {
                    (Some(e), TypeDesc::Void) => {
                        return invalid("void function returns a value", &e.span);
                    }
                    (None, TypeDesc::Void) => {}
                    (None, _) => return invalid("non-void function returns no value", &s.span),
                    (Some(e), r) => {
                        let t = self.expr(e)?;
                        self.convert_for_assignment(e, &t, r, ConversionKind::Return)?;
                    }
                }
            }
            StmtKind::Case { value, stmt } => {
                let t = self.value(value)?;
                if !t.is_integer() || const_eval(self, value) == ConstValue::NotConstant {
                    return err(K::NotConstant("case label".into()), &value.span);
                }
                self.stmt(stmt)?;
            }
            StmtKind::Default(stmt) | StmtKind::Label { stmt, .. } => self.stmt(stmt)?,
        }
        Ok(())
    }

    // ----- expressions -----

    fn value(&mut self, e: &Expr) -> R<TypeDesc> {
        let t = self.expr(e)?;
        Ok(decay(&t, self.lvalue_quals.get(&e.id).copied()))
    }

    fn type_name(&mut self, tn: &TypeName) -> R<TypeDesc> {
        let (b, q) = self.specs(&tn.specs, false)?;
        let (t, _) = self.declarator_type(b, q, &tn.declarator)?;
        self.types.insert(tn.id, t.clone());
        Ok(t)
    }

    fn convert_for_assignment(&mut self, e: &Expr, from: &TypeDesc, to: &TypeDesc, kind: ConversionKind) -> R<()> {
        let from = decay(from, self.lvalue_quals.get(&e.id).copied());
        let ok = match (to, &from) {
            (a, b) if a.is_arithmetic() && b.is_arithmetic() => true,
            (TypeDesc::Bool, b) if b.is_pointer() => true,
            (TypeDesc::Pointer { .. }, TypeDesc::Pointer { .. }) => true,
            (TypeDesc::Pointer { .. }, b) if b.is_integer() => true,
            (a, TypeDesc::Pointer { .. }) if a.is_integer() => true,
            (TypeDesc::Record { id: a, .. }, TypeDesc::Record { id: b, .. }) => a == b,
            _ => false,
        };
        if !ok {
            return invalid(format!("cannot convert {from} to {to}"), &e.span);
        }
        if from != *to {
            let null_constant = is_null_constant(self, e);
            self.conversions.push(Conversion {
                expr: e.id,
                span: e.span.clone(),
                from,
                to: to.clone(),
                kind,
                null_constant,
            });
        }
        Ok(())
    }

    fn int_literal_type(&self, l: &IntLit, span: &Span) -> R<TypeDesc> {
        let m = &self.m;
        let (i, lg, ll) = (m.int_bits, m.long_bits, m.long_long_bits);
        let cands: Vec<(bool, u8)> = match (l.unsigned, l.long, l.decimal) {
            (false, 0, true) => vec![(true, i), (true, lg), (true, ll)],
            (false, 0, false) => vec![(true, i), (false, i), (true, lg), (false, lg), (true, ll), (false, ll)],
            (true, 0, _) => vec![(false, i), (false, lg), (false, ll)],
            (false, 1, true) => vec![(true, lg), (true, ll)],
            (false, 1, false) => vec![(true, lg), (false, lg), (true, ll), (false, ll)],
            (true, 1, _) => vec![(false, lg), (false, ll)],
            (false, _, true) => vec![(true, ll)],
            (false, _, false) => vec![(true, ll), (false, ll)],
            (true, _, _) => vec![(false, ll)],
        };
        for (s, w) in cands {
            if i128::from(l.value) <= int_range(s, w).1 {
                return Ok(TypeDesc::int(s, w));
            }
        }
        err(
            K::Invalid(format!("integer constant `{}` is too large for its type", l.text)),
            span,
        )
    }

    fn expr(&mut self, e: &Expr) -> R<TypeDesc> {
        let t = self.expr_inner(e)?;
        self.types.insert(e.id, t.clone());
        Ok(t)
    }

    fn set_quals(&mut self, e: &Expr, q: Quals) {
        self.lvalue_quals.insert(e.id, q);
    }

    fn expr_inner(&mut self, e: &Expr) -> R<TypeDesc> {
        let m = self.m;
        let span = &e.span;
        Ok(match &e.kind {
            ExprKind::Ident(n) => {
                let Some(sid) = self.table.lookup(self.scope, n) else {
                    return err(K::Undeclared(n.clone()), span);
                };
                self.bindings.insert(e.id, sid);
                let sym = self.table.get(sid).clone();
                match sym.kind {
                    SymbolKind::Typedef => return invalid(format!("unexpected type name `{n}`"), span),
                    SymbolKind::Object => {
                        self.set_quals(e, sym.quals);
                        sym.ty
                    }
                    SymbolKind::Function => sym.ty,
                    SymbolKind::EnumConstant => m.int_type(),
                    SymbolKind::Tag => unreachable!("tags are not ordinary identifiers"),
                }
            }
            ExprKind::IntConst(l) => self.int_literal_type(l, span)?,
            ExprKind::FloatConst { is_float, .. } => {
                if *is_float {
                    TypeDesc::Float
                } else {
                    TypeDesc::Double
                }
            }
            ExprKind::CharConst { .. } => m.int_type(),
            ExprKind::StringLit { bytes, wide } => {
                self.set_quals(e, Quals::NONE);
                TypeDesc::Array {
                    elem: Box::new(if *wide { TypeDesc::int(true, 32) } else { m.char_type() }),
                    len: Some(bytes.len() as u64 + 1),
                }
            }
            ExprKind::Unary(op, a) => {
                let t = self.value(a)?;
                match op {
                    UnaryOp::Plus | UnaryOp::Neg if t.is_arithmetic() => m.promote(&t),
                    UnaryOp::BitNot if t.is_integer() => m.promote(&t),
                    UnaryOp::Not if t.is_scalar() => m.int_type(),
                    _ => return invalid(format!("wrong operand type {t} for unary operator"), span),
                }
            }
            ExprKind::Binary(op, a, b) => {
                let ta = self.value(a)?;
                let tb = self.value(b)?;
                self.binary_type(*op, &ta, &tb, a, b, span)?
            }
            ExprKind::Assign(l, r) => {
                let tl = self.expr(l)?;
                let tr = self.expr(r)?;
                self.check_modifiable(l, &tl)?;
                self.convert_for_assignment(r, &tr, &tl, ConversionKind::Assignment)?;
                tl
            }
            ExprKind::CompoundAssign(op, l, r) => {
                let tl = self.expr(l)?;
                let tr = self.value(r)?;
                self.check_modifiable(l, &tl)?;
                let res = self.binary_type(*op, &tl, &tr, l, r, span)?;
                if tl.is_pointer() && !res.is_pointer() {
                    return invalid("invalid compound assignment to a pointer", span);
                }
                if tl.is_arithmetic() && !res.is_arithmetic() {
                    return invalid("invalid compound assignment", span);
                }
                tl
            }
            ExprKind::IncDec(_, a) => {
                let t = self.expr(a)?;
                self.check_modifiable(a, &t)?;
                if !t.is_scalar() {
                    return invalid(format!("cannot increment {t}"), span);
                }
                t
            }
            ExprKind::Call(f, args) => {
                let tf = self.value(f)?;
                let Some((
                    TypeDesc::Function {
                        ret,
                        params,
                        variadic,
                        prototype,
                    },
                    _,
                )) = tf.pointee().map(|(p, q)| (p.clone(), q))
                else {
                    return err(K::CallOfNonFunction, &f.span);
                };
                if prototype && (args.len() < params.len() || (!variadic && args.len() > params.len())) {
                    return err(
                        K::Arity {
                            expected: params.len(),
                            got: args.len(),
                        },
                        span,
                    );
                }
                for (i, a) in args.iter().enumerate() {
                    let ta = self.expr(a)?;
                    if let Some(p) = params.get(i).filter(|_| prototype) {
                        self.convert_for_assignment(a, &ta, p, ConversionKind::Argument)?;
                    } else {
                        let v = decay(&ta, self.lvalue_quals.get(&a.id).copied());
                        if !v.is_scalar() && !matches!(v, TypeDesc::Record { .. }) {
                            return invalid(format!("invalid argument of type {v}"), &a.span);
                        }
                    }
                }
                if !matches!(*ret, TypeDesc::Void) && !self.is_complete_object(&ret) {
                    return err(K::IncompleteType(ret.to_string()), span);
                }
                *ret
            }
            ExprKind::Index(a, i) => {
                let ta = self.value(a)?;
                let ti = self.value(i)?;
                let (p, q) = match (&ta, &ti) {
                    (TypeDesc::Pointer { pointee, quals }, x) if x.is_integer() => ((**pointee).clone(), *quals),
                    (x, TypeDesc::Pointer { pointee, quals }) if x.is_integer() => ((**pointee).clone(), *quals),
                    _ => return err(K::SubscriptOfNonPointer, span),
                };
                if !self.is_complete_object(&p) {
                    return err(K::IncompleteType(p.to_string()), span);
                }
                self.set_quals(e, q);
                p
            }
            ExprKind::Member { base, field, arrow } => {
                let (rec, q) = if *arrow {
                    let tb = self.value(base)?;
                    match tb {
                        TypeDesc::Pointer { pointee, quals } => (*pointee, quals),
                        _ => return invalid(format!("`->` applied to {tb}"), span),
                    }
                } else {
                    let tb = self.expr(base)?;
                    let q = self.lvalue_quals.get(&base.id).copied().unwrap_or_default();
                    (tb, q)
                };
                let TypeDesc::Record { id, .. } = &rec else {
                    return invalid(format!("member access into {rec}"), span);
                };
                let Some(members) = &self.records[id.0 as usize].members else {
                    return err(K::IncompleteType(rec.to_string()), span);
                };
                let Some(mem) = members.iter().find(|x| x.name == *field).cloned() else {
                    return err(K::UnknownMember(field.clone()), span);
                };
                self.set_quals(e, q.union(mem.quals));
                mem.ty
            }
            ExprKind::Deref(a) => {
                let ta = self.value(a)?;
                let TypeDesc::Pointer { pointee, quals } = ta else {
                    return invalid(format!("indirection requires a pointer, found {ta}"), span);
                };
                if *pointee == TypeDesc::Void {
                    return invalid("dereference of a void pointer", span);
                }
                if !pointee.is_function() {
                    self.set_quals(e, quals);
                }
                *pointee
            }
            ExprKind::AddrOf(a) => {
                let ta = self.expr(a)?;
                if ta.is_function() {
                    TypeDesc::pointer_to(ta, Quals::NONE)
                } else {
                    let Some(q) = self.lvalue_quals.get(&a.id).copied() else {
                        return invalid("cannot take the address of an rvalue", span);
                    };
                    TypeDesc::pointer_to(ta, q)
                }
            }
            ExprKind::Cast(tn, a) => {
                let target = self.type_name(tn)?;
                let ta = self.value(a)?;
                let ok = match (&target, &ta) {
                    (TypeDesc::Void, _) => true,
                    (x, y) if x.is_arithmetic() && y.is_arithmetic() => true,
                    (x, y) if x.is_pointer() && (y.is_pointer() || y.is_integer()) => true,
                    (x, y) if x.is_integer() && y.is_pointer() => true,
                    _ => false,
                };
                if !ok {
                    return invalid(format!("cannot cast {ta} to {target}"), span);
                }
                if target != ta && target != TypeDesc::Void {
                    let null_constant = is_null_constant(self, a);
                    self.conversions.push(Conversion {
                        expr: a.id,
                        span: e.span.clone(),
                        from: ta,
                        to: target.clone(),
                        kind: ConversionKind::Explicit,
                        null_constant,
                    });
                }
                target
            }
            ExprKind::Conditional(c, a, b) => {
                self.condition(c)?;
                let ta = self.value(a)?;
                let tb = self.value(b)?;
                if ta.is_arithmetic() && tb.is_arithmetic() {
                    m.usual_arithmetic(&ta, &tb)
                } else if ta == tb && matches!(ta, TypeDesc::Void | TypeDesc::Record { .. }) {
                    ta
                } else if ta.is_pointer() && (tb.is_pointer() || is_null_constant(self, b)) {
                    merge_pointers(&ta, &tb)
                } else if tb.is_pointer() && is_null_constant(self, a) {
                    tb
                } else {
                    return invalid(format!("incompatible operands {ta} and {tb} for `?:`"), span);
                }
            }
            ExprKind::Comma(a, b) => {
                self.expr(a)?;
                self.value(b)?
            }
            ExprKind::SizeofExpr(a) => {
                let t = self.expr(a)?;
                let Some(sz) = self.size_of(&t) else {
                    return err(K::IncompleteType(t.to_string()), span);
                };
                self.sizes.insert(e.id, sz);
                m.size_type()
            }
            ExprKind::SizeofType(tn) => {
                let t = self.type_name(tn)?;
                let Some(sz) = self.size_of(&t) else {
                    return err(K::IncompleteType(t.to_string()), span);
                };
                self.sizes.insert(e.id, sz);
                m.size_type()
            }
        })
    }

    fn check_modifiable(&self, l: &Expr, t: &TypeDesc) -> R<()> {
        let Some(q) = self.lvalue_quals.get(&l.id) else {
            return invalid("expression is not assignable", &l.span);
        };
        if q.is_const {
            return invalid("assignment to a const-qualified object", &l.span);
        }
        if matches!(t, TypeDesc::Array { .. } | TypeDesc::Function { .. }) {
            return invalid(format!("cannot assign to {t}"), &l.span);
        }
        Ok(())
    }

    fn binary_type(&self, op: BinaryOp, ta: &TypeDesc, tb: &TypeDesc, a: &Expr, b: &Expr, span: &Span) -> R<TypeDesc> {
        use BinaryOp::*;
        let m = &self.m;
        let bad = || invalid(format!("invalid operands to `{}` ({ta} and {tb})", op.symbol()), span);
        Ok(match op {
            Mul | Div if ta.is_arithmetic() && tb.is_arithmetic() => m.usual_arithmetic(ta, tb),
            Rem | BitAnd | BitOr | BitXor if ta.is_integer() && tb.is_integer() => m.usual_arithmetic(ta, tb),
            Shl | Shr if ta.is_integer() && tb.is_integer() => m.promote(ta),
            Add | Sub if ta.is_arithmetic() && tb.is_arithmetic() => m.usual_arithmetic(ta, tb),
            Add | Sub if ta.is_object_pointer() && tb.is_integer() => ta.clone(),
            Add if ta.is_integer() && tb.is_object_pointer() => tb.clone(),
            Sub if ta.is_object_pointer() && tb.is_object_pointer() => m.ptrdiff_type(),
            Lt | Gt | Le | Ge if ta.is_arithmetic() && tb.is_arithmetic() => m.int_type(),
            Lt | Gt | Le | Ge if ta.is_pointer() && tb.is_pointer() => m.int_type(),
            Eq | Ne if ta.is_arithmetic() && tb.is_arithmetic() => m.int_type(),
            Eq | Ne if ta.is_pointer() && (tb.is_pointer() || is_null_constant(self, b)) => m.int_type(),
            Eq | Ne if tb.is_pointer() && is_null_constant(self, a) => m.int_type(),
            LogAnd | LogOr if ta.is_scalar() && tb.is_scalar() => m.int_type(),
            _ => return bad(),
        })
    }
}

fn merge_pointers(a: &TypeDesc, b: &TypeDesc) -> TypeDesc {
    match (a, b) {
        (TypeDesc::Pointer { pointee: pa, quals: qa }, TypeDesc::Pointer { pointee: pb, quals: qb }) => {
            let q = qa.union(*qb);
            if **pa == TypeDesc::Void || **pb == TypeDesc::Void {
                TypeDesc::pointer_to(TypeDesc::Void, q)
            } else {
                TypeDesc::pointer_to((**pa).clone(), q)
            }
        }
        _ => a.clone(),
    }
}
