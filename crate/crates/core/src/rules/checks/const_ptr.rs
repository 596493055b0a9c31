use std::collections::HashMap;

use super::roots;
use crate::flow::{Element, FunctionFacts};
use crate::parser::{BinaryOp, Expr, ExprKind, FullExprRole, Initializer, NodeId};
use crate::rules::effects::parents;
use crate::rules::{Certainty, Raw};
use crate::sema::{SymbolId, SymbolKind, TypeDesc, TypedTu};

/// What happens to the pointed-to object through one use of the pointer.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Use {
    /// Only read, or not accessed at all.
    Read,
    /// Stored through.
    Write,
    /// The pointer value flows somewhere a non-const pointer is expected.
    Escape,
}

enum InitTarget {
    Scalar(SymbolId),
    Aggregate,
}

struct Ctx<'a> {
    tu: &'a TypedTu,
    parent: HashMap<NodeId, &'a Expr>,
    roles: HashMap<NodeId, FullExprRole>,
    inits: HashMap<NodeId, InitTarget>,
    ret: Option<TypeDesc>,
}

/// True when a pointer of type `t` could not be used to modify its target.
fn const_target(t: &TypeDesc) -> bool {
    match t {
        TypeDesc::Pointer { quals, .. } => quals.is_const,
        _ => false,
    }
}

fn is_array(tu: &TypedTu, e: &Expr) -> bool {
    matches!(tu.types.get(&e.id), Some(TypeDesc::Array { .. }))
}

fn is_pointer(tu: &TypedTu, e: &Expr) -> bool {
    tu.types.get(&e.id).is_some_and(|t| t.is_pointer())
}

impl<'a> Ctx<'a> {
    /// Follows a pointer value `cur` derived from the candidate upwards.
    fn pointer_use(&self, mut cur: &'a Expr) -> Use {
        loop {
            let Some(&p) = self.parent.get(&cur.id) else {
                return self.root_use(cur);
            };
            use ExprKind::*;
            match &p.kind {
                Binary(BinaryOp::Add | BinaryOp::Sub, ..) if is_pointer(self.tu, p) => cur = p,
                Cast(..) => {
                    let t = self.tu.type_of(p);
                    if t.is_pointer() {
                        cur = p;
                    } else if t.is_integer() {
                        return Use::Escape;
                    } else {
                        return Use::Read;
                    }
                }
                Conditional(c, ..) if c.id != cur.id => cur = p,
                Comma(_, r) if r.id == cur.id => cur = p,
                IncDec(..) => cur = p,
                Deref(_) => return self.lvalue_use(p),
                Member { arrow: true, .. } => return self.lvalue_use(p),
                Index(a, b) => {
                    let through =
                        (a.id == cur.id && is_pointer(self.tu, a)) || (b.id == cur.id && is_pointer(self.tu, b));
                    if !through {
                        return Use::Read;
                    }
                    return self.lvalue_use(p);
                }
                AddrOf(_) => return Use::Escape,
                Assign(l, r) if r.id == cur.id => {
                    return if const_target(self.tu.type_of(l)) {
                        Use::Read
                    } else {
                        Use::Escape
                    };
                }
                Call(callee, args) => {
                    if callee.id == cur.id {
                        return Use::Read;
                    }
                    let Some(i) = args.iter().position(|a| a.id == cur.id) else {
                        return Use::Read;
                    };
                    let ft = match self.tu.type_of(callee) {
                        TypeDesc::Pointer { pointee, .. } => pointee.as_ref(),
                        t => t,
                    };
                    let TypeDesc::Function { params, prototype, .. } = ft else {
                        return Use::Escape;
                    };
                    return match params.get(i) {
                        Some(t) if *prototype && const_target(t) => Use::Read,
                        _ => Use::Escape,
                    };
                }
                _ => return Use::Read,
            }
        }
    }

    /// An lvalue reached through the pointer, widened over member and array
    /// subobjects.
    fn lvalue_use(&self, mut lv: &'a Expr) -> Use {
        loop {
            let sub = self
                .parent
                .get(&lv.id)
                .is_some_and(|p| matches!(p.kind, ExprKind::Member { arrow: false, .. } | ExprKind::Index(..)));
            if is_array(self.tu, lv) && !sub {
                return self.pointer_use(lv);
            }
            let Some(&p) = self.parent.get(&lv.id) else {
                return Use::Read;
            };
            match &p.kind {
                ExprKind::Member { arrow: false, .. } => lv = p,
                ExprKind::Index(a, _) if a.id == lv.id && is_array(self.tu, lv) => lv = p,
                ExprKind::Index(_, b) if b.id == lv.id && is_array(self.tu, lv) => lv = p,
                ExprKind::Assign(l, _) | ExprKind::CompoundAssign(_, l, _) if l.id == lv.id => return Use::Write,
                ExprKind::IncDec(..) => return Use::Write,
                ExprKind::AddrOf(_) => return self.pointer_use(p),
                _ => return Use::Read,
            }
        }
    }

    fn root_use(&self, root: &Expr) -> Use {
        match self.roles.get(&root.id) {
            Some(FullExprRole::Return) => match &self.ret {
                Some(t) if !const_target(t) => Use::Escape,
                _ => Use::Read,
            },
            Some(FullExprRole::Initializer) => match self.inits.get(&root.id) {
                Some(InitTarget::Scalar(s)) if const_target(&self.tu.symbol(*s).ty) => Use::Read,
                _ => Use::Escape,
            },
            _ => Use::Read,
        }
    }
}

fn candidate(tu: &TypedTu, s: SymbolId) -> bool {
    let sym = tu.symbol(s);
    if sym.kind != SymbolKind::Object || sym.name.is_empty() {
        return false;
    }
    match &sym.ty {
        TypeDesc::Pointer { pointee, quals } => !quals.is_const && !matches!(**pointee, TypeDesc::Function { .. }),
        _ => false,
    }
}

pub(crate) fn check_r8_13(f: &FunctionFacts) -> Vec<Raw> {
    let tu = f.tu;
    let fes = roots(f);
    let mut ctx = Ctx {
        tu,
        parent: HashMap::new(),
        roles: HashMap::new(),
        inits: HashMap::new(),
        ret: match &tu.symbol(f.function.symbol).ty {
            TypeDesc::Function { ret, .. } => Some((**ret).clone()),
            _ => None,
        },
    };
    for fe in &fes {
        parents(fe.expr, &mut ctx.parent);
        ctx.roles.insert(fe.expr.id, fe.role);
    }
    for b in &f.cfg.blocks {
        for el in &b.elements {
            if let Element::Decl {
                symbol,
                init: Some(init),
                ..
            } = el
            {
                match init {
                    Initializer::Expr(e) => {
                        ctx.inits.insert(e.id, InitTarget::Scalar(*symbol));
                    }
                    Initializer::List { .. } => {
                        for e in init.exprs() {
                            ctx.inits.insert(e.id, InitTarget::Aggregate);
                        }
                    }
                }
            }
        }
    }

    let mut uses: HashMap<SymbolId, Vec<&Expr>> = HashMap::new();
    for fe in &fes {
        fe.expr.walk_evaluated(&mut |e| {
            if e.ident_name().is_some() {
                if let Some(s) = tu.symbol_of(e) {
                    uses.entry(s.id).or_default().push(e);
                }
            }
        });
    }

    let mut out = Vec::new();
    for &s in f.function.params.iter().chain(&f.function.locals) {
        if !candidate(tu, s) {
            continue;
        }
        let ok = uses.get(&s).into_iter().flatten().all(|u| {
            // `p = q` rebinds the pointer without touching its target
            if let Some(p) = ctx.parent.get(&u.id) {
                if let ExprKind::Assign(l, _) = &p.kind {
                    if l.id == u.id {
                        return true;
                    }
                }
                if matches!(p.kind, ExprKind::AddrOf(_)) {
                    return false;
                }
            }
            ctx.pointer_use(u) == Use::Read
        });
        if !ok {
            continue;
        }
        let sym = tu.symbol(s);
        let what = if sym.is_param { "parameter" } else { "variable" };
        out.push(
            Raw::new(
                "R8.13",
                &sym.def_span,
                Certainty::Definite,
                format!("pointer {what} `{}` could point to a const-qualified type", sym.name),
            )
            .note(
                None,
                format!(
                    "no store is made through `{}` and it is never passed on as a non-const pointer",
                    sym.name
                ),
            ),
        );
    }
    out
}
