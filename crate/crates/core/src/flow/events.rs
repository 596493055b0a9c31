//! Variable reads and writes of CFG elements in evaluation order.

use std::collections::HashSet;

use super::cfg::{Cfg, Element};
use crate::parser::{Expr, ExprKind, NodeId};
use crate::sema::{SymbolId, SymbolKind, TypeDesc, TypedTu};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Event {
    Read(SymbolId, NodeId),
    Write(SymbolId, NodeId),
    AddressTaken(SymbolId),
    /// Control reaches a declaration without an initializer.
    Declare(SymbolId),
}

pub(crate) struct EventWalker<'t, 'c> {
    pub tu: &'t TypedTu,
    pub split: &'c HashSet<NodeId>,
}

impl EventWalker<'_, '_> {
    pub fn element(&self, el: &Element, out: &mut Vec<Event>) {
        match el {
            Element::Eval(e) | Element::Arm { value: e, .. } => self.rvalue(e, out),
            Element::Decl { symbol, init, .. } => match init {
                Some(i) => {
                    for e in i.exprs() {
                        self.rvalue(e, out);
                    }
                    out.push(Event::Write(*symbol, NodeId(u32::MAX)));
                }
                None => out.push(Event::Declare(*symbol)),
            },
        }
    }

    fn object(&self, e: &Expr) -> Option<SymbolId> {
        let sym = self.tu.symbol_of(e)?;
        (sym.kind == SymbolKind::Object).then_some(sym.id)
    }

    fn is_array(&self, e: &Expr) -> bool {
        matches!(self.tu.types.get(&e.id), Some(TypeDesc::Array { .. }))
    }

    pub fn rvalue(&self, e: &Expr, out: &mut Vec<Event>) {
        if self.split.contains(&e.id) {
            return;
        }
        match &e.kind {
            ExprKind::Ident(_) => {
                if let Some(s) = self.object(e) {
                    if self.is_array(e) {
                        out.push(Event::AddressTaken(s));
                    } else {
                        out.push(Event::Read(s, e.id));
                    }
                }
            }
            ExprKind::SizeofExpr(_) | ExprKind::SizeofType(_) => {}
            ExprKind::Assign(l, r) => {
                self.rvalue(r, out);
                self.lvalue(l, out);
                if let Some(s) = l.ident_name().and(self.object(l)) {
                    out.push(Event::Write(s, l.id));
                }
            }
            ExprKind::CompoundAssign(_, l, r) => {
                self.lvalue(l, out);
                let s = l.ident_name().and(self.object(l));
                if let Some(s) = s {
                    out.push(Event::Read(s, l.id));
                }
                self.rvalue(r, out);
                if let Some(s) = s {
                    out.push(Event::Write(s, l.id));
                }
            }
            ExprKind::IncDec(_, l) => {
                self.lvalue(l, out);
                if let Some(s) = l.ident_name().and(self.object(l)) {
                    out.push(Event::Read(s, l.id));
                    out.push(Event::Write(s, l.id));
                }
            }
            ExprKind::AddrOf(a) => {
                self.lvalue(a, out);
                if let Some(s) = self.lvalue_root(a) {
                    out.push(Event::AddressTaken(s));
                }
            }
            ExprKind::Member { base, arrow, .. } => {
                if *arrow {
                    self.rvalue(base, out);
                } else {
                    self.lvalue(base, out);
                    if self.is_array(e) {
                        if let Some(s) = self.lvalue_root(base) {
                            out.push(Event::AddressTaken(s));
                        }
                    }
                }
            }
            ExprKind::Index(a, b) => {
                for x in [a, b] {
                    if self.is_array(x) {
                        self.lvalue(x, out);
                    } else {
                        self.rvalue(x, out);
                    }
                }
            }
            _ => {
                for c in e.children() {
                    self.rvalue(c, out);
                }
            }
        }
    }

    /// Evaluation of an lvalue designator: operands computing the address
    /// are read, the designated object itself is not.
    pub fn lvalue(&self, e: &Expr, out: &mut Vec<Event>) {
        match &e.kind {
            ExprKind::Ident(_) => {}
            ExprKind::Member { base, arrow: false, .. } => self.lvalue(base, out),
            ExprKind::Member { base, arrow: true, .. } => self.rvalue(base, out),
            ExprKind::Index(..) => self.rvalue(e, out),
            ExprKind::Deref(a) => self.rvalue(a, out),
            _ => self.rvalue(e, out),
        }
    }

    /// The named object an lvalue designates storage within, if it is not
    /// reached through a pointer.
    pub fn lvalue_root(&self, e: &Expr) -> Option<SymbolId> {
        match &e.kind {
            ExprKind::Ident(_) => self.object(e),
            ExprKind::Member { base, arrow: false, .. } => self.lvalue_root(base),
            ExprKind::Index(a, b) => {
                if self.is_array(a) {
                    self.lvalue_root(a)
                } else if self.is_array(b) {
                    self.lvalue_root(b)
                } else {
                    None
                }
            }
            _ => None,
        }
    }
}

/// Locals and parameters whose address is taken anywhere in the function,
/// arrays decaying to pointers included.
pub fn address_taken(tu: &TypedTu, cfg: &Cfg) -> HashSet<SymbolId> {
    let w = EventWalker { tu, split: &cfg.split };
    let mut out = Vec::new();
    for b in &cfg.blocks {
        for el in &b.elements {
            w.element(el, &mut out);
        }
        if let Some(c) = b.cond {
            w.rvalue(c, &mut out);
        }
    }
    out.into_iter()
        .filter_map(|e| match e {
            Event::AddressTaken(s) => Some(s),
            _ => None,
        })
        .collect()
}
