use std::collections::HashSet;

use super::roots;
use crate::flow::{address_taken, FunctionFacts, PointsToSet, Target};
use crate::parser::{expr_text, Expr, ExprKind};
use crate::rules::{Certainty, Raw};
use crate::sema::{SymbolId, SymbolKind, TypeDesc, TypedTu};

#[derive(Debug, Clone, PartialEq)]
enum Step {
    Field(String),
    Index(i128),
}

#[derive(Debug, Clone)]
enum Obj<'a> {
    /// Storage within a named object; `exact` is false once a path step is
    /// not a constant.
    Named {
        sym: SymbolId,
        path: Vec<Step>,
        exact: bool,
    },
    /// Storage reached through the pointer value `base`.
    Indirect { base: &'a Expr },
    /// Whatever a function call may touch.
    Call,
}

#[derive(Debug, Clone)]
struct Access<'a> {
    obj: Obj<'a>,
    expr: &'a Expr,
    write: bool,
}

struct Conflict<'a> {
    certainty: Certainty,
    site: &'a Expr,
    first: Access<'a>,
    second: Access<'a>,
}

struct Walker<'a, 'f> {
    tu: &'a TypedTu,
    facts: &'f FunctionFacts<'a>,
    taken: HashSet<SymbolId>,
    conflicts: Vec<Conflict<'a>>,
}

fn prefix(a: &[Step], b: &[Step]) -> bool {
    a.iter().zip(b).all(|(x, y)| x == y)
}

impl<'a> Walker<'a, '_> {
    fn named(&self, e: &Expr) -> Option<SymbolId> {
        let s = self.tu.symbol_of(e)?;
        (s.kind == SymbolKind::Object && e.ident_name().is_some()).then_some(s.id)
    }

    fn is_array(&self, e: &Expr) -> bool {
        matches!(self.tu.types.get(&e.id), Some(TypeDesc::Array { .. }))
    }

    fn aliasable(&self, sym: SymbolId) -> bool {
        let s = self.tu.symbol(sym);
        !s.is_automatic_object() || self.taken.contains(&sym) || matches!(s.ty, TypeDesc::Array { .. })
    }

    fn targets(&self, base: &Expr) -> Option<&PointsToSet> {
        self.facts
            .points_to
            .of(base)
            .filter(|s| !s.has_unknown() && !s.targets.is_empty())
    }

    fn may_target(&self, base: &Expr, sym: SymbolId) -> bool {
        match self.targets(base) {
            Some(set) => set.targets.contains(&Target::Named(sym)),
            None => self.aliasable(sym),
        }
    }

    fn may_overlap(&self, a: &Expr, b: &Expr) -> bool {
        match (self.targets(a), self.targets(b)) {
            (Some(x), Some(y)) => !x.targets.is_disjoint(&y.targets),
            _ => true,
        }
    }

    fn conflict(&self, a: &Access, b: &Access) -> Option<Certainty> {
        if !a.write && !b.write {
            return None;
        }
        use Obj::*;
        match (&a.obj, &b.obj) {
            (
                Named {
                    sym: s1,
                    path: p1,
                    exact: e1,
                },
                Named {
                    sym: s2,
                    path: p2,
                    exact: e2,
                },
            ) => {
                if s1 != s2 {
                    return None;
                }
                let overlap = prefix(p1, p2);
                let certain = *e1 && *e2;
                match (overlap, certain) {
                    (true, true) => Some(Certainty::Definite),
                    (false, true) => None,
                    (true, false) => Some(Certainty::Caution),
                    // inexact paths agree up to the first unknown step
                    (false, false) => None,
                }
            }
            (Indirect { base }, Named { sym, .. }) | (Named { sym, .. }, Indirect { base }) => {
                self.may_target(base, *sym).then_some(Certainty::Caution)
            }
            (Indirect { base: x }, Indirect { base: y }) => self.may_overlap(x, y).then_some(Certainty::Caution),
            (Call, Call) => Some(Certainty::Definite),
            (Call, Named { sym, .. }) | (Named { sym, .. }, Call) => self.aliasable(*sym).then_some(Certainty::Caution),
            (Call, Indirect { .. }) | (Indirect { .. }, Call) => Some(Certainty::Caution),
        }
    }

    fn record(&mut self, site: &'a Expr, a: &Access<'a>, b: &Access<'a>, c: Certainty) {
        self.conflicts.push(Conflict {
            certainty: c,
            site,
            first: a.clone(),
            second: b.clone(),
        });
    }

    /// Checks every pair of accesses taken from different unsequenced
    /// operand groups.
    fn cross(&mut self, site: &'a Expr, groups: &[Vec<Access<'a>>]) {
        for i in 0..groups.len() {
            for j in i + 1..groups.len() {
                for a in &groups[i] {
                    for b in &groups[j] {
                        if let Some(c) = self.conflict(a, b) {
                            self.record(site, a, b, c);
                        }
                    }
                }
            }
        }
    }

    fn read(&self, obj: Obj<'a>, expr: &'a Expr) -> Access<'a> {
        // reading a volatile object is itself a side effect
        let write = self.tu.is_volatile_lvalue(expr);
        Access { obj, expr, write }
    }

    /// Accesses made while designating the lvalue `e`, and the object it
    /// designates.
    fn lvalue(&mut self, e: &'a Expr) -> (Vec<Access<'a>>, Option<Obj<'a>>) {
        match &e.kind {
            ExprKind::Ident(_) => match self.named(e) {
                Some(sym) => (
                    Vec::new(),
                    Some(Obj::Named {
                        sym,
                        path: Vec::new(),
                        exact: true,
                    }),
                ),
                None => (Vec::new(), None),
            },
            ExprKind::Member {
                base,
                field,
                arrow: false,
            } => {
                let (subs, obj) = self.lvalue(base);
                let obj = obj.map(|o| match o {
                    Obj::Named { sym, mut path, exact } => {
                        if exact {
                            path.push(Step::Field(field.clone()));
                        }
                        Obj::Named { sym, path, exact }
                    }
                    other => other,
                });
                (subs, obj)
            }
            ExprKind::Member { base, arrow: true, .. } => (self.rvalue(base), Some(Obj::Indirect { base })),
            ExprKind::Deref(p) => (self.rvalue(p), Some(Obj::Indirect { base: p })),
            ExprKind::Index(a, b) => {
                let base_like = |x: &Expr| self.is_array(x) || self.tu.types.get(&x.id).is_some_and(|t| t.is_pointer());
                let (arr, idx) = if base_like(b) && !base_like(a) { (b, a) } else { (a, b) };
                if self.is_array(arr) {
                    let (subs, obj) = self.lvalue(arr);
                    let ia = self.rvalue(idx);
                    self.cross(e, &[subs.clone(), ia.clone()]);
                    let obj = obj.map(|o| match o {
                        Obj::Named { sym, mut path, exact } => match self.tu.const_eval(idx).as_int() {
                            Some(v) if exact => {
                                path.push(Step::Index(v));
                                Obj::Named { sym, path, exact }
                            }
                            _ => Obj::Named {
                                sym,
                                path,
                                exact: false,
                            },
                        },
                        other => other,
                    });
                    ([subs, ia].concat(), obj)
                } else {
                    let pa = self.rvalue(arr);
                    let ia = self.rvalue(idx);
                    self.cross(e, &[pa.clone(), ia.clone()]);
                    ([pa, ia].concat(), Some(Obj::Indirect { base: arr }))
                }
            }
            _ => (self.rvalue(e), None),
        }
    }

    fn store(&mut self, e: &'a Expr, l: &'a Expr, r: Option<&'a Expr>, reads_target: bool) -> Vec<Access<'a>> {
        let (subs, target) = self.lvalue(l);
        let rhs = r.map(|r| self.rvalue(r)).unwrap_or_default();
        self.cross(e, &[subs.clone(), rhs.clone()]);
        let mut out = [subs, rhs.clone()].concat();
        if let Some(obj) = target {
            let w = Access {
                obj: obj.clone(),
                expr: l,
                write: true,
            };
            for a in &rhs {
                if matches!(a.obj, Obj::Call) {
                    continue;
                }
                if a.write {
                    if let Some(c) = self.conflict(&w, a) {
                        self.record(e, &w, a, c);
                    }
                } else {
                    let indirect = matches!(w.obj, Obj::Indirect { .. }) || matches!(a.obj, Obj::Indirect { .. });
                    if indirect && expr_text(a.expr) != expr_text(l) && self.conflict(&w, a).is_some() {
                        self.record(e, &w, a, Certainty::Caution);
                    }
                }
            }
            if reads_target {
                out.push(self.read(obj, l));
            }
            out.push(w);
        }
        out
    }

    fn rvalue(&mut self, e: &'a Expr) -> Vec<Access<'a>> {
        use ExprKind::*;
        match &e.kind {
            SizeofExpr(_) | SizeofType(_) | IntConst(_) | FloatConst { .. } | CharConst { .. } | StringLit { .. } => {
                Vec::new()
            }
            Ident(_) | Member { .. } | Deref(_) | Index(..) => {
                let (mut subs, obj) = self.lvalue(e);
                // an array operand decays to its address without an access
                if let Some(obj) = obj.filter(|_| !self.is_array(e)) {
                    subs.push(self.read(obj, e));
                }
                subs
            }
            AddrOf(x) => self.lvalue(x).0,
            Assign(l, r) => self.store(e, l, Some(r), false),
            CompoundAssign(_, l, r) => self.store(e, l, Some(r), true),
            IncDec(_, l) => self.store(e, l, None, true),
            Call(f, args) => {
                let mut groups = vec![self.rvalue(f)];
                for a in args {
                    groups.push(self.rvalue(a));
                }
                self.cross(e, &groups);
                let mut out = groups.concat();
                out.push(Access {
                    obj: Obj::Call,
                    expr: e,
                    write: true,
                });
                out
            }
            Binary(op, l, r) => {
                let a = self.rvalue(l);
                let b = self.rvalue(r);
                if !op.is_logical() {
                    self.cross(e, &[a.clone(), b.clone()]);
                }
                [a, b].concat()
            }
            _ => e.children().into_iter().flat_map(|c| self.rvalue(c)).collect(),
        }
    }
}

fn describe(tu: &TypedTu, a: &Access) -> String {
    let what = match &a.obj {
        Obj::Call => return format!("call `{}` may read or modify any object", expr_text(a.expr)),
        Obj::Named { sym, .. } => format!("`{}`", tu.symbol(*sym).name),
        Obj::Indirect { base } => format!("the object `{}` points to", expr_text(base)),
    };
    let kind = if a.write { "modifies" } else { "reads" };
    format!("`{}` {kind} {what}", expr_text(a.expr))
}

pub(crate) fn check_r13_2(f: &FunctionFacts) -> Vec<Raw> {
    let tu = f.tu;
    let mut out = Vec::new();
    let taken = address_taken(tu, &f.cfg);
    for fe in roots(f) {
        let mut w = Walker {
            tu,
            facts: f,
            taken: taken.clone(),
            conflicts: Vec::new(),
        };
        w.rvalue(fe.expr);
        let best = w
            .conflicts
            .iter()
            .find(|c| c.certainty == Certainty::Definite)
            .or_else(|| w.conflicts.first());
        let Some(c) = best else { continue };
        let message = match c.certainty {
            Certainty::Definite => "value depends on the order of evaluation of unsequenced operands",
            Certainty::Caution => "value may depend on the order of evaluation of unsequenced operands",
        };
        let mut raw = Raw::new("R13.2", &c.site.span, c.certainty, message)
            .note(Some(&c.first.expr.span), describe(tu, &c.first))
            .note(Some(&c.second.expr.span), describe(tu, &c.second));
        if c.certainty == Certainty::Caution {
            raw = raw.note(None, "the two accesses may or may not refer to the same object");
        }
        out.push(raw);
    }
    out
}
