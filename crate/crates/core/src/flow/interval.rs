use std::collections::{BTreeMap, HashMap, HashSet};
use std::fmt;

use serde::Serialize;

use super::cfg::{BlockId, Cfg, Edge, EdgeKind, Element};
use super::events::address_taken;
use super::solver::{solve, Forward};
use crate::parser::{BinaryOp, Expr, ExprKind, IncDecOp, Initializer, NodeId, UnaryOp};
use crate::sema::{int_range, wrap_to, SymbolId, SymbolKind, TypeDesc, TypedTu};

/// A closed integer range. Every value the analysis manipulates lies in the
/// range of some C integer type, so finite bounds suffice; bottom is
/// represented by `Option::None` at the use sites.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub struct Interval {
    pub lo: i128,
    pub hi: i128,
}

impl fmt::Display for Interval {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[{}, {}]", self.lo, self.hi)
    }
}

impl Interval {
    pub fn new(lo: i128, hi: i128) -> Self {
        debug_assert!(lo <= hi);
        Interval { lo, hi }
    }

    pub fn point(v: i128) -> Self {
        Interval { lo: v, hi: v }
    }

    /// Full range of an integer type; `None` for other types.
    pub fn of_type(t: &TypeDesc) -> Option<Self> {
        t.int_range().map(|(lo, hi)| Interval { lo, hi })
    }

    pub fn contains(&self, v: i128) -> bool {
        self.lo <= v && v <= self.hi
    }

    pub fn is_subset(&self, other: &Interval) -> bool {
        other.lo <= self.lo && self.hi <= other.hi
    }

    pub fn hull(&self, other: &Interval) -> Interval {
        Interval::new(self.lo.min(other.lo), self.hi.max(other.hi))
    }

    pub fn meet(&self, other: &Interval) -> Option<Interval> {
        let (lo, hi) = (self.lo.max(other.lo), self.hi.min(other.hi));
        (lo <= hi).then_some(Interval { lo, hi })
    }

    pub fn singleton(&self) -> Option<i128> {
        (self.lo == self.hi).then_some(self.lo)
    }

    /// Truth value when every member agrees.
    pub fn truth(&self) -> Option<bool> {
        if *self == Interval::point(0) {
            Some(false)
        } else if !self.contains(0) {
            Some(true)
        } else {
            None
        }
    }

    fn boolean(t: Option<bool>) -> Interval {
        match t {
            Some(v) => Interval::point(i128::from(v)),
            None => Interval::new(0, 1),
        }
    }
}

/// Converts a mathematical range to an integer type with modular
/// wraparound; ranges that straddle a wrap point become the full range.
pub fn convert(iv: Interval, signed: bool, width: u8) -> Interval {
    let (lo, hi) = int_range(signed, width);
    if lo <= iv.lo && iv.hi <= hi {
        return iv;
    }
    let span = hi - lo + 1;
    if iv.hi.saturating_sub(iv.lo) >= span {
        return Interval { lo, hi };
    }
    let (a, b) = (wrap_to(iv.lo, signed, width), wrap_to(iv.hi, signed, width));
    if a <= b {
        Interval::new(a, b)
    } else {
        Interval { lo, hi }
    }
}

fn corners(a: Interval, b: Interval, f: impl Fn(i128, i128) -> Option<i128>) -> Option<Interval> {
    let vals = [f(a.lo, b.lo), f(a.lo, b.hi), f(a.hi, b.lo), f(a.hi, b.hi)];
    let vals: Option<Vec<i128>> = vals.into_iter().collect();
    let vals = vals?;
    Some(Interval::new(*vals.iter().min()?, *vals.iter().max()?))
}

fn next_pow2_mask(v: i128) -> i128 {
    let mut m = 0i128;
    while m < v {
        m = (m << 1) | 1;
    }
    m
}

/// Arithmetic on mathematical (unbounded) values; `None` when the result
/// cannot be bounded better than the result type.
pub fn binary(op: BinaryOp, a: Interval, b: Interval, width: u8) -> Option<Interval> {
    use BinaryOp::*;
    match op {
        Add => Some(Interval::new(a.lo.checked_add(b.lo)?, a.hi.checked_add(b.hi)?)),
        Sub => Some(Interval::new(a.lo.checked_sub(b.hi)?, a.hi.checked_sub(b.lo)?)),
        Mul => corners(a, b, |x, y| x.checked_mul(y)),
        Div | Rem if b.contains(0) && b.singleton().is_some() => None,
        Div => {
            let mut out: Option<Interval> = None;
            for part in [
                Interval {
                    lo: b.lo,
                    hi: b.hi.min(-1),
                },
                Interval {
                    lo: b.lo.max(1),
                    hi: b.hi,
                },
            ] {
                if part.lo > part.hi || part.contains(0) {
                    continue;
                }
                let q = corners(a, part, |x, y| x.checked_div(y))?;
                out = Some(out.map_or(q, |o| o.hull(&q)));
            }
            out
        }
        Rem => {
            let m = b.lo.unsigned_abs().max(b.hi.unsigned_abs()) as i128 - 1;
            if a.lo >= 0 {
                Some(Interval::new(0, a.hi.min(m)))
            } else if a.hi <= 0 {
                Some(Interval::new(a.lo.max(-m), 0))
            } else {
                Some(Interval::new(a.lo.max(-m), a.hi.min(m)))
            }
        }
        BitAnd | BitOr | BitXor => {
            if let (Some(x), Some(y)) = (a.singleton(), b.singleton()) {
                return Some(Interval::point(match op {
                    BitAnd => x & y,
                    BitOr => x | y,
                    _ => x ^ y,
                }));
            }
            match op {
                BitAnd if a.lo >= 0 && b.lo >= 0 => Some(Interval::new(0, a.hi.min(b.hi))),
                BitAnd if a.lo >= 0 => Some(Interval::new(0, a.hi)),
                BitAnd if b.lo >= 0 => Some(Interval::new(0, b.hi)),
                BitOr | BitXor if a.lo >= 0 && b.lo >= 0 => Some(Interval::new(0, next_pow2_mask(a.hi.max(b.hi)))),
                _ => None,
            }
        }
        Shl | Shr => {
            if b.lo < 0 || b.hi >= i128::from(width) {
                return None;
            }
            if op == Shl {
                if a.lo < 0 {
                    return None;
                }
                Some(Interval::new(a.lo << b.lo, a.hi.checked_shl(b.hi as u32)?))
            } else {
                corners(a, b, |x, y| Some(x >> y))
            }
        }
        Lt => Some(Interval::boolean(if a.hi < b.lo {
            Some(true)
        } else if a.lo >= b.hi {
            Some(false)
        } else {
            None
        })),
        Gt => binary(Lt, b, a, width),
        Le => Some(Interval::boolean(if a.hi <= b.lo {
            Some(true)
        } else if a.lo > b.hi {
            Some(false)
        } else {
            None
        })),
        Ge => binary(Le, b, a, width),
        Eq => Some(Interval::boolean(match (a.singleton(), b.singleton()) {
            (Some(x), Some(y)) if x == y => Some(true),
            _ if a.meet(&b).is_none() => Some(false),
            _ => None,
        })),
        Ne => binary(Eq, a, b, width).map(|r| Interval::boolean(r.truth().map(|t| !t))),
        LogAnd => Some(Interval::boolean(match (a.truth(), b.truth()) {
            (Some(false), _) | (_, Some(false)) => Some(false),
            (Some(true), Some(true)) => Some(true),
            _ => None,
        })),
        LogOr => Some(Interval::boolean(match (a.truth(), b.truth()) {
            (Some(true), _) | (_, Some(true)) => Some(true),
            (Some(false), Some(false)) => Some(false),
            _ => None,
        })),
    }
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct IntervalState {
    pub vars: BTreeMap<SymbolId, Interval>,
    /// Values of split `?:` nodes.
    temps: BTreeMap<NodeId, Interval>,
}

#[derive(Debug, Clone)]
pub struct InfeasibleEdge {
    pub edge: Edge,
    pub cond: NodeId,
}

#[derive(Debug, Clone)]
pub struct IntervalFacts {
    pub block_in: Vec<Option<IntervalState>>,
    /// Range of every integer-valued expression evaluated in a feasible
    /// block, joined over the paths reaching it.
    pub exprs: HashMap<NodeId, Interval>,
    /// Edges out of feasible blocks that the condition rules out.
    pub infeasible: Vec<InfeasibleEdge>,
    pub tracked: Vec<SymbolId>,
    pub iterations: usize,
}

impl IntervalFacts {
    pub fn of(&self, e: &Expr) -> Option<Interval> {
        self.exprs.get(&e.id).copied()
    }

    pub fn feasible(&self, b: BlockId) -> bool {
        self.block_in[b.index()].is_some()
    }
}

struct Analysis<'t, 'c> {
    tu: &'t TypedTu,
    cfg: &'c Cfg<'c>,
    tracked: HashSet<SymbolId>,
    /// Value of the last block condition evaluated by `transfer`.
    last_cond: Option<Interval>,
    record: Option<HashMap<NodeId, Interval>>,
}

impl Analysis<'_, '_> {
    fn ty(&self, e: &Expr) -> Option<&TypeDesc> {
        self.tu.types.get(&e.id)
    }

    fn top(&self, e: &Expr) -> Option<Interval> {
        self.ty(e).and_then(Interval::of_type)
    }

    fn tracked_var(&self, e: &Expr) -> Option<SymbolId> {
        let s = self.tu.symbol_of(e)?;
        self.tracked.contains(&s.id).then_some(s.id)
    }

    fn convert_to(&self, iv: Interval, t: &TypeDesc) -> Option<Interval> {
        if *t == TypeDesc::Bool {
            return Some(Interval::boolean(iv.truth()));
        }
        let (s, w) = t.int_shape()?;
        Some(convert(iv, s, w))
    }

    /// Integer operand value converted to `t`.
    fn operand(&mut self, e: &Expr, st: &mut IntervalState, t: &TypeDesc) -> Option<Interval> {
        let v = self.eval(e, st)?;
        self.convert_to(v, t)
    }

    fn store(&mut self, target: &Expr, v: Option<Interval>, st: &mut IntervalState) -> Option<Interval> {
        let t = self.ty(target)?.clone();
        let v = v.and_then(|v| self.convert_to(v, &t)).or_else(|| Interval::of_type(&t));
        if let (Some(s), Some(v)) = (self.tracked_var(target), v) {
            st.vars.insert(s, v);
        }
        v
    }

    fn eval(&mut self, e: &Expr, st: &mut IntervalState) -> Option<Interval> {
        let v = self.eval_inner(e, st);
        let v = match (v, self.top(e)) {
            (Some(v), Some(top)) => Some(v.meet(&top).unwrap_or(top)),
            (_, top) => top,
        };
        self.note(e.id, v);
        v
    }

    fn note(&mut self, id: NodeId, v: Option<Interval>) {
        if let (Some(rec), Some(v)) = (self.record.as_mut(), v) {
            rec.entry(id).and_modify(|x| *x = x.hull(&v)).or_insert(v);
        }
    }

    fn eval_inner(&mut self, e: &Expr, st: &mut IntervalState) -> Option<Interval> {
        let rt = self.ty(e).cloned()?;
        if self.cfg.split.contains(&e.id) {
            return match &e.kind {
                ExprKind::Conditional(..) => st.temps.get(&e.id).copied(),
                _ => Some(Interval::new(0, 1)),
            };
        }
        match &e.kind {
            ExprKind::IntConst(_) | ExprKind::CharConst { .. } | ExprKind::SizeofExpr(_) | ExprKind::SizeofType(_) => {
                self.tu.const_eval(e).as_int().map(Interval::point)
            }
            ExprKind::Ident(_) => {
                let sym = self.tu.symbol_of(e)?;
                if sym.kind == SymbolKind::EnumConstant {
                    return sym.enum_value.map(Interval::point);
                }
                match self.tracked_var(e) {
                    Some(s) => st.vars.get(&s).copied(),
                    None => None,
                }
            }
            ExprKind::Unary(UnaryOp::Not, a) => {
                let v = self.eval(a, st);
                Some(Interval::boolean(v.and_then(|v| v.truth()).map(|t| !t)))
            }
            ExprKind::Unary(op, a) => {
                let v = self.operand(a, st, &rt)?;
                match op {
                    UnaryOp::Plus => Some(v),
                    UnaryOp::Neg => {
                        let r = Interval::new(-v.hi, -v.lo);
                        self.arith_result(r, &rt)
                    }
                    UnaryOp::BitNot => {
                        let r = Interval::new(!v.hi, !v.lo);
                        self.convert_to(r, &rt)
                    }
                    UnaryOp::Not => unreachable!(),
                }
            }
            ExprKind::Binary(op, a, b) => {
                let (ta, tb) = (self.ty(a).cloned()?, self.ty(b).cloned()?);
                let common = if op.is_shift() {
                    self.tu.model.promote(&ta)
                } else if op.is_comparison() || op.is_logical() {
                    if ta.is_arithmetic() && tb.is_arithmetic() {
                        self.tu.model.usual_arithmetic(&ta, &tb)
                    } else {
                        // pointers: evaluate for effects only
                        self.eval(a, st);
                        self.eval(b, st);
                        return Some(Interval::new(0, 1));
                    }
                } else {
                    rt.clone()
                };
                let va = self.operand(a, st, &common);
                let vb = if op.is_shift() {
                    let pb = self.tu.model.promote(&tb);
                    self.operand(b, st, &pb)
                } else {
                    self.operand(b, st, &common)
                };
                let (va, vb) = (va?, vb?);
                let width = common.int_shape().map_or(0, |x| x.1);
                let r = binary(*op, va, vb, width)?;
                if op.is_comparison() || op.is_logical() {
                    Some(r)
                } else {
                    self.arith_result(r, &rt)
                }
            }
            ExprKind::Assign(l, r) => {
                self.lvalue_effects(l, st);
                let v = self.eval(r, st);
                self.store(l, v, st)
            }
            ExprKind::CompoundAssign(op, l, r) => {
                self.lvalue_effects(l, st);
                let lt = self.ty(l).cloned()?;
                let old = self
                    .tracked_var(l)
                    .and_then(|s| st.vars.get(&s).copied())
                    .or_else(|| self.top(l));
                // the target is read as well as written
                self.note(l.id, old);
                let tr = self.ty(r).cloned()?;
                let rv = self.eval(r, st);
                let v = if lt.is_integer() && tr.is_integer() {
                    let common = if op.is_shift() {
                        self.tu.model.promote(&lt)
                    } else {
                        self.tu.model.usual_arithmetic(&lt, &tr)
                    };
                    match (
                        old.and_then(|o| self.convert_to(o, &common)),
                        rv.and_then(|x| self.convert_to(x, &common)),
                    ) {
                        (Some(a), Some(b)) => {
                            let width = common.int_shape().map_or(0, |x| x.1);
                            binary(*op, a, b, width).and_then(|x| self.arith_result(x, &common))
                        }
                        _ => None,
                    }
                } else {
                    None
                };
                self.store(l, v, st)
            }
            ExprKind::IncDec(op, l) => {
                self.lvalue_effects(l, st);
                let old = self
                    .tracked_var(l)
                    .and_then(|s| st.vars.get(&s).copied())
                    .or_else(|| self.top(l));
                self.note(l.id, old);
                let old = old?;
                let d = if op.is_increment() { 1 } else { -1 };
                let new = Interval::new(old.lo + d, old.hi + d);
                let (s, w) = rt.int_shape()?;
                let stored = if s {
                    self.arith_result(new, &rt)
                } else {
                    Some(convert(new, s, w))
                };
                self.store(l, stored, st);
                if matches!(op, IncDecOp::PreInc | IncDecOp::PreDec) {
                    stored
                } else {
                    Some(old)
                }
            }
            ExprKind::Cast(_, a) => {
                let v = self.eval(a, st);
                let from = self.ty(a)?;
                if from.is_integer() {
                    self.convert_to(v?, &rt)
                } else {
                    None
                }
            }
            ExprKind::Comma(a, b) => {
                self.eval(a, st);
                self.eval(b, st)
            }
            ExprKind::Conditional(c, a, b) => {
                // only reached for conditionals that were not split
                let vc = self.eval(c, st);
                let va = self.operand(a, st, &rt);
                let vb = self.operand(b, st, &rt);
                match vc.and_then(|c| c.truth()) {
                    Some(true) => va,
                    Some(false) => vb,
                    None => Some(va?.hull(&vb?)),
                }
            }
            ExprKind::Call(f, args) => {
                self.eval(f, st);
                for a in args {
                    self.eval(a, st);
                }
                None
            }
            ExprKind::Index(..) | ExprKind::Member { .. } | ExprKind::Deref(_) => {
                self.lvalue_effects(e, st);
                None
            }
            ExprKind::AddrOf(a) => {
                self.lvalue_effects(a, st);
                None
            }
            ExprKind::FloatConst { .. } | ExprKind::StringLit { .. } => None,
        }
    }

    /// Signed results outside the type are undefined; they are given the
    /// full type range. Unsigned results wrap.
    fn arith_result(&self, r: Interval, t: &TypeDesc) -> Option<Interval> {
        let (s, w) = t.int_shape()?;
        let (lo, hi) = int_range(s, w);
        if s && (r.lo < lo || r.hi > hi) {
            return Some(Interval { lo, hi });
        }
        Some(convert(r, s, w))
    }

    fn lvalue_effects(&mut self, e: &Expr, st: &mut IntervalState) {
        match &e.kind {
            ExprKind::Ident(_) => {}
            ExprKind::Member { base, arrow: false, .. } => self.lvalue_effects(base, st),
            ExprKind::Member { base, arrow: true, .. } | ExprKind::Deref(base) => {
                self.eval(base, st);
            }
            ExprKind::Index(a, b) => {
                for x in [a, b] {
                    if matches!(self.ty(x), Some(TypeDesc::Array { .. })) {
                        self.lvalue_effects(x, st);
                    } else {
                        self.eval(x, st);
                    }
                }
            }
            _ => {
                self.eval(e, st);
            }
        }
    }

    fn init(&mut self, symbol: SymbolId, init: &Initializer, st: &mut IntervalState) {
        let mut value = None;
        for x in init.exprs() {
            value = self.eval(x, st);
        }
        if self.tracked.contains(&symbol) {
            let t = self.tu.symbol(symbol).ty.clone();
            let v = value
                .and_then(|v| self.convert_to(v, &t))
                .or_else(|| Interval::of_type(&t));
            if let Some(v) = v {
                st.vars.insert(symbol, v);
            }
        }
    }

    fn is_pure(e: &Expr) -> bool {
        let mut pure = true;
        e.walk_evaluated(&mut |x| {
            if matches!(
                x.kind,
                ExprKind::Assign(..) | ExprKind::CompoundAssign(..) | ExprKind::IncDec(..) | ExprKind::Call(..)
            ) {
                pure = false;
            }
        });
        pure
    }

    /// Narrows variables compared in a side-effect-free condition.
    fn refine(&mut self, e: &Expr, truth: bool, st: &mut IntervalState) -> bool {
        match &e.kind {
            ExprKind::Unary(UnaryOp::Not, a) => self.refine(a, !truth, st),
            ExprKind::Ident(_) => {
                let Some(s) = self.tracked_var(e) else { return true };
                let Some(v) = st.vars.get(&s).copied() else { return true };
                let nv = if truth {
                    if v.lo == 0 {
                        (v.hi > 0).then(|| Interval::new(1, v.hi))
                    } else if v.hi == 0 {
                        (v.lo < 0).then(|| Interval::new(v.lo, -1))
                    } else {
                        Some(v)
                    }
                } else {
                    v.meet(&Interval::point(0))
                };
                match nv {
                    Some(nv) => {
                        st.vars.insert(s, nv);
                        true
                    }
                    None => false,
                }
            }
            ExprKind::Binary(op, a, b) if op.is_comparison() => {
                let (Some(ta), Some(tb)) = (self.ty(a).cloned(), self.ty(b).cloned()) else {
                    return true;
                };
                if !ta.is_integer() || !tb.is_integer() {
                    return true;
                }
                let common = self.tu.model.usual_arithmetic(&ta, &tb);
                let saved = self.record.take();
                let mut scratch = st.clone();
                let va = self.eval(a, &mut scratch);
                let vb = self.eval(b, &mut scratch);
                self.record = saved;
                let (Some(va), Some(vb)) = (va, vb) else { return true };
                // refinement is only exact when both sides keep their
                // mathematical value in the comparison type
                let Some(ct) = Interval::of_type(&common) else {
                    return true;
                };
                if !va.is_subset(&ct) || !vb.is_subset(&ct) {
                    return true;
                }
                let op = if truth { *op } else { negate(*op) };
                let mut ok = true;
                if let Some(s) = self.tracked_var(a) {
                    ok &= narrow(st, s, op, vb);
                }
                if let Some(s) = self.tracked_var(b) {
                    ok &= narrow(st, s, flip(op), va);
                }
                ok
            }
            _ => true,
        }
    }
}

fn negate(op: BinaryOp) -> BinaryOp {
    use BinaryOp::*;
    match op {
        Lt => Ge,
        Ge => Lt,
        Gt => Le,
        Le => Gt,
        Eq => Ne,
        Ne => Eq,
        other => other,
    }
}

fn flip(op: BinaryOp) -> BinaryOp {
    use BinaryOp::*;
    match op {
        Lt => Gt,
        Gt => Lt,
        Le => Ge,
        Ge => Le,
        other => other,
    }
}

/// Applies `x op other` to the range of `x`; false when no value remains.
fn narrow(st: &mut IntervalState, s: SymbolId, op: BinaryOp, other: Interval) -> bool {
    use BinaryOp::*;
    let Some(x) = st.vars.get(&s).copied() else { return true };
    let bound = match op {
        Lt => other.hi.checked_sub(1).map(|h| Interval::new(i128::MIN, h)),
        Le => Some(Interval::new(i128::MIN, other.hi)),
        Gt => other.lo.checked_add(1).map(|l| Interval::new(l, i128::MAX)),
        Ge => Some(Interval::new(other.lo, i128::MAX)),
        Eq => Some(other),
        Ne => match other.singleton() {
            Some(v) if v == x.lo && v == x.hi => return false,
            Some(v) if v == x.lo => Some(Interval::new(x.lo + 1, x.hi)),
            Some(v) if v == x.hi => Some(Interval::new(x.lo, x.hi - 1)),
            _ => None,
        },
        _ => None,
    };
    let Some(bound) = bound else { return true };
    match x.meet(&bound) {
        Some(n) => {
            st.vars.insert(s, n);
            true
        }
        None => false,
    }
}

impl Forward for Analysis<'_, '_> {
    type State = IntervalState;

    fn entry_state(&self) -> IntervalState {
        let mut st = IntervalState::default();
        for s in &self.tracked {
            if let Some(iv) = Interval::of_type(&self.tu.symbol(*s).ty) {
                st.vars.insert(*s, iv);
            }
        }
        st
    }

    fn transfer(&mut self, block: BlockId, st: &mut IntervalState) {
        let b = &self.cfg.blocks[block.index()];
        for el in &b.elements {
            match el {
                Element::Eval(e) => {
                    self.eval(e, st);
                }
                Element::Arm { node, value } => {
                    let t = self.tu.types.get(node).cloned();
                    let v = self.eval(value, st);
                    let v = match (v, t) {
                        (Some(v), Some(t)) => self.convert_to(v, &t),
                        _ => None,
                    };
                    self.note(*node, v);
                    match v {
                        Some(v) => st.temps.insert(*node, v),
                        None => st.temps.remove(node),
                    };
                }
                Element::Decl { symbol, init, .. } => match init {
                    Some(i) => self.init(*symbol, i, st),
                    None => {
                        if let Some(iv) = Interval::of_type(&self.tu.symbol(*symbol).ty) {
                            if self.tracked.contains(symbol) {
                                st.vars.insert(*symbol, iv);
                            }
                        }
                    }
                },
            }
        }
        self.last_cond = b.cond.and_then(|c| self.eval(c, st));
    }

    fn along(&mut self, edge: &Edge, st: &IntervalState) -> Option<IntervalState> {
        let truth = match edge.kind {
            EdgeKind::TrueBranch => true,
            EdgeKind::FalseBranch => false,
            _ => return Some(st.clone()),
        };
        if let Some(c) = self.last_cond.and_then(|c| c.truth()) {
            if c != truth {
                return None;
            }
        }
        let cond = self.cfg.blocks[edge.from.index()].cond?;
        let mut out = st.clone();
        if Self::is_pure(cond) && !self.cfg.split.contains(&cond.id) && !self.refine(cond, truth, &mut out) {
            return None;
        }
        Some(out)
    }

    fn join(&self, into: &mut IntervalState, other: &IntervalState) {
        for (k, v) in into.vars.iter_mut() {
            if let Some(o) = other.vars.get(k) {
                *v = v.hull(o);
            }
        }
        into.temps.retain(|k, v| match other.temps.get(k) {
            Some(o) => {
                *v = v.hull(o);
                true
            }
            None => false,
        });
    }

    fn widen(&self, old: &IntervalState, new: &mut IntervalState) {
        for (k, v) in new.vars.iter_mut() {
            let (Some(o), Some(top)) = (old.vars.get(k), Interval::of_type(&self.tu.symbol(*k).ty)) else {
                continue;
            };
            if v.lo < o.lo {
                v.lo = top.lo;
            }
            if v.hi > o.hi {
                v.hi = top.hi;
            }
        }
        for (k, v) in new.temps.iter_mut() {
            if old.temps.get(k) != Some(v) {
                if let Some(top) = self.tu.types.get(k).and_then(Interval::of_type) {
                    *v = top;
                }
            }
        }
    }
}

/// Forward interval analysis over integer locals whose address is never
/// taken; every other object is assumed to hold any value of its type.
pub fn interval_analysis(tu: &TypedTu, cfg: &Cfg) -> IntervalFacts {
    let taken = address_taken(tu, cfg);
    let tracked: HashSet<SymbolId> = cfg
        .params
        .iter()
        .chain(&cfg.locals)
        .copied()
        .filter(|s| {
            let sym = tu.symbol(*s);
            sym.is_automatic_object() && sym.ty.is_integer() && !sym.quals.is_volatile && !taken.contains(s)
        })
        .collect();
    let mut a = Analysis {
        tu,
        cfg,
        tracked,
        last_cond: None,
        record: None,
    };
    let sol = solve(cfg, &mut a);
    a.record = Some(HashMap::new());
    let mut infeasible = Vec::new();
    for (i, st) in sol.block_in.iter().enumerate() {
        let Some(st) = st else { continue };
        let b = BlockId(i as u32);
        let mut st = st.clone();
        a.transfer(b, &mut st);
        for e in cfg.successors(b) {
            if a.along(e, &st).is_none() {
                infeasible.push(InfeasibleEdge {
                    edge: *e,
                    cond: cfg.blocks[i].cond.map_or(NodeId(u32::MAX), |c| c.id),
                });
            }
        }
    }
    let mut exprs = a.record.take().unwrap_or_default();
    // `&&` and `||` lowered into branches are never evaluated as a whole
    let arms: HashSet<NodeId> = cfg
        .blocks
        .iter()
        .flat_map(|b| &b.elements)
        .filter_map(|el| match el {
            Element::Arm { node, .. } => Some(*node),
            _ => None,
        })
        .collect();
    for id in cfg.split.difference(&arms) {
        exprs.entry(*id).or_insert(Interval::new(0, 1));
    }
    let mut tracked: Vec<SymbolId> = a.tracked.iter().copied().collect();
    tracked.sort();
    IntervalFacts {
        block_in: sol.block_in,
        exprs,
        infeasible,
        tracked,
        iterations: sol.iterations,
    }
}
