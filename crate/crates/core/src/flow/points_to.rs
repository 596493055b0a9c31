use std::collections::{BTreeMap, BTreeSet, HashMap, HashSet};

use super::cfg::{BlockId, Cfg, Element};
use super::events::address_taken;
use super::solver::{solve, Forward};
use crate::parser::{BinaryOp, Expr, ExprKind, NodeId};
use crate::sema::{SymbolId, SymbolKind, TypeDesc, TypedTu};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Target {
    Named(SymbolId),
    /// A string literal, by the node id of the literal.
    Literal(NodeId),
    Unknown,
}

/// Possible targets of a pointer value. Concrete targets are kept next to
/// `Unknown` so that partial knowledge remains visible to the checkers.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Default)]
pub struct PointsToSet {
    pub targets: BTreeSet<Target>,
}

impl PointsToSet {
    pub fn unknown() -> Self {
        Self::of(Target::Unknown)
    }

    pub fn of(t: Target) -> Self {
        PointsToSet {
            targets: BTreeSet::from([t]),
        }
    }

    pub fn union(&mut self, other: &PointsToSet) {
        self.targets.extend(other.targets.iter().copied());
    }

    pub fn has_unknown(&self) -> bool {
        self.targets.contains(&Target::Unknown)
    }

    pub fn literals(&self) -> impl Iterator<Item = NodeId> + '_ {
        self.targets.iter().filter_map(|t| match t {
            Target::Literal(n) => Some(*n),
            _ => None,
        })
    }

    pub fn only_literals(&self) -> bool {
        !self.targets.is_empty() && self.targets.iter().all(|t| matches!(t, Target::Literal(_)))
    }
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct PointsToState {
    pub vars: BTreeMap<SymbolId, PointsToSet>,
    temps: BTreeMap<NodeId, PointsToSet>,
}

#[derive(Debug, Clone)]
pub struct PointsToFacts {
    pub block_in: Vec<Option<PointsToState>>,
    /// Targets of every pointer-valued expression evaluated in a reachable
    /// block, joined over paths.
    pub exprs: HashMap<NodeId, PointsToSet>,
    pub iterations: usize,
}

impl PointsToFacts {
    pub fn of(&self, e: &Expr) -> Option<&PointsToSet> {
        self.exprs.get(&e.id)
    }
}

struct Analysis<'t, 'c> {
    tu: &'t TypedTu,
    cfg: &'c Cfg<'c>,
    tracked: HashSet<SymbolId>,
    record: Option<HashMap<NodeId, PointsToSet>>,
}

impl Analysis<'_, '_> {
    fn ty(&self, e: &Expr) -> Option<&TypeDesc> {
        self.tu.types.get(&e.id)
    }

    fn is_array(&self, e: &Expr) -> bool {
        matches!(self.ty(e), Some(TypeDesc::Array { .. }))
    }

    fn tracked_var(&self, e: &Expr) -> Option<SymbolId> {
        let s = self.tu.symbol_of(e)?;
        self.tracked.contains(&s.id).then_some(s.id)
    }

    /// Value of `e` after decay; `None` for non-pointer values.
    fn eval(&mut self, e: &Expr, st: &mut PointsToState) -> Option<PointsToSet> {
        let v = self.eval_inner(e, st);
        let pointer = self
            .ty(e)
            .is_some_and(|t| t.is_pointer() || matches!(t, TypeDesc::Array { .. }));
        let v = if pointer {
            Some(v.unwrap_or_else(PointsToSet::unknown))
        } else {
            None
        };
        if let (Some(rec), Some(v)) = (self.record.as_mut(), v.as_ref()) {
            rec.entry(e.id).or_default().union(v);
        }
        v
    }

    fn eval_inner(&mut self, e: &Expr, st: &mut PointsToState) -> Option<PointsToSet> {
        if self.cfg.split.contains(&e.id) {
            return st.temps.get(&e.id).cloned();
        }
        if self.is_array(e) {
            return Some(self.address(e, st));
        }
        match &e.kind {
            ExprKind::Ident(_) => {
                let sym = self.tu.symbol_of(e)?;
                if sym.kind == SymbolKind::Function {
                    return Some(PointsToSet::of(Target::Named(sym.id)));
                }
                self.tracked_var(e).and_then(|s| st.vars.get(&s).cloned())
            }
            ExprKind::AddrOf(a) => Some(self.address(a, st)),
            ExprKind::Binary(op @ (BinaryOp::Add | BinaryOp::Sub), a, b) => {
                let va = self.eval(a, st);
                let vb = self.eval(b, st);
                match (*op, va, vb) {
                    (_, Some(p), None) => Some(p),
                    (BinaryOp::Add, None, Some(p)) => Some(p),
                    _ => None,
                }
            }
            ExprKind::Assign(l, r) => {
                self.lvalue_effects(l, st);
                let v = self.eval(r, st);
                if let Some(s) = self.tracked_var(l) {
                    st.vars.insert(s, v.clone().unwrap_or_else(PointsToSet::unknown));
                }
                v
            }
            ExprKind::CompoundAssign(_, l, r) => {
                self.lvalue_effects(l, st);
                self.eval(r, st);
                self.tracked_var(l).and_then(|s| st.vars.get(&s).cloned())
            }
            ExprKind::IncDec(_, l) => {
                self.lvalue_effects(l, st);
                self.tracked_var(l).and_then(|s| st.vars.get(&s).cloned())
            }
            ExprKind::Cast(_, a) => {
                let v = self.eval(a, st);
                let from_pointer = self
                    .ty(a)
                    .is_some_and(|t| t.is_pointer() || matches!(t, TypeDesc::Array { .. }));
                if from_pointer {
                    v
                } else {
                    None
                }
            }
            ExprKind::Comma(a, b) => {
                self.eval(a, st);
                self.eval(b, st)
            }
            ExprKind::Conditional(c, a, b) => {
                self.eval(c, st);
                let va = self.eval(a, st);
                let vb = self.eval(b, st);
                match (va, vb) {
                    (Some(mut x), Some(y)) => {
                        x.union(&y);
                        Some(x)
                    }
                    (x, y) => x.or(y),
                }
            }
            ExprKind::Deref(_) | ExprKind::Index(..) | ExprKind::Member { .. } => {
                self.lvalue_effects(e, st);
                None
            }
            ExprKind::SizeofExpr(_) | ExprKind::SizeofType(_) => None,
            _ => {
                for c in e.children() {
                    self.eval(c, st);
                }
                None
            }
        }
    }

    /// Targets of the storage an lvalue designates.
    fn address(&mut self, e: &Expr, st: &mut PointsToState) -> PointsToSet {
        match &e.kind {
            ExprKind::Ident(_) => match self.tu.symbol_of(e) {
                Some(sym) => PointsToSet::of(Target::Named(sym.id)),
                None => PointsToSet::unknown(),
            },
            ExprKind::StringLit { .. } => PointsToSet::of(Target::Literal(e.id)),
            ExprKind::Member { base, arrow: false, .. } => self.address(base, st),
            ExprKind::Member { base, arrow: true, .. } | ExprKind::Deref(base) => {
                self.eval(base, st).unwrap_or_else(PointsToSet::unknown)
            }
            ExprKind::Index(a, b) => {
                let (p, i) = if self
                    .ty(b)
                    .is_some_and(|t| t.is_pointer() || matches!(t, TypeDesc::Array { .. }))
                {
                    (b, a)
                } else {
                    (a, b)
                };
                self.eval(i, st);
                if self.is_array(p) {
                    self.address(p, st)
                } else {
                    self.eval(p, st).unwrap_or_else(PointsToSet::unknown)
                }
            }
            _ => {
                self.eval(e, st);
                PointsToSet::unknown()
            }
        }
    }

    fn lvalue_effects(&mut self, e: &Expr, st: &mut PointsToState) {
        if !matches!(e.kind, ExprKind::Ident(_)) {
            self.address(e, st);
        }
    }
}

impl Forward for Analysis<'_, '_> {
    type State = PointsToState;

    fn entry_state(&self) -> PointsToState {
        PointsToState {
            vars: self.tracked.iter().map(|s| (*s, PointsToSet::unknown())).collect(),
            temps: BTreeMap::new(),
        }
    }

    fn transfer(&mut self, block: BlockId, st: &mut PointsToState) {
        let b = &self.cfg.blocks[block.index()];
        for el in &b.elements {
            match el {
                Element::Eval(e) => {
                    self.eval(e, st);
                }
                Element::Arm { node, value } => {
                    let v = self.eval(value, st);
                    match v {
                        Some(v) => st.temps.insert(*node, v),
                        None => st.temps.remove(node),
                    };
                }
                Element::Decl { symbol, init, .. } => {
                    let mut v = None;
                    if let Some(i) = init {
                        for x in i.exprs() {
                            v = self.eval(x, st);
                        }
                    }
                    if self.tracked.contains(symbol) {
                        st.vars.insert(*symbol, v.unwrap_or_else(PointsToSet::unknown));
                    }
                }
            }
        }
        if let Some(c) = b.cond {
            self.eval(c, st);
        }
    }

    fn join(&self, into: &mut PointsToState, other: &PointsToState) {
        for (k, v) in into.vars.iter_mut() {
            if let Some(o) = other.vars.get(k) {
                v.union(o);
            }
        }
        into.temps.retain(|k, v| match other.temps.get(k) {
            Some(o) => {
                v.union(o);
                true
            }
            None => false,
        });
    }
}

/// Flow-sensitive points-to sets for pointer locals whose address is never
/// taken. Loads through pointers and call results are unknown.
pub fn local_points_to(tu: &TypedTu, cfg: &Cfg) -> PointsToFacts {
    let taken = address_taken(tu, cfg);
    let tracked = cfg
        .params
        .iter()
        .chain(&cfg.locals)
        .copied()
        .filter(|s| {
            let sym = tu.symbol(*s);
            sym.is_automatic_object() && sym.ty.is_pointer() && !taken.contains(s)
        })
        .collect();
    let mut a = Analysis {
        tu,
        cfg,
        tracked,
        record: None,
    };
    let sol = solve(cfg, &mut a);
    a.record = Some(HashMap::new());
    for (i, st) in sol.block_in.iter().enumerate() {
        if let Some(st) = st {
            let mut st = st.clone();
            a.transfer(BlockId(i as u32), &mut st);
        }
    }
    PointsToFacts {
        block_in: sol.block_in,
        exprs: a.record.take().unwrap_or_default(),
        iterations: sol.iterations,
    }
}
