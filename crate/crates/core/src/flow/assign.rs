use std::collections::HashMap;

use serde::Serialize;

use super::cfg::{BlockId, Cfg};
use super::events::{Event, EventWalker};
use super::solver::{solve, Forward};
use crate::parser::{NodeId, Span};
use crate::sema::{SymbolId, TypedTu};

/// Ordered so that the meet over paths is the minimum.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum AssignState {
    MaybeUnassigned,
    AssignedByAlias,
    DefinitelyAssigned,
}

#[derive(Debug, Clone)]
pub struct VarRead {
    pub expr: NodeId,
    pub span: Span,
    pub symbol: SymbolId,
    pub state: AssignState,
}

#[derive(Debug, Clone)]
pub struct DefiniteAssignment {
    /// Tracked variables, indexing the state vectors.
    pub vars: Vec<SymbolId>,
    pub block_in: Vec<Option<Vec<AssignState>>>,
    /// Every read of a tracked variable in a reachable block.
    pub reads: Vec<VarRead>,
    pub iterations: usize,
}

impl DefiniteAssignment {
    pub fn state_at_read(&self, expr: NodeId) -> Option<AssignState> {
        self.reads.iter().find(|r| r.expr == expr).map(|r| r.state)
    }
}

struct Analysis<'t, 'c> {
    walker: EventWalker<'t, 'c>,
    cfg: &'c Cfg<'c>,
    index: HashMap<SymbolId, usize>,
    n_params: usize,
    reads: Option<Vec<(NodeId, SymbolId, AssignState)>>,
}

impl Analysis<'_, '_> {
    fn apply(&mut self, ev: &Event, st: &mut [AssignState]) {
        match ev {
            Event::Read(s, id) => {
                if let (Some(&i), Some(reads)) = (self.index.get(s), self.reads.as_mut()) {
                    reads.push((*id, *s, st[i]));
                }
            }
            Event::Write(s, _) => {
                if let Some(&i) = self.index.get(s) {
                    st[i] = AssignState::DefinitelyAssigned;
                }
            }
            Event::AddressTaken(s) => {
                if let Some(&i) = self.index.get(s) {
                    st[i] = st[i].max(AssignState::AssignedByAlias);
                }
            }
            Event::Declare(s) => {
                if let Some(&i) = self.index.get(s) {
                    st[i] = AssignState::MaybeUnassigned;
                }
            }
        }
    }
}

impl Forward for Analysis<'_, '_> {
    type State = Vec<AssignState>;

    fn entry_state(&self) -> Self::State {
        let mut v = vec![AssignState::MaybeUnassigned; self.index.len()];
        for x in v.iter_mut().take(self.n_params) {
            *x = AssignState::DefinitelyAssigned;
        }
        v
    }

    fn transfer(&mut self, block: BlockId, st: &mut Self::State) {
        let b = &self.cfg.blocks[block.index()];
        let mut evs = Vec::new();
        for el in &b.elements {
            self.walker.element(el, &mut evs);
        }
        if let Some(c) = b.cond {
            self.walker.rvalue(c, &mut evs);
        }
        for ev in &evs {
            self.apply(ev, st);
        }
    }

    fn join(&self, into: &mut Self::State, other: &Self::State) {
        for (a, b) in into.iter_mut().zip(other) {
            *a = (*a).min(*b);
        }
    }
}

/// Forward analysis over the scalar automatic variables of a function:
/// parameters start assigned, locals unassigned, `&x` lifts `x` to
/// assigned-by-alias.
pub fn definite_assignment(tu: &TypedTu, cfg: &Cfg) -> DefiniteAssignment {
    let scalar = |s: &SymbolId| tu.symbol(*s).ty.is_scalar();
    let vars: Vec<SymbolId> = cfg
        .params
        .iter()
        .filter(|s| scalar(s))
        .chain(
            cfg.locals
                .iter()
                .filter(|s| scalar(s) && tu.symbol(**s).is_automatic_object()),
        )
        .copied()
        .collect();
    let n_params = cfg.params.iter().filter(|s| scalar(s)).count();
    let mut a = Analysis {
        walker: EventWalker { tu, split: &cfg.split },
        cfg,
        index: vars.iter().enumerate().map(|(i, s)| (*s, i)).collect(),
        n_params,
        reads: None,
    };
    let sol = solve(cfg, &mut a);
    a.reads = Some(Vec::new());
    for (i, st) in sol.block_in.iter().enumerate() {
        if let Some(st) = st {
            let mut st = st.clone();
            a.transfer(BlockId(i as u32), &mut st);
        }
    }
    let spans = ident_spans(cfg);
    let reads = a
        .reads
        .take()
        .unwrap_or_default()
        .into_iter()
        .map(|(expr, symbol, state)| VarRead {
            expr,
            span: spans
                .get(&expr)
                .cloned()
                .unwrap_or_else(|| tu.symbol(symbol).def_span.clone()),
            symbol,
            state,
        })
        .collect();
    DefiniteAssignment {
        vars,
        block_in: sol.block_in,
        reads,
        iterations: sol.iterations,
    }
}

fn ident_spans(cfg: &Cfg) -> HashMap<NodeId, Span> {
    let mut m = HashMap::new();
    for b in &cfg.blocks {
        let mut roots = Vec::new();
        for el in &b.elements {
            match el {
                super::cfg::Element::Eval(e) | super::cfg::Element::Arm { value: e, .. } => roots.push(*e),
                super::cfg::Element::Decl { init: Some(i), .. } => roots.extend(i.exprs()),
                super::cfg::Element::Decl { .. } => {}
            }
        }
        roots.extend(b.cond);
        for r in roots {
            r.walk_evaluated(&mut |e| {
                m.insert(e.id, e.span.clone());
            });
        }
    }
    m
}
