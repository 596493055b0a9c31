use std::collections::{BTreeSet, HashMap, HashSet};

use super::cfg::{Cfg, Element};
use super::events::{address_taken, Event, EventWalker};
use crate::parser::{Expr, ExprKind, NodeId};
use crate::sema::{SymbolId, TypedTu};

type LiveSet = BTreeSet<SymbolId>;

#[derive(Debug, Clone)]
pub struct Liveness {
    pub live_in: Vec<LiveSet>,
    pub live_out: Vec<LiveSet>,
    /// Variables live right after each evaluated full expression.
    pub live_after: HashMap<NodeId, LiveSet>,
    /// Assignments, compound assignments and increments at the root of an
    /// expression whose stored value is never read afterwards. Only
    /// reachable blocks contribute.
    pub dead_stores: Vec<DeadStore>,
    pub tracked: BTreeSet<SymbolId>,
    pub iterations: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct DeadStore {
    pub expr: NodeId,
    pub symbol: SymbolId,
}

fn element_events(w: &EventWalker, el: &Element) -> Vec<Event> {
    let mut v = Vec::new();
    w.element(el, &mut v);
    v
}

fn apply_backward(events: &[Event], live: &mut LiveSet, tracked: &BTreeSet<SymbolId>) {
    for ev in events.iter().rev() {
        match ev {
            Event::Read(s, _) if tracked.contains(s) => {
                live.insert(*s);
            }
            Event::Write(s, _) | Event::Declare(s) => {
                live.remove(s);
            }
            _ => {}
        }
    }
}

/// The variable a root-level store writes.
fn stored_var(tu: &TypedTu, e: &Expr) -> Option<SymbolId> {
    match &e.kind {
        ExprKind::Assign(l, _) | ExprKind::CompoundAssign(_, l, _) | ExprKind::IncDec(_, l) => {
            l.ident_name()?;
            tu.symbol_of(l).map(|s| s.id)
        }
        _ => None,
    }
}

/// Backward liveness over scalar locals whose address is never taken.
pub fn liveness(tu: &TypedTu, cfg: &Cfg) -> Liveness {
    let taken: HashSet<SymbolId> = address_taken(tu, cfg);
    let tracked: BTreeSet<SymbolId> = cfg
        .params
        .iter()
        .chain(&cfg.locals)
        .copied()
        .filter(|s| {
            let sym = tu.symbol(*s);
            sym.is_automatic_object() && sym.ty.is_scalar() && !sym.quals.is_volatile && !taken.contains(s)
        })
        .collect();
    let w = EventWalker { tu, split: &cfg.split };
    let n = cfg.blocks.len();
    let block_events: Vec<(Vec<Vec<Event>>, Vec<Event>)> = cfg
        .blocks
        .iter()
        .map(|b| {
            let els = b.elements.iter().map(|el| element_events(&w, el)).collect();
            let mut cond = Vec::new();
            if let Some(c) = b.cond {
                w.rvalue(c, &mut cond);
            }
            (els, cond)
        })
        .collect();
    let mut live_in = vec![LiveSet::new(); n];
    let mut live_out = vec![LiveSet::new(); n];
    let mut order = cfg.reverse_postorder();
    order.reverse();
    let mut iterations = 0;
    let mut changed = true;
    while changed {
        changed = false;
        for &b in &order {
            iterations += 1;
            let mut out = LiveSet::new();
            for e in cfg.successors(b) {
                out.extend(live_in[e.to.index()].iter().copied());
            }
            let mut live = out.clone();
            let (els, cond) = &block_events[b.index()];
            apply_backward(cond, &mut live, &tracked);
            for evs in els.iter().rev() {
                apply_backward(evs, &mut live, &tracked);
            }
            live_out[b.index()] = out;
            if live != live_in[b.index()] {
                live_in[b.index()] = live;
                changed = true;
            }
        }
    }
    let mut live_after = HashMap::new();
    let mut dead_stores = Vec::new();
    for (bi, b) in cfg.blocks.iter().enumerate() {
        let (els, cond) = &block_events[bi];
        let mut live = live_out[bi].clone();
        apply_backward(cond, &mut live, &tracked);
        for (el, evs) in b.elements.iter().zip(els).rev() {
            if let Element::Eval(e) = el {
                if cfg.reachable[bi] {
                    if let Some(s) = stored_var(tu, e) {
                        if tracked.contains(&s) && !live.contains(&s) {
                            dead_stores.push(DeadStore { expr: e.id, symbol: s });
                        }
                    }
                }
                live_after.insert(e.id, live.clone());
            }
            apply_backward(evs, &mut live, &tracked);
        }
    }
    dead_stores.reverse();
    Liveness {
        live_in,
        live_out,
        live_after,
        dead_stores,
        tracked,
        iterations,
    }
}
