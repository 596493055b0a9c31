use std::collections::{BTreeMap, BTreeSet};

use crate::parser::{Expr, ExprKind, Span};
use crate::sema::{GlobalId, Program, SymbolKind, TypedTu};

#[derive(Debug, Clone)]
pub struct CallSite {
    pub caller: GlobalId,
    /// The callee for direct calls.
    pub callee: Option<GlobalId>,
    pub tu: usize,
    pub span: Span,
}

#[derive(Debug, Clone, Default)]
pub struct CallGraph {
    pub nodes: BTreeSet<GlobalId>,
    pub direct_edges: BTreeSet<(GlobalId, GlobalId)>,
    /// One entry per direct call expression.
    pub direct_calls: Vec<CallSite>,
    /// One entry per call through a pointer expression.
    pub indirect_call_sites: Vec<CallSite>,
}

impl CallGraph {
    pub fn callees(&self, f: GlobalId) -> impl Iterator<Item = GlobalId> + '_ {
        self.direct_edges
            .range((f, GlobalId(0))..=(f, GlobalId(u32::MAX)))
            .map(|e| e.1)
    }
}

/// The function a callee expression designates, if it names one directly.
fn direct_callee<'a>(tu: &TypedTu, f: &'a Expr) -> Option<&'a Expr> {
    match &f.kind {
        ExprKind::Ident(_) => tu.symbol_of(f).filter(|s| s.kind == SymbolKind::Function).map(|_| f),
        ExprKind::Deref(inner) | ExprKind::AddrOf(inner) => direct_callee(tu, inner),
        _ => None,
    }
}

pub fn build_call_graph(p: &Program) -> CallGraph {
    let mut g = CallGraph::default();
    for gs in &p.globals {
        if gs.kind == SymbolKind::Function {
            g.nodes.insert(gs.id);
        }
    }
    for (ti, tu) in p.tus.iter().enumerate() {
        for f in &tu.functions {
            let Some(caller) = p.global_of(ti, f.symbol) else {
                continue;
            };
            let body = &tu.function_def(f).body;
            for fe in crate::parser::full_expressions(body) {
                fe.expr.walk_evaluated(&mut |e| {
                    let ExprKind::Call(callee, _) = &e.kind else { return };
                    let target = direct_callee(tu, callee)
                        .and_then(|c| tu.symbol_of(c))
                        .and_then(|s| p.global_of(ti, s.id));
                    let site = CallSite {
                        caller,
                        callee: target,
                        tu: ti,
                        span: e.span.clone(),
                    };
                    match target {
                        Some(t) => {
                            g.direct_edges.insert((caller, t));
                            g.direct_calls.push(site);
                        }
                        None => g.indirect_call_sites.push(site),
                    }
                });
            }
        }
    }
    g
}

/// Strongly connected components of size above one, plus functions that
/// call themselves. Each component is sorted; the list is sorted by its
/// smallest member.
pub fn recursion_components(g: &CallGraph) -> Vec<BTreeSet<GlobalId>> {
    let nodes: Vec<GlobalId> = g.nodes.iter().copied().collect();
    let index_of: BTreeMap<GlobalId, usize> = nodes.iter().enumerate().map(|(i, n)| (*n, i)).collect();
    let succ: Vec<Vec<usize>> = nodes
        .iter()
        .map(|n| g.callees(*n).filter_map(|c| index_of.get(&c).copied()).collect())
        .collect();
    let mut out: Vec<BTreeSet<GlobalId>> = tarjan(&succ)
        .into_iter()
        .filter(|c| c.len() > 1 || succ[c[0]].contains(&c[0]))
        .map(|c| c.into_iter().map(|i| nodes[i]).collect())
        .collect();
    out.sort();
    out
}

/// Iterative Tarjan; returns components as node index lists.
fn tarjan(succ: &[Vec<usize>]) -> Vec<Vec<usize>> {
    const UNSEEN: usize = usize::MAX;
    let n = succ.len();
    let mut index = vec![UNSEEN; n];
    let mut low = vec![0; n];
    let mut on_stack = vec![false; n];
    let mut stack = Vec::new();
    let mut comps = Vec::new();
    let mut counter = 0;
    for root in 0..n {
        if index[root] != UNSEEN {
            continue;
        }
        let mut call: Vec<(usize, usize)> = vec![(root, 0)];
        index[root] = counter;
        low[root] = counter;
        counter += 1;
        stack.push(root);
        on_stack[root] = true;
        while let Some(&mut (v, ref mut i)) = call.last_mut() {
            if let Some(&w) = succ[v].get(*i) {
                *i += 1;
                if index[w] == UNSEEN {
                    index[w] = counter;
                    low[w] = counter;
                    counter += 1;
                    stack.push(w);
                    on_stack[w] = true;
                    call.push((w, 0));
                } else if on_stack[w] {
                    low[v] = low[v].min(index[w]);
                }
            } else {
                call.pop();
                if let Some(&(parent, _)) = call.last() {
                    low[parent] = low[parent].min(low[v]);
                }
                if low[v] == index[v] {
                    let mut comp = Vec::new();
                    loop {
                        let w = stack.pop().expect("tarjan stack");
                        on_stack[w] = false;
                        comp.push(w);
                        if w == v {
                            break;
                        }
                    }
                    comp.sort();
                    comps.push(comp);
                }
            }
        }
    }
    comps
}
