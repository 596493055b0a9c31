use std::collections::BTreeSet;

use super::cfg::{BlockId, Cfg, Edge};

/// Number of times a loop head's entry state may grow before widening.
pub const WIDENING_DELAY: usize = 3;

pub(crate) trait Forward {
    type State: Clone + PartialEq;

    fn entry_state(&self) -> Self::State;
    /// Runs a block's elements and condition over `state`.
    fn transfer(&mut self, block: BlockId, state: &mut Self::State);
    /// State along an outgoing edge; `None` when the edge cannot be taken.
    fn along(&mut self, _edge: &Edge, state: &Self::State) -> Option<Self::State> {
        Some(state.clone())
    }
    fn join(&self, into: &mut Self::State, other: &Self::State);
    fn widen(&self, _old: &Self::State, _new: &mut Self::State) {}
}

#[derive(Debug, Clone)]
pub struct Solution<S> {
    /// Entry state of each block; `None` for blocks no feasible path
    /// reaches.
    pub block_in: Vec<Option<S>>,
    pub iterations: usize,
}

/// Worklist fixpoint in reverse postorder, widening at loop heads.
pub(crate) fn solve<A: Forward>(cfg: &Cfg, a: &mut A) -> Solution<A::State> {
    let order = cfg.reverse_postorder();
    let mut rank = vec![0usize; cfg.blocks.len()];
    for (i, b) in order.iter().enumerate() {
        rank[b.index()] = i;
    }
    let mut block_in: Vec<Option<A::State>> = vec![None; cfg.blocks.len()];
    let mut growth = vec![0usize; cfg.blocks.len()];
    // targets of retreating edges; widening there is enough to bound every cycle
    let mut head = vec![false; cfg.blocks.len()];
    for e in &cfg.edges {
        if rank[e.to.index()] <= rank[e.from.index()] {
            head[e.to.index()] = true;
        }
    }
    block_in[cfg.entry.index()] = Some(a.entry_state());
    let mut work = BTreeSet::from([(rank[cfg.entry.index()], cfg.entry)]);
    let mut iterations = 0;
    while let Some((_, b)) = work.pop_first() {
        iterations += 1;
        let mut st = block_in[b.index()].clone().expect("queued blocks have a state");
        a.transfer(b, &mut st);
        for e in cfg.successors(b) {
            let Some(out) = a.along(e, &st) else { continue };
            let to = e.to.index();
            let next = match &block_in[to] {
                None => out,
                Some(old) => {
                    let mut joined = old.clone();
                    a.join(&mut joined, &out);
                    if joined == *old {
                        continue;
                    }
                    growth[to] += 1;
                    if head[to] && growth[to] > WIDENING_DELAY {
                        a.widen(old, &mut joined);
                    }
                    joined
                }
            };
            block_in[to] = Some(next);
            work.insert((rank[to], e.to));
        }
    }
    Solution { block_in, iterations }
}
