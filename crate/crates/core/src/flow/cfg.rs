use std::collections::{HashMap, HashSet};

use super::FlowError;
use crate::parser::*;
use crate::sema::{FunctionInfo, SymbolId, TypedTu};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct BlockId(pub u32);

impl BlockId {
    pub fn index(self) -> usize {
        self.0 as usize
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum EdgeKind {
    Fallthrough,
    TrueBranch,
    FalseBranch,
    SwitchCase,
    Jump,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Edge {
    pub from: BlockId,
    pub to: BlockId,
    pub kind: EdgeKind,
}

#[derive(Debug, Clone, Copy)]
pub enum Element<'a> {
    /// Evaluate an expression and discard its value. Subexpressions listed
    /// in `Cfg::split` were already evaluated by earlier blocks.
    Eval(&'a Expr),
    /// One arm of a split `?:`; its value becomes the value of `node`.
    Arm { node: NodeId, value: &'a Expr },
    /// Execution reaches the declaration of a block-scope object with
    /// automatic storage.
    Decl {
        symbol: SymbolId,
        init: Option<&'a Initializer>,
        span: &'a Span,
    },
}

#[derive(Debug, Clone, Default)]
pub struct Block<'a> {
    pub elements: Vec<Element<'a>>,
    /// Evaluated after the elements; the outgoing true/false or case edges
    /// branch on its value.
    pub cond: Option<&'a Expr>,
}

/// A branch dropped because its condition is an integer constant
/// expression.
#[derive(Debug, Clone, Copy)]
pub struct PrunedBranch<'a> {
    pub from: BlockId,
    pub skipped: BlockId,
    pub cond: &'a Expr,
    pub value: bool,
}

/// A statement or declaration of the body and the block where control
/// enters it.
#[derive(Debug, Clone)]
pub struct Site {
    pub span: Span,
    pub block: BlockId,
    pub parent: Option<usize>,
    pub prev: Option<usize>,
    pub is_decl: bool,
}

#[derive(Debug, Clone)]
pub struct Cfg<'a> {
    pub blocks: Vec<Block<'a>>,
    pub edges: Vec<Edge>,
    pub entry: BlockId,
    pub exit: BlockId,
    /// `&&`, `||` and `?:` nodes lowered into branches.
    pub split: HashSet<NodeId>,
    pub reachable: Vec<bool>,
    pub pruned: Vec<PrunedBranch<'a>>,
    /// Blocks started right after a jump, with the jump's span.
    pub after_jump: HashMap<BlockId, Span>,
    pub sites: Vec<Site>,
    pub params: Vec<SymbolId>,
    pub locals: Vec<SymbolId>,
}

impl<'a> Cfg<'a> {
    pub fn successors(&self, b: BlockId) -> impl Iterator<Item = &Edge> + '_ {
        self.edges.iter().filter(move |e| e.from == b)
    }

    pub fn predecessors(&self, b: BlockId) -> impl Iterator<Item = &Edge> + '_ {
        self.edges.iter().filter(move |e| e.to == b)
    }

    pub fn len(&self) -> usize {
        self.blocks.len()
    }

    pub fn is_empty(&self) -> bool {
        self.blocks.is_empty()
    }

    /// Blocks in reverse postorder from the entry; unreachable blocks follow
    /// in index order.
    pub fn reverse_postorder(&self) -> Vec<BlockId> {
        let n = self.blocks.len();
        let mut succ: Vec<Vec<BlockId>> = vec![Vec::new(); n];
        for e in &self.edges {
            succ[e.from.index()].push(e.to);
        }
        let mut seen = vec![false; n];
        let mut post = Vec::with_capacity(n);
        let mut stack = vec![(self.entry, 0usize)];
        seen[self.entry.index()] = true;
        while let Some((b, i)) = stack.pop() {
            if let Some(&next) = succ[b.index()].get(i) {
                stack.push((b, i + 1));
                if !seen[next.index()] {
                    seen[next.index()] = true;
                    stack.push((next, 0));
                }
            } else {
                post.push(b);
            }
        }
        post.reverse();
        post.extend((0..n).filter(|i| !seen[*i]).map(|i| BlockId(i as u32)));
        post
    }

    /// The block a site's span starts in, for statement-level queries.
    pub fn site_reachable(&self, site: &Site) -> bool {
        self.reachable[site.block.index()]
    }
}

/// Builds the control-flow graph of one function definition.
pub fn build_cfg<'a>(tu: &'a TypedTu, f: &'a FunctionInfo) -> Result<Cfg<'a>, FlowError> {
    let def = tu.function_def(f);
    let mut b = Builder {
        tu,
        cfg: Cfg {
            blocks: Vec::new(),
            edges: Vec::new(),
            entry: BlockId(0),
            exit: BlockId(1),
            split: HashSet::new(),
            reachable: Vec::new(),
            pruned: Vec::new(),
            after_jump: HashMap::new(),
            sites: Vec::new(),
            params: f.params.clone(),
            locals: f.locals.clone(),
        },
        cur: BlockId(0),
        breaks: Vec::new(),
        continues: Vec::new(),
        switches: Vec::new(),
        labels: HashMap::new(),
        defined_labels: HashMap::new(),
        gotos: Vec::new(),
        error: None,
    };
    b.new_block();
    b.new_block();
    b.stmt(&def.body, None, None);
    b.goto(b.cfg.exit);
    for (name, span) in &b.gotos {
        if !b.defined_labels.contains_key(name) {
            return Err(FlowError::UndefinedLabel {
                name: name.clone(),
                span: span.clone(),
            });
        }
    }
    if let Some(e) = b.error.take() {
        return Err(e);
    }
    let mut cfg = b.cfg;
    cfg.reachable = reachability(&cfg);
    Ok(cfg)
}

fn reachability(cfg: &Cfg) -> Vec<bool> {
    let mut seen = vec![false; cfg.blocks.len()];
    let mut stack = vec![cfg.entry];
    seen[cfg.entry.index()] = true;
    while let Some(b) = stack.pop() {
        for e in cfg.successors(b) {
            if !seen[e.to.index()] {
                seen[e.to.index()] = true;
                stack.push(e.to);
            }
        }
    }
    seen
}

struct SwitchCtx {
    block: BlockId,
    has_default: bool,
}

struct Builder<'a> {
    tu: &'a TypedTu,
    cfg: Cfg<'a>,
    cur: BlockId,
    breaks: Vec<BlockId>,
    continues: Vec<BlockId>,
    switches: Vec<SwitchCtx>,
    labels: HashMap<String, BlockId>,
    defined_labels: HashMap<String, Span>,
    gotos: Vec<(String, Span)>,
    /// First structural error met; lowering continues so the builder
    /// stays simple.
    error: Option<FlowError>,
}

impl<'a> Builder<'a> {
    fn new_block(&mut self) -> BlockId {
        self.cfg.blocks.push(Block::default());
        BlockId(self.cfg.blocks.len() as u32 - 1)
    }

    fn edge(&mut self, from: BlockId, to: BlockId, kind: EdgeKind) {
        self.cfg.edges.push(Edge { from, to, kind });
    }

    fn goto(&mut self, to: BlockId) {
        self.edge(self.cur, to, EdgeKind::Fallthrough);
    }

    /// Ends the current block with a jump and continues in a fresh block
    /// with no predecessors.
    fn jump(&mut self, to: BlockId, span: &Span) {
        self.edge(self.cur, to, EdgeKind::Jump);
        self.cur = self.new_block();
        self.cfg.after_jump.insert(self.cur, span.clone());
    }

    fn push(&mut self, el: Element<'a>) {
        let cur = self.cur;
        self.cfg.blocks[cur.index()].elements.push(el);
    }

    fn label_block(&mut self, name: &str) -> BlockId {
        if let Some(b) = self.labels.get(name) {
            return *b;
        }
        let b = self.new_block();
        self.labels.insert(name.to_string(), b);
        b
    }

    fn site(&mut self, span: &Span, parent: Option<usize>, prev: Option<usize>, is_decl: bool) -> usize {
        self.cfg.sites.push(Site {
            span: span.clone(),
            block: self.cur,
            parent,
            prev,
            is_decl,
        });
        self.cfg.sites.len() - 1
    }

    /// Lowers a controlling expression, branching to `t` or `f`.
    fn cond(&mut self, e: &'a Expr, t: BlockId, f: BlockId) {
        match &e.kind {
            ExprKind::Binary(op @ (BinaryOp::LogAnd | BinaryOp::LogOr), a, b) => {
                self.cfg.split.insert(e.id);
                let mid = self.new_block();
                if *op == BinaryOp::LogAnd {
                    self.cond(a, mid, f);
                } else {
                    self.cond(a, t, mid);
                }
                self.cur = mid;
                self.cond(b, t, f);
            }
            _ => {
                self.lower_nested(e);
                let cur = self.cur;
                self.cfg.blocks[cur.index()].cond = Some(e);
                match self.tu.const_eval(e).truth() {
                    Some(v) => {
                        let (taken, skipped) = if v { (t, f) } else { (f, t) };
                        let kind = if v { EdgeKind::TrueBranch } else { EdgeKind::FalseBranch };
                        self.edge(cur, taken, kind);
                        if taken != skipped {
                            self.cfg.pruned.push(PrunedBranch {
                                from: cur,
                                skipped,
                                cond: e,
                                value: v,
                            });
                        }
                    }
                    None => {
                        self.edge(cur, t, EdgeKind::TrueBranch);
                        self.edge(cur, f, EdgeKind::FalseBranch);
                    }
                }
            }
        }
    }

    /// Lowers the `&&`, `||` and `?:` subexpressions of `e` into branches,
    /// innermost work first, leaving `e` itself in place.
    fn lower_nested(&mut self, e: &'a Expr) {
        if matches!(e.kind, ExprKind::SizeofExpr(_)) {
            return;
        }
        match &e.kind {
            ExprKind::Binary(BinaryOp::LogAnd | BinaryOp::LogOr, ..) => {
                let join = self.new_block();
                self.cond(e, join, join);
                self.cur = join;
            }
            ExprKind::Conditional(c, x, y) => {
                self.cfg.split.insert(e.id);
                let (bt, bf, join) = (self.new_block(), self.new_block(), self.new_block());
                self.cond(c, bt, bf);
                for (blk, arm) in [(bt, x), (bf, y)] {
                    self.cur = blk;
                    self.lower_nested(arm);
                    self.push(Element::Arm { node: e.id, value: arm });
                    self.goto(join);
                }
                self.cur = join;
            }
            _ => {
                for c in e.children() {
                    self.lower_nested(c);
                }
            }
        }
    }

    fn expr(&mut self, e: &'a Expr) {
        self.lower_nested(e);
        if !self.cfg.split.contains(&e.id) {
            self.push(Element::Eval(e));
        }
    }

    fn decl(&mut self, d: &'a Declaration, parent: Option<usize>, prev: Option<usize>) -> usize {
        let idx = self.site(&d.span, parent, prev, true);
        for id in &d.declarators {
            let Some(&sym) = self.tu.decl_symbols.get(&id.declarator.id) else {
                continue;
            };
            if !self.tu.symbol(sym).is_automatic_object() {
                continue;
            }
            if let Some(init) = &id.init {
                for e in init.exprs() {
                    self.lower_nested(e);
                }
            }
            self.push(Element::Decl {
                symbol: sym,
                init: id.init.as_ref(),
                span: &id.declarator.span,
            });
        }
        idx
    }

    fn stmt(&mut self, s: &'a Stmt, parent: Option<usize>, prev: Option<usize>) -> usize {
        // labelled statements start in their own block, so the site is
        // recorded once control has been moved there
        match &s.kind {
            StmtKind::Label { name, stmt } => {
                let b = self.label_block(name);
                if self.defined_labels.insert(name.clone(), s.span.clone()).is_some() {
                    self.error.get_or_insert(FlowError::DuplicateLabel {
                        name: name.clone(),
                        span: s.span.clone(),
                    });
                }
                self.goto(b);
                self.cur = b;
                let idx = self.site(&s.span, parent, prev, false);
                self.stmt(stmt, Some(idx), None);
                return idx;
            }
            StmtKind::Case { stmt, .. } | StmtKind::Default(stmt) => {
                let b = self.new_block();
                self.goto(b);
                match self.switches.last_mut() {
                    Some(sw) => {
                        if matches!(s.kind, StmtKind::Default(_)) {
                            sw.has_default = true;
                        }
                        let from = sw.block;
                        self.edge(from, b, EdgeKind::SwitchCase);
                    }
                    None => {
                        self.error.get_or_insert(FlowError::MisplacedJump {
                            keyword: "case",
                            span: s.span.clone(),
                        });
                    }
                }
                self.cur = b;
                let idx = self.site(&s.span, parent, prev, false);
                self.stmt(stmt, Some(idx), None);
                return idx;
            }
            _ => {}
        }
        let idx = self.site(&s.span, parent, prev, false);
        let me = Some(idx);
        match &s.kind {
            StmtKind::Compound(items) => {
                let mut last = None;
                for it in items {
                    last = Some(match it {
                        BlockItem::Decl(d) => self.decl(d, me, last),
                        BlockItem::Stmt(st) => self.stmt(st, me, last),
                    });
                }
            }
            StmtKind::Expr(Some(e)) => self.expr(e),
            StmtKind::Expr(None) => {}
            StmtKind::If { cond, then, otherwise } => {
                let bt = self.new_block();
                let bf = otherwise.as_ref().map(|_| self.new_block());
                let join = self.new_block();
                self.cond(cond, bt, bf.unwrap_or(join));
                self.cur = bt;
                self.stmt(then, me, None);
                self.goto(join);
                if let (Some(bf), Some(o)) = (bf, otherwise) {
                    self.cur = bf;
                    self.stmt(o, me, None);
                    self.goto(join);
                }
                self.cur = join;
            }
            StmtKind::While { cond, body } => {
                let head = self.new_block();
                self.goto(head);
                self.cur = head;
                let (bb, exit) = (self.new_block(), self.new_block());
                self.cond(cond, bb, exit);
                self.loop_body(body, me, exit, head);
                self.goto(head);
                self.cur = exit;
            }
            StmtKind::DoWhile { body, cond } => {
                let (bb, cb, exit) = (self.new_block(), self.new_block(), self.new_block());
                self.goto(bb);
                self.cur = bb;
                self.loop_body(body, me, exit, cb);
                self.goto(cb);
                self.cur = cb;
                self.cond(cond, bb, exit);
                self.cur = exit;
            }
            StmtKind::For { init, cond, step, body } => {
                match init {
                    Some(ForInit::Decl(d)) => {
                        self.decl(d, me, None);
                    }
                    Some(ForInit::Expr(e)) => self.expr(e),
                    None => {}
                }
                let head = self.new_block();
                self.goto(head);
                self.cur = head;
                let (bb, sb, exit) = (self.new_block(), self.new_block(), self.new_block());
                match cond {
                    Some(c) => self.cond(c, bb, exit),
                    None => self.goto(bb),
                }
                self.cur = bb;
                self.loop_body(body, me, exit, sb);
                self.goto(sb);
                self.cur = sb;
                if let Some(st) = step {
                    self.expr(st);
                }
                self.goto(head);
                self.cur = exit;
            }
            StmtKind::Switch { cond, body } => {
                self.lower_nested(cond);
                let sw = self.cur;
                self.cfg.blocks[sw.index()].cond = Some(cond);
                let exit = self.new_block();
                self.switches.push(SwitchCtx {
                    block: sw,
                    has_default: false,
                });
                self.breaks.push(exit);
                // code before the first label of the body is never entered
                self.cur = self.new_block();
                self.stmt(body, me, None);
                self.goto(exit);
                self.breaks.pop();
                let ctx = self.switches.pop().expect("switch context");
                if !ctx.has_default {
                    self.edge(sw, exit, EdgeKind::SwitchCase);
                }
                self.cur = exit;
            }
            StmtKind::Goto(name) => {
                let b = self.label_block(name);
                self.gotos.push((name.clone(), s.span.clone()));
                self.jump(b, &s.span);
            }
            StmtKind::Break | StmtKind::Continue => {
                let is_break = matches!(s.kind, StmtKind::Break);
                let target = if is_break {
                    self.breaks.last()
                } else {
                    self.continues.last()
                };
                match target.copied() {
                    Some(b) => self.jump(b, &s.span),
                    None => {
                        self.error.get_or_insert(FlowError::MisplacedJump {
                            keyword: if is_break { "break" } else { "continue" },
                            span: s.span.clone(),
                        });
                    }
                }
            }
            StmtKind::Return(e) => {
                if let Some(e) = e {
                    self.expr(e);
                }
                let exit = self.cfg.exit;
                self.jump(exit, &s.span);
            }
            StmtKind::Label { .. } | StmtKind::Case { .. } | StmtKind::Default(_) => unreachable!(),
        }
        idx
    }

    fn loop_body(&mut self, body: &'a Stmt, parent: Option<usize>, brk: BlockId, cont: BlockId) {
        self.breaks.push(brk);
        self.continues.push(cont);
        self.stmt(body, parent, None);
        self.breaks.pop();
        self.continues.pop();
    }
}
