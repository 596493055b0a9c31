use std::collections::HashMap;

use super::{body, each_expr, each_stmt};
use crate::flow::{BlockId, FunctionFacts};
use crate::parser::{expr_text, Expr, ExprKind, NodeId, StmtKind};
use crate::rules::effects::{is_void_cast, side_effects};
use crate::rules::{Certainty, Raw};

fn block_live(f: &FunctionFacts, b: BlockId) -> bool {
    f.cfg.reachable[b.index()] && f.intervals.feasible(b)
}

fn site_live(f: &FunctionFacts, i: usize) -> bool {
    block_live(f, f.cfg.sites[i].block)
}

pub(crate) fn check_r2_1(f: &FunctionFacts) -> Vec<Raw> {
    let cfg = &f.cfg;
    // a statement containing live code is live even when control never
    // enters it from the top, as with a switch body
    let mut live: Vec<bool> = (0..cfg.sites.len()).map(|i| site_live(f, i)).collect();
    for i in (0..cfg.sites.len()).rev() {
        if let Some(p) = cfg.sites[i].parent {
            live[p] |= live[i];
        }
    }
    let mut out = Vec::new();
    for (i, site) in cfg.sites.iter().enumerate() {
        if live[i] {
            continue;
        }
        // only the first statement of an unreachable run is reported
        if site.parent.is_some_and(|p| !live[p]) || site.prev.is_some_and(|p| !live[p]) {
            continue;
        }
        let b = site.block;
        let mut raw = Raw::new("R2.1", &site.span, Certainty::Definite, "unreachable code");
        if let Some(p) = cfg.pruned.iter().find(|p| p.skipped == b) {
            raw = raw.note(
                Some(&p.cond.span),
                format!("condition `{}` is always {}", expr_text(p.cond), p.value),
            );
        } else if let Some(ie) = f.intervals.infeasible.iter().find(|ie| ie.edge.to == b) {
            let cond = cfg.blocks[ie.edge.from.index()].cond.filter(|c| c.id == ie.cond);
            match cond {
                Some(c) => {
                    let range = f
                        .intervals
                        .of(c)
                        .map(|iv| format!(" (its value ranges over {iv})"))
                        .unwrap_or_default();
                    raw = raw.note(
                        Some(&c.span),
                        format!(
                            "condition `{}` cannot take the branch leading here{range}",
                            expr_text(c)
                        ),
                    );
                }
                None => raw = raw.note(None, "no feasible path reaches this code"),
            }
        } else if let Some(j) = cfg.after_jump.get(&b) {
            raw = raw.note(Some(j), "control never falls through this jump");
        } else {
            raw = raw.note(None, "no path from the function entry reaches this code");
        }
        out.push(raw);
    }
    out
}

pub(crate) fn check_r2_2(f: &FunctionFacts) -> Vec<Raw> {
    let tu = f.tu;
    let mut out = Vec::new();
    each_stmt(body(f), &mut |s| {
        let StmtKind::Expr(Some(e)) = &s.kind else { return };
        let Some(i) = f.cfg.sites.iter().position(|site| site.span == s.span) else {
            return;
        };
        if !site_live(f, i) || is_void_cast(tu, e) || !side_effects(tu, e).is_empty() {
            return;
        }
        out.push(Raw::new(
            "R2.2",
            &s.span,
            Certainty::Definite,
            format!("expression statement `{}` has no effect", expr_text(e)),
        ));
    });

    let mut exprs: HashMap<NodeId, &Expr> = HashMap::new();
    each_expr(f, |e| {
        exprs.insert(e.id, e);
    });
    for d in &f.liveness.dead_stores {
        let Some(e) = exprs.get(&d.expr) else { continue };
        let observable = side_effects(tu, e).iter().any(|x| {
            !matches!(
                x.kind,
                ExprKind::Assign(..) | ExprKind::CompoundAssign(..) | ExprKind::IncDec(..)
            )
        });
        if observable {
            continue;
        }
        let name = &tu.symbol(d.symbol).name;
        out.push(
            Raw::new(
                "R2.2",
                &e.span,
                Certainty::Definite,
                format!("value stored to `{name}` is never read"),
            )
            .note(
                None,
                format!("`{name}` is overwritten or goes out of scope on every path after this store"),
            ),
        );
    }
    out
}
