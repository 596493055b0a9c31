use std::collections::BTreeSet;

use super::{body, each_stmt};
use crate::flow::FunctionFacts;
use crate::parser::{expr_text, full_expressions, Expr, ExprKind, ForInit, Stmt, StmtKind};
use crate::rules::{Certainty, Raw};
use crate::sema::{SymbolId, SymbolKind, TypeDesc, TypedTu};

fn object(tu: &TypedTu, e: &Expr) -> Option<SymbolId> {
    e.ident_name()?;
    let s = tu.symbol_of(e)?;
    (s.kind == SymbolKind::Object).then_some(s.id)
}

/// Variables stored by assignments and increments in `e`, with the storing
/// expression.
fn writes<'a>(tu: &TypedTu, e: &'a Expr) -> Vec<(SymbolId, &'a Expr)> {
    let mut out = Vec::new();
    e.walk_evaluated(&mut |x| {
        if let ExprKind::Assign(l, _) | ExprKind::CompoundAssign(_, l, _) | ExprKind::IncDec(_, l) = &x.kind {
            if let Some(s) = object(tu, l) {
                out.push((s, x));
            }
        }
    });
    out
}

fn reads(tu: &TypedTu, e: &Expr) -> BTreeSet<SymbolId> {
    let mut stored = BTreeSet::new();
    e.walk_evaluated(&mut |x| {
        if let ExprKind::Assign(l, _) = &x.kind {
            stored.insert(l.id);
        }
    });
    let mut out = BTreeSet::new();
    e.walk_evaluated(&mut |x| {
        if !stored.contains(&x.id) {
            if let Some(s) = object(tu, x) {
                out.insert(s);
            }
        }
    });
    out
}

fn init_writes(tu: &TypedTu, init: &ForInit) -> BTreeSet<SymbolId> {
    match init {
        ForInit::Expr(e) => writes(tu, e).into_iter().map(|(s, _)| s).collect(),
        ForInit::Decl(d) => d
            .declarators
            .iter()
            .filter(|id| id.init.is_some())
            .filter_map(|id| tu.decl_symbols.get(&id.declarator.id).copied())
            .collect(),
    }
}

struct ForParts<'a> {
    stmt: &'a Stmt,
    init: Option<&'a ForInit>,
    cond: Option<&'a Expr>,
    step: Option<&'a Expr>,
    body: &'a Stmt,
}

fn for_loops<'a>(f: &FunctionFacts<'a>) -> Vec<ForParts<'a>> {
    let mut out = Vec::new();
    each_stmt(body(f), &mut |s| {
        if let StmtKind::For { init, cond, step, body } = &s.kind {
            out.push(ForParts {
                stmt: s,
                init: init.as_ref(),
                cond: cond.as_ref(),
                step: step.as_ref(),
                body,
            });
        }
    });
    out
}

fn is_floating(t: &TypeDesc) -> bool {
    matches!(t, TypeDesc::Float | TypeDesc::Double)
}

pub(crate) fn check_r14_1(f: &FunctionFacts) -> Vec<Raw> {
    let tu = f.tu;
    let mut out = Vec::new();
    for l in for_loops(f) {
        let (Some(cond), Some(step)) = (l.cond, l.step) else {
            continue;
        };
        let read = reads(tu, cond);
        let mut counters: BTreeSet<SymbolId> = BTreeSet::new();
        for (s, _) in writes(tu, step) {
            if read.contains(&s) {
                counters.insert(s);
            }
        }
        for s in counters {
            let sym = tu.symbol(s);
            if is_floating(&sym.ty) {
                out.push(
                    Raw::new(
                        "R14.1",
                        &l.stmt.span,
                        Certainty::Definite,
                        format!("loop counter `{}` has floating type `{}`", sym.name, sym.ty),
                    )
                    .note(Some(&sym.def_span), format!("`{}` declared here", sym.name)),
                );
            }
        }
    }
    out
}

pub(crate) fn check_r14_2(f: &FunctionFacts) -> Vec<Raw> {
    let tu = f.tu;
    let mut out = Vec::new();
    for l in for_loops(f) {
        if l.init.is_none() && l.cond.is_none() && l.step.is_none() {
            continue;
        }
        let init = l.init.map(|i| init_writes(tu, i));
        let cond = l.cond.map(|c| reads(tu, c)).unwrap_or_default();
        let step: BTreeSet<SymbolId> = l
            .step
            .map(|s| writes(tu, s).into_iter().map(|(s, _)| s).collect())
            .unwrap_or_default();

        let counter = match (&init, step.len()) {
            (Some(i), 1) if i.len() == 1 && i == &step => step.first().copied(),
            (None, 1) => step.first().copied(),
            _ => None,
        }
        .filter(|c| cond.contains(c));

        let Some(c) = counter else {
            let mut names: Vec<&str> = init
                .iter()
                .flatten()
                .chain(&step)
                .map(|s| tu.symbol(*s).name.as_str())
                .collect();
            names.sort_unstable();
            names.dedup();
            let mut raw = Raw::new(
                "R14.2",
                &l.stmt.span,
                Certainty::Definite,
                "for loop clauses do not share exactly one loop counter",
            );
            raw = raw.note(
                None,
                if names.is_empty() {
                    "no object is set in the first clause and stepped in the third".to_string()
                } else {
                    format!("objects set or stepped by the clauses: {}", names.join(", "))
                },
            );
            out.push(raw);
            continue;
        };

        let name = &tu.symbol(c).name;
        for fe in full_expressions(l.body) {
            fe.expr.walk_evaluated(&mut |x| {
                let hit = match &x.kind {
                    ExprKind::Assign(t, _) | ExprKind::CompoundAssign(_, t, _) | ExprKind::IncDec(_, t) => {
                        object(tu, t) == Some(c)
                    }
                    ExprKind::AddrOf(t) => object(tu, t) == Some(c),
                    _ => false,
                };
                if hit {
                    out.push(
                        Raw::new(
                            "R14.2",
                            &x.span,
                            Certainty::Definite,
                            format!("loop counter `{name}` is modified in the loop body"),
                        )
                        .note(Some(&l.stmt.span), format!("`{name}` is the counter of this for loop")),
                    );
                }
            });
        }
    }
    out
}

/// `while (1)` and `do ... while (0)`.
fn exempt(s: &Stmt, cond: &Expr) -> bool {
    let ExprKind::IntConst(lit) = &cond.kind else {
        return false;
    };
    match s.kind {
        StmtKind::While { .. } => lit.value == 1,
        StmtKind::DoWhile { .. } => lit.value == 0,
        _ => false,
    }
}

pub(crate) fn check_r14_3(f: &FunctionFacts) -> Vec<Raw> {
    let tu = f.tu;
    let mut out = Vec::new();
    each_stmt(body(f), &mut |s| {
        let cond = match &s.kind {
            StmtKind::If { cond, .. } | StmtKind::While { cond, .. } | StmtKind::DoWhile { cond, .. } => cond,
            StmtKind::For { cond: Some(cond), .. } => cond,
            _ => return,
        };
        if exempt(s, cond) {
            return;
        }
        let text = expr_text(cond);
        if let Some(v) = tu.const_eval(cond).truth() {
            out.push(
                Raw::new(
                    "R14.3",
                    &cond.span,
                    Certainty::Definite,
                    format!("controlling expression `{text}` is always {v}"),
                )
                .note(None, "the expression is an integer constant expression"),
            );
        } else if let Some(iv) = f.intervals.of(cond) {
            if let Some(v) = iv.truth() {
                out.push(
                    Raw::new(
                        "R14.3",
                        &cond.span,
                        Certainty::Definite,
                        format!("controlling expression `{text}` is always {v}"),
                    )
                    .note(
                        Some(&cond.span),
                        format!("its value ranges over {iv} on every feasible path"),
                    ),
                );
            }
        }
    });
    out
}
