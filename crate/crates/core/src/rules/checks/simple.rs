use std::collections::{HashMap, HashSet};

use super::{each_expr, roots};
use crate::flow::{AssignState, FunctionFacts, Interval};
use crate::parser::{expr_text, BinaryOp, Expr, ExprKind, ExternalDecl, FullExprRole, NodeId, Span};
use crate::rules::effects::side_effects;
use crate::rules::{Certainty, Raw};
use crate::sema::{BehaviorClass, TypeDesc, TypedTu};

fn shift_operands(e: &Expr) -> Option<(&Expr, &Expr)> {
    match &e.kind {
        ExprKind::Binary(op, l, r) | ExprKind::CompoundAssign(op, l, r) if op.is_shift() => Some((l, r)),
        _ => None,
    }
}

fn shift_finding(tu: &TypedTu, e: &Expr, l: &Expr, r: &Expr, count: Interval) -> Option<Raw> {
    let width = tu.model.promoted_width(tu.type_of(l)).ok()?;
    let legal = Interval::new(0, i128::from(width) - 1);
    if count.is_subset(&legal) {
        return None;
    }
    let shown = match count.singleton() {
        Some(v) => format!("{v}"),
        None => format!("{count}"),
    };
    let (certainty, message) = if count.meet(&legal).is_none() {
        (
            Certainty::Definite,
            format!("shift count {shown} is outside {legal} for a {width}-bit promoted left operand"),
        )
    } else {
        (
            Certainty::Caution,
            format!("shift count may leave {legal} for a {width}-bit promoted left operand"),
        )
    };
    Some(
        Raw::new("R12.2", &e.span, certainty, message)
            .behavior(BehaviorClass::Undefined)
            .note(Some(&r.span), format!("`{}` ranges over {count}", expr_text(r))),
    )
}

pub(crate) fn check_r12_2(f: &FunctionFacts) -> Vec<Raw> {
    let mut out = Vec::new();
    each_expr(f, |e| {
        let Some((l, r)) = shift_operands(e) else { return };
        // no value means no feasible path evaluates the shift
        let Some(count) = f.intervals.of(r) else { return };
        out.extend(shift_finding(f.tu, e, l, r, count));
    });
    out
}

/// Shifts in file-scope initializers, which are constant expressions.
pub(crate) fn check_r12_2_file_scope(tu: &TypedTu) -> Vec<Raw> {
    let mut out = Vec::new();
    for item in &tu.ast.items {
        let ExternalDecl::Declaration(d) = item else { continue };
        for id in &d.declarators {
            let Some(init) = &id.init else { continue };
            for x in init.exprs() {
                x.walk_evaluated(&mut |e| {
                    let Some((l, r)) = shift_operands(e) else { return };
                    if let Some(v) = tu.const_eval(r).as_int() {
                        out.extend(shift_finding(tu, e, l, r, Interval::point(v)));
                    }
                });
            }
        }
    }
    out
}

pub(crate) fn check_r9_1(f: &FunctionFacts) -> Vec<Raw> {
    let tu = f.tu;
    f.assignment
        .reads
        .iter()
        .filter_map(|r| {
            let sym = tu.symbol(r.symbol);
            match r.state {
                AssignState::MaybeUnassigned => Some(
                    Raw::new(
                        "R9.1",
                        &r.span,
                        Certainty::Definite,
                        format!("`{}` may be read before it is set", sym.name),
                    )
                    .behavior(BehaviorClass::Undefined)
                    .note(
                        Some(&sym.def_span),
                        format!("`{}` declared without an initializer", sym.name),
                    )
                    .note(
                        None,
                        "some path from the declaration reaches this read without an assignment",
                    ),
                ),
                AssignState::AssignedByAlias => Some(
                    Raw::new(
                        "R9.1",
                        &r.span,
                        Certainty::Caution,
                        format!("`{}` may be read before it is set", sym.name),
                    )
                    .note(
                        Some(&sym.def_span),
                        format!("`{}` declared without an initializer", sym.name),
                    )
                    .note(
                        None,
                        "on some path the only possible assignment is through its address; it cannot be confirmed",
                    ),
                ),
                AssignState::DefinitelyAssigned => None,
            }
        })
        .collect()
}

fn int_like(t: &TypeDesc) -> bool {
    t.is_integer() && *t != TypeDesc::Bool
}

pub(crate) fn check_r11_4(tu: &TypedTu) -> Vec<Raw> {
    let mut seen = HashSet::new();
    let mut out = Vec::new();
    for c in &tu.conversions {
        let relevant =
            (int_like(&c.from) && c.to.is_object_pointer()) || (c.from.is_object_pointer() && int_like(&c.to));
        if !relevant || c.null_constant || !seen.insert(c.expr) {
            continue;
        }
        out.push(
            Raw::new(
                "R11.4",
                &c.span,
                Certainty::Definite,
                format!("conversion between `{}` and `{}`", c.from, c.to),
            )
            .behavior(BehaviorClass::ImplementationDefined),
        );
    }
    out
}

pub(crate) fn check_r13_1(f: &FunctionFacts) -> Vec<Raw> {
    let mut out = Vec::new();
    for fe in roots(f) {
        if !matches!(fe.role, FullExprRole::Initializer) {
            continue;
        }
        if let Some(first) = side_effects(f.tu, fe.expr).first() {
            out.push(
                Raw::new(
                    "R13.1",
                    &fe.expr.span,
                    Certainty::Definite,
                    "initializer has a persistent side effect",
                )
                .note(Some(&first.span), effect_note(first)),
            );
        }
    }
    out
}

fn effect_note(e: &Expr) -> String {
    match &e.kind {
        ExprKind::Call(..) => format!("call `{}` may have side effects", expr_text(e)),
        ExprKind::Assign(..) | ExprKind::CompoundAssign(..) | ExprKind::IncDec(..) => {
            format!("`{}` modifies an object", expr_text(e))
        }
        _ => format!("`{}` accesses a volatile object", expr_text(e)),
    }
}

pub(crate) fn check_r13_5(f: &FunctionFacts) -> Vec<Raw> {
    let mut out = Vec::new();
    each_expr(f, |e| {
        let ExprKind::Binary(op @ (BinaryOp::LogAnd | BinaryOp::LogOr), _, r) = &e.kind else {
            return;
        };
        if let Some(first) = side_effects(f.tu, r).first() {
            out.push(
                Raw::new(
                    "R13.5",
                    &r.span,
                    Certainty::Definite,
                    format!("right operand of `{}` has a persistent side effect", op.symbol()),
                )
                .note(Some(&first.span), effect_note(first)),
            );
        }
    });
    out
}

/// The pointer or array expression a store writes through, if any.
fn store_base<'a>(tu: &TypedTu, lv: &'a Expr) -> Option<&'a Expr> {
    let ptr_like = |x: &Expr| {
        tu.types
            .get(&x.id)
            .is_some_and(|t| t.is_pointer() || matches!(t, TypeDesc::Array { .. }))
    };
    match &lv.kind {
        ExprKind::Deref(p) => Some(p),
        ExprKind::Member { base, arrow: true, .. } => Some(base),
        ExprKind::Member { base, arrow: false, .. } => store_base(tu, base),
        ExprKind::Index(a, b) => {
            if ptr_like(a) {
                Some(a)
            } else if ptr_like(b) {
                Some(b)
            } else {
                None
            }
        }
        _ => None,
    }
}

pub(crate) fn check_r1_3(f: &FunctionFacts) -> Vec<Raw> {
    let tu = f.tu;
    let mut literals: HashMap<NodeId, &Span> = HashMap::new();
    each_expr(f, |e| {
        if matches!(e.kind, ExprKind::StringLit { .. }) {
            literals.insert(e.id, &e.span);
        }
    });
    let mut out = Vec::new();
    each_expr(f, |e| {
        let target = match &e.kind {
            ExprKind::Assign(l, _) | ExprKind::CompoundAssign(_, l, _) | ExprKind::IncDec(_, l) => l,
            _ => return,
        };
        let Some(base) = store_base(tu, target) else { return };
        let Some(set) = f.points_to.of(base) else { return };
        let lits: Vec<NodeId> = set.literals().collect();
        if lits.is_empty() {
            return;
        }
        let mut raw = if set.only_literals() {
            Raw::new("R1.3", &e.span, Certainty::Definite, "store into a string literal")
                .behavior(BehaviorClass::Undefined)
        } else {
            Raw::new(
                "R1.3",
                &e.span,
                Certainty::Caution,
                "store may write into a string literal",
            )
            .behavior(BehaviorClass::Undefined)
        };
        for l in lits {
            raw = raw.note(
                literals.get(&l).copied(),
                format!("`{}` may point to this string literal", expr_text(base)),
            );
        }
        out.push(raw);
    });
    out
}
