use std::collections::HashMap;

use crate::parser::{Expr, ExprKind, NodeId};
use crate::sema::{TypeDesc, TypedTu};

/// Persistent side effects inside `e`, in evaluation pre-order:
/// assignments, increments, calls and volatile accesses.
pub(crate) fn side_effects<'a>(tu: &TypedTu, e: &'a Expr) -> Vec<&'a Expr> {
    let mut out = Vec::new();
    visit(tu, e, true, &mut out);
    out
}

fn is_array(tu: &TypedTu, e: &Expr) -> bool {
    matches!(tu.types.get(&e.id), Some(TypeDesc::Array { .. }))
}

fn is_pointer(tu: &TypedTu, e: &Expr) -> bool {
    tu.types.get(&e.id).is_some_and(|t| t.is_pointer())
}

/// `accessed` is false where `e` only designates an object, as under `&`.
fn visit<'a>(tu: &TypedTu, e: &'a Expr, accessed: bool, out: &mut Vec<&'a Expr>) {
    use ExprKind::*;
    match &e.kind {
        SizeofExpr(_) | SizeofType(_) => {}
        Ident(_) => {
            if accessed && tu.is_volatile_lvalue(e) && !is_array(tu, e) {
                out.push(e);
            }
        }
        Deref(p) => {
            if accessed && tu.is_volatile_lvalue(e) && !is_array(tu, e) {
                out.push(e);
            }
            visit(tu, p, true, out);
        }
        Member { base, arrow, .. } => {
            if accessed && tu.is_volatile_lvalue(e) && !is_array(tu, e) {
                out.push(e);
            }
            visit(tu, base, *arrow, out);
        }
        Index(a, b) => {
            if accessed && tu.is_volatile_lvalue(e) && !is_array(tu, e) {
                out.push(e);
            }
            for x in [a, b] {
                let designates = is_array(tu, x) && !is_pointer(tu, x);
                visit(tu, x, !designates, out);
            }
        }
        AddrOf(x) => visit(tu, x, false, out),
        Assign(l, r) | CompoundAssign(_, l, r) => {
            out.push(e);
            visit(tu, l, false, out);
            visit(tu, r, true, out);
        }
        IncDec(_, l) => {
            out.push(e);
            visit(tu, l, false, out);
        }
        Call(f, args) => {
            out.push(e);
            visit(tu, f, true, out);
            for a in args {
                visit(tu, a, true, out);
            }
        }
        _ => {
            for c in e.children() {
                visit(tu, c, true, out);
            }
        }
    }
}

pub(crate) fn is_void_cast(tu: &TypedTu, e: &Expr) -> bool {
    matches!(e.kind, ExprKind::Cast(..)) && tu.types.get(&e.id) == Some(&TypeDesc::Void)
}

/// Parent of every subexpression below `root`.
pub(crate) fn parents<'a>(root: &'a Expr, map: &mut HashMap<NodeId, &'a Expr>) {
    for c in root.children() {
        map.insert(c.id, root);
        parents(c, map);
    }
}
