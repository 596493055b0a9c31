mod const_ptr;
mod loops;
mod order;
mod reach;
mod recursion;
mod simple;

pub(crate) use const_ptr::check_r8_13;
pub(crate) use loops::{check_r14_1, check_r14_2, check_r14_3};
pub(crate) use order::check_r13_2;
pub(crate) use reach::{check_r2_1, check_r2_2};
pub(crate) use recursion::check_r17_2;
pub(crate) use simple::{
    check_r11_4, check_r12_2, check_r12_2_file_scope, check_r13_1, check_r13_5, check_r1_3, check_r9_1,
};

use crate::flow::FunctionFacts;
use crate::parser::{full_expressions, Expr, FullExpr, Stmt};

fn body<'a>(f: &FunctionFacts<'a>) -> &'a Stmt {
    &f.tu.function_def(f.function).body
}

fn roots<'a>(f: &FunctionFacts<'a>) -> Vec<FullExpr<'a>> {
    full_expressions(body(f))
}

/// Every evaluated subexpression of the function, full expressions in
/// source order and each walked in pre-order.
fn each_expr<'a>(f: &FunctionFacts<'a>, mut visit: impl FnMut(&'a Expr)) {
    for fe in roots(f) {
        fe.expr.walk_evaluated(&mut visit);
    }
}

fn each_stmt<'a>(s: &'a Stmt, visit: &mut impl FnMut(&'a Stmt)) {
    visit(s);
    for c in s.sub_statements() {
        each_stmt(c, visit);
    }
}
