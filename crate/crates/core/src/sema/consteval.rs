use super::types::{wrap_to, IntegerModel, TypeDesc};
use super::{BehaviorClass, TypedTu};
use crate::parser::{BinaryOp, Expr, ExprKind, NodeId, UnaryOp};

/// What constant evaluation needs to know about a (possibly partially)
/// typed unit.
pub trait ConstEnv {
    fn type_of(&self, id: NodeId) -> Option<&TypeDesc>;
    /// Value of an identifier node bound to an enumeration constant.
    fn enum_value(&self, id: NodeId) -> Option<i128>;
    fn is_volatile(&self, id: NodeId) -> bool;
    fn sizeof_value(&self, id: NodeId) -> Option<u64>;
    fn model(&self) -> &IntegerModel;
}

impl ConstEnv for TypedTu {
    fn type_of(&self, id: NodeId) -> Option<&TypeDesc> {
        self.types.get(&id)
    }

    fn enum_value(&self, id: NodeId) -> Option<i128> {
        self.bindings.get(&id).and_then(|s| self.symbols.get(*s).enum_value)
    }

    fn is_volatile(&self, id: NodeId) -> bool {
        self.lvalue_quals.get(&id).is_some_and(|q| q.is_volatile)
    }

    fn sizeof_value(&self, id: NodeId) -> Option<u64> {
        self.sizes.get(&id).copied()
    }

    fn model(&self) -> &IntegerModel {
        &self.model
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ConstValue {
    Int { value: i128, ty: TypeDesc },
    NotConstant,
}

impl ConstValue {
    pub fn as_int(&self) -> Option<i128> {
        match self {
            ConstValue::Int { value, .. } => Some(*value),
            ConstValue::NotConstant => None,
        }
    }

    pub fn truth(&self) -> Option<bool> {
        self.as_int().map(|v| v != 0)
    }
}

/// Evaluates an integer constant expression. Every operand must itself be
/// constant; `1 ? 2 : x` is not constant.
pub fn const_eval(env: &dyn ConstEnv, e: &Expr) -> ConstValue {
    let mut tags = Vec::new();
    eval(env, e, &mut tags)
}

/// Like `const_eval`, also reporting undefined operations met on the way
/// (signed overflow, division by zero, out-of-range shifts).
pub(crate) fn const_eval_tagged(env: &dyn ConstEnv, e: &Expr, tags: &mut Vec<(NodeId, BehaviorClass)>) -> ConstValue {
    eval(env, e, tags)
}

fn eval(env: &dyn ConstEnv, e: &Expr, tags: &mut Vec<(NodeId, BehaviorClass)>) -> ConstValue {
    let nc = ConstValue::NotConstant;
    let Some(ty) = env.type_of(e.id).cloned() else {
        return nc;
    };
    let m = env.model();
    let mk = |value: i128, ty: &TypeDesc| match ty.int_shape() {
        Some((s, w)) => ConstValue::Int {
            value: wrap_to(value, s, w),
            ty: ty.clone(),
        },
        None => ConstValue::NotConstant,
    };
    // checks a mathematical result against a signed result type
    let overflow = |value: i128, ty: &TypeDesc, tags: &mut Vec<(NodeId, BehaviorClass)>| {
        if let Some((true, w)) = ty.int_shape() {
            let (lo, hi) = super::int_range(true, w);
            if value < lo || value > hi {
                tags.push((e.id, BehaviorClass::Undefined));
            }
        }
    };
    match &e.kind {
        ExprKind::IntConst(l) => mk(i128::from(l.value), &ty),
        ExprKind::CharConst { value, wide } => {
            let v = if *wide || !m.char_signed {
                i128::from(*value)
            } else {
                wrap_to(i128::from(*value), true, 8)
            };
            mk(v, &ty)
        }
        ExprKind::Ident(_) => match env.enum_value(e.id) {
            Some(v) if !env.is_volatile(e.id) => mk(v, &ty),
            _ => nc,
        },
        ExprKind::SizeofExpr(_) | ExprKind::SizeofType(_) => match env.sizeof_value(e.id) {
            Some(v) => mk(i128::from(v), &ty),
            None => nc,
        },
        ExprKind::Cast(_, a) => {
            let v = eval(env, a, tags);
            match v.as_int() {
                Some(v) if ty.is_integer() => mk(if ty == TypeDesc::Bool { i128::from(v != 0) } else { v }, &ty),
                _ => nc,
            }
        }
        ExprKind::Unary(op, a) => {
            let Some(v) = eval(env, a, tags).as_int() else {
                return nc;
            };
            match op {
                UnaryOp::Plus => mk(v, &ty),
                UnaryOp::Neg => {
                    overflow(-v, &ty, tags);
                    mk(-v, &ty)
                }
                UnaryOp::BitNot => mk(!v, &ty),
                UnaryOp::Not => mk(i128::from(v == 0), &ty),
            }
        }
        ExprKind::Binary(op, a, b) => {
            let va = eval(env, a, tags);
            let vb = eval(env, b, tags);
            let (Some(x), Some(y)) = (va.as_int(), vb.as_int()) else {
                return nc;
            };
            let (Some(ta), Some(tb)) = (env.type_of(a.id), env.type_of(b.id)) else {
                return nc;
            };
            if !ta.is_integer() || !tb.is_integer() {
                return nc;
            }
            // operands converted to the common type first
            let common = if op.is_shift() {
                m.promote(ta)
            } else {
                m.usual_arithmetic(ta, tb)
            };
            let Some((cs, cw)) = common.int_shape() else { return nc };
            let (x, y) = if op.is_shift() || op.is_logical() {
                (wrap_to(x, cs, cw), y)
            } else {
                (wrap_to(x, cs, cw), wrap_to(y, cs, cw))
            };
            match op {
                BinaryOp::Add => {
                    overflow(x + y, &ty, tags);
                    mk(x + y, &ty)
                }
                BinaryOp::Sub => {
                    overflow(x - y, &ty, tags);
                    mk(x - y, &ty)
                }
                BinaryOp::Mul => {
                    let r = x.checked_mul(y).unwrap_or(i128::MAX);
                    overflow(r, &ty, tags);
                    mk(x.wrapping_mul(y), &ty)
                }
                BinaryOp::Div | BinaryOp::Rem => {
                    if y == 0 {
                        tags.push((e.id, BehaviorClass::Undefined));
                        return nc;
                    }
                    // C truncates toward zero, as does i128 division
                    let r = if *op == BinaryOp::Div { x / y } else { x % y };
                    if *op == BinaryOp::Div {
                        overflow(r, &ty, tags);
                    } else if cs && x == super::int_range(true, cw).0 && y == -1 {
                        tags.push((e.id, BehaviorClass::Undefined));
                    }
                    mk(r, &ty)
                }
                BinaryOp::Shl | BinaryOp::Shr => {
                    if y < 0 || y >= i128::from(cw) {
                        tags.push((e.id, BehaviorClass::Undefined));
                        return nc;
                    }
                    if *op == BinaryOp::Shl {
                        let r = x << y;
                        if cs && (x < 0 || r > super::int_range(true, cw).1) {
                            tags.push((e.id, BehaviorClass::Undefined));
                        }
                        mk(r, &ty)
                    } else {
                        if cs && x < 0 {
                            tags.push((e.id, BehaviorClass::ImplementationDefined));
                        }
                        mk(x >> y, &ty)
                    }
                }
                BinaryOp::Lt => mk(i128::from(x < y), &ty),
                BinaryOp::Gt => mk(i128::from(x > y), &ty),
                BinaryOp::Le => mk(i128::from(x <= y), &ty),
                BinaryOp::Ge => mk(i128::from(x >= y), &ty),
                BinaryOp::Eq => mk(i128::from(x == y), &ty),
                BinaryOp::Ne => mk(i128::from(x != y), &ty),
                BinaryOp::BitAnd => mk(x & y, &ty),
                BinaryOp::BitOr => mk(x | y, &ty),
                BinaryOp::BitXor => mk(x ^ y, &ty),
                BinaryOp::LogAnd => mk(i128::from(x != 0 && y != 0), &ty),
                BinaryOp::LogOr => mk(i128::from(x != 0 || y != 0), &ty),
            }
        }
        ExprKind::Conditional(c, a, b) => {
            let vc = eval(env, c, tags);
            let va = eval(env, a, tags);
            let vb = eval(env, b, tags);
            match (vc.as_int(), va.as_int(), vb.as_int()) {
                (Some(c), Some(a), Some(b)) => mk(if c != 0 { a } else { b }, &ty),
                _ => nc,
            }
        }
        ExprKind::Comma(a, b) => {
            let va = eval(env, a, tags);
            let vb = eval(env, b, tags);
            match (va.as_int(), vb.as_int()) {
                (Some(_), Some(v)) => mk(v, &ty),
                _ => nc,
            }
        }
        _ => {
            // still visit operands so nested undefined operations are tagged
            for c in e.children() {
                eval(env, c, tags);
            }
            nc
        }
    }
}
