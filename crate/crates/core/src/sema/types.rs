use std::fmt;

use serde::{Deserialize, Serialize};

use crate::parser::Quals;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct RecordId(pub u32);

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum TypeDesc {
    Void,
    Bool,
    Int {
        signed: bool,
        width: u8,
    },
    Float,
    Double,
    /// `quals` qualify the pointed-to object.
    Pointer {
        pointee: Box<TypeDesc>,
        quals: Quals,
    },
    Array {
        elem: Box<TypeDesc>,
        len: Option<u64>,
    },
    Function {
        ret: Box<TypeDesc>,
        params: Vec<TypeDesc>,
        variadic: bool,
        prototype: bool,
    },
    Record {
        id: RecordId,
        tag: Option<String>,
        union: bool,
    },
    /// Enumerated types use a signed 32-bit underlying type.
    Enum {
        tag: Option<String>,
    },
}

impl TypeDesc {
    pub fn int(signed: bool, width: u8) -> TypeDesc {
        TypeDesc::Int { signed, width }
    }

    pub fn pointer_to(t: TypeDesc, quals: Quals) -> TypeDesc {
        TypeDesc::Pointer {
            pointee: Box::new(t),
            quals,
        }
    }

    pub fn is_integer(&self) -> bool {
        matches!(self, TypeDesc::Bool | TypeDesc::Int { .. } | TypeDesc::Enum { .. })
    }

    pub fn is_floating(&self) -> bool {
        matches!(self, TypeDesc::Float | TypeDesc::Double)
    }

    pub fn is_arithmetic(&self) -> bool {
        self.is_integer() || self.is_floating()
    }

    pub fn is_pointer(&self) -> bool {
        matches!(self, TypeDesc::Pointer { .. })
    }

    pub fn is_scalar(&self) -> bool {
        self.is_arithmetic() || self.is_pointer()
    }

    pub fn is_function(&self) -> bool {
        matches!(self, TypeDesc::Function { .. })
    }

    /// A pointer to an object type. `void *` and function pointers are not
    /// object pointers.
    pub fn is_object_pointer(&self) -> bool {
        match self {
            TypeDesc::Pointer { pointee, .. } => !matches!(**pointee, TypeDesc::Void | TypeDesc::Function { .. }),
            _ => false,
        }
    }

    pub fn pointee(&self) -> Option<(&TypeDesc, Quals)> {
        match self {
            TypeDesc::Pointer { pointee, quals } => Some((pointee, *quals)),
            _ => None,
        }
    }

    /// Integer signedness and width; enums are signed 32-bit and `_Bool` is
    /// unsigned 1-bit for range purposes.
    pub fn int_shape(&self) -> Option<(bool, u8)> {
        match self {
            TypeDesc::Int { signed, width } => Some((*signed, *width)),
            TypeDesc::Enum { .. } => Some((true, 32)),
            TypeDesc::Bool => Some((false, 1)),
            _ => None,
        }
    }

    /// Inclusive value range of an integer type.
    pub fn int_range(&self) -> Option<(i128, i128)> {
        let (signed, width) = self.int_shape()?;
        Some(int_range(signed, width))
    }
}

pub fn int_range(signed: bool, width: u8) -> (i128, i128) {
    let w = u32::from(width);
    if signed {
        (-(1i128 << (w - 1)), (1i128 << (w - 1)) - 1)
    } else {
        (0, (1i128 << w) - 1)
    }
}

/// Converts a mathematical value to an integer type with two's-complement
/// wraparound.
pub fn wrap_to(value: i128, signed: bool, width: u8) -> i128 {
    if width == 1 {
        return i128::from(value != 0);
    }
    let m = 1i128 << width;
    let mut v = value.rem_euclid(m);
    if signed && v >= m / 2 {
        v -= m;
    }
    v
}

impl fmt::Display for TypeDesc {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            TypeDesc::Void => write!(f, "void"),
            TypeDesc::Bool => write!(f, "_Bool"),
            TypeDesc::Int { signed, width } => write!(f, "{}int{width}", if *signed { "" } else { "u" }),
            TypeDesc::Float => write!(f, "float"),
            TypeDesc::Double => write!(f, "double"),
            TypeDesc::Pointer { pointee, quals } => {
                write!(f, "pointer to ")?;
                if quals.is_const {
                    write!(f, "const ")?;
                }
                if quals.is_volatile {
                    write!(f, "volatile ")?;
                }
                write!(f, "{pointee}")
            }
            TypeDesc::Array { elem, len } => match len {
                Some(n) => write!(f, "array[{n}] of {elem}"),
                None => write!(f, "array of {elem}"),
            },
            TypeDesc::Function {
                ret, params, variadic, ..
            } => {
                write!(f, "function(")?;
                for (i, p) in params.iter().enumerate() {
                    if i > 0 {
                        write!(f, ", ")?;
                    }
                    write!(f, "{p}")?;
                }
                if *variadic {
                    write!(f, ", ...")?;
                }
                write!(f, ") returning {ret}")
            }
            TypeDesc::Record { tag, union, .. } => write!(
                f,
                "{} {}",
                if *union { "union" } else { "struct" },
                tag.as_deref().unwrap_or("<anonymous>")
            ),
            TypeDesc::Enum { tag } => write!(f, "enum {}", tag.as_deref().unwrap_or("<anonymous>")),
        }
    }
}

/// The implementation-defined integer model the checker assumes. Widths are
/// in bits and must be one of 8, 16, 32 or 64.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default)]
pub struct IntegerModel {
    pub char_signed: bool,
    pub short_bits: u8,
    pub int_bits: u8,
    pub long_bits: u8,
    pub long_long_bits: u8,
    pub pointer_bits: u8,
}

impl Default for IntegerModel {
    fn default() -> Self {
        IntegerModel {
            char_signed: true,
            short_bits: 16,
            int_bits: 32,
            long_bits: 64,
            long_long_bits: 64,
            pointer_bits: 64,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("invalid integer model: {0}")]
pub struct ModelError(pub String);

impl IntegerModel {
    pub fn validate(&self) -> Result<(), ModelError> {
        let ok = |w: u8| matches!(w, 8 | 16 | 32 | 64);
        for (name, w) in [
            ("short", self.short_bits),
            ("int", self.int_bits),
            ("long", self.long_bits),
            ("long long", self.long_long_bits),
            ("pointer", self.pointer_bits),
        ] {
            if !ok(w) {
                return Err(ModelError(format!("{name} width {w} is not one of 8, 16, 32, 64")));
            }
        }
        if !(8 <= self.short_bits
            && self.short_bits <= self.int_bits
            && self.int_bits <= self.long_bits
            && self.long_bits <= self.long_long_bits)
        {
            return Err(ModelError(
                "widths must satisfy char <= short <= int <= long <= long long".into(),
            ));
        }
        if self.short_bits < 16 || self.int_bits < 16 || self.long_bits < 32 || self.long_long_bits < 64 {
            return Err(ModelError("widths below the C99 minimums".into()));
        }
        Ok(())
    }

    pub fn char_type(&self) -> TypeDesc {
        TypeDesc::int(self.char_signed, 8)
    }

    pub fn int_type(&self) -> TypeDesc {
        TypeDesc::int(true, self.int_bits)
    }

    pub fn size_type(&self) -> TypeDesc {
        TypeDesc::int(false, self.pointer_bits)
    }

    pub fn ptrdiff_type(&self) -> TypeDesc {
        TypeDesc::int(true, self.pointer_bits)
    }

    /// Integer promotion. Non-integer types are returned unchanged.
    pub fn promote(&self, t: &TypeDesc) -> TypeDesc {
        match t.int_shape() {
            Some((signed, width)) => {
                let int = self.int_bits;
                if width < int || (width == int && signed) {
                    self.int_type()
                } else {
                    TypeDesc::int(signed, width)
                }
            }
            None => t.clone(),
        }
    }

    /// Width of an arithmetic type after integer promotion.
    pub fn promoted_width(&self, t: &TypeDesc) -> Result<u8, String> {
        match self.promote(t) {
            TypeDesc::Int { width, .. } => Ok(width),
            TypeDesc::Float => Ok(32),
            TypeDesc::Double => Ok(64),
            other => Err(format!("`{other}` is not an arithmetic type")),
        }
    }

    /// The usual arithmetic conversions. Both operands must be arithmetic.
    pub fn usual_arithmetic(&self, a: &TypeDesc, b: &TypeDesc) -> TypeDesc {
        if matches!(a, TypeDesc::Double) || matches!(b, TypeDesc::Double) {
            return TypeDesc::Double;
        }
        if matches!(a, TypeDesc::Float) || matches!(b, TypeDesc::Float) {
            return TypeDesc::Float;
        }
        let (pa, pb) = (self.promote(a), self.promote(b));
        let (Some((sa, wa)), Some((sb, wb))) = (pa.int_shape(), pb.int_shape()) else {
            return pa;
        };
        if (sa, wa) == (sb, wb) {
            return pa;
        }
        if sa == sb {
            return TypeDesc::int(sa, wa.max(wb));
        }
        let (us_w, s_w) = if sa { (wb, wa) } else { (wa, wb) };
        if us_w >= s_w {
            TypeDesc::int(false, us_w)
        } else {
            // signed type is wider and so can represent every unsigned value
            TypeDesc::int(true, s_w)
        }
    }

    /// Size in bytes, `None` for incomplete and function types. Record
    /// layouts come from `record_size`.
    pub fn size_of(&self, t: &TypeDesc, record_size: &dyn Fn(RecordId) -> Option<(u64, u64)>) -> Option<u64> {
        self.layout(t, record_size).map(|(s, _)| s)
    }

    /// (size, alignment) in bytes.
    pub fn layout(&self, t: &TypeDesc, record_size: &dyn Fn(RecordId) -> Option<(u64, u64)>) -> Option<(u64, u64)> {
        match t {
            TypeDesc::Void | TypeDesc::Function { .. } => None,
            TypeDesc::Bool => Some((1, 1)),
            TypeDesc::Int { width, .. } => {
                let b = u64::from(*width) / 8;
                Some((b, b))
            }
            TypeDesc::Enum { .. } => Some((4, 4)),
            TypeDesc::Float => Some((4, 4)),
            TypeDesc::Double => Some((8, 8)),
            TypeDesc::Pointer { .. } => {
                let b = u64::from(self.pointer_bits) / 8;
                Some((b, b))
            }
            TypeDesc::Array { elem, len } => {
                let (s, a) = self.layout(elem, record_size)?;
                Some((s.checked_mul((*len)?)?, a))
            }
            TypeDesc::Record { id, .. } => record_size(*id),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn promoted_widths() {
        let m = IntegerModel::default();
        assert_eq!(m.promoted_width(&TypeDesc::int(false, 32)), Ok(32));
        assert_eq!(m.promoted_width(&TypeDesc::int(false, 8)), Ok(32));
        assert_eq!(m.promoted_width(&TypeDesc::int(false, 64)), Ok(64));
        assert_eq!(m.promoted_width(&TypeDesc::Bool), Ok(32));
        assert!(m.promoted_width(&TypeDesc::Void).is_err());
        // promoting an already promoted type changes nothing
        for t in [
            TypeDesc::int(true, 8),
            TypeDesc::int(false, 16),
            TypeDesc::int(false, 64),
        ] {
            let once = m.promote(&t);
            assert_eq!(m.promote(&once), once);
        }
    }

    #[test]
    fn small_unsigned_promotes_to_signed_int() {
        let m = IntegerModel::default();
        assert_eq!(m.promote(&TypeDesc::int(false, 8)), TypeDesc::int(true, 32));
        assert_eq!(m.promote(&TypeDesc::int(false, 32)), TypeDesc::int(false, 32));
    }

    #[test]
    fn arithmetic_conversions() {
        let m = IntegerModel::default();
        let i32_ = TypeDesc::int(true, 32);
        let u32_ = TypeDesc::int(false, 32);
        let i64_ = TypeDesc::int(true, 64);
        assert_eq!(m.usual_arithmetic(&i32_, &u32_), u32_);
        assert_eq!(m.usual_arithmetic(&u32_, &i64_), i64_);
        assert_eq!(
            m.usual_arithmetic(&TypeDesc::int(true, 8), &TypeDesc::int(false, 16)),
            i32_
        );
        assert_eq!(
            m.usual_arithmetic(&TypeDesc::int(false, 64), &i64_),
            TypeDesc::int(false, 64)
        );
        assert_eq!(m.usual_arithmetic(&TypeDesc::Float, &i64_), TypeDesc::Float);
        assert_eq!(
            m.usual_arithmetic(&TypeDesc::Float, &TypeDesc::Double),
            TypeDesc::Double
        );
    }

    #[test]
    fn wraparound() {
        assert_eq!(wrap_to(256, false, 8), 0);
        assert_eq!(wrap_to(-1, false, 32), 4294967295);
        assert_eq!(wrap_to(2147483648, true, 32), -2147483648);
        assert_eq!(wrap_to(5, false, 1), 1);
        assert_eq!(int_range(true, 8), (-128, 127));
    }

    #[test]
    fn model_validation() {
        assert!(IntegerModel::default().validate().is_ok());
        let bad = IntegerModel {
            int_bits: 24,
            ..IntegerModel::default()
        };
        assert!(bad.validate().is_err());
        let bad = IntegerModel {
            int_bits: 64,
            long_bits: 32,
            ..IntegerModel::default()
        };
        assert!(bad.validate().is_err());
    }
}
