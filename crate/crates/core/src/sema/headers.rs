//! Standard headers generated from the integer model, served when no
//! include path provides them.

use super::IntegerModel;

fn type_of_width(m: &IntegerModel, width: u8) -> Option<&'static str> {
    [
        ("char", 8),
        ("short", m.short_bits),
        ("int", m.int_bits),
        ("long", m.long_bits),
        ("long long", m.long_long_bits),
    ]
    .into_iter()
    .find(|(_, w)| *w == width)
    .map(|(n, _)| n)
}

fn suffix(m: &IntegerModel, width: u8, unsigned: bool) -> String {
    let base = match type_of_width(m, width) {
        Some("long") => "L",
        Some("long long") => "LL",
        _ => "",
    };
    if unsigned {
        format!("U{base}")
    } else {
        base.to_string()
    }
}

fn max_signed(width: u8) -> u128 {
    (1u128 << (width - 1)) - 1
}

fn max_unsigned(width: u8) -> u128 {
    (1u128 << width) - 1
}

fn stdint(m: &IntegerModel) -> String {
    let mut s = String::from("#ifndef _STDINT_H\n#define _STDINT_H\n");
    for w in [8u8, 16, 32, 64] {
        let Some(t) = type_of_width(m, w) else { continue };
        let signed = if t == "char" {
            "signed char".to_string()
        } else {
            t.to_string()
        };
        s += &format!("typedef {signed} int{w}_t;\ntypedef unsigned {t} uint{w}_t;\n");
        let (ss, us) = (suffix(m, w, false), suffix(m, w, true));
        let (smax, umax) = (max_signed(w), max_unsigned(w));
        s += &format!(
            "#define INT{w}_MAX {smax}{ss}\n#define INT{w}_MIN (-INT{w}_MAX - 1)\n#define UINT{w}_MAX {umax}{us}\n"
        );
    }
    if let Some(t) = type_of_width(m, m.pointer_bits) {
        s += &format!("typedef {t} intptr_t;\ntypedef unsigned {t} uintptr_t;\n");
    }
    s += "#endif\n";
    s
}

fn stddef(m: &IntegerModel) -> String {
    let mut s = String::from("#ifndef _STDDEF_H\n#define _STDDEF_H\n");
    if let Some(t) = type_of_width(m, m.pointer_bits) {
        s += &format!("typedef unsigned {t} size_t;\ntypedef {t} ptrdiff_t;\n");
    }
    s += "#define NULL ((void *)0)\n#endif\n";
    s
}

fn limits(m: &IntegerModel) -> String {
    let mut s = String::from("#ifndef _LIMITS_H\n#define _LIMITS_H\n#define CHAR_BIT 8\n");
    s += "#define SCHAR_MAX 127\n#define SCHAR_MIN (-128)\n#define UCHAR_MAX 255\n";
    if m.char_signed {
        s += "#define CHAR_MAX 127\n#define CHAR_MIN (-128)\n";
    } else {
        s += "#define CHAR_MAX 255\n#define CHAR_MIN 0\n";
    }
    for (name, uname, w) in [
        ("SHRT", "USHRT", m.short_bits),
        ("INT", "UINT", m.int_bits),
        ("LONG", "ULONG", m.long_bits),
        ("LLONG", "ULLONG", m.long_long_bits),
    ] {
        let (ss, us) = (suffix(m, w, false), suffix(m, w, true));
        s += &format!(
            "#define {name}_MAX {}{ss}\n#define {name}_MIN (-{name}_MAX - 1)\n#define {uname}_MAX {}{us}\n",
            max_signed(w),
            max_unsigned(w)
        );
    }
    s += "#endif\n";
    s
}

const STDBOOL: &str =
    "#ifndef _STDBOOL_H\n#define _STDBOOL_H\n#define bool _Bool\n#define true 1\n#define false 0\n#endif\n";

const STDIO: &str = "#ifndef _STDIO_H\n#define _STDIO_H\n#include <stddef.h>\n\
int printf(const char *format, ...);\n\
int puts(const char *s);\n\
int putchar(int c);\n\
int getchar(void);\n\
#endif\n";

const STRING: &str = "#ifndef _STRING_H\n#define _STRING_H\n#include <stddef.h>\n\
void *memcpy(void *dst, const void *src, size_t n);\n\
void *memset(void *dst, int c, size_t n);\n\
int memcmp(const void *a, const void *b, size_t n);\n\
size_t strlen(const char *s);\n\
char *strcpy(char *dst, const char *src);\n\
int strcmp(const char *a, const char *b);\n\
#endif\n";

const STDLIB: &str = "#ifndef _STDLIB_H\n#define _STDLIB_H\n#include <stddef.h>\n\
void *malloc(size_t n);\n\
void free(void *p);\n\
void abort(void);\n\
void exit(int status);\n\
int abs(int x);\n\
#endif\n";

/// Header name and contents for each generated header.
pub fn builtin_headers(m: &IntegerModel) -> Vec<(String, String)> {
    vec![
        ("limits.h".into(), limits(m)),
        ("stdbool.h".into(), STDBOOL.into()),
        ("stddef.h".into(), stddef(m)),
        ("stdint.h".into(), stdint(m)),
        ("stdio.h".into(), STDIO.into()),
        ("stdlib.h".into(), STDLIB.into()),
        ("string.h".into(), STRING.into()),
    ]
}
