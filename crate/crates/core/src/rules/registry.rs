use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;
use std::sync::OnceLock;

use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum GuidelineKind {
    Directive,
    Rule,
}

/// Registry categories, weakest first.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Category {
    Advisory,
    Required,
    Mandatory,
}

impl fmt::Display for Category {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Category::Advisory => "advisory",
            Category::Required => "required",
            Category::Mandatory => "mandatory",
        })
    }
}

impl FromStr for Category {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "advisory" => Ok(Category::Advisory),
            "required" => Ok(Category::Required),
            "mandatory" => Ok(Category::Mandatory),
            _ => Err(format!("unknown category `{s}`")),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Decidability {
    Decidable,
    Undecidable,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Scope {
    SingleTranslationUnit,
    System,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct GuidelineMeta {
    pub id: String,
    pub kind: GuidelineKind,
    pub category: Category,
    /// Absent for directives.
    pub decidability: Option<Decidability>,
    pub scope: Scope,
    pub summary: String,
    pub implemented: bool,
}

/// Rules with a checker in this crate.
pub const IMPLEMENTED: [&str; 14] = [
    "R1.3", "R2.1", "R2.2", "R8.13", "R9.1", "R11.4", "R12.2", "R13.1", "R13.2", "R13.5", "R14.1", "R14.2", "R14.3",
    "R17.2",
];

use Category::{Advisory as A, Mandatory as M, Required as Q};
use Decidability::{Decidable as Dec, Undecidable as Und};
use Scope::{SingleTranslationUnit as Stu, System as Sys};

const DIRECTIVES: &[(&str, Category, Scope, &str)] = &[
    (
        "D1.1",
        Q,
        Sys,
        "Implementation-defined behavior the program relies on is documented and understood",
    ),
    ("D2.1", Q, Sys, "Sources compile without errors"),
    ("D3.1", Q, Sys, "Code is traceable to documented requirements"),
    ("D4.1", Q, Sys, "Run-time failures are minimized"),
    ("D4.2", A, Sys, "Assembly language usage is documented"),
    ("D4.3", Q, Sys, "Assembly language is encapsulated and isolated"),
    ("D4.4", A, Sys, "Sections of code are not commented out"),
    (
        "D4.5",
        A,
        Sys,
        "Identifiers in one name space with overlapping visibility are typographically unambiguous",
    ),
    (
        "D4.6",
        A,
        Sys,
        "Size and signedness typedefs are used in place of basic numerical types",
    ),
    ("D4.7", Q, Sys, "Error information returned by a function is tested"),
    (
        "D4.8",
        A,
        Sys,
        "Structure implementation is hidden when pointers to it are never dereferenced",
    ),
    (
        "D4.9",
        A,
        Sys,
        "Functions are used in preference to function-like macros",
    ),
    (
        "D4.10",
        Q,
        Sys,
        "Header file contents are protected against repeated inclusion",
    ),
    ("D4.11", Q, Sys, "Values passed to library functions are valid"),
    ("D4.12", Q, Sys, "Dynamic memory allocation is not used"),
    (
        "D4.13",
        A,
        Sys,
        "Resource operations are called in the appropriate sequence",
    ),
    ("D4.14", Q, Sys, "Values received from external sources are checked"),
];

const RULES: &[(&str, Category, Decidability, Scope, &str)] = &[
    (
        "R1.1",
        Q,
        Dec,
        Stu,
        "No violations of standard C syntax and constraints or translation limits",
    ),
    ("R1.2", A, Und, Stu, "Language extensions are not used"),
    ("R1.3", Q, Und, Stu, "No undefined or critical unspecified behavior"),
    ("R2.1", Q, Und, Sys, "No unreachable code"),
    ("R2.2", Q, Und, Sys, "No dead code"),
    ("R2.3", A, Dec, Sys, "No unused type declarations"),
    ("R2.4", A, Dec, Sys, "No unused tag declarations"),
    ("R2.5", A, Dec, Sys, "No unused macro declarations"),
    ("R2.6", A, Dec, Stu, "No unused labels"),
    ("R2.7", A, Dec, Stu, "No unused parameters"),
    ("R3.1", Q, Dec, Stu, "Comment openers do not appear inside comments"),
    ("R3.2", Q, Dec, Stu, "No line splicing in line comments"),
    (
        "R4.1",
        Q,
        Dec,
        Stu,
        "Octal and hexadecimal escape sequences are terminated",
    ),
    ("R4.2", A, Dec, Stu, "Trigraphs are not used"),
    ("R5.1", Q, Dec, Sys, "External identifiers are distinct"),
    (
        "R5.2",
        Q,
        Dec,
        Stu,
        "Identifiers in one scope and name space are distinct",
    ),
    ("R5.3", Q, Dec, Stu, "Inner scope identifiers do not hide outer ones"),
    ("R5.4", Q, Dec, Stu, "Macro identifiers are distinct"),
    ("R5.5", Q, Dec, Stu, "Identifiers are distinct from macro names"),
    ("R5.6", Q, Dec, Sys, "Typedef names are unique"),
    ("R5.7", Q, Dec, Sys, "Tag names are unique"),
    ("R5.8", Q, Dec, Sys, "Identifiers with external linkage are unique"),
    ("R5.9", A, Dec, Sys, "Identifiers with internal linkage are unique"),
    ("R6.1", Q, Dec, Stu, "Bit-fields have an appropriate type"),
    ("R6.2", Q, Dec, Stu, "Single-bit named bit-fields are not signed"),
    ("R7.1", Q, Dec, Stu, "Octal constants are not used"),
    ("R7.2", Q, Dec, Stu, "Unsigned constants carry a `u` suffix"),
    ("R7.3", Q, Dec, Stu, "Lowercase `l` is not used in literal suffixes"),
    (
        "R7.4",
        Q,
        Dec,
        Stu,
        "String literals are only assigned to pointers to const char",
    ),
    ("R8.1", Q, Dec, Stu, "Types are explicitly specified"),
    (
        "R8.2",
        Q,
        Dec,
        Stu,
        "Function types are in prototype form with named parameters",
    ),
    (
        "R8.3",
        Q,
        Dec,
        Sys,
        "Declarations of an object or function use the same names and qualifiers",
    ),
    (
        "R8.4",
        Q,
        Dec,
        Stu,
        "A compatible declaration is visible when an external object or function is defined",
    ),
    (
        "R8.5",
        Q,
        Dec,
        Sys,
        "An external object or function is declared once in one file",
    ),
    (
        "R8.6",
        Q,
        Dec,
        Sys,
        "An identifier with external linkage has exactly one external definition",
    ),
    (
        "R8.7",
        A,
        Dec,
        Sys,
        "External linkage is not used for identifiers referenced in one unit only",
    ),
    (
        "R8.8",
        Q,
        Dec,
        Stu,
        "The static specifier is used on all internal-linkage declarations",
    ),
    (
        "R8.9",
        A,
        Dec,
        Sys,
        "Objects used by one function only are defined at block scope",
    ),
    (
        "R8.10",
        Q,
        Dec,
        Stu,
        "Inline functions are declared with static storage",
    ),
    (
        "R8.11",
        A,
        Dec,
        Stu,
        "External arrays are declared with an explicit size",
    ),
    (
        "R8.12",
        Q,
        Dec,
        Stu,
        "Implicitly valued enumeration constants are unique",
    ),
    (
        "R8.13",
        A,
        Und,
        Sys,
        "Pointers point to const-qualified types whenever possible",
    ),
    ("R8.14", Q, Dec, Stu, "The restrict qualifier is not used"),
    (
        "R9.1",
        M,
        Und,
        Sys,
        "Automatic objects are not read before they are set",
    ),
    (
        "R9.2",
        Q,
        Dec,
        Stu,
        "Aggregate and union initializers are enclosed in braces",
    ),
    ("R9.3", Q, Dec, Stu, "Arrays are not partially initialized"),
    (
        "R9.4",
        Q,
        Dec,
        Stu,
        "No element of an object is initialized more than once",
    ),
    (
        "R9.5",
        Q,
        Dec,
        Stu,
        "Arrays initialized with designators have an explicit size",
    ),
    (
        "R10.1",
        Q,
        Dec,
        Stu,
        "Operands are not of an inappropriate essential type",
    ),
    (
        "R10.2",
        Q,
        Dec,
        Stu,
        "Character operands are used appropriately in addition and subtraction",
    ),
    (
        "R10.3",
        Q,
        Dec,
        Stu,
        "No assignment to a narrower or different essential type category",
    ),
    (
        "R10.4",
        Q,
        Dec,
        Stu,
        "Operands of arithmetic conversions share an essential type category",
    ),
    ("R10.5", A, Dec, Stu, "Casts are to an appropriate essential type"),
    (
        "R10.6",
        Q,
        Dec,
        Stu,
        "Composite expressions are not assigned to a wider essential type",
    ),
    (
        "R10.7",
        Q,
        Dec,
        Stu,
        "Composite operands are not widened by the other operand",
    ),
    (
        "R10.8",
        Q,
        Dec,
        Stu,
        "Composite expressions are not cast to a wider or different category",
    ),
    (
        "R11.1",
        Q,
        Dec,
        Stu,
        "No conversions between function pointers and other types",
    ),
    (
        "R11.2",
        Q,
        Dec,
        Stu,
        "No conversions involving pointers to incomplete types",
    ),
    (
        "R11.3",
        Q,
        Dec,
        Stu,
        "No casts between pointers to different object types",
    ),
    (
        "R11.4",
        A,
        Dec,
        Stu,
        "No conversions between object pointers and integers",
    ),
    (
        "R11.5",
        A,
        Dec,
        Stu,
        "No conversions from pointer to void into object pointers",
    ),
    (
        "R11.6",
        Q,
        Dec,
        Stu,
        "No casts between pointer to void and arithmetic types",
    ),
    (
        "R11.7",
        Q,
        Dec,
        Stu,
        "No casts between object pointers and non-integer arithmetic types",
    ),
    (
        "R11.8",
        Q,
        Dec,
        Stu,
        "Casts do not remove const or volatile qualification",
    ),
    ("R11.9", Q, Dec, Stu, "NULL is the only integer null pointer constant"),
    ("R12.1", A, Dec, Stu, "Operator precedence is made explicit"),
    ("R12.2", Q, Und, Stu, "Right-hand operand of a shift is in range"),
    ("R12.3", A, Dec, Stu, "The comma operator is not used"),
    ("R12.4", A, Dec, Stu, "Constant expressions do not wrap around"),
    (
        "R12.5",
        M,
        Dec,
        Stu,
        "sizeof is not applied to an array function parameter",
    ),
    ("R13.1", Q, Und, Stu, "No persistent side effects in initializer lists"),
    (
        "R13.2",
        Q,
        Und,
        Sys,
        "Results do not depend on unspecified evaluation order",
    ),
    (
        "R13.3",
        A,
        Dec,
        Stu,
        "Increment and decrement are the only side effect in a full expression",
    ),
    ("R13.4", A, Dec, Stu, "The result of an assignment is not used"),
    (
        "R13.5",
        Q,
        Und,
        Sys,
        "No persistent side effects in the right operand of && or ||",
    ),
    ("R13.6", M, Dec, Stu, "The operand of sizeof has no side effects"),
    ("R14.1", Q, Und, Sys, "No loop counters of essentially floating type"),
    ("R14.2", Q, Und, Sys, "For loops are well-formed"),
    ("R14.3", Q, Und, Sys, "Controlling expressions are not invariant"),
    ("R14.4", Q, Dec, Stu, "Controlling expressions are essentially Boolean"),
    ("R15.1", A, Dec, Stu, "goto is not used"),
    ("R15.2", Q, Dec, Stu, "goto jumps forward within the same function"),
    (
        "R15.3",
        Q,
        Dec,
        Stu,
        "goto targets a label in the same or an enclosing block",
    ),
    ("R15.4", A, Dec, Stu, "At most one break or goto terminates a loop"),
    ("R15.5", A, Dec, Stu, "A function has a single point of exit"),
    (
        "R15.6",
        Q,
        Dec,
        Stu,
        "Loop and selection bodies are compound statements",
    ),
    ("R15.7", Q, Dec, Stu, "if ... else if chains end with else"),
    ("R16.1", Q, Dec, Stu, "Switch statements are well-formed"),
    (
        "R16.2",
        Q,
        Dec,
        Stu,
        "Switch labels appear in the outermost compound statement of the body",
    ),
    (
        "R16.3",
        Q,
        Dec,
        Stu,
        "Every switch clause ends with an unconditional break",
    ),
    ("R16.4", Q, Dec, Stu, "Every switch has a default label"),
    ("R16.5", Q, Dec, Stu, "The default label is first or last"),
    ("R16.6", Q, Dec, Stu, "Every switch has at least two clauses"),
    ("R16.7", Q, Dec, Stu, "Switch expressions are not essentially Boolean"),
    ("R17.1", Q, Dec, Stu, "stdarg.h features are not used"),
    ("R17.2", Q, Und, Sys, "No direct or indirect recursion"),
    ("R17.3", M, Dec, Stu, "Functions are not declared implicitly"),
    (
        "R17.4",
        M,
        Dec,
        Stu,
        "Non-void functions return a value on every exit path",
    ),
    ("R17.5", A, Und, Sys, "Array arguments have enough elements"),
    (
        "R17.6",
        M,
        Dec,
        Stu,
        "static is not used inside array parameter brackets",
    ),
    ("R17.7", Q, Dec, Stu, "Non-void return values are used"),
    ("R17.8", A, Und, Sys, "Function parameters are not modified"),
    ("R18.1", Q, Und, Sys, "Pointer arithmetic stays within the same array"),
    ("R18.2", Q, Und, Sys, "Subtracted pointers address the same array"),
    (
        "R18.3",
        Q,
        Und,
        Sys,
        "Relational pointer operators compare within the same object",
    ),
    ("R18.4", A, Dec, Stu, "No arithmetic operators on pointer operands"),
    ("R18.5", A, Dec, Stu, "At most two levels of pointer nesting"),
    (
        "R18.6",
        Q,
        Und,
        Sys,
        "Addresses of automatic objects do not outlive them",
    ),
    ("R18.7", Q, Dec, Stu, "Flexible array members are not declared"),
    ("R18.8", Q, Dec, Stu, "Variable-length arrays are not used"),
    ("R19.1", M, Und, Sys, "No assignment or copy to an overlapping object"),
    ("R19.2", A, Dec, Stu, "The union keyword is not used"),
    (
        "R20.1",
        A,
        Dec,
        Stu,
        "#include is preceded only by directives or comments",
    ),
    (
        "R20.2",
        Q,
        Dec,
        Stu,
        "Header names contain no quote or backslash characters",
    ),
    ("R20.3", Q, Dec, Stu, "#include is followed by a header name"),
    ("R20.4", Q, Dec, Stu, "Macros are not named after keywords"),
    ("R20.5", A, Dec, Stu, "#undef is not used"),
    ("R20.6", Q, Dec, Stu, "No directive-like tokens in macro arguments"),
    ("R20.7", Q, Dec, Stu, "Expanded macro parameters are parenthesized"),
    (
        "R20.8",
        Q,
        Dec,
        Stu,
        "#if and #elif controlling expressions evaluate to 0 or 1",
    ),
    ("R20.9", Q, Dec, Stu, "Identifiers in #if and #elif are defined"),
    ("R20.10", A, Dec, Stu, "The # and ## operators are not used"),
    ("R20.11", Q, Dec, Stu, "A parameter after # is not followed by ##"),
    (
        "R20.12",
        Q,
        Dec,
        Stu,
        "Parameters used with # or ## are not otherwise replaced",
    ),
    ("R20.13", Q, Dec, Stu, "Lines starting with # are valid directives"),
    (
        "R20.14",
        Q,
        Dec,
        Stu,
        "Conditional directives are balanced within one file",
    ),
    ("R21.1", Q, Dec, Stu, "#define and #undef do not target reserved names"),
    ("R21.2", Q, Dec, Stu, "Reserved identifiers are not declared"),
    ("R21.3", Q, Dec, Stu, "stdlib.h allocation functions are not used"),
    ("R21.4", Q, Dec, Stu, "setjmp.h is not used"),
    ("R21.5", Q, Dec, Stu, "signal.h is not used"),
    (
        "R21.6",
        Q,
        Dec,
        Stu,
        "Standard library input/output functions are not used",
    ),
    ("R21.7", Q, Dec, Stu, "atof, atoi, atol and atoll are not used"),
    ("R21.8", Q, Dec, Stu, "abort, exit, getenv and system are not used"),
    ("R21.9", Q, Dec, Stu, "bsearch and qsort are not used"),
    ("R21.10", Q, Dec, Stu, "Time handling functions are not used"),
    ("R21.11", Q, Dec, Stu, "tgmath.h is not used"),
    ("R21.12", A, Dec, Stu, "fenv.h exception handling is not used"),
    (
        "R21.13",
        M,
        Und,
        Sys,
        "ctype.h arguments are representable as unsigned char or EOF",
    ),
    ("R21.14", Q, Und, Sys, "memcmp does not compare null-terminated strings"),
    (
        "R21.15",
        Q,
        Dec,
        Stu,
        "memcpy, memmove and memcmp pointers have compatible types",
    ),
    (
        "R21.16",
        Q,
        Dec,
        Stu,
        "memcmp operands have an appropriate essential type",
    ),
    ("R21.17", M, Und, Sys, "string.h functions stay within object bounds"),
    (
        "R21.18",
        M,
        Und,
        Sys,
        "size_t arguments to string.h functions are valid",
    ),
    (
        "R21.19",
        M,
        Und,
        Sys,
        "Results of localeconv and friends are not modified",
    ),
    (
        "R21.20",
        M,
        Und,
        Sys,
        "Results of asctime and friends are not used after a later call",
    ),
    ("R22.1", Q, Und, Sys, "Dynamically acquired resources are released"),
    ("R22.2", M, Und, Sys, "Only dynamically allocated memory is freed"),
    (
        "R22.3",
        Q,
        Und,
        Sys,
        "A file is not open for read and write on different streams",
    ),
    ("R22.4", M, Und, Sys, "Read-only streams are not written"),
    ("R22.5", M, Und, Sys, "FILE objects are not dereferenced"),
    (
        "R22.6",
        M,
        Und,
        Sys,
        "FILE pointers are not used after the stream is closed",
    ),
    (
        "R22.7",
        Q,
        Und,
        Sys,
        "EOF is compared only with unmodified results of stream functions",
    ),
    (
        "R22.8",
        Q,
        Und,
        Sys,
        "errno is zero before calling an errno-setting function",
    ),
    (
        "R22.9",
        Q,
        Und,
        Sys,
        "errno is tested after calling an errno-setting function",
    ),
    (
        "R22.10",
        Q,
        Und,
        Sys,
        "errno is tested only after an errno-setting function",
    ),
];

pub struct Registry {
    entries: Vec<GuidelineMeta>,
    index: BTreeMap<String, usize>,
}

impl Registry {
    fn build() -> Registry {
        let mut entries = Vec::with_capacity(DIRECTIVES.len() + RULES.len());
        for &(id, category, scope, summary) in DIRECTIVES {
            entries.push(GuidelineMeta {
                id: id.to_string(),
                kind: GuidelineKind::Directive,
                category,
                decidability: None,
                scope,
                summary: summary.to_string(),
                implemented: false,
            });
        }
        for &(id, category, d, scope, summary) in RULES {
            entries.push(GuidelineMeta {
                id: id.to_string(),
                kind: GuidelineKind::Rule,
                category,
                decidability: Some(d),
                scope,
                summary: summary.to_string(),
                implemented: IMPLEMENTED.contains(&id),
            });
        }
        let index = entries.iter().enumerate().map(|(i, g)| (g.id.clone(), i)).collect();
        Registry { entries, index }
    }

    pub fn get(&self, id: &str) -> Option<&GuidelineMeta> {
        self.index.get(id).map(|&i| &self.entries[i])
    }

    pub fn contains(&self, id: &str) -> bool {
        self.index.contains_key(id)
    }

    /// Entries in document order: directives, then rules.
    pub fn iter(&self) -> impl Iterator<Item = &GuidelineMeta> {
        self.entries.iter()
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn implemented(&self) -> impl Iterator<Item = &GuidelineMeta> {
        self.entries.iter().filter(|g| g.implemented)
    }
}

pub fn registry() -> &'static Registry {
    static REGISTRY: OnceLock<Registry> = OnceLock::new();
    REGISTRY.get_or_init(Registry::build)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn registry_is_complete() {
        let r = registry();
        assert_eq!(r.len(), 173);
        assert_eq!(r.iter().filter(|g| g.kind == GuidelineKind::Directive).count(), 17);
        assert_eq!(r.implemented().count(), IMPLEMENTED.len());
        for g in r.iter() {
            assert_eq!(g.decidability.is_none(), g.kind == GuidelineKind::Directive, "{}", g.id);
        }
        let ids: std::collections::HashSet<_> = r.iter().map(|g| g.id.as_str()).collect();
        assert_eq!(ids.len(), 173);
    }

    #[test]
    fn roster_categories() {
        let r = registry();
        assert_eq!(r.get("R9.1").unwrap().category, Category::Mandatory);
        assert_eq!(r.get("R12.2").unwrap().category, Category::Required);
        assert_eq!(r.get("R8.13").unwrap().category, Category::Advisory);
        assert_eq!(r.get("R11.4").unwrap().decidability, Some(Decidability::Decidable));
        assert_eq!(r.get("R17.2").unwrap().scope, Scope::System);
        assert!(r.get("R99.9").is_none());
    }
}
