use std::collections::{HashMap, HashSet};

use super::symbols::{Linkage, SymbolId, SymbolKind};
use super::types::TypeDesc;
use super::{SemaError, SemaErrorKind, TypedTu};
use crate::parser::Span;

/// Identity of an entity across the whole program.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct GlobalId(pub u32);

#[derive(Debug, Clone)]
pub struct GlobalSymbol {
    pub id: GlobalId,
    pub name: String,
    pub kind: SymbolKind,
    pub linkage: Linkage,
    /// Every (unit index, symbol) declaring this entity.
    pub decls: Vec<(usize, SymbolId)>,
    /// Unit and span of the definition, if any.
    pub definition: Option<(usize, Span)>,
}

/// A set of translation units with external-linkage names unified.
#[derive(Debug, Clone)]
pub struct Program {
    pub tus: Vec<TypedTu>,
    pub globals: Vec<GlobalSymbol>,
    pub map: HashMap<(usize, SymbolId), GlobalId>,
}

impl Program {
    pub fn global_of(&self, tu: usize, sym: SymbolId) -> Option<GlobalId> {
        self.map.get(&(tu, sym)).copied()
    }

    pub fn global(&self, id: GlobalId) -> &GlobalSymbol {
        &self.globals[id.0 as usize]
    }

    /// The function definition for a global, as (unit index, function index).
    pub fn function_definition(&self, id: GlobalId) -> Option<(usize, usize)> {
        let g = self.global(id);
        g.decls.iter().find_map(|(tu, sym)| {
            self.tus[*tu]
                .functions
                .iter()
                .position(|f| f.symbol == *sym)
                .map(|i| (*tu, i))
        })
    }
}

/// Structural compatibility across units; records compare by tag and kind.
fn compatible(a: &TypeDesc, b: &TypeDesc) -> bool {
    use TypeDesc::*;
    match (a, b) {
        (Record { tag: ta, union: ua, .. }, Record { tag: tb, union: ub, .. }) => ta == tb && ua == ub,
        (Pointer { pointee: pa, quals: qa }, Pointer { pointee: pb, quals: qb }) => qa == qb && compatible(pa, pb),
        (Array { elem: ea, len: la }, Array { elem: eb, len: lb }) => {
            compatible(ea, eb) && (la.is_none() || lb.is_none() || la == lb)
        }
        (
            Function {
                ret: ra,
                params: pa,
                variadic: va,
                prototype: xa,
            },
            Function {
                ret: rb,
                params: pb,
                variadic: vb,
                prototype: xb,
            },
        ) => {
            compatible(ra, rb)
                && (!*xa
                    || !*xb
                    || (va == vb && pa.len() == pb.len() && pa.iter().zip(pb).all(|(x, y)| compatible(x, y))))
        }
        _ => a == b,
    }
}

/// Links translation units: external-linkage objects and functions with
/// the same name become one global; everything else stays distinct.
pub fn unify(tus: Vec<TypedTu>) -> Result<Program, SemaError> {
    let mut globals: Vec<GlobalSymbol> = Vec::new();
    let mut map = HashMap::new();
    let mut by_name: HashMap<String, GlobalId> = HashMap::new();
    let mut strong_defs = HashSet::new();
    for (ti, tu) in tus.iter().enumerate() {
        for sym in tu.symbols.iter() {
            if !matches!(sym.kind, SymbolKind::Object | SymbolKind::Function) {
                continue;
            }
            let external = sym.linkage == Linkage::External;
            let existing = if external {
                by_name.get(&sym.name).copied()
            } else {
                None
            };
            let gid = match existing {
                Some(gid) => {
                    let g = &globals[gid.0 as usize];
                    let (pt, ps) = g.decls[0];
                    let prev = tus[pt].symbol(ps);
                    if prev.kind != sym.kind || !compatible(&prev.ty, &sym.ty) {
                        return Err(SemaError::new(
                            SemaErrorKind::ConflictingRedeclaration(sym.name.clone()),
                            &sym.def_span,
                        ));
                    }
                    gid
                }
                None => {
                    let gid = GlobalId(globals.len() as u32);
                    globals.push(GlobalSymbol {
                        id: gid,
                        name: sym.name.clone(),
                        kind: sym.kind,
                        linkage: sym.linkage,
                        decls: Vec::new(),
                        definition: None,
                    });
                    if external {
                        by_name.insert(sym.name.clone(), gid);
                    }
                    gid
                }
            };
            let g = &mut globals[gid.0 as usize];
            g.decls.push((ti, sym.id));
            if sym.defined {
                // objects may be tentatively defined in several units, but
                // only one definition may carry a body or an initializer
                let strong = sym.kind == SymbolKind::Function || tu.has_initializer(sym.id);
                if strong && !strong_defs.insert(gid) {
                    return Err(SemaError::new(
                        SemaErrorKind::Redefinition(sym.name.clone()),
                        &sym.def_span,
                    ));
                }
                if strong || g.definition.is_none() {
                    g.definition = Some((ti, sym.def_span.clone()));
                }
            }
            map.insert((ti, sym.id), gid);
        }
    }
    Ok(Program { tus, globals, map })
}

impl TypedTu {
    fn has_initializer(&self, sym: SymbolId) -> bool {
        use crate::parser::ExternalDecl;
        self.ast.items.iter().any(|it| match it {
            ExternalDecl::Declaration(d) => d
                .declarators
                .iter()
                .any(|i| i.init.is_some() && self.decl_symbols.get(&i.declarator.id) == Some(&sym)),
            ExternalDecl::Function(_) => false,
        })
    }
}
