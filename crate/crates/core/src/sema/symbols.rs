use std::collections::HashMap;

use serde::Serialize;

use super::types::TypeDesc;
use crate::parser::{Quals, Span};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct SymbolId(pub u32);

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct ScopeId(pub u32);

impl ScopeId {
    pub const FILE: ScopeId = ScopeId(0);
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum SymbolKind {
    Object,
    Function,
    Typedef,
    EnumConstant,
    Tag,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Storage {
    Automatic,
    Static,
    Extern,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Linkage {
    None,
    Internal,
    External,
}

#[derive(Debug, Clone)]
pub struct Symbol {
    pub id: SymbolId,
    pub name: String,
    pub kind: SymbolKind,
    pub ty: TypeDesc,
    /// Qualifiers of the declared object itself (`const int x`).
    pub quals: Quals,
    pub scope: ScopeId,
    pub storage: Storage,
    pub linkage: Linkage,
    pub def_span: Span,
    pub defined: bool,
    pub is_param: bool,
    pub enum_value: Option<i128>,
}

impl Symbol {
    /// Objects with automatic storage duration: parameters and block-scope
    /// locals without `static` or `extern`.
    pub fn is_automatic_object(&self) -> bool {
        self.kind == SymbolKind::Object && self.storage == Storage::Automatic
    }
}

#[derive(Debug, Clone, Default)]
pub struct Scope {
    pub parent: Option<ScopeId>,
    pub ordinary: HashMap<String, SymbolId>,
    pub tags: HashMap<String, SymbolId>,
}

#[derive(Debug, Clone)]
pub struct SymbolTable {
    pub symbols: Vec<Symbol>,
    pub scopes: Vec<Scope>,
}

impl Default for SymbolTable {
    fn default() -> Self {
        SymbolTable {
            symbols: Vec::new(),
            scopes: vec![Scope::default()],
        }
    }
}

impl SymbolTable {
    pub fn get(&self, id: SymbolId) -> &Symbol {
        &self.symbols[id.0 as usize]
    }

    pub fn get_mut(&mut self, id: SymbolId) -> &mut Symbol {
        &mut self.symbols[id.0 as usize]
    }

    pub fn iter(&self) -> impl Iterator<Item = &Symbol> {
        self.symbols.iter()
    }

    pub fn new_scope(&mut self, parent: ScopeId) -> ScopeId {
        self.scopes.push(Scope {
            parent: Some(parent),
            ..Scope::default()
        });
        ScopeId(self.scopes.len() as u32 - 1)
    }

    pub fn scope(&self, id: ScopeId) -> &Scope {
        &self.scopes[id.0 as usize]
    }

    pub fn scope_mut(&mut self, id: ScopeId) -> &mut Scope {
        &mut self.scopes[id.0 as usize]
    }

    /// Ordinary-identifier lookup from `scope` outwards.
    pub fn lookup(&self, scope: ScopeId, name: &str) -> Option<SymbolId> {
        let mut s = Some(scope);
        while let Some(id) = s {
            let sc = self.scope(id);
            if let Some(sym) = sc.ordinary.get(name) {
                return Some(*sym);
            }
            s = sc.parent;
        }
        None
    }

    pub fn lookup_tag(&self, scope: ScopeId, name: &str) -> Option<SymbolId> {
        let mut s = Some(scope);
        while let Some(id) = s {
            let sc = self.scope(id);
            if let Some(sym) = sc.tags.get(name) {
                return Some(*sym);
            }
            s = sc.parent;
        }
        None
    }

    pub fn push(&mut self, mut sym: Symbol) -> SymbolId {
        let id = SymbolId(self.symbols.len() as u32);
        sym.id = id;
        self.symbols.push(sym);
        id
    }
}
