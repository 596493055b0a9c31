use std::collections::{BTreeMap, BTreeSet, VecDeque};
use std::path::{Path, PathBuf};
use std::rc::Rc;

use super::condition::eval_tokens;
use super::lexer::{lex_lenient, RawToken};
use super::token::{ExpansionFrame, PPToken, TokenKind};
use super::{FrontendError, FrontendErrorKind as K, MacroDef, MacroKind};
use crate::source::{normalize, FileId, FileProvider, Loc, SourceSet};

/// Maximum nesting of `#include`, counting the entry file as depth 1.
pub const MAX_INCLUDE_DEPTH: usize = 64;

pub type MacroTable = BTreeMap<String, MacroDef>;

const BUILTIN_PRELUDE: &str = "#define __STDC__ 1\n#define __STDC_VERSION__ 199901L\n#define __STDC_HOSTED__ 1\n";

#[derive(Debug, Clone, Default)]
pub struct PreprocessOptions {
    pub include_paths: Vec<PathBuf>,
    pub predefined: Vec<MacroDef>,
    /// Headers served for the angle form when no include path has them,
    /// as (header name, contents).
    pub builtin_headers: Vec<(String, String)>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Pragma {
    pub loc: Loc,
    pub text: String,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MapEntry {
    pub origin: Loc,
    pub expansion: Vec<ExpansionFrame>,
}

/// Maps each output token index to its physical origin and expansion chain.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct SourceMap {
    pub entries: Vec<MapEntry>,
}

impl SourceMap {
    pub fn from_tokens(tokens: &[PPToken]) -> Self {
        SourceMap {
            entries: tokens
                .iter()
                .map(|t| MapEntry {
                    origin: t.origin,
                    expansion: t.expansion.clone(),
                })
                .collect(),
        }
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn get(&self, index: usize) -> Option<&MapEntry> {
        self.entries.get(index)
    }

    /// Index of the first entry whose origin or expansion sites do not
    /// resolve to a physical location, or whose chain repeats a frame.
    pub fn first_unresolved(&self, sources: &SourceSet) -> Option<usize> {
        self.entries.iter().position(|e| {
            if !sources.contains(e.origin) {
                return true;
            }
            let mut seen = BTreeSet::new();
            e.expansion
                .iter()
                .any(|f| !sources.contains(f.site) || !seen.insert((f.macro_name.as_str(), f.site)))
        })
    }
}

#[derive(Debug, Clone)]
pub struct PreprocessOutput {
    pub tokens: Vec<PPToken>,
    pub map: SourceMap,
    pub macros: MacroTable,
    pub pragmas: Vec<Pragma>,
    /// Files read for this translation unit, in first-inclusion order.
    pub files: Vec<FileId>,
}

pub type HideSet = Rc<BTreeSet<String>>;

#[derive(Debug, Clone)]
pub(crate) struct Tok {
    pub t: PPToken,
    pub hide: HideSet,
}

impl Tok {
    pub fn plain(t: PPToken) -> Self {
        Tok { t, hide: Rc::default() }
    }
}

/// Runs translation phase 4 on `entry`.
pub fn preprocess(
    sources: &mut SourceSet,
    provider: &dyn FileProvider,
    entry: FileId,
    opts: &PreprocessOptions,
) -> Result<PreprocessOutput, FrontendError> {
    let mut pp = Preprocessor {
        sources,
        provider,
        opts,
        macros: MacroTable::new(),
        out: Vec::new(),
        pragmas: Vec::new(),
        files: Vec::new(),
    };
    let prelude = pp.sources.add("<built-in>", BUILTIN_PRELUDE);
    pp.process_file(prelude, 1)?;
    pp.out.clear();
    pp.files.clear();
    for def in &opts.predefined {
        pp.define(
            def.clone(),
            def.body
                .first()
                .map(|t| t.origin)
                .unwrap_or(Loc::new(def.def_site.0, def.def_site.1, 1)),
        )?;
    }
    pp.process_file(entry, 1)?;
    let map = SourceMap::from_tokens(&pp.out);
    Ok(PreprocessOutput {
        tokens: pp.out,
        map,
        macros: pp.macros,
        pragmas: pp.pragmas,
        files: pp.files,
    })
}

/// Builds macro definitions for `-D`-style definitions. The definitions are
/// materialized as a synthetic `<command-line>` file so their tokens keep
/// physical origins.
pub fn command_line_macros(
    sources: &mut SourceSet,
    defines: &[(String, Option<String>)],
) -> Result<Vec<MacroDef>, FrontendError> {
    let mut text = String::new();
    for (name, body) in defines {
        text.push_str("#define ");
        text.push_str(name);
        text.push(' ');
        text.push_str(body.as_deref().unwrap_or("1"));
        text.push('\n');
    }
    let id = sources.add(format!("<command-line:{}>", sources.len()), text);
    let raw = lex_lenient(sources.get(id))?;
    let mut defs = Vec::new();
    for line in split_lines(raw) {
        check_errors(&line)?;
        let toks: Vec<PPToken> = line.into_iter().map(|r| r.tok).collect();
        defs.push(parse_define(&toks[2..], toks[1].origin)?);
    }
    Ok(defs)
}

struct Cond {
    parent_active: bool,
    active: bool,
    taken: bool,
    seen_else: bool,
    loc: Loc,
}

struct Preprocessor<'a> {
    sources: &'a mut SourceSet,
    provider: &'a dyn FileProvider,
    opts: &'a PreprocessOptions,
    macros: MacroTable,
    out: Vec<PPToken>,
    pragmas: Vec<Pragma>,
    files: Vec<FileId>,
}

fn split_lines(raw: Vec<RawToken>) -> Vec<Vec<RawToken>> {
    let mut lines: Vec<Vec<RawToken>> = Vec::new();
    for r in raw {
        if r.tok.line_start || lines.is_empty() {
            lines.push(Vec::new());
        }
        lines.last_mut().expect("line").push(r);
    }
    lines
}

fn check_errors(line: &[RawToken]) -> Result<(), FrontendError> {
    match line.iter().find(|r| r.error.is_some()) {
        Some(r) => Err(FrontendError::at(r.error.clone().expect("error"), r.tok.origin)),
        None => Ok(()),
    }
}

impl Preprocessor<'_> {
    fn active(stack: &[Cond]) -> bool {
        stack.last().is_none_or(|c| c.active)
    }

    fn process_file(&mut self, file: FileId, depth: usize) -> Result<(), FrontendError> {
        if !self.files.contains(&file) {
            self.files.push(file);
        }
        let raw = lex_lenient(self.sources.get(file))?;
        let mut stack: Vec<Cond> = Vec::new();
        let mut pending: Vec<Tok> = Vec::new();

        for line in split_lines(raw) {
            let is_directive = line[0].tok.is_punct("#");
            if !is_directive {
                if Self::active(&stack) {
                    check_errors(&line)?;
                    pending.extend(line.into_iter().map(|r| Tok::plain(r.tok)));
                }
                continue;
            }
            if Self::active(&stack) {
                self.flush(&mut pending)?;
            }
            let hash_loc = line[0].tok.origin;
            let Some(name_tok) = line.get(1).map(|r| &r.tok) else {
                continue; // null directive
            };
            let name = name_tok.lexeme.clone();
            let name_loc = name_tok.origin;
            let active = Self::active(&stack);
            match name.as_str() {
                "if" | "ifdef" | "ifndef" => {
                    if !active {
                        stack.push(Cond {
                            parent_active: false,
                            active: false,
                            taken: true,
                            seen_else: false,
                            loc: hash_loc,
                        });
                        continue;
                    }
                    check_errors(&line)?;
                    let rest: Vec<PPToken> = line[2..].iter().map(|r| r.tok.clone()).collect();
                    let value = match name.as_str() {
                        "if" => self.eval_condition(&rest, name_loc)?,
                        _ => {
                            let ident = rest
                                .first()
                                .filter(|t| t.kind == TokenKind::Identifier)
                                .ok_or_else(|| {
                                    FrontendError::at(
                                        K::InvalidCondition(format!("#{name} expects a macro name")),
                                        name_loc,
                                    )
                                })?;
                            let defined = self.is_defined(&ident.lexeme);
                            defined == (name == "ifdef")
                        }
                    };
                    stack.push(Cond {
                        parent_active: true,
                        active: value,
                        taken: value,
                        seen_else: false,
                        loc: hash_loc,
                    });
                }
                "elif" => {
                    let Some(top) = stack.last() else {
                        return Err(FrontendError::at(K::UnmatchedConditional(name), hash_loc));
                    };
                    if top.seen_else {
                        return Err(FrontendError::at(K::DirectiveAfterElse(name), hash_loc));
                    }
                    let (parent_active, taken) = (top.parent_active, top.taken);
                    let value = if parent_active && !taken {
                        check_errors(&line)?;
                        let rest: Vec<PPToken> = line[2..].iter().map(|r| r.tok.clone()).collect();
                        self.eval_condition(&rest, name_loc)?
                    } else {
                        false
                    };
                    let top = stack.last_mut().expect("cond");
                    top.active = value;
                    top.taken |= value;
                }
                "else" => {
                    let Some(top) = stack.last_mut() else {
                        return Err(FrontendError::at(K::UnmatchedConditional(name), hash_loc));
                    };
                    if top.seen_else {
                        return Err(FrontendError::at(K::DirectiveAfterElse(name), hash_loc));
                    }
                    top.seen_else = true;
                    top.active = top.parent_active && !top.taken;
                    top.taken = true;
                }
                "endif" => {
                    if stack.pop().is_none() {
                        return Err(FrontendError::at(K::UnmatchedConditional(name), hash_loc));
                    }
                }
                _ if !active => {}
                _ => {
                    check_errors(&line)?;
                    let rest: Vec<PPToken> = line[2..].iter().map(|r| r.tok.clone()).collect();
                    self.directive(&name, name_loc, rest, file, depth)?;
                }
            }
        }
        if Self::active(&stack) {
            self.flush(&mut pending)?;
        }
        if let Some(open) = stack.first() {
            return Err(FrontendError::at(K::UnterminatedConditional, open.loc));
        }
        Ok(())
    }

    fn directive(
        &mut self,
        name: &str,
        loc: Loc,
        rest: Vec<PPToken>,
        file: FileId,
        depth: usize,
    ) -> Result<(), FrontendError> {
        match name {
            "define" => {
                let def = parse_define(&rest, loc)?;
                self.define(def, loc)
            }
            "undef" => {
                let ident = rest
                    .first()
                    .filter(|t| t.kind == TokenKind::Identifier)
                    .ok_or_else(|| FrontendError::at(K::MalformedDefine("#undef expects a name".into()), loc))?;
                self.macros.remove(&ident.lexeme);
                Ok(())
            }
            "include" => self.include(rest, loc, file, depth),
            "error" => {
                let msg = super::token::render(&rest);
                Err(FrontendError::at(K::ErrorDirective(msg), loc))
            }
            "pragma" => {
                self.pragmas.push(Pragma {
                    loc,
                    text: super::token::render(&rest),
                });
                Ok(())
            }
            "line" | "warning" | "ident" | "include_next" | "import" => {
                Err(FrontendError::at(K::Unsupported(format!("#{name} directive")), loc))
            }
            other => Err(FrontendError::at(K::UnknownDirective(other.to_string()), loc)),
        }
    }

    fn define(&mut self, def: MacroDef, loc: Loc) -> Result<(), FrontendError> {
        if def.name == "defined" {
            return Err(FrontendError::at(
                K::MalformedDefine("`defined` cannot be a macro name".into()),
                loc,
            ));
        }
        if let Some(prev) = self.macros.get(&def.name) {
            if !prev.same_definition(&def) {
                return Err(FrontendError::at(K::MacroRedefinition(def.name), loc));
            }
            return Ok(());
        }
        self.macros.insert(def.name.clone(), def);
        Ok(())
    }

    fn is_defined(&self, name: &str) -> bool {
        self.macros.contains_key(name) || matches!(name, "__FILE__" | "__LINE__")
    }

    fn eval_condition(&self, tokens: &[PPToken], loc: Loc) -> Result<bool, FrontendError> {
        let resolved = resolve_defined(tokens, |n| self.is_defined(n))?;
        let expander = Expander {
            macros: &self.macros,
            sources: Some(self.sources),
        };
        let expanded = expander.expand(resolved.into_iter().map(Tok::plain).collect())?;
        let toks: Vec<PPToken> = expanded.into_iter().map(|t| t.t).collect();
        if toks.is_empty() {
            return Err(FrontendError::at(K::InvalidCondition("empty expression".into()), loc));
        }
        eval_tokens(&toks).map(|v| v != 0).map_err(|mut e| {
            e.loc.get_or_insert(loc);
            e
        })
    }

    fn flush(&mut self, pending: &mut Vec<Tok>) -> Result<(), FrontendError> {
        if pending.is_empty() {
            return Ok(());
        }
        let expander = Expander {
            macros: &self.macros,
            sources: Some(self.sources),
        };
        let expanded = expander.expand(std::mem::take(pending))?;
        let mut i = 0;
        while i < expanded.len() {
            let t = &expanded[i].t;
            if t.is_ident("_Pragma") {
                let ok = expanded.get(i + 1).is_some_and(|t| t.t.is_punct("("))
                    && expanded
                        .get(i + 2)
                        .is_some_and(|t| t.t.kind == TokenKind::StringLiteral)
                    && expanded.get(i + 3).is_some_and(|t| t.t.is_punct(")"));
                if !ok {
                    return Err(FrontendError::at(
                        K::Unsupported("malformed _Pragma operator".into()),
                        t.origin,
                    ));
                }
                let lit = &expanded[i + 2].t.lexeme;
                self.pragmas.push(Pragma {
                    loc: t.visible_loc(),
                    text: lit.trim_start_matches('L').trim_matches('"').to_string(),
                });
                i += 4;
                continue;
            }
            self.out.push(t.clone());
            i += 1;
        }
        Ok(())
    }

    fn include(&mut self, rest: Vec<PPToken>, loc: Loc, file: FileId, depth: usize) -> Result<(), FrontendError> {
        let (name, angled) = match header_name(&rest) {
            Some(h) => h,
            None => {
                let expander = Expander {
                    macros: &self.macros,
                    sources: Some(self.sources),
                };
                let expanded: Vec<PPToken> = expander
                    .expand(rest.into_iter().map(Tok::plain).collect())?
                    .into_iter()
                    .map(|t| t.t)
                    .collect();
                header_name(&expanded).ok_or_else(|| FrontendError::at(K::MalformedInclude, loc))?
            }
        };
        if depth >= MAX_INCLUDE_DEPTH {
            return Err(FrontendError::at(K::IncludeDepthExceeded, loc));
        }
        let target = self
            .resolve_include(&name, angled, file)
            .ok_or_else(|| FrontendError::at(K::MissingInclude(name.clone()), loc))?;
        self.process_file(target, depth + 1)
    }

    fn resolve_include(&mut self, name: &str, angled: bool, from: FileId) -> Option<FileId> {
        let mut candidates: Vec<PathBuf> = Vec::new();
        if !angled {
            let including = Path::new(self.sources.path(from));
            let dir = including.parent().unwrap_or(Path::new(""));
            candidates.push(dir.join(name));
        }
        for dir in &self.opts.include_paths {
            candidates.push(dir.join(name));
        }
        for cand in candidates {
            let key = normalize(&cand).to_string_lossy().into_owned();
            if let Some(id) = self.sources.lookup(&key) {
                return Some(id);
            }
            if let Some(text) = self.provider.read(Path::new(&key)) {
                return Some(self.sources.add(key, text));
            }
        }
        let (hname, text) = self.opts.builtin_headers.iter().find(|(n, _)| n == name)?;
        Some(self.sources.add(format!("<builtin>/{hname}"), text.clone()))
    }
}

fn header_name(tokens: &[PPToken]) -> Option<(String, bool)> {
    let first = tokens.first()?;
    if first.kind == TokenKind::StringLiteral && tokens.len() == 1 && first.lexeme.starts_with('"') {
        return Some((first.lexeme.trim_matches('"').to_string(), false));
    }
    if first.is_punct("<") {
        let close = tokens.iter().position(|t| t.is_punct(">"))?;
        if close != tokens.len() - 1 {
            return None;
        }
        let mut name = String::new();
        for (i, t) in tokens[1..close].iter().enumerate() {
            if i > 0 && t.leading_space {
                name.push(' ');
            }
            name.push_str(&t.lexeme);
        }
        return Some((name, true));
    }
    None
}

/// Parses the tokens following `#define`.
fn parse_define(rest: &[PPToken], loc: Loc) -> Result<MacroDef, FrontendError> {
    let name_tok = rest
        .first()
        .filter(|t| t.kind == TokenKind::Identifier)
        .ok_or_else(|| FrontendError::at(K::MalformedDefine("expected macro name".into()), loc))?;
    let mut idx = 1;
    let mut params = Vec::new();
    let kind = if rest.get(1).is_some_and(|t| t.is_punct("(") && !t.leading_space) {
        idx = 2;
        let mut expect_param = true;
        loop {
            let t = rest
                .get(idx)
                .ok_or_else(|| FrontendError::at(K::MalformedDefine("unterminated parameter list".into()), loc))?;
            idx += 1;
            if t.is_punct(")") && (!expect_param || params.is_empty()) {
                break;
            }
            if t.is_punct("...") {
                return Err(FrontendError::at(K::Unsupported("variadic macro".into()), t.origin));
            }
            if expect_param && t.kind == TokenKind::Identifier {
                if params.contains(&t.lexeme) {
                    return Err(FrontendError::at(
                        K::MalformedDefine(format!("duplicate parameter `{}`", t.lexeme)),
                        t.origin,
                    ));
                }
                params.push(t.lexeme.clone());
                expect_param = false;
            } else if !expect_param && t.is_punct(",") {
                expect_param = true;
            } else {
                return Err(FrontendError::at(
                    K::MalformedDefine(format!("unexpected `{}` in parameter list", t.lexeme)),
                    t.origin,
                ));
            }
        }
        MacroKind::FunctionLike
    } else {
        MacroKind::ObjectLike
    };
    let body: Vec<PPToken> = rest[idx..].to_vec();
    for t in &body {
        if t.is_punct("##") {
            return Err(FrontendError::at(K::Unsupported("`##` token pasting".into()), t.origin));
        }
        if kind == MacroKind::FunctionLike && t.is_punct("#") {
            return Err(FrontendError::at(K::Unsupported("`#` stringizing".into()), t.origin));
        }
    }
    Ok(MacroDef {
        name: name_tok.lexeme.clone(),
        kind,
        params,
        body,
        def_site: (name_tok.origin.file, name_tok.origin.line),
    })
}

/// Replaces `defined X` and `defined ( X )` with `1` or `0`.
pub(crate) fn resolve_defined(
    tokens: &[PPToken],
    is_defined: impl Fn(&str) -> bool,
) -> Result<Vec<PPToken>, FrontendError> {
    let mut out = Vec::with_capacity(tokens.len());
    let mut i = 0;
    while i < tokens.len() {
        let t = &tokens[i];
        if !t.is_ident("defined") {
            out.push(t.clone());
            i += 1;
            continue;
        }
        let bad = || FrontendError::at(K::InvalidCondition("malformed `defined`".into()), t.origin);
        let (name, next) = match tokens.get(i + 1) {
            Some(p) if p.is_punct("(") => {
                let id = tokens
                    .get(i + 2)
                    .filter(|t| t.kind == TokenKind::Identifier)
                    .ok_or_else(bad)?;
                if !tokens.get(i + 3).is_some_and(|t| t.is_punct(")")) {
                    return Err(bad());
                }
                (id.lexeme.as_str(), i + 4)
            }
            Some(id) if id.kind == TokenKind::Identifier => (id.lexeme.as_str(), i + 2),
            _ => return Err(bad()),
        };
        let mut n = t.clone();
        n.kind = TokenKind::PpNumber;
        n.lexeme = if is_defined(name) { "1" } else { "0" }.to_string();
        out.push(n);
        i = next;
    }
    Ok(out)
}

pub(crate) struct Expander<'a> {
    pub macros: &'a MacroTable,
    pub sources: Option<&'a SourceSet>,
}

impl Expander<'_> {
    /// Expands macros with rescanning, using hide sets to stop recursion.
    pub fn expand(&self, input: Vec<Tok>) -> Result<Vec<Tok>, FrontendError> {
        let mut input: VecDeque<Tok> = input.into();
        let mut out = Vec::with_capacity(input.len());
        while let Some(tok) = input.pop_front() {
            if tok.t.kind != TokenKind::Identifier || tok.hide.contains(&tok.t.lexeme) {
                out.push(tok);
                continue;
            }
            let name = tok.t.lexeme.clone();
            let Some(def) = self.macros.get(&name) else {
                if let Some(t) = self.dynamic(&tok) {
                    out.push(t);
                } else {
                    out.push(tok);
                }
                continue;
            };
            match def.kind {
                MacroKind::ObjectLike => {
                    let mut hs = (*tok.hide).clone();
                    hs.insert(name.clone());
                    let hs = Rc::new(hs);
                    let body = self.instantiate(def, &tok, &hs, &[]);
                    for t in body.into_iter().rev() {
                        input.push_front(t);
                    }
                }
                MacroKind::FunctionLike => {
                    if !input.front().is_some_and(|t| t.t.is_punct("(")) {
                        out.push(tok);
                        continue;
                    }
                    input.pop_front();
                    let (args, rparen) = collect_args(&mut input, &tok)?;
                    let args = if def.params.is_empty() && args.len() == 1 && args[0].is_empty() {
                        Vec::new()
                    } else {
                        args
                    };
                    if args.len() != def.params.len() {
                        return Err(FrontendError::at(
                            K::MacroArity {
                                name,
                                expected: def.params.len(),
                                got: args.len(),
                            },
                            tok.t.visible_loc(),
                        ));
                    }
                    let mut hs: BTreeSet<String> = tok.hide.intersection(&rparen.hide).cloned().collect();
                    hs.insert(name.clone());
                    let hs = Rc::new(hs);
                    let expanded_args = args
                        .into_iter()
                        .map(|a| self.expand(a))
                        .collect::<Result<Vec<_>, _>>()?;
                    let body = self.instantiate(def, &tok, &hs, &expanded_args);
                    for t in body.into_iter().rev() {
                        input.push_front(t);
                    }
                }
            }
        }
        Ok(out)
    }

    fn dynamic(&self, tok: &Tok) -> Option<Tok> {
        let site = tok.t.visible_loc();
        let (kind, lexeme) = match tok.t.lexeme.as_str() {
            "__LINE__" => (TokenKind::PpNumber, site.line.to_string()),
            "__FILE__" => {
                let path = self.sources?.path(site.file);
                (TokenKind::StringLiteral, format!("\"{path}\""))
            }
            _ => return None,
        };
        let mut t = tok.t.clone();
        t.kind = kind;
        t.lexeme = lexeme;
        t.expansion.push(ExpansionFrame {
            macro_name: tok.t.lexeme.clone(),
            site: tok.t.origin,
        });
        Some(Tok {
            t,
            hide: tok.hide.clone(),
        })
    }

    fn instantiate(&self, def: &MacroDef, invocation: &Tok, hs: &HideSet, args: &[Vec<Tok>]) -> Vec<Tok> {
        let mut prefix = invocation.t.expansion.clone();
        prefix.push(ExpansionFrame {
            macro_name: def.name.clone(),
            site: invocation.t.origin,
        });
        let mut out = Vec::new();
        for b in &def.body {
            let param = (b.kind == TokenKind::Identifier)
                .then(|| def.params.iter().position(|p| *p == b.lexeme))
                .flatten();
            match param {
                Some(p) => {
                    for (k, a) in args[p].iter().enumerate() {
                        let mut t = a.t.clone();
                        let own = t
                            .expansion
                            .strip_prefix(invocation.t.expansion.as_slice())
                            .unwrap_or(&a.t.expansion)
                            .to_vec();
                        t.expansion = prefix.clone();
                        t.expansion.extend(own);
                        t.line_start = false;
                        if k == 0 {
                            t.leading_space = b.leading_space;
                        }
                        let mut hide = (*a.hide).clone();
                        hide.extend(hs.iter().cloned());
                        out.push(Tok { t, hide: Rc::new(hide) });
                    }
                }
                None => {
                    let mut t = b.clone();
                    t.expansion = prefix.clone();
                    t.line_start = false;
                    out.push(Tok { t, hide: hs.clone() });
                }
            }
        }
        if let Some(first) = out.first_mut() {
            first.t.leading_space = invocation.t.leading_space;
            first.t.line_start = invocation.t.line_start;
        }
        out
    }
}

fn collect_args(input: &mut VecDeque<Tok>, invocation: &Tok) -> Result<(Vec<Vec<Tok>>, Tok), FrontendError> {
    let mut args: Vec<Vec<Tok>> = vec![Vec::new()];
    let mut depth = 0usize;
    loop {
        let Some(t) = input.pop_front() else {
            return Err(FrontendError::at(
                K::UnterminatedInvocation(invocation.t.lexeme.clone()),
                invocation.t.visible_loc(),
            ));
        };
        if t.t.is_punct("(") {
            depth += 1;
        } else if t.t.is_punct(")") {
            if depth == 0 {
                return Ok((args, t));
            }
            depth -= 1;
        } else if t.t.is_punct(",") && depth == 0 {
            args.push(Vec::new());
            continue;
        }
        args.last_mut().expect("arg").push(t);
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::frontend::render;
    use crate::source::MemoryFiles;

    fn run(files: MemoryFiles, entry: &str) -> Result<(PreprocessOutput, SourceSet), FrontendError> {
        let mut sources = SourceSet::new();
        let text = files.read(Path::new(entry)).expect("entry");
        let id = sources.add(entry, text);
        let out = preprocess(&mut sources, &files, id, &PreprocessOptions::default())?;
        Ok((out, sources))
    }

    fn pp(src: &str) -> Result<PreprocessOutput, FrontendError> {
        run(MemoryFiles::new().with("t.c", src), "t.c").map(|(o, _)| o)
    }

    fn text(src: &str) -> String {
        render(&pp(src).expect("preprocess").tokens)
    }

    #[test]
    fn function_like_macro_with_chain() {
        let out = pp("#define SQ(x) ((x)*(x))\nSQ(a+1)\n").unwrap();
        let lexemes: Vec<&str> = out.tokens.iter().map(|t| t.lexeme.as_str()).collect();
        assert_eq!(
            lexemes,
            ["(", "(", "a", "+", "1", ")", "*", "(", "a", "+", "1", ")", ")"]
        );
        for t in &out.tokens {
            assert_eq!(t.expansion.len(), 1);
            assert_eq!(t.expansion[0].macro_name, "SQ");
            assert_eq!((t.expansion[0].site.line, t.expansion[0].site.col), (2, 1));
        }
        // argument tokens keep their physical origin at the invocation
        assert_eq!((out.tokens[2].origin.line, out.tokens[2].origin.col), (2, 4));
        // body tokens originate in the definition
        assert_eq!(out.tokens[0].origin.line, 1);
    }

    #[test]
    fn excluded_group_not_lexed_as_c() {
        assert_eq!(text("#if 0\n int ) ( 'oops\n#endif\nx\n"), "x");
    }

    #[test]
    fn self_include_hits_depth_cap() {
        let files = MemoryFiles::new().with("self.h", "#include \"self.h\"\n");
        let err = run(files, "self.h").unwrap_err();
        assert_eq!(err.kind, K::IncludeDepthExceeded);
    }

    #[test]
    fn guarded_self_include_is_fine() {
        let files = MemoryFiles::new().with("g.h", "#ifndef G\n#define G\n#include \"g.h\"\nint g;\n#endif\n");
        let (out, _) = run(files, "g.h").unwrap();
        assert_eq!(render(&out.tokens), "int g;");
    }

    #[test]
    fn include_resolution_order() {
        let mut sources = SourceSet::new();
        let files = MemoryFiles::new()
            .with("src/main.c", "#include \"a.h\"\n#include <b.h>\n")
            .with("src/a.h", "int local_a;\n")
            .with("inc/a.h", "int inc_a;\n")
            .with("inc/b.h", "int inc_b;\n")
            .with("src/b.h", "int local_b;\n");
        let id = sources.add("src/main.c", files.read(Path::new("src/main.c")).unwrap());
        let opts = PreprocessOptions {
            include_paths: vec![PathBuf::from("inc")],
            ..Default::default()
        };
        let out = preprocess(&mut sources, &files, id, &opts).unwrap();
        assert_eq!(render(&out.tokens), "int local_a;\nint inc_b;");
    }

    #[test]
    fn missing_include() {
        let err = pp("#include \"nope.h\"\n").unwrap_err();
        assert_eq!(err.kind, K::MissingInclude("nope.h".into()));
        assert_eq!(err.loc.map(|l| l.line), Some(1));
    }

    #[test]
    fn builtin_header_fallback() {
        let mut sources = SourceSet::new();
        let files = MemoryFiles::new().with("m.c", "#include <stdint.h>\nuint8_t x;\n");
        let id = sources.add("m.c", files.read(Path::new("m.c")).unwrap());
        let opts = PreprocessOptions {
            builtin_headers: vec![("stdint.h".into(), "typedef unsigned char uint8_t;\n".into())],
            ..Default::default()
        };
        let out = preprocess(&mut sources, &files, id, &opts).unwrap();
        assert_eq!(render(&out.tokens), "typedef unsigned char uint8_t;\nuint8_t x;");
    }

    #[test]
    fn conditionals() {
        let src = "#define A 2\n#if A == 1\none\n#elif A == 2\ntwo\n#else\nother\n#endif\n#ifdef A\nyes\n#endif\n#ifndef A\nno\n#endif\n";
        assert_eq!(text(src), "two\nyes");
    }

    #[test]
    fn unmatched_conditionals() {
        assert_eq!(pp("#if 1\nx\n").unwrap_err().kind, K::UnterminatedConditional);
        assert!(matches!(pp("#endif\n").unwrap_err().kind, K::UnmatchedConditional(_)));
        assert!(matches!(
            pp("#if 1\n#else\n#else\n#endif\n").unwrap_err().kind,
            K::DirectiveAfterElse(_)
        ));
    }

    #[test]
    fn redefinition_rules() {
        assert!(pp("#define X 1\n#define X 1\n").is_ok());
        assert_eq!(
            pp("#define X 1\n#define X 2\n").unwrap_err().kind,
            K::MacroRedefinition("X".into())
        );
        assert!(pp("#define X 1\n#undef X\n#define X 2\nX\n").is_ok());
    }

    #[test]
    fn error_directive_only_when_active() {
        assert!(matches!(pp("#error stop here\n").unwrap_err().kind, K::ErrorDirective(m) if m == "stop here"));
        assert!(pp("#if 0\n#error nope\n#endif\n").is_ok());
    }

    #[test]
    fn unsupported_macro_features() {
        for src in ["#define V(...) x\n", "#define S(a) #a\n", "#define P a ## b\n"] {
            assert!(matches!(pp(src).unwrap_err().kind, K::Unsupported(_)), "{src}");
        }
    }

    #[test]
    fn recursion_is_stopped_by_hide_sets() {
        assert_eq!(text("#define foo foo\nfoo\n"), "foo");
        assert_eq!(text("#define a b\n#define b a\na b\n"), "a b");
        assert_eq!(text("#define f(x) x f\nf(1)(2)\n"), "1 f(2)");
    }

    #[test]
    fn nested_expansion_chain() {
        let out = pp("#define N 5\n#define SQ(x) ((x)*(x))\nSQ(N)\n").unwrap();
        let five = out.tokens.iter().find(|t| t.lexeme == "5").unwrap();
        let names: Vec<_> = five.expansion.iter().map(|f| f.macro_name.as_str()).collect();
        assert_eq!(names, ["SQ", "N"]);
        assert_eq!(five.visible_loc().line, 3);
    }

    #[test]
    fn invocation_spanning_lines() {
        assert_eq!(text("#define ADD(a,b) a+b\nADD(1,\n 2)\n"), "1+2");
    }

    #[test]
    fn arity_mismatch() {
        assert!(matches!(
            pp("#define F(a,b) a\nF(1)\n").unwrap_err().kind,
            K::MacroArity { .. }
        ));
        assert_eq!(text("#define Z() 0\nZ()\n"), "0");
    }

    #[test]
    fn pragmas_recorded() {
        let out = pp("#pragma once\n_Pragma(\"pack(1)\") int x;\n").unwrap();
        assert_eq!(out.pragmas.len(), 2);
        assert_eq!(out.pragmas[1].text, "pack(1)");
        assert_eq!(render(&out.tokens), "int x;");
    }

    #[test]
    fn line_and_file_macros() {
        assert_eq!(text("\n__LINE__ __FILE__\n"), "2 \"t.c\"");
    }

    #[test]
    fn command_line_definitions() {
        let mut sources = SourceSet::new();
        let defs = command_line_macros(&mut sources, &[("N".into(), Some("4".into())), ("F".into(), None)]).unwrap();
        let files = MemoryFiles::new().with("a.c", "N F\n");
        let id = sources.add("a.c", "N F\n");
        let opts = PreprocessOptions {
            predefined: defs,
            ..Default::default()
        };
        let out = preprocess(&mut sources, &files, id, &opts).unwrap();
        assert_eq!(render(&out.tokens), "4 1");
        assert_eq!(out.map.first_unresolved(&sources), None);
    }

    #[test]
    fn source_map_is_total() {
        let files = MemoryFiles::new()
            .with("m.c", "#include \"h.h\"\n#define TWICE(x) (x + x)\nint y = TWICE(K);\n")
            .with("h.h", "#define K 3\nint h;\n");
        let (out, sources) = run(files, "m.c").unwrap();
        assert_eq!(out.map.len(), out.tokens.len());
        assert_eq!(out.map.first_unresolved(&sources), None);
    }

    #[test]
    fn deterministic() {
        let src = "#define A(x) x+1\nA(A(2))\n";
        assert_eq!(pp(src).unwrap().tokens, pp(src).unwrap().tokens);
    }
}
