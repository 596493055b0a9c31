//! Random C programs and a reference interpreter for them.
//!
//! `straight_line_program` produces one function `int f(uint8_t a, uint8_t b)`
//! over at most three locals, some left uninitialized, with `if`/`else`,
//! bounded `for` loops (at most 8 iterations), early returns and integer
//! arithmetic. `call_graph_program` produces up to 12 functions with random
//! direct calls and calls through function pointers, spread over one to
//! three translation units.
//!
//! The interpreter runs the typed AST the checker itself builds, so every
//! observation is keyed by the same node ids the analysis reports on.

use std::collections::{BTreeMap, BTreeSet, HashMap};

use misracheck::flow::{analyze_unit, FunctionFacts};
use misracheck::frontend::{preprocess, PreprocessOptions};
use misracheck::parser::{
    full_expressions, parse, BinaryOp, BlockItem, Expr, ExprKind, ForInit, IncDecOp, Initializer, NodeId, Stmt,
    StmtKind, UnaryOp,
};
use misracheck::sema::{builtin_headers, resolve, IntegerModel, SymbolId, TypeDesc, TypedTu};
use misracheck::source::{MemoryFiles, SourceSet};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

// ---------------------------------------------------------------------------
// generation

struct Var {
    name: String,
    ty: &'static str,
}

struct Gen<'r, R: Rng> {
    rng: &'r mut R,
    vars: Vec<Var>,
    out: String,
    loop_depth: usize,
}

impl<R: Rng> Gen<'_, R> {
    fn leaf(&mut self) -> String {
        match self.rng.gen_range(0..10) {
            0..=4 => self.vars.choose(self.rng).unwrap().name.clone(),
            5 => "a".into(),
            6 => "b".into(),
            _ => self.rng.gen_range(0..=20).to_string(),
        }
    }

    fn expr(&mut self, depth: u32) -> String {
        if depth == 0 || self.rng.gen_bool(0.35) {
            return self.leaf();
        }
        let l = self.expr(depth - 1);
        match self.rng.gen_range(0..10) {
            0 | 1 => format!("({l} + {})", self.expr(depth - 1)),
            2 => format!("({l} - {})", self.expr(depth - 1)),
            3 => format!("({l} * {})", self.expr(depth - 1)),
            4 => format!("({l} & {})", self.expr(depth - 1)),
            5 => format!("({l} | {})", self.expr(depth - 1)),
            6 => format!("({l} ^ {})", self.expr(depth - 1)),
            7 => format!("({l} >> {})", self.rng.gen_range(0..=4)),
            8 => format!("({l} << {})", self.rng.gen_range(0..=3)),
            _ => format!("({l} % {})", self.rng.gen_range(1..=7)),
        }
    }

    fn cond(&mut self) -> String {
        let l = self.expr(1);
        let r = self.expr(1);
        let op = ["<", "<=", ">", ">=", "==", "!="].choose(self.rng).unwrap();
        let base = format!("{l} {op} {r}");
        match self.rng.gen_range(0..8) {
            0 => format!("({base}) && ({} < {})", self.leaf(), self.leaf()),
            1 => format!("({base}) || ({} > {})", self.leaf(), self.leaf()),
            _ => base,
        }
    }

    fn indent(&mut self, level: usize) {
        for _ in 0..level {
            self.out.push_str("    ");
        }
    }

    fn stmts(&mut self, level: usize, count: usize) {
        for _ in 0..count {
            self.stmt(level);
        }
    }

    fn stmt(&mut self, level: usize) {
        let nested = level < 3;
        let pick = self.rng.gen_range(0..12);
        match pick {
            0 | 1 if nested => {
                let c = self.cond();
                self.indent(level);
                self.out.push_str(&format!("if ({c}) {{\n"));
                let n = self.rng.gen_range(1..=2);
                self.stmts(level + 1, n);
                self.indent(level);
                if self.rng.gen_bool(0.5) {
                    self.out.push_str("} else {\n");
                    let n = self.rng.gen_range(1..=2);
                    self.stmts(level + 1, n);
                    self.indent(level);
                }
                self.out.push_str("}\n");
            }
            2 if nested && self.loop_depth < 2 => {
                let k = format!("k{}", self.loop_depth);
                let bound = self.rng.gen_range(0..=8);
                self.indent(level);
                self.out
                    .push_str(&format!("for (int {k} = 0; {k} < {bound}; {k}++) {{\n"));
                self.loop_depth += 1;
                let n = self.rng.gen_range(1..=2);
                self.stmts(level + 1, n);
                self.loop_depth -= 1;
                self.indent(level);
                self.out.push_str("}\n");
            }
            3 if nested => {
                let c = self.cond();
                let e = self.expr(1);
                self.indent(level);
                self.out.push_str(&format!("if ({c}) {{\n"));
                self.indent(level + 1);
                self.out.push_str(&format!("return {e};\n"));
                self.indent(level);
                self.out.push_str("}\n");
            }
            4 => {
                let v = self.vars.choose(self.rng).unwrap().name.clone();
                let op = ["+=", "-=", "&=", "|=", "^="].choose(self.rng).unwrap();
                let e = self.expr(1);
                self.indent(level);
                self.out.push_str(&format!("{v} {op} {e};\n"));
            }
            _ => {
                let v = self.vars.choose(self.rng).unwrap().name.clone();
                let e = self.expr(2);
                self.indent(level);
                self.out.push_str(&format!("{v} = {e};\n"));
            }
        }
    }
}

/// A random single-function program. Inputs are the two `uint8_t`
/// parameters `a` and `b`.
pub fn straight_line_program<R: Rng>(rng: &mut R) -> String {
    let nvars = rng.gen_range(1..=3);
    let vars: Vec<Var> = (0..nvars)
        .map(|i| Var {
            name: format!("v{i}"),
            ty: if rng.gen_bool(0.5) { "int" } else { "uint8_t" },
        })
        .collect();
    let mut g = Gen {
        rng,
        vars,
        out: String::from("#include <stdint.h>\nint f(uint8_t a, uint8_t b) {\n"),
        loop_depth: 0,
    };
    for i in 0..nvars {
        let init = if g.rng.gen_bool(0.5) {
            format!(" = {}", g.rng.gen_range(0..=9))
        } else {
            String::new()
        };
        let (name, ty) = (g.vars[i].name.clone(), g.vars[i].ty);
        g.out.push_str(&format!("    {ty} {name}{init};\n"));
    }
    let n = g.rng.gen_range(2..=6);
    g.stmts(1, n);
    let e = g.expr(2);
    g.out.push_str(&format!("    return {e};\n}}\n"));
    g.out
}

/// A call-graph program and the ground truth used to build it.
pub struct CallGraphProgram {
    /// (file name, contents)
    pub units: Vec<(String, String)>,
    pub functions: Vec<String>,
    /// Direct calls as (caller, callee) indexes into `functions`.
    pub edges: BTreeSet<(usize, usize)>,
    pub pointer_calls: usize,
}

pub fn call_graph_program<R: Rng>(rng: &mut R) -> CallGraphProgram {
    let n = rng.gen_range(1..=12);
    let functions: Vec<String> = (0..n).map(|i| format!("fn{i}")).collect();
    let mut edges = BTreeSet::new();
    let mut pointer_calls = 0;
    let nunits = rng.gen_range(1..=3usize);
    let mut bodies: Vec<String> = vec![String::new(); nunits];
    let density = rng.gen_range(0.0..0.3);
    let protos: String = functions.iter().map(|f| format!("int {f}(int x);\n")).collect();
    for (i, name) in functions.iter().enumerate() {
        let mut body = format!("int {name}(int x) {{\n    int r = x;\n");
        for (j, callee) in functions.iter().enumerate() {
            if rng.gen_bool(density) {
                edges.insert((i, j));
                body.push_str(&format!(
                    "    if (x > {j}) {{\n        r = r + {callee}(x - 1);\n    }}\n"
                ));
            }
        }
        if rng.gen_bool(0.2) {
            let target = &functions[rng.gen_range(0..n)];
            body.push_str(&format!("    int (*fp)(int) = {target};\n    r = r + fp(x);\n"));
            pointer_calls += 1;
            if rng.gen_bool(0.3) {
                body.push_str("    r = r - fp(r);\n");
                pointer_calls += 1;
            }
        }
        body.push_str("    return r;\n}\n");
        bodies[rng.gen_range(0..nunits)].push_str(&body);
    }
    let units = bodies
        .into_iter()
        .enumerate()
        .map(|(u, b)| (format!("cg{u}.c"), format!("{protos}{b}")))
        .collect();
    CallGraphProgram {
        units,
        functions,
        edges,
        pointer_calls,
    }
}

/// Sets of functions that lie on a common directed cycle, by brute-force
/// reachability over the edge list.
pub fn brute_force_cycles(n: usize, edges: &BTreeSet<(usize, usize)>) -> BTreeSet<BTreeSet<usize>> {
    let mut reach = vec![vec![false; n]; n];
    for &(a, b) in edges {
        reach[a][b] = true;
    }
    for k in 0..n {
        for i in 0..n {
            for j in 0..n {
                if reach[i][k] && reach[k][j] {
                    reach[i][j] = true;
                }
            }
        }
    }
    let mut out = BTreeSet::new();
    for (i, row) in reach.iter().enumerate() {
        if row[i] {
            let comp: BTreeSet<usize> = (0..n).filter(|&j| reach[i][j] && reach[j][i]).collect();
            out.insert(comp);
        }
    }
    out
}

// ---------------------------------------------------------------------------
// front end

pub struct Compiled {
    pub sources: SourceSet,
    pub tu: TypedTu,
}

pub fn compile(path: &str, src: &str) -> Compiled {
    let model = IntegerModel::default();
    let mut sources = SourceSet::new();
    let files = MemoryFiles::new().with(path, src);
    let id = sources.add(path, src);
    let opts = PreprocessOptions {
        builtin_headers: builtin_headers(&model),
        ..PreprocessOptions::default()
    };
    let out = preprocess(&mut sources, &files, id, &opts).unwrap_or_else(|e| panic!("{e}\n{src}"));
    let ast = parse(&out.tokens).unwrap_or_else(|e| panic!("{e}\n{src}"));
    let tu = resolve(ast, &model).unwrap_or_else(|e| panic!("{e}\n{src}"));
    Compiled { sources, tu }
}

pub fn facts(tu: &TypedTu) -> Vec<FunctionFacts<'_>> {
    analyze_unit(tu).expect("flow analysis")
}

// ---------------------------------------------------------------------------
// interpreter

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Stop {
    /// The function returned.
    Returned(i128),
    /// Undefined behavior other than an uninitialized read; the run is
    /// discarded from here on.
    Undefined(&'static str),
    OutOfFuel,
}

#[derive(Debug, Default)]
pub struct Trace {
    /// Every integer value each expression took, in evaluation order.
    pub values: Vec<(NodeId, i128)>,
    /// Reads of uninitialized objects. Such a read yields a value drawn
    /// from the run's seed, and the run goes on.
    pub uninitialized: Vec<NodeId>,
    /// Length of `values` at the first uninitialized read. Values after it
    /// depend on the indeterminate value.
    pub determinate: Option<usize>,
}

impl Trace {
    /// The values observed before the first uninitialized read.
    pub fn determinate_values(&self) -> &[(NodeId, i128)] {
        &self.values[..self.determinate.unwrap_or(self.values.len())]
    }
}

enum Flow {
    Next,
    Stop(Stop),
}

pub struct Interp<'t> {
    tu: &'t TypedTu,
    indeterminate: ChaCha8Rng,
    env: HashMap<SymbolId, Option<i128>>,
    fuel: u32,
    pub trace: Trace,
}

const INT_MIN: i128 = i32::MIN as i128;
const INT_MAX: i128 = i32::MAX as i128;

fn convert(v: i128, ty: &TypeDesc) -> i128 {
    match ty {
        TypeDesc::Int { signed, width } => {
            let m = 1i128 << width;
            let mut r = v.rem_euclid(m);
            if *signed && r >= m / 2 {
                r -= m;
            }
            r
        }
        _ => v,
    }
}

impl<'t> Interp<'t> {
    /// `seed` picks the values uninitialized reads produce.
    pub fn new(tu: &'t TypedTu, seed: u64) -> Self {
        Interp {
            tu,
            indeterminate: ChaCha8Rng::seed_from_u64(seed),
            env: HashMap::new(),
            fuel: 100_000,
            trace: Trace::default(),
        }
    }

    /// Runs the first function definition with the given arguments.
    pub fn call(&mut self, args: &[i128]) -> Stop {
        let info = &self.tu.functions[0];
        for (p, v) in info.params.iter().zip(args) {
            let ty = self.tu.symbol(*p).ty.clone();
            self.env.insert(*p, Some(convert(*v, &ty)));
        }
        let def = self.tu.function_def(info);
        match self.stmt(&def.body) {
            Flow::Stop(s) => s,
            Flow::Next => Stop::Undefined("fell off the end of a non-void function"),
        }
    }

    fn tick(&mut self) -> Result<(), Stop> {
        if self.fuel == 0 {
            return Err(Stop::OutOfFuel);
        }
        self.fuel -= 1;
        Ok(())
    }

    fn stmt(&mut self, s: &Stmt) -> Flow {
        if let Err(e) = self.tick() {
            return Flow::Stop(e);
        }
        let r: Result<Flow, Stop> = (|| {
            Ok(match &s.kind {
                StmtKind::Compound(items) => {
                    for it in items {
                        match it {
                            BlockItem::Decl(d) => {
                                for id in &d.declarators {
                                    let sym = self.tu.decl_symbols[&id.declarator.id];
                                    let v = match &id.init {
                                        Some(Initializer::Expr(e)) => {
                                            let ty = self.tu.symbol(sym).ty.clone();
                                            Some(convert(self.eval(e)?, &ty))
                                        }
                                        Some(_) => return Err(Stop::Undefined("aggregate initializer")),
                                        None => None,
                                    };
                                    self.env.insert(sym, v);
                                }
                            }
                            BlockItem::Stmt(st) => {
                                if let Flow::Stop(s) = self.stmt(st) {
                                    return Ok(Flow::Stop(s));
                                }
                            }
                        }
                    }
                    Flow::Next
                }
                StmtKind::Expr(Some(e)) => {
                    self.eval(e)?;
                    Flow::Next
                }
                StmtKind::Expr(None) => Flow::Next,
                StmtKind::If { cond, then, otherwise } => {
                    if self.eval(cond)? != 0 {
                        self.stmt(then)
                    } else if let Some(o) = otherwise {
                        self.stmt(o)
                    } else {
                        Flow::Next
                    }
                }
                StmtKind::For { init, cond, step, body } => {
                    match init {
                        Some(ForInit::Expr(e)) => {
                            self.eval(e)?;
                        }
                        Some(ForInit::Decl(d)) => {
                            for id in &d.declarators {
                                let sym = self.tu.decl_symbols[&id.declarator.id];
                                let v = match &id.init {
                                    Some(Initializer::Expr(e)) => Some(self.eval(e)?),
                                    _ => None,
                                };
                                self.env.insert(sym, v);
                            }
                        }
                        None => {}
                    }
                    loop {
                        self.tick()?;
                        if let Some(c) = cond {
                            if self.eval(c)? == 0 {
                                break;
                            }
                        }
                        if let Flow::Stop(s) = self.stmt(body) {
                            return Ok(Flow::Stop(s));
                        }
                        if let Some(st) = step {
                            self.eval(st)?;
                        }
                    }
                    Flow::Next
                }
                StmtKind::Return(Some(e)) => {
                    let v = self.eval(e)?;
                    Flow::Stop(Stop::Returned(v))
                }
                _ => return Err(Stop::Undefined("statement outside the generated subset")),
            })
        })();
        match r {
            Ok(f) => f,
            Err(s) => Flow::Stop(s),
        }
    }

    fn lvalue(&self, e: &Expr) -> Result<SymbolId, Stop> {
        match &e.kind {
            ExprKind::Ident(_) => self
                .tu
                .bindings
                .get(&e.id)
                .copied()
                .ok_or(Stop::Undefined("unbound name")),
            _ => Err(Stop::Undefined("lvalue outside the generated subset")),
        }
    }

    fn read(&mut self, e: &Expr) -> Result<i128, Stop> {
        let sym = self.lvalue(e)?;
        match self.env.get(&sym).copied().flatten() {
            Some(v) => Ok(v),
            None => {
                self.trace.uninitialized.push(e.id);
                self.trace.determinate.get_or_insert(self.trace.values.len());
                let ty = self.tu.symbol(sym).ty.clone();
                Ok(convert(self.indeterminate.gen_range(-40..=300), &ty))
            }
        }
    }

    fn int(v: i128) -> Result<i128, Stop> {
        if (INT_MIN..=INT_MAX).contains(&v) {
            Ok(v)
        } else {
            Err(Stop::Undefined("signed overflow"))
        }
    }

    fn arith(op: BinaryOp, a: i128, b: i128) -> Result<i128, Stop> {
        use BinaryOp::*;
        Ok(match op {
            Add => Self::int(a + b)?,
            Sub => Self::int(a - b)?,
            Mul => Self::int(a * b)?,
            Div | Rem if b == 0 => return Err(Stop::Undefined("division by zero")),
            Div => Self::int(a / b)?,
            Rem => a % b,
            BitAnd => a & b,
            BitOr => a | b,
            BitXor => a ^ b,
            Shl => {
                if a < 0 || !(0..32).contains(&b) {
                    return Err(Stop::Undefined("shift"));
                }
                Self::int(a << b)?
            }
            Shr => {
                if !(0..32).contains(&b) {
                    return Err(Stop::Undefined("shift"));
                }
                a >> b
            }
            Lt => (a < b) as i128,
            Gt => (a > b) as i128,
            Le => (a <= b) as i128,
            Ge => (a >= b) as i128,
            Eq => (a == b) as i128,
            Ne => (a != b) as i128,
            LogAnd | LogOr => unreachable!("short-circuit operators are evaluated lazily"),
        })
    }

    fn eval(&mut self, e: &Expr) -> Result<i128, Stop> {
        self.tick()?;
        let v = match &e.kind {
            ExprKind::IntConst(lit) => lit.value as i128,
            ExprKind::Ident(_) => self.read(e)?,
            ExprKind::Unary(op, x) => {
                let v = self.eval(x)?;
                match op {
                    UnaryOp::Plus => v,
                    UnaryOp::Neg => Self::int(-v)?,
                    UnaryOp::BitNot => !v,
                    UnaryOp::Not => (v == 0) as i128,
                }
            }
            ExprKind::Binary(BinaryOp::LogAnd, l, r) => {
                let a = self.eval(l)?;
                (a != 0 && self.eval(r)? != 0) as i128
            }
            ExprKind::Binary(BinaryOp::LogOr, l, r) => {
                let a = self.eval(l)?;
                (a != 0 || self.eval(r)? != 0) as i128
            }
            ExprKind::Binary(op, l, r) => {
                let a = self.eval(l)?;
                let b = self.eval(r)?;
                Self::arith(*op, a, b)?
            }
            ExprKind::Assign(l, r) => {
                let sym = self.lvalue(l)?;
                let v = self.eval(r)?;
                let v = convert(v, &self.tu.symbol(sym).ty.clone());
                self.env.insert(sym, Some(v));
                v
            }
            ExprKind::CompoundAssign(op, l, r) => {
                let sym = self.lvalue(l)?;
                let old = self.eval(l)?;
                let b = self.eval(r)?;
                let v = convert(Self::arith(*op, old, b)?, &self.tu.symbol(sym).ty.clone());
                self.env.insert(sym, Some(v));
                v
            }
            ExprKind::IncDec(op, x) => {
                let sym = self.lvalue(x)?;
                let old = self.eval(x)?;
                let new = match op {
                    IncDecOp::PreInc | IncDecOp::PostInc => Self::int(old + 1)?,
                    IncDecOp::PreDec | IncDecOp::PostDec => Self::int(old - 1)?,
                };
                let new = convert(new, &self.tu.symbol(sym).ty.clone());
                self.env.insert(sym, Some(new));
                match op {
                    IncDecOp::PreInc | IncDecOp::PreDec => new,
                    _ => old,
                }
            }
            _ => return Err(Stop::Undefined("expression outside the generated subset")),
        };
        self.trace.values.push((e.id, v));
        Ok(v)
    }
}

/// The input vectors every generated program is run on: the corners of
/// the 8-bit domain plus random pairs.
pub fn inputs<R: Rng>(rng: &mut R, random: usize) -> Vec<[i128; 2]> {
    let mut v = vec![[0, 0], [0, 255], [255, 0], [255, 255], [1, 1], [128, 127]];
    v.extend((0..random).map(|_| [rng.gen_range(0..=255), rng.gen_range(0..=255)]));
    v
}

/// Expression ids mapped to their start (line, column).
pub fn expr_positions(tu: &TypedTu) -> BTreeMap<NodeId, (u32, u32)> {
    let mut out = BTreeMap::new();
    for f in &tu.functions {
        for full in full_expressions(&tu.function_def(f).body) {
            full.expr.walk_evaluated(&mut |e| {
                out.insert(e.id, (e.span.start.line, e.span.start.col));
            });
        }
    }
    out
}
