use std::collections::BTreeSet;

use super::*;
use crate::parser::{ExprKind, NodeId};
use crate::sema::{unify, GlobalId, SymbolId};
use crate::testutil::{find_expr, idents, typed};

fn facts_of(src: &str, test: impl FnOnce(&FunctionFacts)) {
    let tu = typed(src);
    let f = tu.functions.last().unwrap();
    let facts = analyze_function(&tu, f).unwrap();
    test(&facts);
}

fn sym(facts: &FunctionFacts, name: &str) -> SymbolId {
    facts.tu.symbols.iter().find(|s| s.name == name).unwrap().id
}

#[test]
fn if_else_has_four_blocks() {
    facts_of("void f(int a) { int x; if (a) x = 1; else x = 2; }", |f| {
        // the exit block is not counted
        assert_eq!(f.cfg.len() - 1, 4);
        assert!(f.cfg.reachable.iter().all(|r| *r));
    });
}

#[test]
fn code_after_infinite_loop_is_unreachable() {
    facts_of("void f(void) { while (1) { } return; }", |f| {
        let ret = f.cfg.sites.last().unwrap();
        assert!(!f.cfg.site_reachable(ret));
        assert!(!f.cfg.reachable[f.cfg.exit.index()]);
    });
}

#[test]
fn short_circuit_guards_the_right_operand() {
    facts_of("int g(void); void f(int a) { if (a && g()) { } }", |f| {
        let call = find_expr(f.tu, |e| matches!(e.kind, ExprKind::Call(..)));
        let (bi, _) = f
            .cfg
            .blocks
            .iter()
            .enumerate()
            .find(|(_, b)| b.cond.is_some_and(|c| c.id == call.id))
            .unwrap();
        let into: Vec<_> = f.cfg.predecessors(BlockId(bi as u32)).collect();
        assert_eq!(into.len(), 1);
        assert_eq!(into[0].kind, EdgeKind::TrueBranch);
        let guard = f.cfg.blocks[into[0].from.index()].cond.unwrap();
        assert_eq!(guard.ident_name(), Some("a"));
    });
}

#[test]
fn goto_to_missing_label_fails() {
    let tu = typed("void f(void) { goto out; }");
    let e = build_cfg(&tu, &tu.functions[0]).unwrap_err();
    assert!(matches!(e, FlowError::UndefinedLabel { .. }));
    let tu = typed("void f(void) { goto out; out: ; }");
    assert!(build_cfg(&tu, &tu.functions[0]).is_ok());
    let tu = typed("void f(void) { break; }");
    assert!(matches!(
        build_cfg(&tu, &tu.functions[0]),
        Err(FlowError::MisplacedJump { .. })
    ));
}

#[test]
fn switch_without_default_falls_to_join() {
    facts_of(
        "void f(int a) { int x; switch (a) { case 1: x = 1; break; case 2: x = 2; } }",
        |f| {
            let sw = f.cfg.blocks.iter().position(|b| b.cond.is_some()).unwrap();
            let cases: Vec<_> = f.cfg.successors(BlockId(sw as u32)).collect();
            assert_eq!(cases.len(), 3);
            assert!(cases.iter().all(|e| e.kind == EdgeKind::SwitchCase));
        },
    );
}

#[test]
fn definite_assignment_examples() {
    facts_of("int f(void) { int x; return x; }", |f| {
        let x = idents(f.tu, "x")[0];
        assert_eq!(f.assignment.state_at_read(x.id), Some(AssignState::MaybeUnassigned));
    });
    facts_of("int f(int c) { int x; if (c) x = 1; else x = 2; return x; }", |f| {
        let x = *idents(f.tu, "x").last().unwrap();
        assert_eq!(f.assignment.state_at_read(x.id), Some(AssignState::DefinitelyAssigned));
    });
    facts_of("int f(int c) { int x; if (c > 0 || c <= 0) x = 1; return x; }", |f| {
        let x = *idents(f.tu, "x").last().unwrap();
        assert_eq!(f.assignment.state_at_read(x.id), Some(AssignState::MaybeUnassigned));
    });
    facts_of(
        "void g(int *); int f(void) { int x; int *p = &x; g(p); return x; }",
        |f| {
            let x = *idents(f.tu, "x").last().unwrap();
            assert_eq!(f.assignment.state_at_read(x.id), Some(AssignState::AssignedByAlias));
        },
    );
    facts_of(
        "int f(int n) { int i; int s = 0; for (i = 0; i < n; i++) { int t; s += t; t = 1; } return s; }",
        |f| {
            let t = idents(f.tu, "t")[0];
            assert_eq!(f.assignment.state_at_read(t.id), Some(AssignState::MaybeUnassigned));
        },
    );
}

#[test]
fn interval_examples() {
    facts_of("int f(void) { int x; x = 5; return x; }", |f| {
        let x = *idents(f.tu, "x").last().unwrap();
        assert_eq!(f.intervals.of(x), Some(Interval::point(5)));
    });
    facts_of(
        "unsigned int f(unsigned int n) { if (n < 32) { return n; } return 0; }",
        |f| {
            let n = *idents(f.tu, "n").last().unwrap();
            assert_eq!(f.intervals.of(n), Some(Interval::new(0, 31)));
        },
    );
    facts_of(
        "int g(int); void f(void) { int i; for (i = 0; i < 10; ++i) { g(i); } }",
        |f| {
            let i = idents(f.tu, "i")[3];
            assert_eq!(f.intervals.of(i), Some(Interval::new(0, 9)));
            let after = *idents(f.tu, "i").last().unwrap();
            assert!(f.intervals.of(after).unwrap().contains(9));
        },
    );
    facts_of(
        "int f(int x) { if (x * 0 == 0) { return 1; } else { return 2; } }",
        |f| {
            let else_blocks: Vec<_> = f.intervals.infeasible.iter().map(|e| e.edge.kind).collect();
            assert_eq!(else_blocks, vec![EdgeKind::FalseBranch]);
        },
    );
}

#[test]
fn every_evaluated_integer_expression_has_a_range() {
    facts_of("int f(int a) { int k; int s = 0; for (k = 0; k < 4; k++) { s += k; } if (a > 0 && s < 9) { return s; } return 0; }", |f| {
        // the operands of `k++` and `s += k` are reads too
        let k_inc = idents(f.tu, "k")[2];
        assert_eq!(f.intervals.of(k_inc), Some(Interval::new(0, 3)));
        let s_target = idents(f.tu, "s")[0];
        assert!(f.intervals.of(s_target).unwrap().contains(0));
        let and = find_expr(f.tu, |e| matches!(e.kind, ExprKind::Binary(crate::parser::BinaryOp::LogAnd, ..)));
        assert_eq!(f.intervals.of(and), Some(Interval::new(0, 1)));
    });
}

#[test]
fn shifts_out_of_range_give_the_type_range() {
    facts_of(
        "unsigned int f(unsigned int i, int n) { if (n >= 0 && n <= 40) { return i << n; } return 0; }",
        |f| {
            let n = *idents(f.tu, "n").last().unwrap();
            assert_eq!(f.intervals.of(n), Some(Interval::new(0, 40)));
            let shl = find_expr(f.tu, |e| {
                matches!(e.kind, ExprKind::Binary(crate::parser::BinaryOp::Shl, ..))
            });
            assert_eq!(f.intervals.of(shl), Some(Interval::new(0, u32::MAX as i128)));
        },
    );
}

#[test]
fn points_to_examples() {
    facts_of("void f(void) { char *p = \"String\"; p; }", |f| {
        let p = idents(f.tu, "p")[0];
        let set = f.points_to.of(p).unwrap();
        assert!(set.only_literals());
    });
    facts_of("void f(void) { int x, y; int *p = &x; p = &y; p; }", |f| {
        let p = *idents(f.tu, "p").last().unwrap();
        let set = f.points_to.of(p).unwrap();
        assert_eq!(set.targets, BTreeSet::from([Target::Named(sym(f, "y"))]));
    });
    facts_of(
        "void f(int c) { int x, y; int *p; if (c) p = &x; else p = &y; p; }",
        |f| {
            let p = *idents(f.tu, "p").last().unwrap();
            let set = f.points_to.of(p).unwrap();
            assert_eq!(
                set.targets,
                BTreeSet::from([Target::Named(sym(f, "x")), Target::Named(sym(f, "y"))])
            );
        },
    );
    facts_of(
        "char *g(void); void f(int c) { char a[4]; char *p = c ? a : g(); p; }",
        |f| {
            let p = *idents(f.tu, "p").last().unwrap();
            let set = f.points_to.of(p).unwrap();
            assert!(set.has_unknown() && set.targets.contains(&Target::Named(sym(f, "a"))));
        },
    );
}

#[test]
fn liveness_examples() {
    facts_of("void use(int); void f(void) { int x; x = 1; x = 2; use(x); }", |f| {
        let stores: Vec<NodeId> = f.liveness.dead_stores.iter().map(|d| d.expr).collect();
        let first = find_expr(f.tu, |e| matches!(e.kind, ExprKind::Assign(..)));
        assert_eq!(stores, vec![first.id]);
        assert!(!f.liveness.live_after[&first.id].contains(&sym(f, "x")));
    });
    facts_of("int g(void); void f(void) { int x; x = g(); }", |f| {
        assert_eq!(f.liveness.dead_stores.len(), 1);
    });
    facts_of(
        "int f(int n) { int s = 0; while (n > 0) { s = s + n; n--; } return s; }",
        |f| {
            let s = sym(f, "s");
            let head = f.cfg.blocks.iter().position(|b| b.cond.is_some()).unwrap();
            assert!(f.liveness.live_in[head].contains(&s));
            assert!(f.liveness.dead_stores.is_empty());
        },
    );
}

#[test]
fn fixpoints_terminate_within_budget() {
    facts_of(
        "int f(int n) { int i, j, s = 0; for (i = 0; i < n; i++) { for (j = i; j < 100; j += 3) { s ^= j; } } return s; }",
        |f| {
            let bound = f.cfg.len() * (f.intervals.tracked.len() * 2 + 3) * 4 + WIDENING_DELAY * f.cfg.len();
            assert!(f.intervals.iterations <= bound, "{} > {bound}", f.intervals.iterations);
            assert!(f.assignment.iterations <= f.cfg.len() * 4);
        },
    );
}

fn program(srcs: &[&str]) -> crate::sema::Program {
    unify(srcs.iter().map(|s| typed(s)).collect()).unwrap()
}

fn gid(p: &crate::sema::Program, name: &str) -> GlobalId {
    p.globals.iter().find(|g| g.name == name).unwrap().id
}

#[test]
fn call_graph_examples() {
    let p = program(&[
        "void g(void); void f(void) { g(); }",
        "void f(void); void g(void) { f(); }",
    ]);
    let g = build_call_graph(&p);
    let (f_, g_) = (gid(&p, "f"), gid(&p, "g"));
    assert_eq!(g.direct_edges, BTreeSet::from([(f_, g_), (g_, f_)]));
    assert_eq!(recursion_components(&g), vec![BTreeSet::from([f_, g_])]);

    let p = program(&["void h(void) {} void f(void) { void (*fp)(void) = h; fp(); }"]);
    let g = build_call_graph(&p);
    assert!(g.direct_edges.is_empty());
    assert_eq!(g.indirect_call_sites.len(), 1);

    let p = program(&["void f(int n) { if (n) f(n - 1); }"]);
    let g = build_call_graph(&p);
    assert_eq!(recursion_components(&g), vec![BTreeSet::from([gid(&p, "f")])]);

    let p = program(&[
        "void h(void); void g(void) { h(); } void f(void) { g(); } void h(void) { f(); } void k(void) { f(); }",
    ]);
    let g = build_call_graph(&p);
    let comps = recursion_components(&g);
    assert_eq!(comps, vec![BTreeSet::from([gid(&p, "f"), gid(&p, "g"), gid(&p, "h")])]);
}

/// Functions on some directed cycle, by path enumeration from every node.
fn cyclic_nodes(n: usize, edges: &BTreeSet<(usize, usize)>) -> BTreeSet<usize> {
    fn reaches(n: usize, edges: &BTreeSet<(usize, usize)>, from: usize, to: usize) -> bool {
        let mut seen = vec![false; n];
        let mut stack = vec![from];
        while let Some(v) = stack.pop() {
            for &(a, b) in edges {
                if a == v {
                    if b == to {
                        return true;
                    }
                    if !seen[b] {
                        seen[b] = true;
                        stack.push(b);
                    }
                }
            }
        }
        false
    }
    (0..n).filter(|&v| reaches(n, edges, v, v)).collect()
}

#[test]
fn recursion_components_match_brute_force() {
    use rand::{Rng, SeedableRng};
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(7);
    for round in 0..300 {
        let n = rng.gen_range(1..=12);
        let dag = round % 2 == 0;
        let mut g = CallGraph::default();
        let mut edges = BTreeSet::new();
        for i in 0..n {
            g.nodes.insert(GlobalId(i as u32));
        }
        for _ in 0..rng.gen_range(0..n * 2) {
            let (a, b) = (rng.gen_range(0..n), rng.gen_range(0..n));
            if dag && a >= b {
                continue;
            }
            edges.insert((a, b));
            g.direct_edges.insert((GlobalId(a as u32), GlobalId(b as u32)));
        }
        let comps = recursion_components(&g);
        let got: BTreeSet<usize> = comps.iter().flatten().map(|g| g.0 as usize).collect();
        assert_eq!(got, cyclic_nodes(n, &edges), "round {round}");
        if dag {
            assert!(comps.is_empty());
        }
    }
}
