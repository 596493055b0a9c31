//! Acceptance suite. Prints one PASS/FAIL line per criterion and exits
//! non-zero if any criterion fails.

mod common;

use std::collections::BTreeSet;
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::{Path, PathBuf};
use std::process::Command;
use std::time::Instant;

use common::gen::{self, Interp, Stop};
use misracheck::cli::{analyze, Outcome, RunConfig};
use misracheck::compliance::Verdict;
use misracheck::flow::{build_call_graph, recursion_components};
use misracheck::frontend::{lex, preprocess, PreprocessOptions};
use misracheck::parser::parse;
use misracheck::rules::{
    apply_dont_know_policy, Certainty, DontKnowPolicy, Finding, Location, MixedChoice, PolicyMode, Provenance,
};
use misracheck::sema::{builtin_headers, resolve, unify, IntegerModel};
use misracheck::source::{FileId, MemoryFiles, SourceFile, SourceSet};
use proptest::prelude::*;
use proptest::test_runner::{Config as PropConfig, TestRunner};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

type Check = Result<String, String>;
type Criterion = (&'static str, fn() -> Check);

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn memory(files: &[(&str, &str)]) -> MemoryFiles {
    files.iter().fold(MemoryFiles::new(), |m, (p, c)| m.with(*p, *c))
}

fn run(config: &RunConfig, files: &MemoryFiles) -> Result<Outcome, String> {
    analyze(config, files).map_err(|e| e.to_string())
}

// 1 -------------------------------------------------------------------------

const LISTING: &str = "#include <stdint.h>\nuint32_t f(void) {\n    uint32_t i = 1;\n    i = i << 32;  /* Undefined behavior. */\n    return i;\n}\n";
const MASKED: &str =
    "#include <stdint.h>\nuint32_t f(void) {\n    uint32_t i = 1;\n    i = i << (32 & 0x1F);\n    return i;\n}\n";

fn paper_vector() -> Check {
    let start = Instant::now();
    let files = memory(&[("listing.c", LISTING), ("masked.c", MASKED)]);
    let mut all = RunConfig::new(vec!["listing.c".into()]);
    all.system_mode = true;
    let o = run(&all, &files)?;
    let got: Vec<String> = o
        .findings
        .iter()
        .map(|a| format!("{}: {}", a.finding.location, a.finding.guideline))
        .collect();
    ensure(o.findings.len() == 1, || format!("expected one finding, got {got:?}"))?;
    let f = &o.findings[0].finding;
    ensure(f.guideline == "R12.2", || format!("wrong guideline {got:?}"))?;
    ensure(f.certainty == Certainty::Definite, || "finding is not definite".into())?;
    let class = f.behavior_class.map(|b| b.to_string());
    ensure(class.as_deref() == Some("undefined"), || {
        format!("behavior class {class:?}")
    })?;
    ensure((f.location.line, f.location.col) == (4, 9), || {
        format!("location {}", f.location)
    })?;

    let mut only = all.clone();
    only.rules = "R12.2".parse().unwrap();
    let o = run(&only, &files)?;
    ensure(o.findings.len() == 1, || {
        format!("R12.2 alone: {} findings", o.findings.len())
    })?;

    let mut masked = all.clone();
    masked.sources = vec!["masked.c".into()];
    let o = run(&masked, &files)?;
    ensure(o.findings.is_empty(), || {
        format!(
            "masked variant: {:?}",
            o.findings
                .iter()
                .map(|a| a.finding.guideline.clone())
                .collect::<Vec<_>>()
        )
    })?;
    let elapsed = start.elapsed();
    ensure(elapsed.as_secs_f64() < 1.0, || format!("took {elapsed:?}"))?;
    Ok(format!(
        "1 definite R12.2 (undefined) at 4:9, masked variant clean, {} ms",
        elapsed.as_millis()
    ))
}

// 2 -------------------------------------------------------------------------

fn rule_corpus() -> Check {
    let start = Instant::now();
    let results = common::run_corpus();
    let elapsed = start.elapsed();
    let programs: usize = results.iter().map(|r| r.programs).sum();
    let mut problems = Vec::new();
    for r in &results {
        if r.violating < 3 || r.compliant < 3 {
            problems.push(format!(
                "{}: {} violating, {} compliant",
                r.checker, r.violating, r.compliant
            ));
        }
        problems.extend(r.mismatches.iter().map(|m| format!("{}: {m}", r.checker)));
    }
    ensure(results.len() == 15, || format!("{} checker directories", results.len()))?;
    ensure(problems.is_empty(), || problems.join("; "))?;
    ensure(elapsed.as_secs_f64() < 10.0, || format!("took {elapsed:?}"))?;
    Ok(format!(
        "{} checkers, {programs} programs, 0 mismatches, {} ms",
        results.len(),
        elapsed.as_millis()
    ))
}

// 3 and 4 -------------------------------------------------------------------

const RANDOM_PROGRAMS: usize = 500;
const RANDOM_INPUTS: usize = 64;

#[derive(Default)]
struct Soundness {
    programs: usize,
    runs: usize,
    ub_runs: usize,
    witnessed: usize,
    flagged: usize,
    false_negatives: Vec<String>,
    false_positives: usize,
    definite_false_positives: Vec<String>,
    observations: usize,
    interval_violations: Vec<String>,
}

fn soundness() -> &'static Soundness {
    static CELL: std::sync::OnceLock<Soundness> = std::sync::OnceLock::new();
    CELL.get_or_init(|| {
        let mut rng = ChaCha8Rng::seed_from_u64(0x5eed_0009);
        let mut s = Soundness::default();
        let mut config = RunConfig::new(vec!["gen.c".into()]);
        config.rules = "R9.1".parse().unwrap();
        config.system_mode = true;
        config.policy = DontKnowPolicy::new(PolicyMode::Caution);
        for n in 0..RANDOM_PROGRAMS {
            let src = gen::straight_line_program(&mut rng);
            let compiled = gen::compile("gen.c", &src);
            let facts = gen::facts(&compiled.tu);
            let intervals = &facts[0].intervals;
            let positions = gen::expr_positions(&compiled.tu);

            let outcome = analyze(&config, &memory(&[("gen.c", &src)])).expect("analysis runs");
            let flagged: BTreeSet<(u32, u32)> = outcome
                .findings
                .iter()
                .map(|a| (a.finding.location.line, a.finding.location.col))
                .collect();
            let definite: BTreeSet<(u32, u32)> = outcome
                .findings
                .iter()
                .filter(|a| a.finding.certainty == Certainty::Definite)
                .map(|a| (a.finding.location.line, a.finding.location.col))
                .collect();

            let mut witnessed = BTreeSet::new();
            for [a, b] in gen::inputs(&mut rng, RANDOM_INPUTS) {
                let mut it = Interp::new(&compiled.tu, s.runs as u64);
                let stop = it.call(&[a, b]);
                s.runs += 1;
                if matches!(stop, Stop::Undefined(_) | Stop::OutOfFuel) {
                    s.ub_runs += 1;
                }
                witnessed.extend(it.trace.uninitialized.iter().map(|id| positions[id]));
                for (id, v) in it.trace.determinate_values() {
                    s.observations += 1;
                    match intervals.exprs.get(id) {
                        Some(iv) if iv.contains(*v) => {}
                        other => {
                            if s.interval_violations.len() < 5 {
                                let (l, c) = positions[id];
                                s.interval_violations.push(format!(
                                    "program {n} at {l}:{c} (a={a}, b={b}): value {v} outside {other:?}\n{src}"
                                ));
                            } else {
                                s.interval_violations.push(String::new());
                            }
                        }
                    }
                }
            }
            for w in &witnessed {
                if !flagged.contains(w) {
                    s.false_negatives
                        .push(format!("program {n}: unflagged read at {}:{}\n{src}", w.0, w.1));
                }
            }
            s.false_positives += flagged.difference(&witnessed).count();
            for d in definite.difference(&witnessed) {
                s.definite_false_positives
                    .push(format!("program {n}: {}:{}\n{src}", d.0, d.1));
            }
            s.witnessed += witnessed.len();
            s.flagged += flagged.len();
            s.programs += 1;
        }
        s
    })
}

fn definite_assignment() -> Check {
    let s = soundness();
    ensure(s.programs >= 500, || format!("only {} programs", s.programs))?;
    ensure(s.false_negatives.is_empty(), || {
        format!(
            "{} false negatives; first: {}",
            s.false_negatives.len(),
            s.false_negatives[0]
        )
    })?;
    let fp_rate = if s.flagged == 0 {
        0.0
    } else {
        s.false_positives as f64 / s.flagged as f64
    };
    Ok(format!(
        "{} programs, {} runs, {} witnessed read sites all flagged; flagged but never witnessed {}/{} sites ({:.1}%, an upper bound on false positives; {} of them definite)",
        s.programs,
        s.runs,
        s.witnessed,
        s.false_positives,
        s.flagged,
        fp_rate * 100.0,
        s.definite_false_positives.len()
    ))
}

fn interval_soundness() -> Check {
    let s = soundness();
    ensure(s.interval_violations.is_empty(), || {
        format!(
            "{} violations; first: {}",
            s.interval_violations.len(),
            s.interval_violations[0]
        )
    })?;
    Ok(format!(
        "{} observed values over {} runs ({} stopped at undefined behavior) all inside their intervals",
        s.observations, s.runs, s.ub_runs
    ))
}

// 5 -------------------------------------------------------------------------

fn call_graph_oracle() -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(0xca11_0005);
    let model = IntegerModel::default();
    let opts = PreprocessOptions {
        builtin_headers: builtin_headers(&model),
        ..PreprocessOptions::default()
    };
    let mut cyclic = 0;
    let mut pointer_sites = 0;
    const PROGRAMS: usize = 200;
    for n in 0..PROGRAMS {
        let p = gen::call_graph_program(&mut rng);
        let files = p
            .units
            .iter()
            .fold(MemoryFiles::new(), |m, (path, c)| m.with(path.as_str(), c.as_str()));
        let mut sources = SourceSet::new();
        let mut tus = Vec::new();
        for (path, text) in &p.units {
            let id = sources.add(path.as_str(), text.as_str());
            let out = preprocess(&mut sources, &files, id, &opts).map_err(|e| e.to_string())?;
            let ast = parse(&out.tokens).map_err(|e| e.to_string())?;
            tus.push(resolve(ast, &model).map_err(|e| e.to_string())?);
        }
        let program = unify(tus).map_err(|e| e.to_string())?;
        let cg = build_call_graph(&program);
        let got: BTreeSet<BTreeSet<String>> = recursion_components(&cg)
            .into_iter()
            .map(|c| c.into_iter().map(|g| program.global(g).name.clone()).collect())
            .collect();
        let want: BTreeSet<BTreeSet<String>> = gen::brute_force_cycles(p.functions.len(), &p.edges)
            .into_iter()
            .map(|c| c.into_iter().map(|i| p.functions[i].clone()).collect())
            .collect();
        ensure(got == want, || {
            format!("program {n}: components {got:?}, expected {want:?}")
        })?;
        ensure(cg.indirect_call_sites.len() == p.pointer_calls, || {
            format!(
                "program {n}: {} indirect sites, generated {}",
                cg.indirect_call_sites.len(),
                p.pointer_calls
            )
        })?;

        let mut config = RunConfig::new(p.units.iter().map(|(path, _)| PathBuf::from(path)).collect());
        config.rules = "R17.2".parse().unwrap();
        config.system_mode = true;
        let o = run(&config, &files)?;
        let cautions = o
            .findings
            .iter()
            .filter(|a| a.finding.certainty == Certainty::Caution)
            .count();
        ensure(cautions == p.pointer_calls, || {
            format!(
                "program {n}: {cautions} caution findings for {} pointer calls",
                p.pointer_calls
            )
        })?;
        cyclic += usize::from(!want.is_empty());
        pointer_sites += p.pointer_calls;
    }
    Ok(format!(
        "{PROGRAMS} programs ({cyclic} with recursion) match brute force; {pointer_sites} pointer-call sites, one caution each"
    ))
}

// 6 -------------------------------------------------------------------------

fn fixtures_dir() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures/macros")
}

fn lexemes_of(path: &str, text: &str) -> Result<Vec<String>, String> {
    let file = SourceFile::new(FileId(0), path, text);
    Ok(lex(&file)
        .map_err(|e| format!("{path}: {e}"))?
        .into_iter()
        .map(|t| t.lexeme)
        .collect())
}

fn gcc_reference(c: &Path) -> Option<String> {
    let out = Command::new("gcc")
        .args(["-E", "-P", "-undef", "-nostdinc"])
        .arg(c)
        .current_dir(c.parent().unwrap())
        .output()
        .ok()?;
    out.status
        .success()
        .then(|| String::from_utf8_lossy(&out.stdout).into_owned())
}

fn preprocessor_mapping() -> Check {
    let model = IntegerModel::default();
    let files = common::corpus_files();
    let mut tokens = 0usize;
    let mut units = 0usize;
    for ch in common::checkers() {
        for p in &ch.programs {
            let opts = PreprocessOptions {
                include_paths: p.include.iter().map(PathBuf::from).collect(),
                builtin_headers: builtin_headers(&model),
                ..PreprocessOptions::default()
            };
            for src in &p.sources {
                let mut sources = SourceSet::new();
                let text = std::fs::read_to_string(common::corpus_root().join(src)).map_err(|e| e.to_string())?;
                let id = sources.add(src.as_str(), text);
                let out = preprocess(&mut sources, &files, id, &opts).map_err(|e| format!("{src}: {e}"))?;
                for (i, t) in out.tokens.iter().enumerate() {
                    ensure(sources.contains(t.origin), || {
                        format!("{src}: token {i} `{}` has no origin", t.lexeme)
                    })?;
                    for frame in &t.expansion {
                        ensure(sources.contains(frame.site), || {
                            format!("{src}: token {i} `{}` has an unmapped expansion site", t.lexeme)
                        })?;
                    }
                }
                tokens += out.tokens.len();
                units += 1;
            }
        }
    }

    let dir = fixtures_dir();
    let mut fixtures: Vec<PathBuf> = std::fs::read_dir(&dir)
        .map_err(|e| e.to_string())?
        .map(|e| e.unwrap().path())
        .filter(|p| p.extension().is_some_and(|x| x == "c"))
        .collect();
    fixtures.sort();
    let disk = misracheck::source::DiskFiles;
    let mut live = 0;
    for c in &fixtures {
        let name = c.file_name().unwrap().to_string_lossy().into_owned();
        let mut sources = SourceSet::new();
        let text = std::fs::read_to_string(c).map_err(|e| e.to_string())?;
        let id = sources.add(c.display().to_string(), text);
        let opts = PreprocessOptions {
            include_paths: vec![dir.clone()],
            ..PreprocessOptions::default()
        };
        let out = preprocess(&mut sources, &disk, id, &opts).map_err(|e| format!("{name}: {e}"))?;
        let ours: Vec<String> = out.tokens.iter().map(|t| t.lexeme.clone()).collect();
        let reference_path = c.with_extension("i");
        let reference = std::fs::read_to_string(&reference_path).map_err(|e| format!("{name}: {e}"))?;
        let want = lexemes_of("reference", &reference)?;
        ensure(ours == want, || format!("{name}: got {ours:?}, reference {want:?}"))?;
        if let Some(g) = gcc_reference(c) {
            let theirs = lexemes_of("gcc", &g)?;
            ensure(ours == theirs, || format!("{name}: got {ours:?}, gcc {theirs:?}"))?;
            live += 1;
        }
    }
    let live_note = if live == fixtures.len() {
        "also matched live gcc".to_string()
    } else {
        format!("{live} matched live gcc")
    };
    Ok(format!(
        "{tokens} tokens in {units} corpus units all mapped; {} macro fixtures match reference streams, {live_note}",
        fixtures.len()
    ))
}

// 7 -------------------------------------------------------------------------

#[derive(Debug, Clone, Copy, PartialEq)]
enum Expect {
    Verdict(Verdict),
    /// Compliant with remarks, with a remark naming the guideline.
    Remark,
    /// The recategorization plan is refused.
    RejectPlan,
    /// The deviation record is refused.
    RejectDeviation,
}

struct Subject {
    guideline: &'static str,
    violating: &'static str,
    clean: &'static str,
}

const SUBJECTS: [Subject; 3] = [
    Subject {
        guideline: "R9.1",
        violating: "int f(void) {\n    int x;\n    return x;\n}\n",
        clean: "int f(void) {\n    int x = 0;\n    return x;\n}\n",
    },
    Subject {
        guideline: "R12.2",
        violating: LISTING,
        clean: MASKED,
    },
    Subject {
        guideline: "R8.13",
        violating: "int h(int *p) {\n    return *p;\n}\n",
        clean: "int h(const int *p) {\n    return *p;\n}\n",
    },
];

use Expect::*;
use Verdict::*;

/// (guideline, finding, deviated, disapplied, expected)
const TABLE: [(&str, bool, bool, bool, Expect); 24] = [
    ("R9.1", false, false, false, Verdict(Compliant)),
    ("R9.1", false, false, true, RejectPlan),
    ("R9.1", false, true, false, RejectDeviation),
    ("R9.1", false, true, true, RejectPlan),
    ("R9.1", true, false, false, Verdict(NonCompliant)),
    ("R9.1", true, false, true, RejectPlan),
    ("R9.1", true, true, false, RejectDeviation),
    ("R9.1", true, true, true, RejectPlan),
    ("R12.2", false, false, false, Verdict(Compliant)),
    ("R12.2", false, false, true, RejectPlan),
    ("R12.2", false, true, false, Verdict(Compliant)),
    ("R12.2", false, true, true, RejectPlan),
    ("R12.2", true, false, false, Verdict(NonCompliant)),
    ("R12.2", true, false, true, RejectPlan),
    ("R12.2", true, true, false, Verdict(Compliant)),
    ("R12.2", true, true, true, RejectPlan),
    ("R8.13", false, false, false, Verdict(Compliant)),
    ("R8.13", false, false, true, Verdict(Compliant)),
    ("R8.13", false, true, false, Verdict(Compliant)),
    ("R8.13", false, true, true, Verdict(Compliant)),
    ("R8.13", true, false, false, Remark),
    ("R8.13", true, false, true, Verdict(Compliant)),
    ("R8.13", true, true, false, Verdict(Compliant)),
    ("R8.13", true, true, true, Verdict(Compliant)),
];

fn truth_table() -> Check {
    for (i, &(id, finding, deviated, disapplied, expect)) in TABLE.iter().enumerate() {
        let s = SUBJECTS.iter().find(|s| s.guideline == id).unwrap();
        let src = if finding { s.violating } else { s.clean };
        let dev = format!(
            "deviation DV-{i} guideline={id} files=t.c lines=1-20 approver=\"QA\" date=2024-01-02 rationale=\"reviewed\"\n"
        );
        let grp = format!("{id} = disapplied rationale=\"not valuable here\"\n");
        let files = memory(&[("t.c", src), ("dev.txt", &dev), ("grp.txt", &grp)]);
        let mut c = RunConfig::new(vec!["t.c".into()]);
        c.rules = id.parse().unwrap();
        c.system_mode = true;
        if deviated {
            c.deviations_path = Some("dev.txt".into());
        }
        if disapplied {
            c.grp_path = Some("grp.txt".into());
        }
        let case = format!("case {i} ({id}, finding={finding}, deviated={deviated}, disapplied={disapplied})");
        let result = analyze(&c, &files);
        match (expect, result) {
            (RejectPlan, Err(e)) => {
                let e = e.to_string();
                ensure(
                    e.starts_with("grp.txt") && e.contains("cannot be recategorized"),
                    || format!("{case}: {e}"),
                )?;
            }
            (RejectDeviation, Err(e)) => {
                let e = e.to_string();
                ensure(
                    e.starts_with("dev.txt") && e.contains("deviation is not permitted"),
                    || format!("{case}: {e}"),
                )?;
            }
            (Verdict(v), Ok(o)) => {
                ensure(o.compliance.verdict == v, || {
                    format!("{case}: verdict {}", o.compliance.verdict)
                })?;
                let counted = o.compliance.total_findings();
                ensure(counted == usize::from(finding), || {
                    format!("{case}: {counted} findings counted")
                })?;
                if disapplied && finding {
                    ensure(
                        o.findings.is_empty() && o.compliance.remarks.iter().any(|r| r.contains("disapplied")),
                        || format!("{case}: disapplied finding not suppressed with a remark"),
                    )?;
                }
            }
            (Remark, Ok(o)) => {
                ensure(o.compliance.verdict == CompliantWithRemarks, || {
                    format!("{case}: verdict {}", o.compliance.verdict)
                })?;
                ensure(
                    o.compliance
                        .remarks
                        .iter()
                        .any(|r| r.contains("advisory") && r.contains(id)),
                    || format!("{case}: remarks {:?}", o.compliance.remarks),
                )?;
            }
            (e, Ok(o)) => return Err(format!("{case}: expected {e:?}, got verdict {}", o.compliance.verdict)),
            (e, Err(err)) => return Err(format!("{case}: expected {e:?}, got error {err}")),
        }
    }
    Ok(format!("{} cases match", TABLE.len()))
}

// 8 -------------------------------------------------------------------------

const POLICY_GUIDELINES: [&str; 4] = ["R9.1", "R12.2", "R8.13", "R17.2"];

fn finding_strategy() -> impl Strategy<Value = Finding> {
    (0..POLICY_GUIDELINES.len(), any::<bool>(), 1u32..60, 1u32..30).prop_map(|(g, definite, line, col)| Finding {
        guideline: POLICY_GUIDELINES[g].to_string(),
        location: Location {
            path: "p.c".into(),
            line,
            col,
        },
        certainty: if definite {
            Certainty::Definite
        } else {
            Certainty::Caution
        },
        behavior_class: None,
        message: format!("finding at {line}:{col}"),
        evidence: Vec::new(),
        expansion: Vec::new(),
        provenance: Provenance::Analysis,
    })
}

fn policy_strategy() -> impl Strategy<Value = DontKnowPolicy> {
    let mode = prop_oneof![
        Just(PolicyMode::Suppress),
        Just(PolicyMode::AsViolation),
        Just(PolicyMode::Mixed),
        Just(PolicyMode::Caution)
    ];
    (mode, proptest::collection::vec(any::<bool>(), POLICY_GUIDELINES.len())).prop_map(|(mode, choices)| {
        let mut p = DontKnowPolicy::new(mode);
        for (g, violation) in POLICY_GUIDELINES.iter().zip(choices) {
            let c = if violation {
                MixedChoice::AsViolation
            } else {
                MixedChoice::Suppress
            };
            p.mixed.insert(g.to_string(), c);
        }
        p
    })
}

fn is_subsequence(small: &[Finding], big: &[Finding]) -> bool {
    let mut it = big.iter();
    small.iter().all(|s| it.any(|b| b == s))
}

fn policy_algebra() -> Check {
    let mut runner = TestRunner::new(PropConfig {
        cases: 512,
        failure_persistence: None,
        ..PropConfig::default()
    });
    let strategy = (proptest::collection::vec(finding_strategy(), 0..40), policy_strategy());
    runner
        .run(&strategy, |(findings, policy)| {
            let apply = |mode: PolicyMode, input: &[Finding]| {
                let p = DontKnowPolicy {
                    mode,
                    mixed: policy.mixed.clone(),
                };
                apply_dont_know_policy(input.to_vec(), &p).unwrap()
            };
            let suppressed = apply(PolicyMode::Suppress, &findings);
            prop_assert!(is_subsequence(&suppressed, &findings), "suppress is not a subsequence");
            let violations = apply(PolicyMode::AsViolation, &findings);
            prop_assert_eq!(violations.len(), findings.len());
            prop_assert!(violations.iter().all(|f| f.certainty == Certainty::Definite));
            prop_assert_eq!(&apply(PolicyMode::Caution, &findings), &findings);

            let definite: Vec<Finding> = findings
                .iter()
                .filter(|f| f.certainty == Certainty::Definite)
                .cloned()
                .collect();
            let out = apply(policy.mode, &findings);
            prop_assert!(
                is_subsequence(&definite, &out),
                "definite findings changed under {}",
                policy.mode
            );
            prop_assert_eq!(&apply(policy.mode, &definite), &definite);
            Ok(())
        })
        .map_err(|e| e.to_string())?;
    Ok("512 random finding lists: suppress ⊆ input, as-violation keeps length, caution is identity, definite findings fixed".into())
}

// 9 -------------------------------------------------------------------------

fn corpus_invocations() -> Vec<Vec<String>> {
    let mut out = Vec::new();
    for ch in common::checkers() {
        for p in &ch.programs {
            let mut args: Vec<String> = p.sources.clone();
            if let Some(i) = &p.include {
                args.extend(["-I".into(), i.clone()]);
            }
            for (flag, v) in [
                ("--external", &p.external),
                ("--deviations", &p.deviations),
                ("--grp", &p.grp),
            ] {
                if let Some(v) = v {
                    args.extend([flag.to_string(), v.clone()]);
                }
            }
            if let Some(g) = &ch.guideline {
                args.extend(["--rules".into(), g.clone()]);
            }
            args.extend(
                [
                    "--system",
                    "--report",
                    "structured",
                    "--timestamp",
                    "1970-01-01T00:00:00Z",
                ]
                .map(String::from),
            );
            out.push(args);
        }
    }
    out
}

fn corpus_reports() -> Result<Vec<u8>, String> {
    let mut all = Vec::new();
    for args in corpus_invocations() {
        let out = Command::new(env!("CARGO_BIN_EXE_misracheck"))
            .args(&args)
            .current_dir(common::corpus_root())
            .output()
            .map_err(|e| e.to_string())?;
        let code = out.status.code();
        ensure(matches!(code, Some(0..=2)), || {
            format!(
                "{args:?} exited with {code:?}: {}",
                String::from_utf8_lossy(&out.stderr)
            )
        })?;
        all.extend_from_slice(&out.stdout);
    }
    Ok(all)
}

fn determinism() -> Check {
    let a = corpus_reports()?;
    let b = corpus_reports()?;
    ensure(!a.is_empty(), || "no output".into())?;
    ensure(a == b, || {
        let at = a
            .iter()
            .zip(&b)
            .position(|(x, y)| x != y)
            .unwrap_or(a.len().min(b.len()));
        format!("reports differ at byte {at}")
    })?;
    Ok(format!(
        "{} programs, {} report bytes identical across two runs",
        corpus_invocations().len(),
        a.len()
    ))
}

// ---------------------------------------------------------------------------

fn main() {
    let criteria: [Criterion; 9] = [
        ("paper vector", paper_vector),
        ("rule corpus", rule_corpus),
        ("definite-assignment soundness", definite_assignment),
        ("interval soundness", interval_soundness),
        ("call-graph recursion oracle", call_graph_oracle),
        ("preprocessor mapping", preprocessor_mapping),
        ("compliance truth table", truth_table),
        ("policy algebra", policy_algebra),
        ("determinism", determinism),
    ];
    let filter: Option<String> = std::env::args().skip(1).find(|a| !a.starts_with('-'));
    let mut failed = 0;
    for (i, (name, check)) in criteria.iter().enumerate() {
        if filter.as_ref().is_some_and(|f| !name.contains(f.as_str())) {
            continue;
        }
        let result = catch_unwind(AssertUnwindSafe(check)).unwrap_or_else(|p| {
            let msg = p
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| p.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_default();
            Err(format!("panicked: {msg}"))
        });
        match result {
            Ok(detail) => println!("PASS {} {name}: {detail}", i + 1),
            Err(detail) => {
                failed += 1;
                println!("FAIL {} {name}: {detail}", i + 1);
            }
        }
    }
    if failed > 0 {
        std::process::exit(1);
    }
}
