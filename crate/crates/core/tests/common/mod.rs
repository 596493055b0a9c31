//! Shared helpers for the integration tests: the rule corpus under
//! `tests/corpus` and random program generation.

#![allow(dead_code)]

pub mod gen;

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use misracheck::cli::{analyze, Outcome, RunConfig};
use misracheck::source::MemoryFiles;

pub fn corpus_root() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("tests/corpus")
}

/// One analyzed program: a single `.c` file, or a directory whose `.c`
/// files are linked together.
#[derive(Debug, Clone)]
pub struct Program {
    /// Path relative to the corpus root, `/`-separated.
    pub name: String,
    pub sources: Vec<String>,
    pub include: Option<String>,
    pub external: Option<String>,
    pub deviations: Option<String>,
    pub grp: Option<String>,
}

/// A checker directory and the guideline it exercises.
#[derive(Debug, Clone)]
pub struct Checker {
    pub dir: String,
    /// `None` runs every implemented guideline.
    pub guideline: Option<String>,
    pub programs: Vec<Program>,
}

fn rel(p: &Path) -> String {
    p.strip_prefix(corpus_root())
        .unwrap()
        .components()
        .map(|c| c.as_os_str().to_string_lossy().into_owned())
        .collect::<Vec<_>>()
        .join("/")
}

fn sorted_entries(dir: &Path) -> Vec<PathBuf> {
    let mut v: Vec<PathBuf> = std::fs::read_dir(dir).unwrap().map(|e| e.unwrap().path()).collect();
    v.sort();
    v
}

fn guideline_of(dir: &str) -> Option<String> {
    let rest = dir.strip_prefix('r')?;
    Some(format!("R{}", rest.replace('_', ".")))
}

pub fn checkers() -> Vec<Checker> {
    let mut out = Vec::new();
    for d in sorted_entries(&corpus_root()) {
        if !d.is_dir() {
            continue;
        }
        let dir = rel(&d);
        let mut programs = Vec::new();
        for e in sorted_entries(&d) {
            if e.is_dir() {
                let files = sorted_entries(&e);
                let pick = |n: &str| files.iter().find(|f| f.file_name().unwrap() == n).map(|f| rel(f));
                programs.push(Program {
                    name: rel(&e),
                    sources: files
                        .iter()
                        .filter(|f| f.extension().is_some_and(|x| x == "c"))
                        .map(|f| rel(f))
                        .collect(),
                    include: Some(rel(&e)),
                    external: pick("findings.txt"),
                    deviations: pick("deviations.txt"),
                    grp: pick("grp.txt"),
                });
            } else if e.extension().is_some_and(|x| x == "c") {
                programs.push(Program {
                    name: rel(&e),
                    sources: vec![rel(&e)],
                    include: None,
                    external: None,
                    deviations: None,
                    grp: None,
                });
            }
        }
        out.push(Checker {
            guideline: guideline_of(&dir),
            dir,
            programs,
        });
    }
    out
}

/// Every corpus file, keyed by its corpus-relative path.
pub fn corpus_files() -> MemoryFiles {
    fn walk(dir: &Path, m: &mut MemoryFiles) {
        for e in sorted_entries(dir) {
            if e.is_dir() {
                walk(&e, m);
            } else if e.file_name().unwrap() != "expected.txt" {
                m.insert(rel(&e), std::fs::read_to_string(&e).unwrap());
            }
        }
    }
    let mut m = MemoryFiles::new();
    walk(&corpus_root(), &mut m);
    m
}

pub fn config_for(checker: &Checker, p: &Program) -> RunConfig {
    let mut c = RunConfig::new(p.sources.iter().map(PathBuf::from).collect());
    c.system_mode = true;
    if let Some(g) = &checker.guideline {
        c.rules = g.parse().unwrap();
    }
    c.include_paths = p.include.iter().map(PathBuf::from).collect();
    c.external_findings_path = p.external.as_ref().map(PathBuf::from);
    c.deviations_path = p.deviations.as_ref().map(PathBuf::from);
    c.grp_path = p.grp.as_ref().map(PathBuf::from);
    c.timestamp = Some("1970-01-01T00:00:00Z".into());
    c
}

pub fn run_program(files: &MemoryFiles, checker: &Checker, p: &Program) -> Outcome {
    analyze(&config_for(checker, p), files).unwrap_or_else(|e| panic!("{}: {e}", p.name))
}

/// Golden lines for one outcome.
pub fn golden_lines(o: &Outcome) -> Vec<String> {
    let mut v: Vec<String> = o
        .findings
        .iter()
        .map(|a| {
            let f = &a.finding;
            format!("{}: {} {}: {}", f.location, f.certainty, f.guideline, f.message)
        })
        .collect();
    v.extend(
        o.errors
            .iter()
            .map(|e| format!("{}:{}:{}: error: {}", e.path, e.line, e.column, e.message)),
    );
    v
}

/// Expected lines per checker directory, from `<dir>/expected.txt`.
pub fn expected(checker: &Checker) -> Vec<String> {
    let path = corpus_root().join(&checker.dir).join("expected.txt");
    std::fs::read_to_string(path)
        .unwrap_or_default()
        .lines()
        .filter(|l| !l.trim().is_empty() && !l.starts_with('#'))
        .map(String::from)
        .collect()
}

pub struct CorpusResult {
    pub checker: String,
    pub programs: usize,
    pub violating: usize,
    pub compliant: usize,
    pub mismatches: Vec<String>,
}

/// Runs every checker directory against its goldens. With
/// `MISRACHECK_BLESS=1` the goldens are rewritten instead.
pub fn run_corpus() -> Vec<CorpusResult> {
    let files = corpus_files();
    let bless = std::env::var_os("MISRACHECK_BLESS").is_some_and(|v| v == "1");
    let mut out = Vec::new();
    for ch in checkers() {
        let mut actual = Vec::new();
        let mut per_program: BTreeMap<String, usize> = BTreeMap::new();
        for p in &ch.programs {
            let lines = golden_lines(&run_program(&files, &ch, p));
            per_program.insert(p.name.clone(), lines.len());
            actual.extend(lines);
        }
        if bless {
            let mut text = actual.join("\n");
            text.push('\n');
            std::fs::write(corpus_root().join(&ch.dir).join("expected.txt"), text).unwrap();
        }
        let want = expected(&ch);
        let mut mismatches = Vec::new();
        for l in &actual {
            if !want.contains(l) {
                mismatches.push(format!("unexpected: {l}"));
            }
        }
        for l in &want {
            if !actual.contains(l) {
                mismatches.push(format!("missing: {l}"));
            }
        }
        out.push(CorpusResult {
            checker: ch.dir.clone(),
            programs: ch.programs.len(),
            violating: per_program.values().filter(|n| **n > 0).count(),
            compliant: per_program.values().filter(|n| **n == 0).count(),
            mismatches,
        });
    }
    out
}
