//! Guideline registry, the rule checkers and the don't-know policy.

mod checks;
mod effects;
mod registry;

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::str::FromStr;

use serde::Serialize;
use thiserror::Error;

use crate::flow::{CallGraph, FunctionFacts};
use crate::parser::Span;
use crate::sema::{BehaviorClass, Program, TypedTu};
use crate::source::{Loc, SourceSet};

pub use registry::{registry, Category, Decidability, GuidelineKind, GuidelineMeta, Registry, Scope, IMPLEMENTED};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Certainty {
    Definite,
    Caution,
}

impl fmt::Display for Certainty {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Certainty::Definite => "definite",
            Certainty::Caution => "caution",
        })
    }
}

/// A position named by path, as findings outlive the source set that
/// produced them.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub struct Location {
    pub path: String,
    pub line: u32,
    pub col: u32,
}

impl fmt::Display for Location {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}:{}", self.path, self.line, self.col)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize)]
pub struct Evidence {
    pub location: Option<Location>,
    pub note: String,
}

/// One macro expansion a finding site came out of, outermost first.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize)]
pub struct ExpansionStep {
    pub macro_name: String,
    pub site: Location,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Provenance {
    Analysis,
    External,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize)]
pub struct Finding {
    pub guideline: String,
    pub location: Location,
    pub certainty: Certainty,
    pub behavior_class: Option<BehaviorClass>,
    pub message: String,
    pub evidence: Vec<Evidence>,
    pub expansion: Vec<ExpansionStep>,
    pub provenance: Provenance,
}

impl Finding {
    /// Sort key: path, line, column, then guideline in document order.
    pub fn sort_key(&self) -> (&str, u32, u32, GuidelineOrder, &str) {
        (
            &self.location.path,
            self.location.line,
            self.location.col,
            GuidelineOrder::of(&self.guideline),
            &self.message,
        )
    }
}

/// Orders guideline ids as the document does: directives first, then by
/// numeric section and item.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
pub struct GuidelineOrder(u8, u32, u32, String);

impl GuidelineOrder {
    pub fn of(id: &str) -> Self {
        let kind = match id.as_bytes().first() {
            Some(b'D') => 0,
            Some(b'R') => 1,
            _ => 2,
        };
        let mut nums = id
            .get(1..)
            .unwrap_or("")
            .split('.')
            .map(|p| p.parse::<u32>().unwrap_or(u32::MAX));
        let major = nums.next().unwrap_or(u32::MAX);
        let minor = nums.next().unwrap_or(u32::MAX);
        GuidelineOrder(kind, major, minor, id.to_string())
    }
}

pub fn sort_findings(findings: &mut [Finding]) {
    findings.sort_by(|a, b| a.sort_key().cmp(&b.sort_key()));
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum PolicyMode {
    Suppress,
    AsViolation,
    Mixed,
    Caution,
}

impl FromStr for PolicyMode {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "suppress" => Ok(PolicyMode::Suppress),
            "violation" | "as-violation" => Ok(PolicyMode::AsViolation),
            "mixed" => Ok(PolicyMode::Mixed),
            "caution" => Ok(PolicyMode::Caution),
            _ => Err(format!(
                "unknown policy `{s}` (expected suppress, violation, mixed or caution)"
            )),
        }
    }
}

impl fmt::Display for PolicyMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            PolicyMode::Suppress => "suppress",
            PolicyMode::AsViolation => "violation",
            PolicyMode::Mixed => "mixed",
            PolicyMode::Caution => "caution",
        })
    }
}

/// What mixed mode does with one guideline's caution findings.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum MixedChoice {
    Suppress,
    AsViolation,
}

impl FromStr for MixedChoice {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "suppress" => Ok(MixedChoice::Suppress),
            "violation" | "as-violation" => Ok(MixedChoice::AsViolation),
            _ => Err(format!(
                "unknown mixed-policy choice `{s}` (expected suppress or violation)"
            )),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct DontKnowPolicy {
    pub mode: PolicyMode,
    /// Per-guideline choices, used by mixed mode only.
    pub mixed: BTreeMap<String, MixedChoice>,
}

impl DontKnowPolicy {
    pub fn new(mode: PolicyMode) -> Self {
        DontKnowPolicy {
            mode,
            mixed: BTreeMap::new(),
        }
    }
}

impl Default for DontKnowPolicy {
    fn default() -> Self {
        DontKnowPolicy::new(PolicyMode::Caution)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum RuleError {
    #[error("unknown guideline(s): {}", .0.join(", "))]
    UnknownGuideline(Vec<String>),
    #[error("no checker for guideline(s): {}", .0.join(", "))]
    NotImplemented(Vec<String>),
    #[error("system-scope guideline(s) need whole-program analysis: {}", .0.join(", "))]
    NeedsSystem(Vec<String>),
    #[error("mixed policy has no choice for guideline(s): {}", .0.join(", "))]
    IncompleteMixedMap(Vec<String>),
}

fn relabel(mut f: Finding) -> Finding {
    f.certainty = Certainty::Definite;
    f.evidence.push(Evidence {
        location: None,
        note: "analysis could not decide; reported as a violation by policy".to_string(),
    });
    f
}

/// Trades off caution findings according to the policy. Definite findings
/// pass through untouched under every mode.
pub fn apply_dont_know_policy(findings: Vec<Finding>, policy: &DontKnowPolicy) -> Result<Vec<Finding>, RuleError> {
    match policy.mode {
        PolicyMode::Caution => Ok(findings),
        PolicyMode::Suppress => Ok(findings
            .into_iter()
            .filter(|f| f.certainty == Certainty::Definite)
            .collect()),
        PolicyMode::AsViolation => Ok(findings
            .into_iter()
            .map(|f| {
                if f.certainty == Certainty::Caution {
                    relabel(f)
                } else {
                    f
                }
            })
            .collect()),
        PolicyMode::Mixed => {
            let missing: BTreeSet<String> = findings
                .iter()
                .filter(|f| f.certainty == Certainty::Caution && !policy.mixed.contains_key(&f.guideline))
                .map(|f| f.guideline.clone())
                .collect();
            if !missing.is_empty() {
                return Err(RuleError::IncompleteMixedMap(missing.into_iter().collect()));
            }
            Ok(findings
                .into_iter()
                .filter_map(|f| {
                    if f.certainty == Certainty::Definite {
                        return Some(f);
                    }
                    match policy.mixed[&f.guideline] {
                        MixedChoice::Suppress => None,
                        MixedChoice::AsViolation => Some(relabel(f)),
                    }
                })
                .collect())
        }
    }
}

/// Facts for one translation unit.
pub struct UnitFacts<'a> {
    pub tu: &'a TypedTu,
    pub functions: Vec<FunctionFacts<'a>>,
}

/// Whole-program facts, present in system mode.
pub struct SystemFacts<'a> {
    pub program: &'a Program,
    pub call_graph: &'a CallGraph,
}

pub struct RuleInput<'a> {
    pub sources: &'a SourceSet,
    pub units: &'a [UnitFacts<'a>],
    pub system: Option<SystemFacts<'a>>,
}

/// Guideline set validation shared by the driver and `run_rules`.
pub fn validate_enabled(enabled: &BTreeSet<String>, system: bool) -> Result<(), RuleError> {
    let reg = registry();
    let unknown: Vec<String> = enabled.iter().filter(|g| !reg.contains(g)).cloned().collect();
    if !unknown.is_empty() {
        return Err(RuleError::UnknownGuideline(unknown));
    }
    let missing: Vec<String> = enabled
        .iter()
        .filter(|g| !reg.get(g).is_some_and(|m| m.implemented))
        .cloned()
        .collect();
    if !missing.is_empty() {
        return Err(RuleError::NotImplemented(missing));
    }
    if !system {
        let sys: Vec<String> = enabled
            .iter()
            .filter(|g| reg.get(g).is_some_and(|m| m.scope == Scope::System))
            .cloned()
            .collect();
        if !sys.is_empty() {
            return Err(RuleError::NeedsSystem(sys));
        }
    }
    Ok(())
}

/// A finding before its positions are named.
#[derive(Debug, Clone)]
pub(crate) struct Raw {
    pub guideline: &'static str,
    pub span: Span,
    pub certainty: Certainty,
    pub behavior_class: Option<BehaviorClass>,
    pub message: String,
    pub evidence: Vec<(Option<Span>, String)>,
}

impl Raw {
    pub fn new(guideline: &'static str, span: &Span, certainty: Certainty, message: impl Into<String>) -> Self {
        Raw {
            guideline,
            span: span.clone(),
            certainty,
            behavior_class: None,
            message: message.into(),
            evidence: Vec::new(),
        }
    }

    pub fn behavior(mut self, b: BehaviorClass) -> Self {
        self.behavior_class = Some(b);
        self
    }

    pub fn note(mut self, span: Option<&Span>, note: impl Into<String>) -> Self {
        self.evidence.push((span.cloned(), note.into()));
        self
    }
}

fn locate(sources: &SourceSet, loc: Loc) -> Location {
    Location {
        path: sources
            .try_get(loc.file)
            .map_or_else(|| format!("<file {}>", loc.file.0), |f| f.path.clone()),
        line: loc.line,
        col: loc.col,
    }
}

fn finish(sources: &SourceSet, raw: Raw) -> Finding {
    let mut evidence: Vec<Evidence> = raw
        .evidence
        .into_iter()
        .map(|(s, note)| Evidence {
            location: s.map(|s| locate(sources, s.start)),
            note,
        })
        .collect();
    let expansion: Vec<ExpansionStep> = raw
        .span
        .expansion
        .iter()
        .map(|fr| ExpansionStep {
            macro_name: fr.macro_name.clone(),
            site: locate(sources, fr.site),
        })
        .collect();
    let spelled = locate(sources, raw.span.start);
    for step in &expansion {
        evidence.push(Evidence {
            location: Some(step.site.clone()),
            note: format!("in expansion of `{}` at {}", step.macro_name, step.site),
        });
    }
    if !expansion.is_empty() {
        evidence.push(Evidence {
            location: Some(spelled.clone()),
            note: format!("code spelled in the macro body at {spelled}"),
        });
    }
    // a reviewer has to find the code, so macro output is reported where
    // the outermost macro was invoked
    let location = expansion.first().map_or(spelled, |s| s.site.clone());
    Finding {
        guideline: raw.guideline.to_string(),
        location,
        certainty: raw.certainty,
        behavior_class: raw.behavior_class,
        message: raw.message,
        evidence,
        expansion,
        provenance: Provenance::Analysis,
    }
}

type FunctionCheck = fn(&FunctionFacts) -> Vec<Raw>;

/// Runs every enabled checker and returns the findings in report order.
pub fn run_rules(input: &RuleInput, enabled: &BTreeSet<String>) -> Result<Vec<Finding>, RuleError> {
    validate_enabled(enabled, input.system.is_some())?;
    let on = |id: &str| enabled.contains(id);
    let mut raw = Vec::new();
    for unit in input.units {
        let tu = unit.tu;
        if on("R11.4") {
            raw.extend(checks::check_r11_4(tu));
        }
        if on("R12.2") {
            raw.extend(checks::check_r12_2_file_scope(tu));
        }
        for f in &unit.functions {
            let table: [(&str, FunctionCheck); 12] = [
                ("R1.3", checks::check_r1_3),
                ("R2.1", checks::check_r2_1),
                ("R2.2", checks::check_r2_2),
                ("R8.13", checks::check_r8_13),
                ("R9.1", checks::check_r9_1),
                ("R12.2", checks::check_r12_2),
                ("R13.1", checks::check_r13_1),
                ("R13.2", checks::check_r13_2),
                ("R13.5", checks::check_r13_5),
                ("R14.1", checks::check_r14_1),
                ("R14.2", checks::check_r14_2),
                ("R14.3", checks::check_r14_3),
            ];
            for (id, check) in table {
                if on(id) {
                    raw.extend(check(f));
                }
            }
        }
    }
    if on("R17.2") {
        if let Some(sys) = &input.system {
            raw.extend(checks::check_r17_2(sys.program, sys.call_graph));
        }
    }
    let mut out: Vec<Finding> = raw.into_iter().map(|r| finish(input.sources, r)).collect();
    sort_findings(&mut out);
    out.dedup();
    Ok(out)
}
