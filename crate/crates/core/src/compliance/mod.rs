//! Compliance accounting: recategorization plans, deviations, imported
//! findings for directives and the project verdict.

mod records;

use std::collections::BTreeMap;
use std::fmt;
use std::path::Path;
use std::str::FromStr;

use chrono::NaiveDate;
use glob::{MatchOptions, Pattern};
use serde::Serialize;
use thiserror::Error;

use crate::rules::{Category, Certainty, Evidence, Finding, Location, Provenance, Registry};

pub use records::{parse_deviations, parse_external_findings, parse_recategorization_plan};

/// A guideline's category after the recategorization plan.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum EffectiveCategory {
    Disapplied,
    Advisory,
    Required,
    Mandatory,
}

impl From<Category> for EffectiveCategory {
    fn from(c: Category) -> Self {
        match c {
            Category::Advisory => EffectiveCategory::Advisory,
            Category::Required => EffectiveCategory::Required,
            Category::Mandatory => EffectiveCategory::Mandatory,
        }
    }
}

impl EffectiveCategory {
    /// Legal recategorizations: advisory may be strengthened or disapplied,
    /// required may become mandatory, mandatory never changes.
    pub fn may_become(self, to: EffectiveCategory) -> bool {
        use EffectiveCategory::*;
        matches!(
            (self, to),
            (Advisory, Required | Mandatory | Disapplied) | (Required, Mandatory)
        ) || self == to
    }
}

impl fmt::Display for EffectiveCategory {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            EffectiveCategory::Disapplied => "disapplied",
            EffectiveCategory::Advisory => "advisory",
            EffectiveCategory::Required => "required",
            EffectiveCategory::Mandatory => "mandatory",
        })
    }
}

impl FromStr for EffectiveCategory {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "disapplied" => Ok(EffectiveCategory::Disapplied),
            "advisory" => Ok(EffectiveCategory::Advisory),
            "required" => Ok(EffectiveCategory::Required),
            "mandatory" => Ok(EffectiveCategory::Mandatory),
            _ => Err(format!(
                "unknown category `{s}` (expected mandatory, required, advisory or disapplied)"
            )),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct RecategorizationEntry {
    pub guideline: String,
    pub new_category: EffectiveCategory,
    pub rationale: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DeviationRecord {
    pub id: String,
    pub guideline: String,
    pub file_pattern: Pattern,
    /// Inclusive line range.
    pub line_range: Option<(u32, u32)>,
    pub rationale: String,
    pub approver: String,
    pub date: NaiveDate,
}

impl DeviationRecord {
    pub fn matches(&self, f: &Finding) -> bool {
        let opts = MatchOptions {
            require_literal_separator: true,
            ..MatchOptions::new()
        };
        self.guideline == f.guideline
            && self.file_pattern.matches_with(&f.location.path, opts)
            && self.line_range.is_none_or(|(a, b)| (a..=b).contains(&f.location.line))
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ExternalFinding {
    pub guideline: String,
    pub path: String,
    pub line: u32,
    pub message: String,
    pub certainty: Certainty,
    /// Line of the record in the imported file.
    pub record_line: usize,
}

impl ExternalFinding {
    pub fn to_finding(&self, source: &str) -> Finding {
        Finding {
            guideline: self.guideline.clone(),
            location: Location {
                path: self.path.clone(),
                line: self.line,
                col: 1,
            },
            certainty: self.certainty,
            behavior_class: None,
            message: self.message.clone(),
            evidence: vec![Evidence {
                location: None,
                note: format!("imported from {source}:{}", self.record_line),
            }],
            expansion: Vec::new(),
            provenance: Provenance::External,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ComplianceError {
    #[error("line {line}: {message}")]
    Syntax { line: usize, message: String },
    #[error("line {line}: unknown guideline `{id}`")]
    UnknownGuideline { line: usize, id: String },
    #[error("line {line}: {id} cannot be recategorized from {from} to {to}")]
    IllegalTransition {
        line: usize,
        id: String,
        from: EffectiveCategory,
        to: EffectiveCategory,
    },
    #[error("line {line}: disapplying {id} needs a rationale")]
    MissingRationale { line: usize, id: String },
    #[error("line {line}: deviation {id}: {guideline} is mandatory; deviation is not permitted")]
    DeviationNotPermitted { line: usize, id: String, guideline: String },
    #[error("line {line}: duplicate {what}")]
    Duplicate { line: usize, what: String },
    #[error("{path}: {message}")]
    Io { path: String, message: String },
    #[error("{path}: {source}")]
    InFile {
        path: String,
        #[source]
        source: Box<ComplianceError>,
    },
}

fn read(path: &Path) -> Result<String, ComplianceError> {
    std::fs::read_to_string(path).map_err(|e| ComplianceError::Io {
        path: path.display().to_string(),
        message: e.to_string(),
    })
}

fn in_file<T>(path: &Path, r: Result<T, ComplianceError>) -> Result<T, ComplianceError> {
    r.map_err(|e| ComplianceError::InFile {
        path: path.display().to_string(),
        source: Box::new(e),
    })
}

pub fn load_recategorization_plan(path: &Path) -> Result<Vec<RecategorizationEntry>, ComplianceError> {
    in_file(path, parse_recategorization_plan(&read(path)?))
}

pub fn load_deviations(
    path: &Path,
    effective: &BTreeMap<String, EffectiveCategory>,
) -> Result<Vec<DeviationRecord>, ComplianceError> {
    in_file(path, parse_deviations(&read(path)?, effective))
}

pub fn import_external_findings(path: &Path) -> Result<Vec<ExternalFinding>, ComplianceError> {
    in_file(path, parse_external_findings(&read(path)?))
}

/// Registry categories with the plan's entries applied.
pub fn effective_categories(
    registry: &Registry,
    plan: &[RecategorizationEntry],
) -> BTreeMap<String, EffectiveCategory> {
    let mut out: BTreeMap<String, EffectiveCategory> =
        registry.iter().map(|g| (g.id.to_string(), g.category.into())).collect();
    for e in plan {
        out.insert(e.guideline.clone(), e.new_category);
    }
    out
}

/// A finding with its effective category and the deviation covering it.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct AnnotatedFinding {
    #[serde(flatten)]
    pub finding: Finding,
    pub category: EffectiveCategory,
    pub deviation: Option<String>,
}

impl AnnotatedFinding {
    pub fn deviated(&self) -> bool {
        self.deviation.is_some()
    }
}

/// Attaches categories and deviations. The first matching record in file
/// order is cited; mandatory findings are never deviated.
pub fn match_deviations(
    findings: Vec<Finding>,
    deviations: &[DeviationRecord],
    effective: &BTreeMap<String, EffectiveCategory>,
) -> Vec<AnnotatedFinding> {
    findings
        .into_iter()
        .map(|finding| {
            // ids outside the registry are rejected earlier; treat them as
            // strictly as possible if one slips through
            let category = effective
                .get(&finding.guideline)
                .copied()
                .unwrap_or(EffectiveCategory::Mandatory);
            let deviation = if category == EffectiveCategory::Mandatory {
                None
            } else {
                deviations.iter().find(|d| d.matches(&finding)).map(|d| d.id.clone())
            };
            AnnotatedFinding {
                finding,
                category,
                deviation,
            }
        })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Verdict {
    Compliant,
    CompliantWithRemarks,
    NonCompliant,
}

impl fmt::Display for Verdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Verdict::Compliant => "compliant",
            Verdict::CompliantWithRemarks => "compliant-with-remarks",
            Verdict::NonCompliant => "non-compliant",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct GuidelineTally {
    pub guideline: String,
    pub category: EffectiveCategory,
    pub definite: usize,
    pub caution: usize,
    pub deviated: usize,
    pub undocumented: usize,
    /// Findings dropped because the guideline is disapplied.
    pub suppressed: usize,
}

impl GuidelineTally {
    pub fn total(&self) -> usize {
        self.definite + self.caution
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ComplianceReport {
    pub verdict: Verdict,
    /// One entry per guideline with at least one finding, in guideline order.
    pub tallies: Vec<GuidelineTally>,
    pub remarks: Vec<String>,
}

impl ComplianceReport {
    pub fn total_findings(&self) -> usize {
        self.tallies.iter().map(GuidelineTally::total).sum()
    }
}

/// The verdict over annotated findings. Findings of disapplied guidelines
/// are counted as suppressed and noted in the remarks.
pub fn compute_verdict(findings: &[AnnotatedFinding]) -> ComplianceReport {
    let mut tallies: BTreeMap<crate::rules::GuidelineOrder, GuidelineTally> = BTreeMap::new();
    let mut verdict = Verdict::Compliant;
    let mut remarks = Vec::new();
    for a in findings {
        let f = &a.finding;
        let t = tallies
            .entry(crate::rules::GuidelineOrder::of(&f.guideline))
            .or_insert_with(|| GuidelineTally {
                guideline: f.guideline.clone(),
                category: a.category,
                definite: 0,
                caution: 0,
                deviated: 0,
                undocumented: 0,
                suppressed: 0,
            });
        match f.certainty {
            Certainty::Definite => t.definite += 1,
            Certainty::Caution => t.caution += 1,
        }
        if a.category == EffectiveCategory::Disapplied {
            t.suppressed += 1;
            continue;
        }
        if a.deviated() {
            t.deviated += 1;
        } else {
            t.undocumented += 1;
        }
        let v = match a.category {
            EffectiveCategory::Mandatory => Verdict::NonCompliant,
            EffectiveCategory::Required if !a.deviated() => Verdict::NonCompliant,
            EffectiveCategory::Advisory if !a.deviated() => {
                remarks.push(format!(
                    "advisory {} at {} is not documented by a deviation",
                    f.guideline, f.location
                ));
                Verdict::CompliantWithRemarks
            }
            _ => Verdict::Compliant,
        };
        verdict = verdict.max(v);
    }
    for t in tallies.values() {
        if t.suppressed > 0 {
            let s = if t.suppressed == 1 { "" } else { "s" };
            remarks.push(format!(
                "{} is disapplied; {} finding{s} suppressed",
                t.guideline, t.suppressed
            ));
        }
    }
    ComplianceReport {
        verdict,
        tallies: tallies.into_values().collect(),
        remarks,
    }
}
