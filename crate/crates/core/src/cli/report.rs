//! Text and structured (JSON) reports.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use serde::Serialize;

use super::{AnalysisError, Outcome, RunConfig};
use crate::compliance::{ComplianceReport, EffectiveCategory};
use crate::rules::{Certainty, Evidence, ExpansionStep, MixedChoice, PolicyMode, Provenance};
use crate::sema::IntegerModel;

pub const SCHEMA_VERSION: &str = "1.0";

pub fn render_text(o: &Outcome) -> String {
    let mut s = String::new();
    for a in &o.findings {
        let f = &a.finding;
        let _ = writeln!(
            s,
            "{}: {} {} [{}]: {}",
            f.location, f.certainty, f.guideline, a.category, f.message
        );
        for m in &f.expansion {
            let _ = writeln!(s, "    in expansion of `{}` at {}", m.macro_name, m.site);
        }
        for e in &f.evidence {
            match &e.location {
                Some(l) => {
                    let _ = writeln!(s, "    note: {l}: {}", e.note);
                }
                None => {
                    let _ = writeln!(s, "    note: {}", e.note);
                }
            }
        }
        if let Some(b) = f.behavior_class {
            let _ = writeln!(s, "    behavior: {b}");
        }
        if let Some(d) = &a.deviation {
            let _ = writeln!(s, "    deviated by {d}");
        }
        if f.provenance == Provenance::External {
            let _ = writeln!(s, "    provenance: external");
        }
    }
    let c = &o.compliance;
    if !o.findings.is_empty() {
        s.push('\n');
    }
    let _ = writeln!(s, "verdict: {}", c.verdict);
    let _ = writeln!(s, "findings: {}", c.total_findings());
    for t in &c.tallies {
        let _ = writeln!(
            s,
            "  {} [{}]: {} definite, {} caution, {} deviated, {} undocumented{}",
            t.guideline,
            t.category,
            t.definite,
            t.caution,
            t.deviated,
            t.undocumented,
            if t.suppressed > 0 {
                format!(", {} suppressed", t.suppressed)
            } else {
                String::new()
            }
        );
    }
    for r in &c.remarks {
        let _ = writeln!(s, "remark: {r}");
    }
    for e in &o.errors {
        let _ = writeln!(
            s,
            "error: {}:{}:{} ({}): {}",
            e.path, e.line, e.column, e.stage, e.message
        );
    }
    s
}

#[derive(Serialize)]
struct Tool {
    name: &'static str,
    version: &'static str,
}

#[derive(Serialize)]
struct PolicyEcho<'a> {
    mode: PolicyMode,
    mixed: &'a BTreeMap<String, MixedChoice>,
}

#[derive(Serialize)]
struct ConfigEcho<'a> {
    sources: Vec<String>,
    include_paths: Vec<String>,
    defines: Vec<String>,
    integer_model: &'a IntegerModel,
    rules: String,
    enabled: Vec<&'a str>,
    policy: PolicyEcho<'a>,
    grp: Option<String>,
    deviations: Option<String>,
    external_findings: Option<String>,
    system: bool,
}

#[derive(Serialize)]
struct FindingOut<'a> {
    guideline: &'a str,
    category: EffectiveCategory,
    certainty: Certainty,
    behavior_class: Option<String>,
    path: &'a str,
    line: u32,
    column: u32,
    message: &'a str,
    evidence: &'a [Evidence],
    expansion: &'a [ExpansionStep],
    deviated: bool,
    deviation: Option<&'a str>,
    provenance: Provenance,
}

#[derive(Serialize)]
struct Report<'a> {
    schema_version: &'static str,
    tool: Tool,
    timestamp: &'a str,
    config: ConfigEcho<'a>,
    findings: Vec<FindingOut<'a>>,
    errors: &'a [AnalysisError],
    compliance: &'a ComplianceReport,
    exit_code: i32,
}

fn path_string(p: &std::path::Path) -> String {
    p.display().to_string()
}

/// The JSON report. Apart from `timestamp` it is a pure function of the
/// configuration and the inputs.
pub fn render_structured(o: &Outcome, config: &RunConfig, timestamp: &str) -> String {
    let report = Report {
        schema_version: SCHEMA_VERSION,
        tool: Tool {
            name: "misracheck",
            version: env!("CARGO_PKG_VERSION"),
        },
        timestamp,
        config: ConfigEcho {
            sources: config.sources.iter().map(|p| path_string(p)).collect(),
            include_paths: config.include_paths.iter().map(|p| path_string(p)).collect(),
            defines: config
                .defines
                .iter()
                .map(|(n, b)| match b {
                    Some(b) => format!("{n}={b}"),
                    None => n.clone(),
                })
                .collect(),
            integer_model: &config.integer_model,
            rules: config.rules.to_string(),
            enabled: o.enabled.iter().map(String::as_str).collect(),
            policy: PolicyEcho {
                mode: config.policy.mode,
                mixed: &config.policy.mixed,
            },
            grp: config.grp_path.as_deref().map(path_string),
            deviations: config.deviations_path.as_deref().map(path_string),
            external_findings: config.external_findings_path.as_deref().map(path_string),
            system: config.system_mode,
        },
        findings: o
            .findings
            .iter()
            .map(|a| {
                let f = &a.finding;
                FindingOut {
                    guideline: &f.guideline,
                    category: a.category,
                    certainty: f.certainty,
                    behavior_class: f.behavior_class.map(|b| b.to_string()),
                    path: &f.location.path,
                    line: f.location.line,
                    column: f.location.col,
                    message: &f.message,
                    evidence: &f.evidence,
                    expansion: &f.expansion,
                    deviated: a.deviated(),
                    deviation: a.deviation.as_deref(),
                    provenance: f.provenance,
                }
            })
            .collect(),
        errors: &o.errors,
        compliance: &o.compliance,
        exit_code: o.exit_code(),
    };
    let mut s = serde_json::to_string_pretty(&report).expect("report serializes");
    s.push('\n');
    s
}
