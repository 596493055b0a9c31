//! Line-oriented formats for recategorization plans, deviation records and
//! external findings.

use std::collections::{BTreeMap, BTreeSet};

use chrono::NaiveDate;
use glob::Pattern;

use super::{ComplianceError, DeviationRecord, EffectiveCategory, ExternalFinding, RecategorizationEntry};
use crate::rules::{registry, Certainty};

/// Splits a record into words, honoring double-quoted values.
fn words(line: usize, text: &str) -> Result<Vec<String>, ComplianceError> {
    shlex::split(text).ok_or_else(|| ComplianceError::Syntax {
        line,
        message: "unbalanced quotes".into(),
    })
}

/// Meaningful lines with their 1-based numbers; `#` starts a comment
/// outside quotes.
fn lines(text: &str) -> impl Iterator<Item = (usize, &str)> {
    text.lines().enumerate().filter_map(|(i, l)| {
        let mut quoted = false;
        let mut end = l.len();
        for (j, c) in l.char_indices() {
            match c {
                '"' => quoted = !quoted,
                '#' if !quoted => {
                    end = j;
                    break;
                }
                _ => {}
            }
        }
        let l = l[..end].trim();
        (!l.is_empty()).then_some((i + 1, l))
    })
}

/// `key=value` fields after the leading words of a record.
fn fields(line: usize, words: &[String], allowed: &[&str]) -> Result<BTreeMap<String, String>, ComplianceError> {
    let mut out = BTreeMap::new();
    for w in words {
        let Some((k, v)) = w.split_once('=') else {
            return Err(ComplianceError::Syntax {
                line,
                message: format!("expected key=value, found `{w}`"),
            });
        };
        if !allowed.contains(&k) {
            return Err(ComplianceError::Syntax {
                line,
                message: format!("unknown field `{k}`"),
            });
        }
        if out.insert(k.to_string(), v.to_string()).is_some() {
            return Err(ComplianceError::Syntax {
                line,
                message: format!("field `{k}` given twice"),
            });
        }
    }
    Ok(out)
}

fn required(line: usize, f: &mut BTreeMap<String, String>, key: &str) -> Result<String, ComplianceError> {
    f.remove(key).ok_or_else(|| ComplianceError::Syntax {
        line,
        message: format!("missing field `{key}`"),
    })
}

fn non_empty(line: usize, key: &str, v: String) -> Result<String, ComplianceError> {
    if v.trim().is_empty() {
        Err(ComplianceError::Syntax {
            line,
            message: format!("field `{key}` is empty"),
        })
    } else {
        Ok(v)
    }
}

fn known(line: usize, id: &str) -> Result<(), ComplianceError> {
    if registry().contains(id) {
        Ok(())
    } else {
        Err(ComplianceError::UnknownGuideline {
            line,
            id: id.to_string(),
        })
    }
}

/// Parses and validates a guideline recategorization plan.
pub fn parse_recategorization_plan(text: &str) -> Result<Vec<RecategorizationEntry>, ComplianceError> {
    let mut out = Vec::new();
    let mut seen = BTreeSet::new();
    for (line, l) in lines(text) {
        let Some((id, rest)) = l.split_once('=') else {
            return Err(ComplianceError::Syntax {
                line,
                message: "expected `<guideline> = <category>`".into(),
            });
        };
        let id = id.trim();
        let ws = words(line, rest)?;
        let Some((cat, tail)) = ws.split_first() else {
            return Err(ComplianceError::Syntax {
                line,
                message: "missing category".into(),
            });
        };
        let new_category: EffectiveCategory = cat
            .parse()
            .map_err(|message| ComplianceError::Syntax { line, message })?;
        let mut f = fields(line, tail, &["rationale"])?;
        let rationale = f.remove("rationale").filter(|r| !r.trim().is_empty());
        known(line, id)?;
        let from = registry().get(id).expect("known guideline").category;
        if !EffectiveCategory::from(from).may_become(new_category) {
            return Err(ComplianceError::IllegalTransition {
                line,
                id: id.to_string(),
                from: from.into(),
                to: new_category,
            });
        }
        if new_category == EffectiveCategory::Disapplied && rationale.is_none() {
            return Err(ComplianceError::MissingRationale {
                line,
                id: id.to_string(),
            });
        }
        if !seen.insert(id.to_string()) {
            return Err(ComplianceError::Duplicate {
                line,
                what: format!("recategorization of {id}"),
            });
        }
        out.push(RecategorizationEntry {
            guideline: id.to_string(),
            new_category,
            rationale,
        });
    }
    Ok(out)
}

fn parse_lines_field(line: usize, v: &str) -> Result<(u32, u32), ComplianceError> {
    let bad = || ComplianceError::Syntax {
        line,
        message: format!("malformed line range `{v}` (expected <a>-<b>)"),
    };
    let (a, b) = v.split_once('-').ok_or_else(bad)?;
    let (a, b): (u32, u32) = (a.parse().map_err(|_| bad())?, b.parse().map_err(|_| bad())?);
    if a == 0 || a > b {
        return Err(bad());
    }
    Ok((a, b))
}

/// Parses deviation records and checks them against the effective
/// categories: a mandatory guideline admits no deviation.
pub fn parse_deviations(
    text: &str,
    effective: &BTreeMap<String, EffectiveCategory>,
) -> Result<Vec<DeviationRecord>, ComplianceError> {
    let mut out = Vec::new();
    let mut ids = BTreeSet::new();
    for (line, l) in lines(text) {
        let ws = words(line, l)?;
        let (Some("deviation"), Some(id)) = (ws.first().map(String::as_str), ws.get(1)) else {
            return Err(ComplianceError::Syntax {
                line,
                message: "expected `deviation <id> ...`".into(),
            });
        };
        if id.contains('=') {
            return Err(ComplianceError::Syntax {
                line,
                message: "missing deviation id".into(),
            });
        }
        let mut f = fields(
            line,
            &ws[2..],
            &["guideline", "files", "lines", "approver", "date", "rationale"],
        )?;
        let guideline = required(line, &mut f, "guideline")?;
        let files = required(line, &mut f, "files")?;
        let approver = non_empty(line, "approver", required(line, &mut f, "approver")?)?;
        let date = required(line, &mut f, "date")?;
        let rationale = non_empty(line, "rationale", required(line, &mut f, "rationale")?)?;
        let line_range = f.remove("lines").map(|v| parse_lines_field(line, &v)).transpose()?;
        let date = NaiveDate::parse_from_str(&date, "%Y-%m-%d").map_err(|_| ComplianceError::Syntax {
            line,
            message: format!("malformed date `{date}` (expected YYYY-MM-DD)"),
        })?;
        let file_pattern = Pattern::new(&files).map_err(|e| ComplianceError::Syntax {
            line,
            message: format!("malformed file pattern `{files}`: {e}"),
        })?;
        known(line, &guideline)?;
        if effective.get(&guideline) == Some(&EffectiveCategory::Mandatory) {
            return Err(ComplianceError::DeviationNotPermitted {
                line,
                id: id.clone(),
                guideline,
            });
        }
        if !ids.insert(id.clone()) {
            return Err(ComplianceError::Duplicate {
                line,
                what: format!("deviation id {id}"),
            });
        }
        out.push(DeviationRecord {
            id: id.clone(),
            guideline,
            file_pattern,
            line_range,
            rationale,
            approver,
            date,
        });
    }
    Ok(out)
}

/// Parses an external findings file.
pub fn parse_external_findings(text: &str) -> Result<Vec<ExternalFinding>, ComplianceError> {
    let mut out = Vec::new();
    for (line, l) in lines(text) {
        let ws = words(line, l)?;
        if ws.first().map(String::as_str) != Some("finding") {
            return Err(ComplianceError::Syntax {
                line,
                message: "expected `finding ...`".into(),
            });
        }
        let mut f = fields(line, &ws[1..], &["guideline", "file", "line", "certainty", "message"])?;
        let guideline = required(line, &mut f, "guideline")?;
        let path = non_empty(line, "file", required(line, &mut f, "file")?)?;
        let at = required(line, &mut f, "line")?;
        let certainty = required(line, &mut f, "certainty")?;
        let message = non_empty(line, "message", required(line, &mut f, "message")?)?;
        let at: u32 = at
            .parse()
            .ok()
            .filter(|n| *n > 0)
            .ok_or_else(|| ComplianceError::Syntax {
                line,
                message: format!("malformed line number `{at}`"),
            })?;
        let certainty = match certainty.as_str() {
            "definite" => Certainty::Definite,
            "caution" => Certainty::Caution,
            other => {
                return Err(ComplianceError::Syntax {
                    line,
                    message: format!("unknown certainty `{other}` (expected definite or caution)"),
                })
            }
        };
        known(line, &guideline)?;
        out.push(ExternalFinding {
            guideline,
            path,
            line: at,
            message,
            certainty,
            record_line: line,
        });
    }
    Ok(out)
}
