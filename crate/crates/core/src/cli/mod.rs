//! Driver: configuration, the analysis pipeline, reports and exit codes.

mod config;
mod report;

use std::collections::BTreeSet;
use std::ffi::OsString;
use std::io::Write;
use std::path::Path;

use clap::Parser;
use serde::Serialize;
use thiserror::Error;

use crate::compliance::{
    compute_verdict, effective_categories, match_deviations, parse_deviations, parse_external_findings,
    parse_recategorization_plan, AnnotatedFinding, ComplianceError, ComplianceReport, EffectiveCategory, Verdict,
};
use crate::flow::{analyze_unit, build_call_graph, FlowError};
use crate::frontend::{command_line_macros, preprocess, PreprocessOptions};
use crate::parser::parse;
use crate::rules::{
    apply_dont_know_policy, registry, run_rules, sort_findings, Finding, RuleError, RuleInput, SystemFacts, UnitFacts,
};
use crate::sema::{builtin_headers, resolve, unify, Program, TypedTu};
use crate::source::{DiskFiles, FileProvider, Loc, SourceSet};

pub use config::{Args, ReportFormat, RuleSelection, RunConfig, INCLUDE_ENV};
pub use report::{render_structured, render_text, SCHEMA_VERSION};

#[derive(Debug, Error)]
pub enum CliError {
    #[error("configuration error: {0}")]
    Config(String),
    #[error("{path}: {message}")]
    Io { path: String, message: String },
    #[error(transparent)]
    Compliance(#[from] ComplianceError),
    #[error(transparent)]
    Rules(#[from] RuleError),
}

/// A translation unit that could not be analyzed.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct AnalysisError {
    pub path: String,
    pub line: u32,
    pub column: u32,
    pub stage: &'static str,
    pub message: String,
}

/// Everything a run produces.
#[derive(Debug, Clone)]
pub struct Outcome {
    /// Reported findings in report order. Findings of disapplied
    /// guidelines are only counted in the compliance report.
    pub findings: Vec<AnnotatedFinding>,
    pub compliance: ComplianceReport,
    pub errors: Vec<AnalysisError>,
    pub enabled: BTreeSet<String>,
}

impl Outcome {
    /// 0 compliant, 1 compliant with remarks, 2 non-compliant, 3 analysis
    /// error.
    pub fn exit_code(&self) -> i32 {
        if !self.errors.is_empty() {
            return 3;
        }
        match self.compliance.verdict {
            Verdict::Compliant => 0,
            Verdict::CompliantWithRemarks => 1,
            Verdict::NonCompliant => 2,
        }
    }
}

fn read(provider: &dyn FileProvider, path: &Path) -> Result<String, CliError> {
    provider.read(path).ok_or_else(|| CliError::Io {
        path: path.display().to_string(),
        message: "cannot read file".into(),
    })
}

fn in_file<T>(path: &Path, r: Result<T, ComplianceError>) -> Result<T, CliError> {
    r.map_err(|e| {
        CliError::Compliance(ComplianceError::InFile {
            path: path.display().to_string(),
            source: Box::new(e),
        })
    })
}

struct Pipeline<'c> {
    config: &'c RunConfig,
    sources: SourceSet,
    errors: Vec<AnalysisError>,
}

impl Pipeline<'_> {
    fn error(&mut self, path: &str, loc: Option<Loc>, stage: &'static str, message: String) {
        let (path, line, column) = match loc.and_then(|l| self.sources.try_get(l.file).map(|f| (f.path.clone(), l))) {
            Some((p, l)) => (p, l.line, l.col),
            None => (path.to_string(), 0, 0),
        };
        self.errors.push(AnalysisError {
            path,
            line,
            column,
            stage,
            message,
        });
    }

    fn unit(&mut self, provider: &dyn FileProvider, opts: &PreprocessOptions, path: &Path) -> Option<TypedTu> {
        let name = path.display().to_string();
        let Some(text) = provider.read(path) else {
            self.error(&name, None, "read", "cannot read file".into());
            return None;
        };
        let id = self.sources.add(name.clone(), text);
        let out = match preprocess(&mut self.sources, provider, id, opts) {
            Ok(o) => o,
            Err(e) => {
                self.error(&name, e.loc, "preprocess", e.to_string());
                return None;
            }
        };
        let ast = match parse(&out.tokens) {
            Ok(a) => a,
            Err(e) => {
                let loc = e.expansion.first().map(|f| f.site).or(e.loc);
                self.error(&name, loc, "parse", e.to_string());
                return None;
            }
        };
        match resolve(ast, &self.config.integer_model) {
            Ok(tu) => Some(tu),
            Err(e) => {
                let loc = e.span.expansion.first().map(|f| f.site).unwrap_or(e.span.start);
                self.error(&name, Some(loc), "resolve", e.to_string());
                None
            }
        }
    }

    fn flow_error(&mut self, e: &FlowError) {
        let s = e.span();
        let loc = s.expansion.first().map(|f| f.site).unwrap_or(s.start);
        self.error("", Some(loc), "flow", e.to_string());
    }
}

/// Runs the whole pipeline over the configured sources.
pub fn analyze(config: &RunConfig, provider: &dyn FileProvider) -> Result<Outcome, CliError> {
    config.validate()?;
    let (enabled, skipped) = config.enabled();

    let plan = match &config.grp_path {
        Some(p) => in_file(p, parse_recategorization_plan(&read(provider, p)?))?,
        None => Vec::new(),
    };
    let effective = effective_categories(registry(), &plan);
    let deviations = match &config.deviations_path {
        Some(p) => in_file(p, parse_deviations(&read(provider, p)?, &effective))?,
        None => Vec::new(),
    };
    let external = match &config.external_findings_path {
        Some(p) => {
            let records = in_file(p, parse_external_findings(&read(provider, p)?))?;
            let name = p.display().to_string();
            records.iter().map(|r| r.to_finding(&name)).collect()
        }
        None => Vec::new(),
    };

    let mut pl = Pipeline {
        config,
        sources: SourceSet::new(),
        errors: Vec::new(),
    };
    let predefined = command_line_macros(&mut pl.sources, &config.defines)
        .map_err(|e| CliError::Config(format!("invalid --define: {e}")))?;
    let opts = PreprocessOptions {
        include_paths: config.include_paths.clone(),
        predefined,
        builtin_headers: builtin_headers(&config.integer_model),
    };
    let mut tus = Vec::new();
    for path in &config.sources {
        if let Some(tu) = pl.unit(provider, &opts, path) {
            tus.push(tu);
        }
    }
    // a unit whose flow analysis fails contributes nothing
    tus.retain(|tu| match analyze_unit(tu) {
        Ok(_) => true,
        Err(e) => {
            pl.flow_error(&e);
            false
        }
    });

    let program: Option<Program>;
    let loose: Vec<TypedTu>;
    if config.system_mode {
        match unify(tus) {
            Ok(p) => program = Some(p),
            Err(e) => {
                let loc = e.span.expansion.first().map(|f| f.site).unwrap_or(e.span.start);
                pl.error("", Some(loc), "link", e.to_string());
                program = None;
            }
        }
        loose = Vec::new();
    } else {
        program = None;
        loose = tus;
    }
    let units: Vec<UnitFacts> = match &program {
        Some(p) => p.tus.iter(),
        None => loose.iter(),
    }
    .map(|tu| UnitFacts {
        tu,
        functions: analyze_unit(tu).expect("flow analysis succeeded before"),
    })
    .collect();
    let call_graph = program.as_ref().map(build_call_graph);
    let input = RuleInput {
        sources: &pl.sources,
        units: &units,
        system: match (&program, &call_graph) {
            (Some(p), Some(cg)) => Some(SystemFacts {
                program: p,
                call_graph: cg,
            }),
            _ => None,
        },
    };
    let mut findings = if config.system_mode && program.is_none() {
        Vec::new()
    } else {
        let checked: BTreeSet<String> = if input.system.is_some() {
            enabled.clone()
        } else {
            enabled.iter().filter(|g| !is_system(g)).cloned().collect()
        };
        run_rules(&input, &checked)?
    };
    findings = apply_dont_know_policy(findings, &config.policy)?;
    let mut external: Vec<Finding> = external;
    findings.append(&mut external);
    sort_findings(&mut findings);

    let annotated = match_deviations(findings, &deviations, &effective);
    let mut compliance = compute_verdict(&annotated);
    if !skipped.is_empty() {
        compliance.remarks.push(format!(
            "system-scope guidelines not checked without --system: {}",
            skipped.join(", ")
        ));
    }
    let findings = annotated
        .into_iter()
        .filter(|a| a.category != EffectiveCategory::Disapplied)
        .collect();
    Ok(Outcome {
        findings,
        compliance,
        errors: pl.errors,
        enabled,
    })
}

fn is_system(id: &str) -> bool {
    registry()
        .get(id)
        .is_some_and(|g| g.scope == crate::rules::Scope::System)
}

/// The report in the configured format. The structured report carries the
/// configured timestamp, or the current UTC time.
pub fn render(outcome: &Outcome, config: &RunConfig) -> String {
    match config.report_format {
        ReportFormat::Text => render_text(outcome),
        ReportFormat::Structured => {
            let timestamp = config
                .timestamp
                .clone()
                .unwrap_or_else(|| chrono::Utc::now().to_rfc3339_opts(chrono::SecondsFormat::Secs, true));
            render_structured(outcome, config, &timestamp)
        }
    }
}

/// Runs with files from disk and writes the report; returns the exit code.
pub fn run(config: &RunConfig, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32 {
    let outcome = match analyze(config, &DiskFiles) {
        Ok(o) => o,
        Err(e) => {
            let _ = writeln!(stderr, "misracheck: {e}");
            return 3;
        }
    };
    for e in &outcome.errors {
        let _ = writeln!(
            stderr,
            "{}:{}:{}: error ({}): {}",
            e.path, e.line, e.column, e.stage, e.message
        );
    }
    let text = render(&outcome, config);
    let written = match &config.out {
        Some(p) => std::fs::write(p, text.as_bytes()).map_err(|e| format!("{}: {e}", p.display())),
        None => stdout.write_all(text.as_bytes()).map_err(|e| e.to_string()),
    };
    if let Err(e) = written {
        let _ = writeln!(stderr, "misracheck: cannot write report: {e}");
        return 3;
    }
    outcome.exit_code()
}

/// Entry point shared by the binary and tests. Argument errors exit with
/// code 3 like any other failure to analyze; `--help` and `--version`
/// exit with 0.
pub fn main_with<I, T>(args: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let args = match Args::try_parse_from(args) {
        Ok(a) => a,
        Err(e) => {
            let code = if e.use_stderr() { 3 } else { 0 };
            let rendered = e.render().to_string();
            let _ = if e.use_stderr() {
                stderr.write_all(rendered.as_bytes())
            } else {
                stdout.write_all(rendered.as_bytes())
            };
            return code;
        }
    };
    let env = std::env::var_os(INCLUDE_ENV);
    match args.into_config(env.as_deref()) {
        Ok(config) => run(&config, stdout, stderr),
        Err(e) => {
            let _ = writeln!(stderr, "misracheck: {e}");
            3
        }
    }
}

#[cfg(test)]
mod tests;
