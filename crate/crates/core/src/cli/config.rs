use std::collections::BTreeSet;
use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use clap::Parser;
use serde::Serialize;

use super::CliError;
use crate::rules::{registry, Decidability, DontKnowPolicy, MixedChoice, PolicyMode, Scope};
use crate::sema::IntegerModel;

/// Environment variable holding the default include path list, in the
/// platform's path-list syntax.
pub const INCLUDE_ENV: &str = "MISRACHECK_INCLUDE";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum ReportFormat {
    Text,
    Structured,
}

impl FromStr for ReportFormat {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "text" => Ok(ReportFormat::Text),
            "structured" => Ok(ReportFormat::Structured),
            _ => Err(format!("unknown report format `{s}` (expected text or structured)")),
        }
    }
}

/// Which guidelines to check.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum RuleSelection {
    /// Every implemented guideline the scope allows.
    All,
    Only(BTreeSet<String>),
}

impl FromStr for RuleSelection {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        if s.trim() == "all" {
            return Ok(RuleSelection::All);
        }
        let ids: BTreeSet<String> = s
            .split(',')
            .map(str::trim)
            .filter(|x| !x.is_empty())
            .map(String::from)
            .collect();
        if ids.is_empty() {
            return Err("empty rule list".into());
        }
        Ok(RuleSelection::Only(ids))
    }
}

impl fmt::Display for RuleSelection {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            RuleSelection::All => f.write_str("all"),
            RuleSelection::Only(ids) => f.write_str(&ids.iter().cloned().collect::<Vec<_>>().join(",")),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunConfig {
    pub sources: Vec<PathBuf>,
    pub include_paths: Vec<PathBuf>,
    pub defines: Vec<(String, Option<String>)>,
    pub integer_model: IntegerModel,
    pub rules: RuleSelection,
    pub policy: DontKnowPolicy,
    pub grp_path: Option<PathBuf>,
    pub deviations_path: Option<PathBuf>,
    pub external_findings_path: Option<PathBuf>,
    pub report_format: ReportFormat,
    #[serde(skip)]
    pub out: Option<PathBuf>,
    pub system_mode: bool,
    /// Fixed report timestamp; the current time when absent.
    #[serde(skip)]
    pub timestamp: Option<String>,
}

impl RunConfig {
    pub fn new(sources: Vec<PathBuf>) -> Self {
        RunConfig {
            sources,
            include_paths: Vec::new(),
            defines: Vec::new(),
            integer_model: IntegerModel::default(),
            rules: RuleSelection::All,
            policy: DontKnowPolicy::default(),
            grp_path: None,
            deviations_path: None,
            external_findings_path: None,
            report_format: ReportFormat::Text,
            out: None,
            system_mode: false,
            timestamp: None,
        }
    }

    /// Guidelines that will be checked, and whether `all` had to leave
    /// system-scope ones out.
    pub fn enabled(&self) -> (BTreeSet<String>, Vec<String>) {
        match &self.rules {
            RuleSelection::Only(ids) => (ids.clone(), Vec::new()),
            RuleSelection::All => {
                let mut on = BTreeSet::new();
                let mut skipped = Vec::new();
                for g in registry().implemented() {
                    if self.system_mode || g.scope == Scope::SingleTranslationUnit {
                        on.insert(g.id.clone());
                    } else {
                        skipped.push(g.id.clone());
                    }
                }
                (on, skipped)
            }
        }
    }

    pub fn validate(&self) -> Result<(), CliError> {
        if self.sources.is_empty() {
            return Err(CliError::Config("no source files given".into()));
        }
        self.integer_model
            .validate()
            .map_err(|e| CliError::Config(e.to_string()))?;
        let (enabled, _) = self.enabled();
        crate::rules::validate_enabled(&enabled, self.system_mode).map_err(|e| CliError::Config(e.to_string()))?;
        if self.policy.mode == PolicyMode::Mixed {
            let missing: Vec<&String> = enabled
                .iter()
                .filter(|g| {
                    registry()
                        .get(g)
                        .is_some_and(|m| m.decidability == Some(Decidability::Undecidable))
                        && !self.policy.mixed.contains_key(*g)
                })
                .collect();
            if !missing.is_empty() {
                let ids: Vec<&str> = missing.iter().map(|s| s.as_str()).collect();
                return Err(CliError::Config(format!(
                    "mixed policy needs a choice for undecidable guideline(s): {}",
                    ids.join(", ")
                )));
            }
        }
        Ok(())
    }
}

/// Command-line flags. Every flag except `--config` and the sources can
/// also be set in the config file under the same name.
#[derive(Debug, Clone, Default, Parser)]
#[command(
    name = "misracheck",
    version,
    about = "Check C sources against MISRA C:2012 guidelines"
)]
pub struct Args {
    /// C source files, one translation unit each
    pub sources: Vec<PathBuf>,
    /// Config file of `key = value` lines
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Add a directory to the include search path
    #[arg(long = "include", short = 'I', value_name = "DIR")]
    pub include: Vec<PathBuf>,
    /// Predefine a macro, as NAME or NAME=body
    #[arg(long = "define", short = 'D', value_name = "NAME[=BODY]")]
    pub define: Vec<String>,
    /// Guideline recategorization plan
    #[arg(long, value_name = "FILE")]
    pub grp: Option<PathBuf>,
    /// Deviation records
    #[arg(long, value_name = "FILE")]
    pub deviations: Option<PathBuf>,
    /// Findings produced outside the tool, e.g. for directives
    #[arg(long, value_name = "FILE")]
    pub external: Option<PathBuf>,
    /// What to do with findings the analysis cannot decide
    #[arg(long, value_name = "suppress|violation|mixed|caution")]
    pub policy: Option<String>,
    /// Per-guideline choice for the mixed policy, as ID=suppress|violation
    #[arg(long, value_name = "ID=CHOICE")]
    pub mixed: Vec<String>,
    /// Comma-separated guideline ids, or `all`
    #[arg(long, value_name = "IDS")]
    pub rules: Option<String>,
    /// Report format
    #[arg(long, value_name = "text|structured")]
    pub report: Option<String>,
    /// Write the report to a file instead of standard output
    #[arg(long, value_name = "FILE")]
    pub out: Option<PathBuf>,
    /// Analyze all sources as one program, enabling system-scope guidelines
    #[arg(long)]
    pub system: bool,
    /// Integer model override, as KEY=BITS (e.g. int_bits=16) or char_signed=BOOL
    #[arg(long, value_name = "KEY=VALUE")]
    pub model: Vec<String>,
    /// Timestamp to put in the structured report
    #[arg(long, value_name = "TEXT")]
    pub timestamp: Option<String>,
}

fn parse_define(s: &str) -> Result<(String, Option<String>), CliError> {
    let (name, body) = match s.split_once('=') {
        Some((n, b)) => (n, Some(b.to_string())),
        None => (s, None),
    };
    let ok = name.chars().next().is_some_and(|c| c.is_ascii_alphabetic() || c == '_')
        && name.chars().all(|c| c.is_ascii_alphanumeric() || c == '_');
    if !ok {
        return Err(CliError::Config(format!("invalid macro name in `{s}`")));
    }
    Ok((name.to_string(), body))
}

fn set_model(m: &mut IntegerModel, kv: &str) -> Result<(), CliError> {
    let (k, v) = kv
        .split_once('=')
        .ok_or_else(|| CliError::Config(format!("expected KEY=VALUE for the integer model, found `{kv}`")))?;
    let bits = || {
        v.trim()
            .parse::<u8>()
            .map_err(|_| CliError::Config(format!("invalid width `{v}` for {k}")))
    };
    match k.trim() {
        "char_signed" => {
            m.char_signed = v
                .trim()
                .parse()
                .map_err(|_| CliError::Config(format!("invalid boolean `{v}` for char_signed")))?
        }
        "short_bits" => m.short_bits = bits()?,
        "int_bits" => m.int_bits = bits()?,
        "long_bits" => m.long_bits = bits()?,
        "long_long_bits" => m.long_long_bits = bits()?,
        "pointer_bits" => m.pointer_bits = bits()?,
        other => return Err(CliError::Config(format!("unknown integer model key `{other}`"))),
    }
    Ok(())
}

fn set_mixed(p: &mut DontKnowPolicy, kv: &str) -> Result<(), CliError> {
    let (id, choice) = kv
        .split_once('=')
        .or_else(|| kv.split_once(':'))
        .ok_or_else(|| CliError::Config(format!("expected ID=CHOICE for the mixed policy, found `{kv}`")))?;
    let choice: MixedChoice = choice.trim().parse().map_err(CliError::Config)?;
    p.mixed.insert(id.trim().to_string(), choice);
    Ok(())
}

fn parse_bool(key: &str, v: &str) -> Result<bool, CliError> {
    match v {
        "true" | "yes" | "1" | "on" => Ok(true),
        "false" | "no" | "0" | "off" => Ok(false),
        _ => Err(CliError::Config(format!("invalid boolean `{v}` for {key}"))),
    }
}

/// Parses a config file. Relative paths are taken relative to the file.
fn parse_config_file(text: &str, base: &Path) -> Result<Args, CliError> {
    let mut a = Args::default();
    let rel = |v: &str| {
        let p = PathBuf::from(v);
        if p.is_absolute() {
            p
        } else {
            base.join(p)
        }
    };
    for (i, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let err = |m: String| CliError::Config(format!("config line {}: {m}", i + 1));
        let (k, v) = line
            .split_once('=')
            .ok_or_else(|| err("expected `key = value`".into()))?;
        let (k, v) = (k.trim(), v.trim());
        let list = || v.split(',').map(str::trim).filter(|x| !x.is_empty());
        match k {
            "sources" => a.sources.extend(list().map(rel)),
            "include" => a.include.extend(list().map(rel)),
            "define" => a.define.extend(list().map(String::from)),
            "grp" => a.grp = Some(rel(v)),
            "deviations" => a.deviations = Some(rel(v)),
            "external" => a.external = Some(rel(v)),
            "policy" => a.policy = Some(v.to_string()),
            "mixed" => a.mixed.extend(list().map(String::from)),
            "rules" => a.rules = Some(v.to_string()),
            "report" => a.report = Some(v.to_string()),
            "out" => a.out = Some(rel(v)),
            "system" => a.system = parse_bool(k, v).map_err(|e| err(e.to_string()))?,
            "model" => a.model.extend(list().map(String::from)),
            "timestamp" => a.timestamp = Some(v.to_string()),
            other => return Err(err(format!("unknown key `{other}`"))),
        }
    }
    Ok(a)
}

impl Args {
    /// Builds the run configuration: config file first, then flags, then
    /// the include path environment variable.
    pub fn into_config(self, env_include: Option<&std::ffi::OsStr>) -> Result<RunConfig, CliError> {
        let file = match &self.config {
            Some(path) => {
                let text =
                    std::fs::read_to_string(path).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
                parse_config_file(&text, path.parent().unwrap_or(Path::new("")))?
            }
            None => Args::default(),
        };
        let mut c = RunConfig::new(if self.sources.is_empty() {
            file.sources
        } else {
            self.sources
        });
        c.include_paths = file.include.into_iter().chain(self.include).collect();
        if let Some(env) = env_include {
            c.include_paths
                .extend(std::env::split_paths(env).filter(|p| !p.as_os_str().is_empty()));
        }
        for d in file.define.iter().chain(&self.define) {
            c.defines.push(parse_define(d)?);
        }
        for m in file.model.iter().chain(&self.model) {
            set_model(&mut c.integer_model, m)?;
        }
        if let Some(p) = self.policy.or(file.policy) {
            c.policy.mode = p.parse().map_err(CliError::Config)?;
        }
        for m in file.mixed.iter().chain(&self.mixed) {
            set_mixed(&mut c.policy, m)?;
        }
        if let Some(r) = self.rules.or(file.rules) {
            c.rules = r.parse().map_err(CliError::Config)?;
        }
        if let Some(r) = self.report.or(file.report) {
            c.report_format = r.parse().map_err(CliError::Config)?;
        }
        c.grp_path = self.grp.or(file.grp);
        c.deviations_path = self.deviations.or(file.deviations);
        c.external_findings_path = self.external.or(file.external);
        c.out = self.out.or(file.out);
        c.system_mode = self.system || file.system;
        c.timestamp = self.timestamp.or(file.timestamp);
        Ok(c)
    }
}
