//! C interface to the checker.
//!
//! A caller builds a `MisraConfig`, runs `misra_analyze` to get a
//! `MisraResult`, reads findings and reports from it, and frees both
//! handles. Every function returns a `MisraStatus`; the message for the
//! last failure on the calling thread is available from
//! `misra_last_error`.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::{Path, PathBuf};

use misracheck::cli::{analyze, render, render_text, CliError, Outcome, ReportFormat, RunConfig};
use misracheck::rules::{Certainty, MixedChoice};
use misracheck::source::{DiskFiles, FileProvider, MemoryFiles};

/// Result codes. Zero is success.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MisraStatus {
    Ok = 0,
    NullArgument = 1,
    InvalidUtf8 = 2,
    InvalidArgument = 3,
    Config = 4,
    Io = 5,
    Compliance = 6,
    OutOfRange = 7,
    Internal = 8,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MisraCertainty {
    Definite = 0,
    Caution = 1,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MisraReportFormat {
    Text = 0,
    Structured = 1,
}

/// Opaque run configuration.
pub struct MisraConfig {
    config: RunConfig,
    files: MemoryFiles,
    has_files: bool,
}

/// Opaque analysis result.
pub struct MisraResult {
    outcome: Outcome,
    config: RunConfig,
    strings: Vec<FindingStrings>,
    report: Option<CString>,
}

struct FindingStrings {
    guideline: CString,
    path: CString,
    message: CString,
    category: CString,
}

thread_local! {
    static LAST_ERROR: RefCell<CString> = RefCell::new(CString::default());
}

fn set_error(msg: &str) {
    let c = CString::new(msg.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = c);
}

fn fail(status: MisraStatus, msg: &str) -> MisraStatus {
    set_error(msg);
    status
}

/// Runs `f`, turning panics into `Internal`.
fn guard(f: impl FnOnce() -> MisraStatus) -> MisraStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(s) => s,
        Err(_) => fail(MisraStatus::Internal, "internal error"),
    }
}

unsafe fn text<'a>(p: *const c_char, what: &str) -> Result<&'a str, MisraStatus> {
    if p.is_null() {
        return Err(fail(MisraStatus::NullArgument, &format!("{what} is null")));
    }
    CStr::from_ptr(p)
        .to_str()
        .map_err(|_| fail(MisraStatus::InvalidUtf8, &format!("{what} is not valid UTF-8")))
}

unsafe fn config_mut<'a>(cfg: *mut MisraConfig) -> Result<&'a mut MisraConfig, MisraStatus> {
    cfg.as_mut()
        .ok_or_else(|| fail(MisraStatus::NullArgument, "config is null"))
}

fn cli_status(e: &CliError) -> MisraStatus {
    match e {
        CliError::Config(_) | CliError::Rules(_) => MisraStatus::Config,
        CliError::Io { .. } => MisraStatus::Io,
        CliError::Compliance(_) => MisraStatus::Compliance,
    }
}

/// Overlay of in-memory files on top of the disk.
struct Overlay<'a>(&'a MemoryFiles);

impl FileProvider for Overlay<'_> {
    fn read(&self, path: &Path) -> Option<String> {
        self.0.read(path).or_else(|| DiskFiles.read(path))
    }
}

/// Creates an empty configuration with the default integer model, all
/// rules, the caution policy and the text report format.
///
/// # Safety
/// `out` must be a valid pointer to writable storage.
#[no_mangle]
pub unsafe extern "C" fn misra_config_new(out: *mut *mut MisraConfig) -> MisraStatus {
    guard(|| {
        if out.is_null() {
            return fail(MisraStatus::NullArgument, "out is null");
        }
        let cfg = Box::new(MisraConfig {
            config: RunConfig::new(Vec::new()),
            files: MemoryFiles::new(),
            has_files: false,
        });
        *out = Box::into_raw(cfg);
        MisraStatus::Ok
    })
}

/// # Safety
/// `cfg` must be null or a handle from `misra_config_new` not yet freed.
#[no_mangle]
pub unsafe extern "C" fn misra_config_free(cfg: *mut MisraConfig) {
    if !cfg.is_null() {
        drop(Box::from_raw(cfg));
    }
}

unsafe fn with_text(
    cfg: *mut MisraConfig,
    value: *const c_char,
    what: &str,
    f: impl FnOnce(&mut MisraConfig, &str) -> Result<(), MisraStatus>,
) -> MisraStatus {
    guard(|| {
        let r = (|| {
            let c = config_mut(cfg)?;
            let v = text(value, what)?;
            f(c, v)
        })();
        match r {
            Ok(()) => MisraStatus::Ok,
            Err(s) => s,
        }
    })
}

/// Adds a translation unit.
///
/// # Safety
/// `cfg` must be a live handle and `path` a NUL-terminated string.
#[no_mangle]
pub unsafe extern "C" fn misra_config_add_source(cfg: *mut MisraConfig, path: *const c_char) -> MisraStatus {
    with_text(cfg, path, "path", |c, v| {
        c.config.sources.push(PathBuf::from(v));
        Ok(())
    })
}

/// Registers file contents under a path. Registered files shadow the disk
/// for sources, headers and record files.
///
/// # Safety
/// `cfg` must be a live handle; `path` and `contents` NUL-terminated strings.
#[no_mangle]
pub unsafe extern "C" fn misra_config_add_file(
    cfg: *mut MisraConfig,
    path: *const c_char,
    contents: *const c_char,
) -> MisraStatus {
    guard(|| {
        let r = (|| {
            let c = config_mut(cfg)?;
            let p = text(path, "path")?;
            let body = text(contents, "contents")?;
            c.files.insert(p, body);
            c.has_files = true;
            Ok(())
        })();
        r.err().unwrap_or(MisraStatus::Ok)
    })
}

/// # Safety
/// `cfg` must be a live handle and `dir` a NUL-terminated string.
#[no_mangle]
pub unsafe extern "C" fn misra_config_add_include(cfg: *mut MisraConfig, dir: *const c_char) -> MisraStatus {
    with_text(cfg, dir, "dir", |c, v| {
        c.config.include_paths.push(PathBuf::from(v));
        Ok(())
    })
}

/// Predefines a macro. `body` may be null for an object-like macro with
/// the body `1`.
///
/// # Safety
/// `cfg` must be a live handle, `name` a NUL-terminated string and `body`
/// null or a NUL-terminated string.
#[no_mangle]
pub unsafe extern "C" fn misra_config_add_define(
    cfg: *mut MisraConfig,
    name: *const c_char,
    body: *const c_char,
) -> MisraStatus {
    guard(|| {
        let r = (|| {
            let c = config_mut(cfg)?;
            let n = text(name, "name")?;
            let b = if body.is_null() {
                None
            } else {
                Some(text(body, "body")?.to_string())
            };
            let valid = n.chars().next().is_some_and(|ch| ch.is_ascii_alphabetic() || ch == '_')
                && n.chars().all(|ch| ch.is_ascii_alphanumeric() || ch == '_');
            if !valid {
                return Err(fail(MisraStatus::InvalidArgument, &format!("invalid macro name `{n}`")));
            }
            c.config.defines.push((n.to_string(), b));
            Ok(())
        })();
        r.err().unwrap_or(MisraStatus::Ok)
    })
}

/// Sets the guideline selection: `all` or comma-separated ids.
///
/// # Safety
/// `cfg` must be a live handle and `rules` a NUL-terminated string.
#[no_mangle]
pub unsafe extern "C" fn misra_config_set_rules(cfg: *mut MisraConfig, rules: *const c_char) -> MisraStatus {
    with_text(cfg, rules, "rules", |c, v| {
        c.config.rules = v.parse().map_err(|e: String| fail(MisraStatus::InvalidArgument, &e))?;
        Ok(())
    })
}

/// Sets the policy: `suppress`, `violation`, `mixed` or `caution`.
///
/// # Safety
/// `cfg` must be a live handle and `policy` a NUL-terminated string.
#[no_mangle]
pub unsafe extern "C" fn misra_config_set_policy(cfg: *mut MisraConfig, policy: *const c_char) -> MisraStatus {
    with_text(cfg, policy, "policy", |c, v| {
        c.config.policy.mode = v.parse().map_err(|e: String| fail(MisraStatus::InvalidArgument, &e))?;
        Ok(())
    })
}

/// Sets the mixed-policy choice for one guideline: `suppress` or `violation`.
///
/// # Safety
/// `cfg` must be a live handle; `guideline` and `choice` NUL-terminated strings.
#[no_mangle]
pub unsafe extern "C" fn misra_config_set_mixed(
    cfg: *mut MisraConfig,
    guideline: *const c_char,
    choice: *const c_char,
) -> MisraStatus {
    guard(|| {
        let r = (|| {
            let c = config_mut(cfg)?;
            let g = text(guideline, "guideline")?;
            let ch: MixedChoice = text(choice, "choice")?
                .parse()
                .map_err(|e: String| fail(MisraStatus::InvalidArgument, &e))?;
            c.config.policy.mixed.insert(g.to_string(), ch);
            Ok(())
        })();
        r.err().unwrap_or(MisraStatus::Ok)
    })
}

/// Sets one integer model field, e.g. `int_bits` to `16` or `char_signed`
/// to `false`.
///
/// # Safety
/// `cfg` must be a live handle; `key` and `value` NUL-terminated strings.
#[no_mangle]
pub unsafe extern "C" fn misra_config_set_model(
    cfg: *mut MisraConfig,
    key: *const c_char,
    value: *const c_char,
) -> MisraStatus {
    guard(|| {
        let r = (|| {
            let c = config_mut(cfg)?;
            let k = text(key, "key")?;
            let v = text(value, "value")?;
            let bad = || fail(MisraStatus::InvalidArgument, &format!("invalid value `{v}` for {k}"));
            let m = &mut c.config.integer_model;
            match k {
                "char_signed" => m.char_signed = v.parse().map_err(|_| bad())?,
                "short_bits" => m.short_bits = v.parse().map_err(|_| bad())?,
                "int_bits" => m.int_bits = v.parse().map_err(|_| bad())?,
                "long_bits" => m.long_bits = v.parse().map_err(|_| bad())?,
                "long_long_bits" => m.long_long_bits = v.parse().map_err(|_| bad())?,
                "pointer_bits" => m.pointer_bits = v.parse().map_err(|_| bad())?,
                _ => {
                    return Err(fail(
                        MisraStatus::InvalidArgument,
                        &format!("unknown integer model key `{k}`"),
                    ))
                }
            }
            Ok(())
        })();
        r.err().unwrap_or(MisraStatus::Ok)
    })
}

/// Path of the recategorization plan; null clears it.
///
/// # Safety
/// `cfg` must be a live handle and `path` null or a NUL-terminated string.
#[no_mangle]
pub unsafe extern "C" fn misra_config_set_grp(cfg: *mut MisraConfig, path: *const c_char) -> MisraStatus {
    set_optional_path(cfg, path, |c| &mut c.grp_path)
}

/// Path of the deviation records; null clears it.
///
/// # Safety
/// `cfg` must be a live handle and `path` null or a NUL-terminated string.
#[no_mangle]
pub unsafe extern "C" fn misra_config_set_deviations(cfg: *mut MisraConfig, path: *const c_char) -> MisraStatus {
    set_optional_path(cfg, path, |c| &mut c.deviations_path)
}

/// Path of the external findings file; null clears it.
///
/// # Safety
/// `cfg` must be a live handle and `path` null or a NUL-terminated string.
#[no_mangle]
pub unsafe extern "C" fn misra_config_set_external(cfg: *mut MisraConfig, path: *const c_char) -> MisraStatus {
    set_optional_path(cfg, path, |c| &mut c.external_findings_path)
}

unsafe fn set_optional_path(
    cfg: *mut MisraConfig,
    path: *const c_char,
    field: impl FnOnce(&mut RunConfig) -> &mut Option<PathBuf>,
) -> MisraStatus {
    guard(|| {
        let r = (|| {
            let c = config_mut(cfg)?;
            let v = if path.is_null() {
                None
            } else {
                Some(PathBuf::from(text(path, "path")?))
            };
            *field(&mut c.config) = v;
            Ok(())
        })();
        r.err().unwrap_or(MisraStatus::Ok)
    })
}

/// # Safety
/// `cfg` must be a live handle.
#[no_mangle]
pub unsafe extern "C" fn misra_config_set_system(cfg: *mut MisraConfig, system: bool) -> MisraStatus {
    guard(|| match config_mut(cfg) {
        Ok(c) => {
            c.config.system_mode = system;
            MisraStatus::Ok
        }
        Err(s) => s,
    })
}

/// Pins the structured report timestamp; null uses the current time.
///
/// # Safety
/// `cfg` must be a live handle and `timestamp` null or a NUL-terminated string.
#[no_mangle]
pub unsafe extern "C" fn misra_config_set_timestamp(cfg: *mut MisraConfig, timestamp: *const c_char) -> MisraStatus {
    guard(|| {
        let r = (|| {
            let c = config_mut(cfg)?;
            c.config.timestamp = if timestamp.is_null() {
                None
            } else {
                Some(text(timestamp, "timestamp")?.to_string())
            };
            Ok(())
        })();
        r.err().unwrap_or(MisraStatus::Ok)
    })
}

fn cstring(s: &str) -> CString {
    CString::new(s.replace('\0', " ")).unwrap_or_default()
}

/// Runs the analysis. Analysis errors in individual translation units do
/// not fail the call; they are counted in the result and force exit code 3.
///
/// # Safety
/// `cfg` must be a live handle and `out` a valid pointer to writable storage.
#[no_mangle]
pub unsafe extern "C" fn misra_analyze(cfg: *const MisraConfig, out: *mut *mut MisraResult) -> MisraStatus {
    guard(|| {
        let Some(c) = cfg.as_ref() else {
            return fail(MisraStatus::NullArgument, "config is null");
        };
        if out.is_null() {
            return fail(MisraStatus::NullArgument, "out is null");
        }
        let result = if c.has_files {
            analyze(&c.config, &Overlay(&c.files))
        } else {
            analyze(&c.config, &DiskFiles)
        };
        match result {
            Ok(outcome) => {
                let strings = outcome
                    .findings
                    .iter()
                    .map(|a| FindingStrings {
                        guideline: cstring(&a.finding.guideline),
                        path: cstring(&a.finding.location.path),
                        message: cstring(&a.finding.message),
                        category: cstring(&a.category.to_string()),
                    })
                    .collect();
                *out = Box::into_raw(Box::new(MisraResult {
                    outcome,
                    config: c.config.clone(),
                    strings,
                    report: None,
                }));
                MisraStatus::Ok
            }
            Err(e) => fail(cli_status(&e), &e.to_string()),
        }
    })
}

/// # Safety
/// `res` must be null or a handle from `misra_analyze` not yet freed.
#[no_mangle]
pub unsafe extern "C" fn misra_result_free(res: *mut MisraResult) {
    if !res.is_null() {
        drop(Box::from_raw(res));
    }
}

/// Exit code of the run: 0 compliant, 1 compliant with remarks,
/// 2 non-compliant, 3 analysis error. Returns -1 for a null handle.
///
/// # Safety
/// `res` must be null or a live result handle.
#[no_mangle]
pub unsafe extern "C" fn misra_result_exit_code(res: *const MisraResult) -> i32 {
    res.as_ref().map_or(-1, |r| r.outcome.exit_code())
}

/// Number of reported findings; 0 for a null handle.
///
/// # Safety
/// `res` must be null or a live result handle.
#[no_mangle]
pub unsafe extern "C" fn misra_result_finding_count(res: *const MisraResult) -> usize {
    res.as_ref().map_or(0, |r| r.outcome.findings.len())
}

/// Number of translation units that failed to analyze.
///
/// # Safety
/// `res` must be null or a live result handle.
#[no_mangle]
pub unsafe extern "C" fn misra_result_error_count(res: *const MisraResult) -> usize {
    res.as_ref().map_or(0, |r| r.outcome.errors.len())
}

/// One finding. The strings stay valid until the result is freed.
#[repr(C)]
pub struct MisraFinding {
    pub guideline: *const c_char,
    pub category: *const c_char,
    pub path: *const c_char,
    pub line: u32,
    pub column: u32,
    pub certainty: MisraCertainty,
    pub deviated: bool,
    pub message: *const c_char,
}

/// Reads finding `index` into `out`.
///
/// # Safety
/// `res` must be a live result handle and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn misra_result_finding(
    res: *const MisraResult,
    index: usize,
    out: *mut MisraFinding,
) -> MisraStatus {
    guard(|| {
        let Some(r) = res.as_ref() else {
            return fail(MisraStatus::NullArgument, "result is null");
        };
        if out.is_null() {
            return fail(MisraStatus::NullArgument, "out is null");
        }
        let (Some(a), Some(s)) = (r.outcome.findings.get(index), r.strings.get(index)) else {
            return fail(
                MisraStatus::OutOfRange,
                &format!(
                    "finding index {index} out of range ({} findings)",
                    r.outcome.findings.len()
                ),
            );
        };
        *out = MisraFinding {
            guideline: s.guideline.as_ptr(),
            category: s.category.as_ptr(),
            path: s.path.as_ptr(),
            line: a.finding.location.line,
            column: a.finding.location.col,
            certainty: match a.finding.certainty {
                Certainty::Definite => MisraCertainty::Definite,
                Certainty::Caution => MisraCertainty::Caution,
            },
            deviated: a.deviated(),
            message: s.message.as_ptr(),
        };
        MisraStatus::Ok
    })
}

/// Renders the report. The string stays valid until the next call on the
/// same result or until the result is freed.
///
/// # Safety
/// `res` must be a live result handle and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn misra_result_report(
    res: *mut MisraResult,
    format: MisraReportFormat,
    out: *mut *const c_char,
) -> MisraStatus {
    guard(|| {
        let Some(r) = res.as_mut() else {
            return fail(MisraStatus::NullArgument, "result is null");
        };
        if out.is_null() {
            return fail(MisraStatus::NullArgument, "out is null");
        }
        let text = match format {
            MisraReportFormat::Text => render_text(&r.outcome),
            MisraReportFormat::Structured => {
                let mut config = r.config.clone();
                config.report_format = ReportFormat::Structured;
                render(&r.outcome, &config)
            }
        };
        let c = r.report.insert(cstring(&text));
        *out = c.as_ptr();
        MisraStatus::Ok
    })
}

/// Message for the last failed call on this thread; empty if none. Valid
/// until the next failing call on the same thread.
#[no_mangle]
pub extern "C" fn misra_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ptr())
}

/// Version of the library as a static string.
#[no_mangle]
pub extern "C" fn misra_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}
