use std::path::PathBuf;

use super::*;
use crate::compliance::Verdict;
use crate::source::MemoryFiles;

const SHIFT: &str =
    "#include <stdint.h>\nuint32_t f(void) {\n    uint32_t i = 1;\n    i = i << 32;\n    return i;\n}\n";
const CLEAN: &str = "#include <stdint.h>\nuint32_t g(uint32_t x) {\n    return x + 1U;\n}\n";
const ADVISORY: &str = "int h(int *p) {\n    return *p;\n}\n";

fn config(files: &[&str]) -> RunConfig {
    RunConfig::new(files.iter().map(PathBuf::from).collect())
}

fn provider(files: &[(&str, &str)]) -> MemoryFiles {
    files.iter().fold(MemoryFiles::new(), |m, (p, c)| m.with(*p, *c))
}

fn ids(o: &Outcome) -> Vec<&str> {
    o.findings.iter().map(|a| a.finding.guideline.as_str()).collect()
}

#[test]
fn exit_codes_follow_the_verdict() {
    let p = provider(&[("a.c", SHIFT), ("b.c", CLEAN), ("c.c", ADVISORY)]);
    let o = analyze(&config(&["a.c"]), &p).unwrap();
    assert_eq!(ids(&o), vec!["R12.2"]);
    assert_eq!(o.exit_code(), 2);
    let o = analyze(&config(&["b.c"]), &p).unwrap();
    assert!(o.findings.is_empty());
    assert_eq!(o.exit_code(), 0);
    let mut c = config(&["c.c"]);
    c.system_mode = true;
    let o = analyze(&c, &p).unwrap();
    assert_eq!(ids(&o), vec!["R8.13"]);
    assert_eq!(o.compliance.verdict, Verdict::CompliantWithRemarks);
    assert_eq!(o.exit_code(), 1);
}

#[test]
fn broken_unit_is_reported_and_others_still_analyzed() {
    let p = provider(&[("a.c", SHIFT), ("bad.c", "int f(void) {\n    return 1 +;\n}\n")]);
    let o = analyze(&config(&["bad.c", "a.c"]), &p).unwrap();
    assert_eq!(ids(&o), vec!["R12.2"]);
    assert_eq!(o.errors.len(), 1);
    assert_eq!(
        (o.errors[0].path.as_str(), o.errors[0].line, o.errors[0].stage),
        ("bad.c", 2, "parse")
    );
    assert_eq!(o.exit_code(), 3);
    let o = analyze(&config(&["missing.c"]), &p).unwrap();
    assert_eq!(o.errors[0].stage, "read");
}

#[test]
fn deviation_makes_required_finding_compliant() {
    let dev =
        "deviation DV-7 guideline=R12.2 files=a.c lines=4-4 approver=\"QA\" date=2024-01-02 rationale=\"reviewed\"\n";
    let p = provider(&[("a.c", SHIFT), ("dev.txt", dev)]);
    let mut c = config(&["a.c"]);
    c.deviations_path = Some("dev.txt".into());
    let o = analyze(&c, &p).unwrap();
    assert_eq!(o.findings[0].deviation.as_deref(), Some("DV-7"));
    assert_eq!(o.exit_code(), 0);
    let text = render_text(&o);
    assert!(text.contains("deviated by DV-7"), "{text}");
}

#[test]
fn disapplied_guideline_is_hidden_but_counted() {
    let p = provider(&[
        ("c.c", ADVISORY),
        ("grp.txt", "R8.13 = disapplied rationale=\"legacy\"\n"),
    ]);
    let mut c = config(&["c.c"]);
    c.grp_path = Some("grp.txt".into());
    c.system_mode = true;
    let o = analyze(&c, &p).unwrap();
    assert!(o.findings.is_empty());
    assert_eq!(o.compliance.tallies[0].suppressed, 1);
    assert_eq!(o.exit_code(), 0);
}

#[test]
fn bad_record_files_are_errors() {
    let p = provider(&[("c.c", ADVISORY), ("grp.txt", "R9.1 = advisory\n")]);
    let mut c = config(&["c.c"]);
    c.grp_path = Some("grp.txt".into());
    let e = analyze(&c, &p).unwrap_err();
    assert!(e.to_string().starts_with("grp.txt: line 1"), "{e}");
    c.grp_path = Some("nope.txt".into());
    assert!(matches!(analyze(&c, &p), Err(CliError::Io { .. })));
}

#[test]
fn external_findings_are_merged() {
    let ext = "finding guideline=D4.1 file=b.c line=2 certainty=caution message=\"no error handling review\"\n";
    let p = provider(&[("b.c", CLEAN), ("ext.txt", ext)]);
    let mut c = config(&["b.c"]);
    c.external_findings_path = Some("ext.txt".into());
    let o = analyze(&c, &p).unwrap();
    assert_eq!(ids(&o), vec!["D4.1"]);
    assert_eq!(o.findings[0].finding.provenance, crate::rules::Provenance::External);
}

#[test]
fn system_rules_need_system_mode() {
    let rec = "int f(int n) {\n    return (n > 0) ? f(n - 1) : 0;\n}\n";
    let p = provider(&[("r.c", rec)]);
    let o = analyze(&config(&["r.c"]), &p).unwrap();
    assert!(o.findings.is_empty());
    assert!(o.compliance.remarks.iter().any(|r| r.contains("R17.2")));
    let mut c = config(&["r.c"]);
    c.system_mode = true;
    let o = analyze(&c, &p).unwrap();
    assert_eq!(ids(&o), vec!["R17.2"]);
    c.system_mode = false;
    c.rules = "R17.2".parse().unwrap();
    assert!(matches!(analyze(&c, &p), Err(CliError::Config(_))));
}

#[test]
fn mixed_policy_needs_every_undecidable_choice() {
    let p = provider(&[("b.c", CLEAN)]);
    let mut c = config(&["b.c"]);
    c.policy.mode = crate::rules::PolicyMode::Mixed;
    c.rules = "R12.2".parse().unwrap();
    let e = analyze(&c, &p).unwrap_err();
    assert!(e.to_string().contains("R12.2"), "{e}");
    c.policy
        .mixed
        .insert("R12.2".into(), crate::rules::MixedChoice::Suppress);
    assert!(analyze(&c, &p).is_ok());
}

#[test]
fn structured_report_is_stable_json() {
    let p = provider(&[("a.c", SHIFT)]);
    let c = config(&["a.c"]);
    let a = render_structured(&analyze(&c, &p).unwrap(), &c, "T");
    let b = render_structured(&analyze(&c, &p).unwrap(), &c, "T");
    assert_eq!(a, b);
    let v: serde_json::Value = serde_json::from_str(&a).unwrap();
    assert_eq!(v["schema_version"], SCHEMA_VERSION);
    assert_eq!(v["exit_code"], 2);
    let f = &v["findings"][0];
    assert_eq!(
        (f["guideline"].as_str(), f["line"].as_u64(), f["column"].as_u64()),
        (Some("R12.2"), Some(4), Some(9))
    );
    assert_eq!(f["behavior_class"], "undefined");
    assert_eq!(v["compliance"]["verdict"], "non-compliant");
}

#[test]
fn text_report_lines() {
    let p = provider(&[("a.c", SHIFT)]);
    let text = render_text(&analyze(&config(&["a.c"]), &p).unwrap());
    let first = text.lines().next().unwrap();
    assert!(first.starts_with("a.c:4:9: definite R12.2 [required]: "), "{first}");
    assert!(text.contains("verdict: non-compliant"));
}

#[test]
fn flags_and_config_file() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("proj.cfg");
    std::fs::write(
        &cfg,
        "# project\nsources = a.c, b.c\ninclude = inc\ndefine = DEBUG, LEVEL=2\npolicy = caution\nmodel = int_bits=16\nsystem = yes\n",
    )
    .unwrap();
    let args = Args::try_parse_from([
        "misracheck",
        "--config",
        cfg.to_str().unwrap(),
        "-I",
        "x",
        "--rules",
        "R12.2,R9.1",
    ])
    .unwrap();
    let c = args.into_config(Some(std::ffi::OsStr::new("/env/inc"))).unwrap();
    assert_eq!(c.sources, vec![dir.path().join("a.c"), dir.path().join("b.c")]);
    assert_eq!(
        c.include_paths,
        vec![dir.path().join("inc"), PathBuf::from("x"), PathBuf::from("/env/inc")]
    );
    assert_eq!(
        c.defines,
        vec![("DEBUG".into(), None), ("LEVEL".into(), Some("2".into()))]
    );
    assert_eq!(c.integer_model.int_bits, 16);
    assert_eq!(c.policy.mode, crate::rules::PolicyMode::Caution);
    assert!(c.system_mode);
    assert_eq!(c.rules.to_string(), "R12.2,R9.1");

    let bad = dir.path().join("bad.cfg");
    std::fs::write(&bad, "colour = blue\n").unwrap();
    let args = Args::try_parse_from(["misracheck", "--config", bad.to_str().unwrap()]).unwrap();
    assert!(args.into_config(None).is_err());
    for flags in [
        &["--model", "int_bits=x"][..],
        &["--policy", "maybe"],
        &["-D", "1X"],
        &["--report", "xml"],
    ] {
        let mut v = vec!["misracheck", "a.c"];
        v.extend_from_slice(flags);
        assert!(Args::try_parse_from(v).unwrap().into_config(None).is_err(), "{flags:?}");
    }
}

#[test]
fn main_with_writes_report_and_exit_code() {
    let dir = tempfile::tempdir().unwrap();
    let src = dir.path().join("a.c");
    std::fs::write(&src, SHIFT).unwrap();
    let (mut out, mut err) = (Vec::new(), Vec::new());
    let code = main_with(["misracheck", src.to_str().unwrap()], &mut out, &mut err);
    assert_eq!(code, 2);
    assert!(String::from_utf8(out).unwrap().contains("R12.2"));

    let report = dir.path().join("r.json");
    let (mut out, mut err) = (Vec::new(), Vec::new());
    let code = main_with(
        [
            "misracheck",
            src.to_str().unwrap(),
            "--report",
            "structured",
            "--out",
            report.to_str().unwrap(),
            "--timestamp",
            "T",
        ],
        &mut out,
        &mut err,
    );
    assert_eq!(code, 2);
    assert!(out.is_empty());
    let v: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(&report).unwrap()).unwrap();
    assert_eq!(v["timestamp"], "T");

    let (mut out, mut err) = (Vec::new(), Vec::new());
    assert_eq!(main_with(["misracheck", "--bogus"], &mut out, &mut err), 3);
    assert_eq!(main_with(["misracheck", "--help"], &mut out, &mut err), 0);
    assert_eq!(main_with(["misracheck"], &mut out, &mut err), 3);
}
