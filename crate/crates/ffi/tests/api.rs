use std::ffi::{CStr, CString};
use std::ptr;

use misracheck_ffi::*;

const SHIFT: &str =
    "#include <stdint.h>\nuint32_t f(void) {\n    uint32_t i = 1;\n    i = i << 32;\n    return i;\n}\n";

fn c(s: &str) -> CString {
    CString::new(s).unwrap()
}

struct Handles {
    cfg: *mut MisraConfig,
}

impl Handles {
    fn new(files: &[(&str, &str)]) -> Self {
        let mut cfg = ptr::null_mut();
        unsafe {
            assert_eq!(misra_config_new(&mut cfg), MisraStatus::Ok);
            for (p, body) in files {
                assert_eq!(
                    misra_config_add_file(cfg, c(p).as_ptr(), c(body).as_ptr()),
                    MisraStatus::Ok
                );
            }
        }
        Handles { cfg }
    }

    fn analyze(&self) -> *mut MisraResult {
        let mut res = ptr::null_mut();
        assert_eq!(unsafe { misra_analyze(self.cfg, &mut res) }, MisraStatus::Ok);
        res
    }
}

impl Drop for Handles {
    fn drop(&mut self) {
        unsafe { misra_config_free(self.cfg) }
    }
}

fn last_error() -> String {
    unsafe { CStr::from_ptr(misra_last_error()) }
        .to_string_lossy()
        .into_owned()
}

#[test]
fn shift_vector_through_the_c_api() {
    let h = Handles::new(&[("a.c", SHIFT)]);
    unsafe {
        assert_eq!(misra_config_add_source(h.cfg, c("a.c").as_ptr()), MisraStatus::Ok);
        let res = h.analyze();
        assert_eq!(misra_result_exit_code(res), 2);
        assert_eq!(misra_result_finding_count(res), 1);
        assert_eq!(misra_result_error_count(res), 0);
        let mut f = std::mem::MaybeUninit::<MisraFinding>::uninit();
        assert_eq!(misra_result_finding(res, 0, f.as_mut_ptr()), MisraStatus::Ok);
        let f = f.assume_init();
        assert_eq!(CStr::from_ptr(f.guideline).to_str().unwrap(), "R12.2");
        assert_eq!(CStr::from_ptr(f.category).to_str().unwrap(), "required");
        assert_eq!(
            (f.line, f.column, f.certainty, f.deviated),
            (4, 9, MisraCertainty::Definite, false)
        );
        let mut out = ptr::null();
        assert_eq!(
            misra_result_report(res, MisraReportFormat::Structured, &mut out),
            MisraStatus::Ok
        );
        let json = CStr::from_ptr(out).to_str().unwrap();
        let v: serde_json::Value = serde_json::from_str(json).unwrap();
        assert_eq!(v["findings"][0]["guideline"], "R12.2");
        misra_result_free(res);
    }
}

#[test]
fn deviation_and_pinned_timestamp() {
    let dev = "deviation DV-1 guideline=R12.2 files=a.c approver=QA date=2024-05-05 rationale=\"intended\"\n";
    let h = Handles::new(&[("a.c", SHIFT), ("dev.txt", dev)]);
    unsafe {
        misra_config_add_source(h.cfg, c("a.c").as_ptr());
        assert_eq!(
            misra_config_set_deviations(h.cfg, c("dev.txt").as_ptr()),
            MisraStatus::Ok
        );
        assert_eq!(
            misra_config_set_timestamp(h.cfg, c("2024-01-01T00:00:00Z").as_ptr()),
            MisraStatus::Ok
        );
        let res = h.analyze();
        assert_eq!(misra_result_exit_code(res), 0);
        let mut out = ptr::null();
        misra_result_report(res, MisraReportFormat::Structured, &mut out);
        let a = CStr::from_ptr(out).to_owned();
        misra_result_report(res, MisraReportFormat::Structured, &mut out);
        assert_eq!(a.as_c_str(), CStr::from_ptr(out));
        assert!(a.to_str().unwrap().contains("\"timestamp\": \"2024-01-01T00:00:00Z\""));
        misra_result_free(res);
    }
}

#[test]
fn argument_errors_have_codes_and_messages() {
    let h = Handles::new(&[]);
    unsafe {
        assert_eq!(
            misra_config_add_source(ptr::null_mut(), c("a.c").as_ptr()),
            MisraStatus::NullArgument
        );
        assert_eq!(misra_config_add_source(h.cfg, ptr::null()), MisraStatus::NullArgument);
        let bad = [0xffu8, 0];
        assert_eq!(
            misra_config_add_source(h.cfg, bad.as_ptr().cast()),
            MisraStatus::InvalidUtf8
        );
        assert_eq!(
            misra_config_set_policy(h.cfg, c("sometimes").as_ptr()),
            MisraStatus::InvalidArgument
        );
        assert!(last_error().contains("sometimes"));
        assert_eq!(
            misra_config_set_rules(h.cfg, c(",").as_ptr()),
            MisraStatus::InvalidArgument
        );
        assert_eq!(
            misra_config_set_model(h.cfg, c("int_bits").as_ptr(), c("x").as_ptr()),
            MisraStatus::InvalidArgument
        );
        assert_eq!(
            misra_config_set_model(h.cfg, c("int_bits").as_ptr(), c("16").as_ptr()),
            MisraStatus::Ok
        );
        assert_eq!(
            misra_config_add_define(h.cfg, c("9A").as_ptr(), ptr::null()),
            MisraStatus::InvalidArgument
        );
        assert_eq!(
            misra_config_set_mixed(h.cfg, c("R12.2").as_ptr(), c("maybe").as_ptr()),
            MisraStatus::InvalidArgument
        );

        // no sources is a configuration error
        let mut res = ptr::null_mut();
        assert_eq!(misra_analyze(h.cfg, &mut res), MisraStatus::Config);
        assert!(res.is_null());
        assert!(last_error().contains("no source files"));

        assert_eq!(misra_config_add_source(h.cfg, c("a.c").as_ptr()), MisraStatus::Ok);
        assert_eq!(
            misra_config_set_grp(h.cfg, c("/nonexistent/grp.txt").as_ptr()),
            MisraStatus::Ok
        );
        assert_eq!(misra_analyze(h.cfg, &mut res), MisraStatus::Io);

        assert_eq!(misra_result_exit_code(ptr::null()), -1);
        assert_eq!(misra_result_finding_count(ptr::null()), 0);
        misra_result_free(ptr::null_mut());
        misra_config_free(ptr::null_mut());
    }
}

#[test]
fn unit_errors_give_exit_code_three() {
    let h = Handles::new(&[("bad.c", "int f(void) { return 1 +; }\n")]);
    unsafe {
        misra_config_add_source(h.cfg, c("bad.c").as_ptr());
        let res = h.analyze();
        assert_eq!(misra_result_error_count(res), 1);
        assert_eq!(misra_result_exit_code(res), 3);
        misra_result_free(res);
    }
}

#[test]
fn version_is_the_crate_version() {
    let v = unsafe { CStr::from_ptr(misra_version()) };
    assert_eq!(v.to_str().unwrap(), env!("CARGO_PKG_VERSION"));
}
