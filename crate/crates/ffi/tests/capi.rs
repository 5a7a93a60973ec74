use std::ffi::{c_char, CStr, CString};
use std::path::PathBuf;
use std::process::Command;
use std::ptr;

use gauge_lab_ffi::*;

fn cstr(s: &str) -> CString {
    CString::new(s).unwrap()
}

fn last_error() -> String {
    unsafe { CStr::from_ptr(gl_last_error()) }.to_string_lossy().into_owned()
}

unsafe fn take_string(p: *mut c_char) -> String {
    let s = CStr::from_ptr(p).to_string_lossy().into_owned();
    gl_string_free(p);
    s
}

#[test]
fn parse_render_differentiate_evaluate() {
    unsafe {
        let mut e = ptr::null_mut();
        assert_eq!(gl_expr_parse(cstr("k*x^2*t").as_ptr(), &mut e), GlStatus::Ok);
        let mut text = ptr::null_mut();
        assert_eq!(gl_expr_render(e, &mut text), GlStatus::Ok);
        assert_eq!(take_string(text), "k * x^2 * t");

        let mut d = ptr::null_mut();
        assert_eq!(gl_expr_differentiate(e, GlVar::X, &mut d), GlStatus::Ok);
        let names = [cstr("k")];
        let name_ptrs: Vec<*const c_char> = names.iter().map(|n| n.as_ptr()).collect();
        let values = [0.5];
        let mut v = 0.0;
        assert_eq!(
            gl_expr_evaluate(d, 3.0, 2.0, name_ptrs.as_ptr(), values.as_ptr(), 1, &mut v),
            GlStatus::Ok
        );
        assert_eq!(v, 2.0 * 0.5 * 3.0 * 2.0);

        assert_eq!(
            gl_expr_evaluate(d, 3.0, 2.0, ptr::null(), ptr::null(), 0, &mut v),
            GlStatus::UnboundSymbol
        );
        assert!(last_error().contains('k'));
        gl_expr_free(d);
        gl_expr_free(e);
    }
}

#[test]
fn parse_errors_and_null_pointers() {
    unsafe {
        let mut e = ptr::null_mut();
        assert_eq!(gl_expr_parse(cstr("x + ").as_ptr(), &mut e), GlStatus::Syntax);
        assert!(e.is_null());
        assert!(last_error().contains("byte"));
        assert_eq!(gl_expr_parse(cstr("tan(x)").as_ptr(), &mut e), GlStatus::Syntax);
        assert!(last_error().contains("tan"));
        assert_eq!(gl_expr_parse(ptr::null(), &mut e), GlStatus::NullPointer);
        assert_eq!(gl_expr_parse(cstr("x").as_ptr(), ptr::null_mut()), GlStatus::NullPointer);
        gl_expr_free(ptr::null_mut());
        gl_string_free(ptr::null_mut());
    }
}

#[test]
fn classify_corpus() {
    let cases = [
        ("5", GlGaugeClass::Invariant),
        ("3*t", GlGaugeClass::Invariant),
        ("x^2 + 2*t", GlGaugeClass::Invariant),
        ("k*t^2", GlGaugeClass::DifferencePreserving),
        ("x*t", GlGaugeClass::General),
        ("sin(x)*t", GlGaugeClass::General),
    ];
    let names = [cstr("k")];
    let name_ptrs: Vec<*const c_char> = names.iter().map(|n| n.as_ptr()).collect();
    let values = [0.1];
    for (src, want) in cases {
        let mut class = GlGaugeClass::General;
        let mut proved = false;
        let s = unsafe {
            gl_classify(cstr(src).as_ptr(), name_ptrs.as_ptr(), values.as_ptr(), 1, &mut class, &mut proved)
        };
        assert_eq!(s, GlStatus::Ok, "{src}");
        assert_eq!(class, want, "{src}");
    }
}

#[test]
fn model_spectrum_and_shift() {
    unsafe {
        let mut m = ptr::null_mut();
        assert_eq!(gl_model_new(-10.0, 10.0, 256, 1.0, 1.0, 1.0, &mut m), GlStatus::Ok);
        assert_eq!(gl_model_set_constant(m, cstr("k").as_ptr(), 0.1), GlStatus::Ok);
        assert_eq!(
            gl_model_set_discretization(m, GlKinetic::FourthOrder, GlCoupling::Peierls),
            GlStatus::Ok
        );
        let mut ev = [0.0; 3];
        let phi = cstr("0.5*x^2");
        let zero = cstr("0");
        assert_eq!(gl_spectrum(m, phi.as_ptr(), zero.as_ptr(), 0.0, 3, ev.as_mut_ptr()), GlStatus::Ok);
        for (n, e) in ev.iter().enumerate() {
            assert!((e - (n as f64 + 0.5)).abs() < 1e-3);
        }
        assert_eq!(gl_spectrum(m, phi.as_ptr(), zero.as_ptr(), 0.0, 0, ev.as_mut_ptr()), GlStatus::InvalidArgument);

        let mut shift = 0.0;
        assert_eq!(gl_predicted_shift(m, cstr("k*t^2").as_ptr(), 1.0, &mut shift), GlStatus::Ok);
        assert!((shift + 0.2).abs() < 1e-15);
        assert_eq!(gl_predicted_shift(m, cstr("x*t").as_ptr(), 1.0, &mut shift), GlStatus::NotSeparable);

        let mut r = 1.0;
        assert_eq!(
            gl_covariance_residual(m, phi.as_ptr(), zero.as_ptr(), cstr("k*t^2").as_ptr(), 1.0, &mut r),
            GlStatus::Ok
        );
        assert!(r < 1e-12);
        gl_model_free(m);

        assert_eq!(gl_model_new(1.0, 0.0, 256, 1.0, 1.0, 1.0, &mut m), GlStatus::InvalidArgument);
        assert!(m.is_null());
    }
}

#[test]
fn run_experiment_through_c_abi() {
    let cfg = cstr("experiment = \"classify\"\nchis = [\"x*t\"]\nexpected = [\"General\"]\n");
    let mut json = ptr::null_mut();
    let mut passed = false;
    unsafe {
        assert_eq!(gl_run_experiment(cfg.as_ptr(), &mut json, &mut passed), GlStatus::Ok);
        assert!(passed);
        let text = take_string(json);
        assert!(text.contains("\"experiment\": \"classify\""));

        let bad = cstr("experiment = \"cross-gauge\"\nchi = \"q*t\"\n");
        assert_eq!(gl_run_experiment(bad.as_ptr(), &mut json, &mut passed), GlStatus::Config);
        assert!(last_error().contains("`q`"));
    }
}

#[test]
fn version_string() {
    let v = unsafe { CStr::from_ptr(gl_version()) };
    assert_eq!(v.to_str().unwrap(), env!("CARGO_PKG_VERSION"));
}

fn header_dir() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("include")
}

/// Compiles and runs a small C program against the header and static
/// library. Skipped when no C compiler or static library is available.
#[test]
fn c_program_links_against_static_library() {
    let exe = std::env::current_exe().unwrap();
    let profile_dir = exe.parent().and_then(|d| d.parent()).unwrap().to_path_buf();
    let lib = profile_dir.join("libgauge_lab_ffi.a");
    let cc = std::env::var("CC").unwrap_or_else(|_| "cc".into());
    if !lib.exists() || Command::new(&cc).arg("--version").output().is_err() {
        eprintln!("skipping: no static library at {} or no C compiler", lib.display());
        return;
    }
    let dir = tempfile::tempdir().unwrap();
    let src = dir.path().join("smoke.c");
    std::fs::write(
        &src,
        r#"
#include <stdio.h>
#include <string.h>
#include "gauge_lab.h"

int main(void) {
    GlExpr *e = NULL;
    if (gl_expr_parse("x^3 - t", &e) != GL_STATUS_OK) return 1;
    GlExpr *d = NULL;
    if (gl_expr_differentiate(e, GL_VAR_X, &d) != GL_STATUS_OK) return 2;
    char *text = NULL;
    gl_expr_render(d, &text);
    int ok = strcmp(text, "3 * x^2") == 0;
    gl_string_free(text);
    gl_expr_free(d);
    gl_expr_free(e);
    if (!ok) return 3;
    if (gl_expr_parse("x +", &e) != GL_STATUS_SYNTAX) return 4;
    if (strlen(gl_last_error()) == 0) return 5;
    GlGaugeClass c;
    bool proved;
    if (gl_classify("x*t", NULL, NULL, 0, &c, &proved) != GL_STATUS_OK) return 6;
    if (c != GL_GAUGE_CLASS_GENERAL) return 7;
    printf("%s\n", gl_version());
    return 0;
}
"#,
    )
    .unwrap();
    let bin = dir.path().join("smoke");
    let status = Command::new(&cc)
        .arg(&src)
        .arg("-I")
        .arg(header_dir())
        .arg(&lib)
        .args(["-lpthread", "-ldl", "-lm"])
        .arg("-o")
        .arg(&bin)
        .status()
        .unwrap();
    assert!(status.success(), "C compilation failed");
    let out = Command::new(&bin).output().unwrap();
    assert!(out.status.success(), "smoke program exited with {:?}", out.status);
    assert_eq!(String::from_utf8_lossy(&out.stdout).trim(), env!("CARGO_PKG_VERSION"));
}
