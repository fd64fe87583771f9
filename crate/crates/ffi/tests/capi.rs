use std::ffi::{CStr, CString};
use std::path::PathBuf;
use std::process::Command;
use std::ptr;

use homopt_ffi::*;
use libc::{c_int, c_void};

fn last_error() -> String {
    let p = homopt_last_error_message();
    assert!(!p.is_null());
    unsafe { CStr::from_ptr(p) }.to_string_lossy().into_owned()
}

fn parse(text: &str) -> *mut HomoptNumeral {
    let c = CString::new(text).unwrap();
    let mut n = ptr::null_mut();
    assert_eq!(
        unsafe { homopt_numeral_parse(c.as_ptr(), &mut n) },
        HomoptStatus::Ok
    );
    n
}

fn text(n: *const HomoptNumeral) -> String {
    unsafe {
        let s = homopt_numeral_to_string(n);
        let out = CStr::from_ptr(s).to_string_lossy().into_owned();
        homopt_string_free(s);
        out
    }
}

#[test]
fn numeral_round_trip_and_arithmetic() {
    let a = parse("2*G + 1");
    let b = parse("G - 3");
    let mut sum = ptr::null_mut();
    let mut prod = ptr::null_mut();
    unsafe {
        assert_eq!(homopt_numeral_add(a, b, &mut sum), HomoptStatus::Ok);
        assert_eq!(homopt_numeral_mul(a, b, &mut prod), HomoptStatus::Ok);
    }
    assert_eq!(text(sum), "3*G - 2");
    assert_eq!(text(prod), "2*G^2 - 5*G - 3");
    let mut c: c_int = 0;
    let mut coef = 0.0;
    unsafe {
        assert_eq!(homopt_numeral_compare(a, b, &mut c), HomoptStatus::Ok);
        assert_eq!(
            homopt_numeral_coefficient(prod, 1, &mut coef),
            HomoptStatus::Ok
        );
        homopt_numeral_free(a);
        homopt_numeral_free(b);
        homopt_numeral_free(sum);
        homopt_numeral_free(prod);
    }
    assert_eq!(c, 1);
    assert_eq!(coef, -5.0);
}

#[test]
fn numeral_errors_are_reported() {
    let bad = CString::new("3*Q").unwrap();
    let mut n = ptr::null_mut();
    let status = unsafe { homopt_numeral_parse(bad.as_ptr(), &mut n) };
    assert_eq!(status, HomoptStatus::Config);
    assert!(n.is_null());
    assert!(last_error().contains("parse"));

    let a = parse("1");
    let b = parse("G + 1");
    let mut q = ptr::null_mut();
    let status = unsafe { homopt_numeral_div(a, b, &mut q) };
    assert_eq!(status, HomoptStatus::Numerical);
    assert!(q.is_null());
    unsafe {
        assert_eq!(
            homopt_numeral_add(ptr::null(), a, &mut q),
            HomoptStatus::NullPointer
        );
        homopt_numeral_free(a);
        homopt_numeral_free(b);
        homopt_numeral_free(ptr::null_mut());
    }
}

#[test]
fn posterior_interpolates() {
    let points = [0.0, 0.2, 0.5, 0.9, 1.0];
    let values = [-0.8, -0.9, -0.65, -0.85, -0.55];
    let mut p = ptr::null_mut();
    let status = unsafe {
        homopt_posterior_new(
            points.as_ptr(),
            values.as_ptr(),
            5,
            1,
            &0.0,
            &1.0,
            HomoptKernel::Exponential,
            5.0,
            HomoptEstimator::Mle,
            &mut p,
        )
    };
    assert_eq!(status, HomoptStatus::Ok);
    let (mut mu, mut s2) = (0.0, 0.0);
    let (mut m, mut v) = (0.0, 0.0);
    unsafe {
        assert_eq!(
            homopt_posterior_parameters(p, &mut mu, &mut s2),
            HomoptStatus::Ok
        );
        assert_eq!(
            homopt_posterior_moments(p, &0.5, 1, &mut m, &mut v),
            HomoptStatus::Ok
        );
    }
    assert!((mu + 0.741_895_204_469_134_98).abs() < 1e-12);
    assert!((s2 - 0.032_336_910_989_003_81).abs() < 1e-12);
    assert_eq!(m, -0.65);
    assert_eq!(v, 0.0);
    unsafe {
        assert_eq!(
            homopt_posterior_moments(p, [0.5, 0.5].as_ptr(), 2, &mut m, &mut v),
            HomoptStatus::InvalidArgument
        );
        homopt_posterior_free(p);
    }
}

#[test]
fn duplicate_points_are_rejected() {
    let points = [0.3, 0.3];
    let values = [1.0, 2.0];
    let mut p = ptr::null_mut();
    let status = unsafe {
        homopt_posterior_new(
            points.as_ptr(),
            values.as_ptr(),
            2,
            1,
            &0.0,
            &1.0,
            HomoptKernel::Exponential,
            5.0,
            HomoptEstimator::Mle,
            &mut p,
        )
    };
    assert_eq!(status, HomoptStatus::InvalidArgument);
    assert!(p.is_null());
}

extern "C" fn shifted_square(x: *const f64, dim: usize, user_data: *mut c_void) -> f64 {
    let x = unsafe { std::slice::from_raw_parts(x, dim) };
    let calls = unsafe { &mut *(user_data as *mut usize) };
    *calls += 1;
    (x[0] - 0.3).powi(2)
}

#[test]
fn callback_run_matches_builtin() {
    let mut calls = 0usize;
    let mut t = ptr::null_mut();
    let status = unsafe {
        homopt_run_callback(
            HomoptAlgorithm::P,
            Some(shifted_square),
            &mut calls as *mut usize as *mut c_void,
            &0.0,
            &1.0,
            1,
            0.1,
            8,
            &mut t,
        )
    };
    assert_eq!(status, HomoptStatus::Ok);
    assert_eq!(calls, 13);
    let name = CString::new("quadratic").unwrap();
    let mut u = ptr::null_mut();
    let status = unsafe { homopt_run_builtin(HomoptAlgorithm::P, name.as_ptr(), 0.1, 8, &mut u) };
    assert_eq!(status, HomoptStatus::Ok);
    unsafe {
        assert_eq!(homopt_trace_len(t), 13);
        assert_eq!(homopt_trace_len(u), 13);
        let mut rt = std::mem::zeroed::<HomoptTraceRow>();
        let mut ru = std::mem::zeroed::<HomoptTraceRow>();
        for i in 0..13 {
            let mut x = [f64::NAN];
            assert_eq!(
                homopt_trace_row(t, i, &mut rt, x.as_mut_ptr(), 1),
                HomoptStatus::Ok
            );
            assert_eq!(
                homopt_trace_row(u, i, &mut ru, ptr::null_mut(), 0),
                HomoptStatus::Ok
            );
            // The built-in adds 1 to the same function, so the choices coincide.
            assert_eq!(rt.grid_index, ru.grid_index);
            assert!((ru.y - rt.y - 1.0).abs() < 1e-15);
            assert!(x[0].is_finite());
            if i < 5 {
                assert_eq!(rt.iter, 0);
                assert!(rt.criterion.is_nan());
            }
        }
        assert_eq!(
            homopt_trace_row(t, 13, &mut rt, ptr::null_mut(), 0),
            HomoptStatus::InvalidArgument
        );
        let json = homopt_trace_to_json(t);
        assert!(CStr::from_ptr(json).to_str().unwrap().contains("\"rows\""));
        homopt_string_free(json);
        let dir = tempfile::tempdir().unwrap();
        let path = CString::new(dir.path().join("t.csv").to_str().unwrap()).unwrap();
        assert_eq!(homopt_trace_write_csv(t, path.as_ptr()), HomoptStatus::Ok);
        homopt_trace_free(t);
        homopt_trace_free(u);
    }
}

#[test]
fn homogeneity_check_through_c() {
    let name = CString::new("sin3x").unwrap();
    let a = CString::new("3.9765").unwrap();
    let b = CString::new("-7.3").unwrap();
    let mut passed: c_int = -1;
    let status = unsafe {
        homopt_homogeneity_check(
            HomoptAlgorithm::Ei,
            name.as_ptr(),
            a.as_ptr(),
            b.as_ptr(),
            6,
            &mut passed,
        )
    };
    assert_eq!(status, HomoptStatus::Ok);
    assert_eq!(passed, 1);
    let a = CString::new("G").unwrap();
    let b = CString::new("G^2").unwrap();
    let status = unsafe {
        homopt_homogeneity_check(
            HomoptAlgorithm::P,
            name.as_ptr(),
            a.as_ptr(),
            b.as_ptr(),
            6,
            &mut passed,
        )
    };
    assert_eq!(status, HomoptStatus::Ok);
    assert_eq!(passed, 1);
    let a = CString::new("-2").unwrap();
    let status = unsafe {
        homopt_homogeneity_check(
            HomoptAlgorithm::P,
            name.as_ptr(),
            a.as_ptr(),
            b.as_ptr(),
            6,
            &mut passed,
        )
    };
    assert_eq!(status, HomoptStatus::Config);
}

#[test]
fn header_compiles_and_links() {
    let root = PathBuf::from(env!("CARGO_MANIFEST_DIR"));
    let header = root.join("include/homopt.h");
    assert!(header.is_file(), "build script writes the header");
    let Ok(cc) = Command::new("cc").arg("--version").output() else {
        eprintln!("no C compiler; skipping");
        return;
    };
    assert!(cc.status.success());
    let dir = tempfile::tempdir().unwrap();
    let src = dir.path().join("smoke.c");
    std::fs::write(
        &src,
        r#"#include "homopt.h"
#include <string.h>
int main(void) {
    HomoptNumeral *n = NULL;
    if (homopt_numeral_parse("3*G^2 + 1.5", &n) != HOMOPT_STATUS_OK) return 1;
    char *s = homopt_numeral_to_string(n);
    int ok = strcmp(s, "3*G^2 + 1.5") == 0;
    homopt_string_free(s);
    homopt_numeral_free(n);
    return ok ? 0 : 2;
}
"#,
    )
    .unwrap();
    let status = Command::new("cc")
        .args(["-std=c99", "-Wall", "-Werror", "-fsyntax-only", "-I"])
        .arg(root.join("include"))
        .arg(&src)
        .status()
        .unwrap();
    assert!(status.success(), "header does not compile");

    // Link against the static library when cargo has produced it.
    let target = root.join("../../target/debug/libhomopt_ffi.a");
    if !target.is_file() {
        return;
    }
    let exe = dir.path().join("smoke");
    let out = Command::new("cc")
        .arg("-I")
        .arg(root.join("include"))
        .arg(&src)
        .arg(&target)
        .args(["-lpthread", "-ldl", "-lm", "-o"])
        .arg(&exe)
        .output()
        .unwrap();
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    assert!(Command::new(&exe).status().unwrap().success());
}
