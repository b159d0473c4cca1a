use std::ffi::{CStr, CString};
use std::path::PathBuf;
use std::ptr;

use hartogs_ffi::*;

fn domain(m: i64, l: i64, n: u32) -> *mut HgDomain {
    let mut d = ptr::null_mut();
    assert_eq!(unsafe { hg_domain_new(m, l, n, &mut d) }, HgStatus::Ok);
    assert!(!d.is_null());
    d
}

fn last_error() -> String {
    let p = hg_last_error();
    assert!(!p.is_null());
    unsafe { CStr::from_ptr(p) }.to_string_lossy().into_owned()
}

fn cx(re: f64, im: f64) -> HgComplex {
    HgComplex { re, im }
}

#[test]
fn sharp_ranges() {
    for (m, l, n, lo, hi) in [(1, 1, 1, (4, 3), (4, 1)), (3, 2, 1, (5, 3), (5, 2)), (1, 1, 2, (3, 2), (3, 1))] {
        let d = domain(m, l, n);
        let (mut a, mut b) = (HgRational { num: 0, den: 0 }, HgRational { num: 0, den: 0 });
        assert_eq!(unsafe { hg_sharp_range(d, &mut a, &mut b) }, HgStatus::Ok);
        assert_eq!((a.num, a.den), lo);
        assert_eq!((b.num, b.den), hi);
        unsafe { hg_domain_free(d) };
    }
}

#[test]
fn volume_and_norms() {
    let d = domain(1, 1, 1);
    let mut v = 0.0;
    assert_eq!(unsafe { hg_domain_volume(d, &mut v) }, HgStatus::Ok);
    let pi = std::f64::consts::PI;
    assert!((v - pi * pi / 2.0).abs() < 1e-13);
    // ||1||^2 is the volume; w^-2 is not square integrable
    let alpha = [0u64];
    assert_eq!(unsafe { hg_monomial_norm_sq(d, alpha.as_ptr(), 1, 0, &mut v) }, HgStatus::Ok);
    assert!((v - pi * pi / 2.0).abs() < 1e-13);
    assert_eq!(unsafe { hg_monomial_norm_sq(d, alpha.as_ptr(), 1, -2, &mut v) }, HgStatus::Ok);
    assert!(v.is_infinite());
    assert_eq!(unsafe { hg_monomial_norm_sq(d, alpha.as_ptr(), 0, 0, &mut v) }, HgStatus::Validation);
    unsafe { hg_domain_free(d) };
}

#[test]
fn classical_kernel() {
    let d = domain(1, 1, 1);
    let mut k = ptr::null_mut();
    assert_eq!(unsafe { hg_kernel_new(d, &mut k) }, HgStatus::Ok);
    let pi2 = std::f64::consts::PI.powi(2);
    let mut out = cx(0.0, 0.0);
    assert_eq!(unsafe { hg_kernel_closed(k, cx(0.0, 0.0), cx(0.5, 0.0), &mut out) }, HgStatus::Ok);
    assert!((out.re - 8.0 / pi2).abs() < 1e-14 && out.im == 0.0);
    let mut bound = 0.0;
    assert_eq!(unsafe { hg_kernel_bound(k, cx(0.0, 0.0), cx(0.5, 0.0), &mut bound) }, HgStatus::Ok);
    assert!((bound - 8.0).abs() < 1e-13);

    let mut series = cx(0.0, 0.0);
    let mut terms = 0usize;
    let (a, b) = (cx(0.1, 0.05), cx(0.4, -0.2));
    assert_eq!(unsafe { hg_kernel_series(d, a, b, 1e-13, &mut series, &mut terms) }, HgStatus::Ok);
    assert_eq!(unsafe { hg_kernel_closed(k, a, b, &mut out) }, HgStatus::Ok);
    assert!(terms > 0);
    assert!(((series.re - out.re).powi(2) + (series.im - out.im).powi(2)).sqrt() < 1e-10 * out.re.hypot(out.im));

    // point form: a = z conj(s), b = w conj(t)
    let (xz, xw, yz, yw) = ([cx(0.1, 0.0)], cx(0.5, 0.0), [cx(0.2, 0.1)], cx(0.6, 0.1));
    let mut point = cx(0.0, 0.0);
    assert_eq!(unsafe { hg_kernel_eval(k, xz.as_ptr(), xw, yz.as_ptr(), yw, &mut point) }, HgStatus::Ok);
    let a = cx(0.1 * 0.2, -0.1 * 0.1);
    let b = cx(0.5 * 0.6, -0.5 * 0.1);
    assert_eq!(unsafe { hg_kernel_closed(k, a, b, &mut out) }, HgStatus::Ok);
    assert!((point.re - out.re).abs() < 1e-12 * out.re.abs() && (point.im - out.im).abs() < 1e-12 * out.re.abs());

    assert_eq!(unsafe { hg_kernel_closed(k, cx(0.0, 0.0), cx(1.0, 0.0), &mut out) }, HgStatus::Numerical);
    assert!(last_error().contains("singular"));
    unsafe {
        hg_kernel_free(k);
        hg_domain_free(d);
    }
}

#[test]
fn counterexample_data() {
    let d = domain(3, 2, 1);
    let (mut j0, mut e1, mut e2) = (0u64, 0u64, 0i64);
    let mut t = HgRational { num: 0, den: 0 };
    assert_eq!(unsafe { hg_counterexample(d, &mut j0, &mut e1, &mut e2, &mut t) }, HgStatus::Ok);
    assert_eq!((j0, e1, e2, t.num, t.den), (1, 1, -2, 5, 2));
    unsafe { hg_domain_free(d) };
}

#[test]
fn json_reports() {
    let d = domain(1, 1, 1);
    let mut s = ptr::null_mut();
    assert_eq!(unsafe { hg_range_report_json(d, &mut s) }, HgStatus::Ok);
    let text = unsafe { CStr::from_ptr(s) }.to_str().unwrap().to_owned();
    unsafe { hg_string_free(s) };
    assert!(text.contains(r#""sharp_range":{"lo":"4/3","hi":"4"}"#), "{text}");

    assert_eq!(unsafe { hg_counterexample_report_json(d, 12, &mut s) }, HgStatus::Ok);
    let text = unsafe { CStr::from_ptr(s) }.to_str().unwrap().to_owned();
    unsafe { hg_string_free(s) };
    assert!(text.contains(r#""threshold":"4""#), "{text}");
    assert!(text.contains(r#""verdict":"Divergent""#), "{text}");
    unsafe { hg_domain_free(d) };
}

#[test]
fn irrational_domains() {
    let g = CString::new("sqrt2").unwrap();
    let mut d = ptr::null_mut();
    assert_eq!(unsafe { hg_domain_new_gamma(g.as_ptr(), 1, 60, &mut d) }, HgStatus::Ok);
    let mut v = 0.0;
    assert_eq!(unsafe { hg_domain_volume(d, &mut v) }, HgStatus::Ok);
    let s2 = 2f64.sqrt();
    assert!((v - std::f64::consts::PI.powi(2) * s2 / (1.0 + s2)).abs() < 1e-13);
    let mut out = cx(0.0, 0.0);
    assert_eq!(unsafe { hg_kernel_series(d, cx(0.0, 0.0), cx(0.3, 0.0), 1e-12, &mut out, ptr::null_mut()) }, HgStatus::Ok);
    assert!(out.re > 0.0);
    let mut lo = HgRational { num: 0, den: 0 };
    let mut hi = lo;
    assert_eq!(unsafe { hg_sharp_range(d, &mut lo, &mut hi) }, HgStatus::Validation);
    let mut k = ptr::null_mut();
    assert_eq!(unsafe { hg_kernel_new(d, &mut k) }, HgStatus::Validation);
    assert!(k.is_null());
    unsafe { hg_domain_free(d) };
}

#[test]
fn invalid_input() {
    let mut d = ptr::null_mut();
    assert_eq!(unsafe { hg_domain_new(0, 1, 1, &mut d) }, HgStatus::Validation);
    assert!(d.is_null());
    assert!(!last_error().is_empty());
    assert_eq!(unsafe { hg_domain_new(1, 1, 1, ptr::null_mut()) }, HgStatus::NullPointer);
    let mut v = 0.0;
    assert_eq!(unsafe { hg_domain_volume(ptr::null(), &mut v) }, HgStatus::NullPointer);
    assert!(last_error().contains("domain"));
    let bad = CString::new("not-a-number").unwrap();
    assert_eq!(unsafe { hg_domain_new_gamma(bad.as_ptr(), 1, 60, &mut d) }, HgStatus::Validation);
    unsafe {
        hg_domain_free(ptr::null_mut());
        hg_kernel_free(ptr::null_mut());
        hg_string_free(ptr::null_mut());
    }
    let version = unsafe { CStr::from_ptr(hg_version()) }.to_str().unwrap();
    assert_eq!(version, env!("CARGO_PKG_VERSION"));
}

#[test]
fn header_is_valid_c() {
    let dir = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("include");
    let header = std::fs::read_to_string(dir.join("hartogs.h")).unwrap();
    for name in ["hg_domain_new", "hg_kernel_closed", "hg_last_error", "hg_string_free", "HG_STATUS_NUMERICAL"] {
        assert!(header.contains(name), "{name} missing from header");
    }
    let Ok(cc) = which_cc() else { return };
    let src = tempfile_path("hartogs_header_check.c");
    std::fs::write(&src, "#include \"hartogs.h\"\nint main(void) { HgDomain *d = 0; return hg_domain_new(1, 1, 1, &d); }\n").unwrap();
    let status = std::process::Command::new(cc)
        .args(["-std=c99", "-Wall", "-Werror", "-fsyntax-only", "-I"])
        .arg(&dir)
        .arg(&src)
        .status()
        .unwrap();
    assert!(status.success());
}

fn which_cc() -> Result<String, ()> {
    for cc in ["cc", "gcc", "clang"] {
        if std::process::Command::new(cc).arg("--version").output().is_ok() {
            return Ok(cc.into());
        }
    }
    Err(())
}

fn tempfile_path(name: &str) -> PathBuf {
    std::env::temp_dir().join(format!("{}_{name}", std::process::id()))
}
