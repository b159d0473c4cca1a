//! C ABI for the `hartogs` toolkit.
//!
//! Domains and kernels are opaque handles created by `hg_*_new` and released
//! by the matching `hg_*_free`. Every fallible function returns an
//! [`HgStatus`]; on failure the message is available from [`hg_last_error`]
//! until the next failing call on the same thread. Strings returned through
//! out-parameters are owned by the caller and released with
//! [`hg_string_free`].

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use hartogs::geometry::{parse_gamma, volume};
use hartogs::kernel::{kernel_bound, kernel_series_ab, ClosedKernel, KernelEvalOptions};
use hartogs::monomial::{monomial_norm_sq, FullIndex, NormSq};
use hartogs::range::{counterexample, sharp_range};
use hartogs::{DomainSpec, Error, Point};
use num_complex::Complex64;
use num_traits::ToPrimitive;

/// Status codes. Zero is success.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum HgStatus {
    Ok = 0,
    /// A required pointer argument was null.
    NullPointer = 1,
    /// Invalid input: parameters, parse errors, inadmissible indices.
    Validation = 2,
    /// Numerical failure: singular kernel, truncation, non-finite values.
    Numerical = 3,
    /// A value does not fit the C type (for example a rational in `int64_t`).
    Overflow = 4,
    /// Internal panic caught at the boundary.
    Panic = 5,
}

/// A complex number.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HgComplex {
    pub re: f64,
    pub im: f64,
}

/// An exact rational `num / den` with `den > 0`.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct HgRational {
    pub num: i64,
    pub den: i64,
}

/// Opaque domain handle.
pub struct HgDomain {
    inner: DomainSpec,
}

/// Opaque closed-form kernel handle (rational exponents only).
pub struct HgKernel {
    inner: ClosedKernel,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: String) {
    let c = CString::new(msg.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

enum Failure {
    Null(&'static str),
    Core(Error),
    Overflow(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Core(e)
    }
}

fn guard<F: FnOnce() -> Result<(), Failure>>(f: F) -> HgStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => HgStatus::Ok,
        Ok(Err(Failure::Null(what))) => {
            set_error(format!("null pointer: {what}"));
            HgStatus::NullPointer
        }
        Ok(Err(Failure::Core(e))) => {
            let status = if e.is_validation() { HgStatus::Validation } else { HgStatus::Numerical };
            set_error(e.to_string());
            status
        }
        Ok(Err(Failure::Overflow(msg))) => {
            set_error(msg);
            HgStatus::Overflow
        }
        Err(_) => {
            set_error("internal panic".into());
            HgStatus::Panic
        }
    }
}

unsafe fn reference<'a, T>(p: *const T, what: &'static str) -> Result<&'a T, Failure> {
    p.as_ref().ok_or(Failure::Null(what))
}

unsafe fn write<T>(p: *mut T, value: T, what: &'static str) -> Result<(), Failure> {
    if p.is_null() {
        return Err(Failure::Null(what));
    }
    p.write(value);
    Ok(())
}

fn c(z: HgComplex) -> Complex64 {
    Complex64::new(z.re, z.im)
}

fn hg(z: Complex64) -> HgComplex {
    HgComplex { re: z.re, im: z.im }
}

fn rational(num: &impl ToPrimitive, den: &impl ToPrimitive) -> Result<HgRational, Failure> {
    match (num.to_i64(), den.to_i64()) {
        (Some(num), Some(den)) => Ok(HgRational { num, den }),
        _ => Err(Failure::Overflow("rational does not fit in int64_t".into())),
    }
}

fn c_string(s: String, out: *mut *mut c_char) -> Result<(), Failure> {
    let s = CString::new(s).map_err(|_| Failure::Overflow("string contains NUL".into()))?;
    unsafe { write(out, s.into_raw(), "out") }
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn hg_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Message of the last failure on this thread, or null. Valid until the next
/// failing call on the same thread.
#[no_mangle]
pub extern "C" fn hg_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |s| s.as_ptr()))
}

/// Domain with `gamma = m / l` (reduced internally) and `z` in `C^n`.
///
/// # Safety
/// `out` must be a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn hg_domain_new(m: i64, l: i64, n: u32, out: *mut *mut HgDomain) -> HgStatus {
    guard(|| {
        let inner = DomainSpec::from_ml(m, l, n)?;
        write(out, Box::into_raw(Box::new(HgDomain { inner })), "out")
    })
}

/// Domain with `gamma` given as a token (`sqrt2`, `pi`, `e`, `golden`,
/// `sqrt(k)`), fraction or decimal, carried to `digits` decimal digits.
///
/// # Safety
/// `gamma` must be a NUL-terminated string and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn hg_domain_new_gamma(
    gamma: *const c_char,
    n: u32,
    digits: u32,
    out: *mut *mut HgDomain,
) -> HgStatus {
    guard(|| {
        if gamma.is_null() {
            return Err(Failure::Null("gamma"));
        }
        let text = CStr::from_ptr(gamma)
            .to_str()
            .map_err(|_| Failure::Core(Error::Parse("gamma is not UTF-8".into())))?;
        let inner = DomainSpec::new(parse_gamma(text, digits)?, n)?;
        write(out, Box::into_raw(Box::new(HgDomain { inner })), "out")
    })
}

/// Releases a domain. Null is ignored.
///
/// # Safety
/// `domain` must come from `hg_domain_new*` and not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn hg_domain_free(domain: *mut HgDomain) {
    if !domain.is_null() {
        drop(Box::from_raw(domain));
    }
}

/// Euclidean volume of the domain.
///
/// # Safety
/// Pointers must be valid.
#[no_mangle]
pub unsafe extern "C" fn hg_domain_volume(domain: *const HgDomain, out: *mut f64) -> HgStatus {
    guard(|| {
        let d = reference(domain, "domain")?;
        write(out, volume(&d.inner), "out")
    })
}

/// Squared `L^2` norm of `z^alpha w^beta`; `alpha` has `n` entries. Writes
/// `+inf` when the monomial is not square integrable.
///
/// # Safety
/// `alpha` must point to `alpha_len` values; other pointers must be valid.
#[no_mangle]
pub unsafe extern "C" fn hg_monomial_norm_sq(
    domain: *const HgDomain,
    alpha: *const u64,
    alpha_len: usize,
    beta: i64,
    out: *mut f64,
) -> HgStatus {
    guard(|| {
        let d = reference(domain, "domain")?;
        if alpha.is_null() && alpha_len > 0 {
            return Err(Failure::Null("alpha"));
        }
        let alpha = if alpha_len == 0 { Vec::new() } else { std::slice::from_raw_parts(alpha, alpha_len).to_vec() };
        let value = match monomial_norm_sq(&d.inner, &FullIndex::new(alpha, beta))? {
            NormSq::Finite(v) => v,
            NormSq::NotInA2 => f64::INFINITY,
        };
        write(out, value, "out")
    })
}

/// Sharp open interval of `p` for which the projection is `L^p` bounded.
///
/// # Safety
/// Pointers must be valid.
#[no_mangle]
pub unsafe extern "C" fn hg_sharp_range(
    domain: *const HgDomain,
    lo: *mut HgRational,
    hi: *mut HgRational,
) -> HgStatus {
    guard(|| {
        let d = reference(domain, "domain")?;
        let exp = rational_exponent(&d.inner)?;
        let r = sharp_range(&exp, d.inner.n());
        let a = rational(r.lower.numer(), r.lower.denom())?;
        let b = rational(r.upper.numer(), r.upper.denom())?;
        write(lo, a, "lo")?;
        write(hi, b, "hi")
    })
}

fn rational_exponent(d: &DomainSpec) -> Result<hartogs::RationalExponent, Failure> {
    d.exponent()
        .copied()
        .ok_or_else(|| Failure::Core(Error::Domain(format!("gamma = {} is not rational", d.gamma().label()))))
}

/// Critical residue `j0`, image exponents `(eta1, eta2)` of `P f` for the
/// bounded counterexample `f`, and the exact threshold `p`.
///
/// # Safety
/// Pointers must be valid.
#[no_mangle]
pub unsafe extern "C" fn hg_counterexample(
    domain: *const HgDomain,
    j0: *mut u64,
    eta1: *mut u64,
    eta2: *mut i64,
    threshold: *mut HgRational,
) -> HgStatus {
    guard(|| {
        let d = reference(domain, "domain")?;
        let c = counterexample(&rational_exponent(&d.inner)?, d.inner.n())?;
        let t = rational(c.threshold.numer(), c.threshold.denom())?;
        write(j0, c.j0, "j0")?;
        write(eta1, c.eta.0, "eta1")?;
        write(eta2, c.eta.1, "eta2")?;
        write(threshold, t, "threshold")
    })
}

/// JSON report of the sharp range and Schur window, as printed by
/// `hartogs range`. Free the result with [`hg_string_free`].
///
/// # Safety
/// Pointers must be valid.
#[no_mangle]
pub unsafe extern "C" fn hg_range_report_json(domain: *const HgDomain, out: *mut *mut c_char) -> HgStatus {
    guard(|| {
        let d = reference(domain, "domain")?;
        c_string(hartogs::cli::range_value(&d.inner)?.to_string(), out)
    })
}

/// JSON counterexample report with its truncated-integral certificate, as
/// printed by `hartogs counterexample`. Free with [`hg_string_free`].
///
/// # Safety
/// Pointers must be valid.
#[no_mangle]
pub unsafe extern "C" fn hg_counterexample_report_json(
    domain: *const HgDomain,
    cutoffs: u32,
    out: *mut *mut c_char,
) -> HgStatus {
    guard(|| {
        let d = reference(domain, "domain")?;
        c_string(hartogs::cli::counterexample_value(&d.inner, cutoffs, None)?.to_string(), out)
    })
}

/// Releases a string returned by this library. Null is ignored.
///
/// # Safety
/// `s` must come from this library and not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn hg_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}

/// Closed-form kernel for a domain with rational exponent.
///
/// # Safety
/// Pointers must be valid.
#[no_mangle]
pub unsafe extern "C" fn hg_kernel_new(domain: *const HgDomain, out: *mut *mut HgKernel) -> HgStatus {
    guard(|| {
        let d = reference(domain, "domain")?;
        let inner = ClosedKernel::new(&rational_exponent(&d.inner)?, d.inner.n())?;
        write(out, Box::into_raw(Box::new(HgKernel { inner })), "out")
    })
}

/// Releases a kernel. Null is ignored.
///
/// # Safety
/// `kernel` must come from `hg_kernel_new` and not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn hg_kernel_free(kernel: *mut HgKernel) {
    if !kernel.is_null() {
        drop(Box::from_raw(kernel));
    }
}

/// Kernel as a function of `a = z . conj(s)` and `b = w conj(t)`.
///
/// # Safety
/// Pointers must be valid.
#[no_mangle]
pub unsafe extern "C" fn hg_kernel_closed(
    kernel: *const HgKernel,
    a: HgComplex,
    b: HgComplex,
    out: *mut HgComplex,
) -> HgStatus {
    guard(|| {
        let k = reference(kernel, "kernel")?;
        write(out, hg(k.inner.eval_ab(c(a), c(b))?), "out")
    })
}

/// Kernel at the points `x = (xz, xw)` and `y = (yz, yw)`; `xz` and `yz`
/// hold `n` entries each.
///
/// # Safety
/// `xz` and `yz` must point to `n` values; other pointers must be valid.
#[no_mangle]
pub unsafe extern "C" fn hg_kernel_eval(
    kernel: *const HgKernel,
    xz: *const HgComplex,
    xw: HgComplex,
    yz: *const HgComplex,
    yw: HgComplex,
    out: *mut HgComplex,
) -> HgStatus {
    guard(|| {
        let k = reference(kernel, "kernel")?;
        let n = k.inner.n() as usize;
        if xz.is_null() || yz.is_null() {
            return Err(Failure::Null("xz/yz"));
        }
        let point = |z: *const HgComplex, w: HgComplex| {
            let z: Vec<Complex64> = std::slice::from_raw_parts(z, n).iter().copied().map(c).collect();
            Point::new(&z, c(w))
        };
        write(out, hg(k.inner.eval(&point(xz, xw), &point(yz, yw))?), "out")
    })
}

/// Upper bound `|b|^e / (|1 - b|^2 |b^l - a^m|^(n+1))` for the kernel.
///
/// # Safety
/// Pointers must be valid.
#[no_mangle]
pub unsafe extern "C" fn hg_kernel_bound(
    kernel: *const HgKernel,
    a: HgComplex,
    b: HgComplex,
    out: *mut f64,
) -> HgStatus {
    guard(|| {
        let k = reference(kernel, "kernel")?;
        write(out, kernel_bound(k.inner.exponent(), k.inner.n(), c(a), c(b), None)?, "out")
    })
}

/// Kernel by its monomial series to relative tolerance `rel_tol`; works for
/// irrational exponents. `terms` (optional) receives the number of terms.
///
/// # Safety
/// `domain` and `out` must be valid; `terms` may be null.
#[no_mangle]
pub unsafe extern "C" fn hg_kernel_series(
    domain: *const HgDomain,
    a: HgComplex,
    b: HgComplex,
    rel_tol: f64,
    out: *mut HgComplex,
    terms: *mut usize,
) -> HgStatus {
    guard(|| {
        let d = reference(domain, "domain")?;
        let opts = KernelEvalOptions {
            rel_tol,
            ..KernelEvalOptions::default()
        };
        let s = kernel_series_ab(&d.inner, c(a), c(b), &opts, None)?;
        write(out, hg(s.value), "out")?;
        if !terms.is_null() {
            terms.write(s.terms);
        }
        Ok(())
    })
}
