//! C ABI over `trace-forms`.
//!
//! Every fallible entry point returns a [`TfStatus`] code. On failure the
//! message is kept per thread and can be read with [`tf_last_error`].
//! Objects cross the boundary as opaque handles that the caller releases
//! with the matching `_free` function.

use std::cell::RefCell;
use std::ffi::{c_char, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use num_complex::Complex64;
use trace_forms::field::{field_cap, is_prime};
use trace_forms::sato_tate::{discrepancy, st_cdf};
use trace_forms::setcomb::{mult_energy, quad_d};
use trace_forms::trace::sym_eval;
use trace_forms::{bilinear::bilinear_form, kl_bulk, kl_direct, CoeffVec, Error, ErrorClass, FieldContext, SubsetFp, TraceTable};

pub const TF_OK: i32 = 0;
pub const TF_ERR_NULL: i32 = 1;
pub const TF_ERR_VALIDATION: i32 = 2;
pub const TF_ERR_PRECONDITION: i32 = 3;
pub const TF_ERR_COST_CAP: i32 = 4;
pub const TF_ERR_PANIC: i32 = 5;

/// Status code returned by fallible functions.
pub type TfStatus = i32;

/// Prime field context.
pub struct TfField(FieldContext);

/// Complex-valued table indexed by `0..p`.
pub struct TfTraceTable(TraceTable);

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: String) {
    let c = CString::new(msg.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

fn code_of(e: &Error) -> TfStatus {
    match e.class() {
        ErrorClass::Validation => TF_ERR_VALIDATION,
        ErrorClass::Precondition => TF_ERR_PRECONDITION,
        ErrorClass::CostCap => TF_ERR_COST_CAP,
    }
}

enum Fail {
    Null(&'static str),
    Engine(Error),
}

impl From<Error> for Fail {
    fn from(e: Error) -> Self {
        Fail::Engine(e)
    }
}

fn guard(f: impl FnOnce() -> Result<(), Fail>) -> TfStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => TF_OK,
        Ok(Err(Fail::Null(what))) => {
            set_error(format!("null pointer: {what}"));
            TF_ERR_NULL
        }
        Ok(Err(Fail::Engine(e))) => {
            set_error(e.to_string());
            code_of(&e)
        }
        Err(_) => {
            set_error("internal panic".into());
            TF_ERR_PANIC
        }
    }
}

unsafe fn as_ref<'a, T>(p: *const T, what: &'static str) -> Result<&'a T, Fail> {
    p.as_ref().ok_or(Fail::Null(what))
}

unsafe fn as_mut<'a, T>(p: *mut T, what: &'static str) -> Result<&'a mut T, Fail> {
    p.as_mut().ok_or(Fail::Null(what))
}

unsafe fn slice<'a, T>(p: *const T, len: usize, what: &'static str) -> Result<&'a [T], Fail> {
    if len == 0 {
        return Ok(&[]);
    }
    if p.is_null() {
        return Err(Fail::Null(what));
    }
    Ok(std::slice::from_raw_parts(p, len))
}

fn check_prime(p: u32) -> Result<(), Error> {
    let (p, cap) = (u64::from(p), field_cap());
    if p < 3 || p % 2 == 0 {
        Err(Error::EvenOrTooSmall(p))
    } else if !is_prime(p) {
        Err(Error::NotPrime(p))
    } else if p > cap {
        Err(Error::TooLarge { p, cap })
    } else {
        Ok(())
    }
}

fn subset(p: u32, xs: &[u32]) -> Result<SubsetFp, Error> {
    SubsetFp::new(p, xs.to_vec())
}

/// Message of the last failure on this thread, or null. Valid until the next failing call.
#[no_mangle]
pub extern "C" fn tf_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |c| c.as_ptr()))
}

/// Static description of a status code.
#[no_mangle]
pub extern "C" fn tf_status_name(code: TfStatus) -> *const c_char {
    let s: &'static [u8] = match code {
        TF_OK => b"ok\0",
        TF_ERR_NULL => b"null pointer\0",
        TF_ERR_VALIDATION => b"validation error\0",
        TF_ERR_PRECONDITION => b"precondition failed\0",
        TF_ERR_COST_CAP => b"cost cap exceeded\0",
        TF_ERR_PANIC => b"internal panic\0",
        _ => b"unknown status\0",
    };
    s.as_ptr().cast()
}

/// Builds the context for `F_p`. On success `*out` owns a new handle.
///
/// # Safety
/// `out` must be null or valid for writes.
#[no_mangle]
pub unsafe extern "C" fn tf_field_new(p: u64, out: *mut *mut TfField) -> TfStatus {
    guard(|| {
        let out = as_mut(out, "out")?;
        *out = Box::into_raw(Box::new(TfField(FieldContext::new(p)?)));
        Ok(())
    })
}

/// # Safety
/// `f` must be null or a handle from [`tf_field_new`] not yet freed.
#[no_mangle]
pub unsafe extern "C" fn tf_field_free(f: *mut TfField) {
    if !f.is_null() {
        drop(Box::from_raw(f));
    }
}

/// The prime, or 0 for a null handle.
///
/// # Safety
/// `f` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn tf_field_prime(f: *const TfField) -> u32 {
    f.as_ref().map_or(0, |f| f.0.p())
}

/// The smallest primitive root, or 0 for a null handle.
///
/// # Safety
/// `f` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn tf_field_generator(f: *const TfField) -> u32 {
    f.as_ref().map_or(0, |f| f.0.generator())
}

/// Normalized `Kl_k(a; p)` for a single `a`, by direct enumeration.
///
/// # Safety
/// `f` must be a live handle; `re` and `im` must be valid for writes.
#[no_mangle]
pub unsafe extern "C" fn tf_kl_direct(f: *const TfField, a: u32, k: u32, re: *mut f64, im: *mut f64) -> TfStatus {
    guard(|| {
        let f = as_ref(f, "field")?;
        let (re, im) = (as_mut(re, "re")?, as_mut(im, "im")?);
        let z = kl_direct(&f.0, a, k as usize)?;
        *re = z.re;
        *im = z.im;
        Ok(())
    })
}

/// Full table `a -> Kl_k(a; p)`.
///
/// # Safety
/// `f` must be a live handle; `out` must be valid for writes.
#[no_mangle]
pub unsafe extern "C" fn tf_kl_bulk(f: *const TfField, k: u32, out: *mut *mut TfTraceTable) -> TfStatus {
    guard(|| {
        let f = as_ref(f, "field")?;
        let out = as_mut(out, "out")?;
        *out = Box::into_raw(Box::new(TfTraceTable(kl_bulk(&f.0, k as usize, None)?)));
        Ok(())
    })
}

/// # Safety
/// `t` must be null or a handle not yet freed.
#[no_mangle]
pub unsafe extern "C" fn tf_trace_table_free(t: *mut TfTraceTable) {
    if !t.is_null() {
        drop(Box::from_raw(t));
    }
}

/// Number of entries (equal to `p`), or 0 for a null handle.
///
/// # Safety
/// `t` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn tf_trace_table_len(t: *const TfTraceTable) -> usize {
    t.as_ref().map_or(0, |t| t.0.values.len())
}

/// Copies up to `cap` entries as interleaved `re, im` pairs into `buf` (length `2 * cap`).
///
/// # Safety
/// `t` must be a live handle; `buf` must hold `2 * cap` doubles.
#[no_mangle]
pub unsafe extern "C" fn tf_trace_table_values(t: *const TfTraceTable, buf: *mut f64, cap: usize) -> TfStatus {
    guard(|| {
        let t = as_ref(t, "table")?;
        let n = cap.min(t.0.values.len());
        if n == 0 {
            return Ok(());
        }
        if buf.is_null() {
            return Err(Fail::Null("buf"));
        }
        let out = std::slice::from_raw_parts_mut(buf, 2 * n);
        for (i, z) in t.0.values[..n].iter().enumerate() {
            out[2 * i] = z.re;
            out[2 * i + 1] = z.im;
        }
        Ok(())
    })
}

/// `sin((k+1)θ) / sin θ`.
#[no_mangle]
pub extern "C" fn tf_sym_eval(k: u32, theta: f64) -> f64 {
    sym_eval(k as usize, theta)
}

/// Sato–Tate distribution function on `[-2, 2]`.
///
/// # Safety
/// `out` must be valid for writes.
#[no_mangle]
pub unsafe extern "C" fn tf_st_cdf(x: f64, out: *mut f64) -> TfStatus {
    guard(|| {
        *as_mut(out, "out")? = st_cdf(x)?;
        Ok(())
    })
}

/// Kolmogorov–Smirnov distance of the samples to the Sato–Tate law.
///
/// # Safety
/// `xs` must hold `n` doubles; `out` must be valid for writes.
#[no_mangle]
pub unsafe extern "C" fn tf_discrepancy(xs: *const f64, n: usize, out: *mut f64) -> TfStatus {
    guard(|| {
        let xs = slice(xs, n, "xs")?;
        let out = as_mut(out, "out")?;
        if xs.is_empty() {
            return Err(Error::EmptySet.into());
        }
        if let Some(&x) = xs.iter().find(|x| !(-2.0..=2.0).contains(*x)) {
            return Err(Error::OutOfRange(x).into());
        }
        *out = discrepancy(xs);
        Ok(())
    })
}

/// Multiplicative energy of `A` and `B` inside `F_p`, split into 64-bit halves.
///
/// # Safety
/// `a` and `b` must hold `na` and `nb` values; `lo` and `hi` must be valid for writes.
#[no_mangle]
pub unsafe extern "C" fn tf_mult_energy(
    p: u32,
    a: *const u32,
    na: usize,
    b: *const u32,
    nb: usize,
    lo: *mut u64,
    hi: *mut u64,
) -> TfStatus {
    guard(|| {
        let (a, b) = (slice(a, na, "a")?, slice(b, nb, "b")?);
        let (lo, hi) = (as_mut(lo, "lo")?, as_mut(hi, "hi")?);
        check_prime(p)?;
        let e = mult_energy(&subset(p, a)?, &subset(p, b)?)?;
        *lo = e as u64;
        *hi = (e >> 64) as u64;
        Ok(())
    })
}

/// The quadruple-ratio count `D(A)` over the field of `f`, split into 64-bit halves.
///
/// # Safety
/// `f` must be a live handle; `a` must hold `na` values; `lo` and `hi` must be valid for writes.
#[no_mangle]
pub unsafe extern "C" fn tf_quad_d(f: *const TfField, a: *const u32, na: usize, lo: *mut u64, hi: *mut u64) -> TfStatus {
    guard(|| {
        let f = as_ref(f, "field")?;
        let a = slice(a, na, "a")?;
        let (lo, hi) = (as_mut(lo, "lo")?, as_mut(hi, "hi")?);
        let d = quad_d(&f.0, &subset(f.0.p(), a)?)?;
        *lo = d as u64;
        *hi = (d >> 64) as u64;
        Ok(())
    })
}

/// `Σ_{m,n} α_m β_n K(mn)` with weights given as separate real and imaginary arrays.
///
/// # Safety
/// `t` must be a live handle. `m`, `alpha_re`, `alpha_im` hold `nm` entries,
/// `n`, `beta_re`, `beta_im` hold `nn` entries; `re` and `im` must be valid for writes.
#[no_mangle]
#[allow(clippy::too_many_arguments)]
pub unsafe extern "C" fn tf_bilinear_form(
    t: *const TfTraceTable,
    m: *const u32,
    alpha_re: *const f64,
    alpha_im: *const f64,
    nm: usize,
    n: *const u32,
    beta_re: *const f64,
    beta_im: *const f64,
    nn: usize,
    re: *mut f64,
    im: *mut f64,
) -> TfStatus {
    guard(|| {
        let t = as_ref(t, "table")?;
        let p = t.0.p;
        let coeffs = |xs: &[u32], wr: &[f64], wi: &[f64]| -> Result<CoeffVec, Fail> {
            let mut pairs: Vec<(u32, Complex64)> =
                xs.iter().zip(wr.iter().zip(wi)).map(|(&x, (&r, &i))| (x, Complex64::new(r, i))).collect();
            pairs.sort_by_key(|&(x, _)| x);
            if pairs.windows(2).any(|w| w[0].0 == w[1].0) {
                return Err(Error::InvalidInput("repeated support element".into()).into());
            }
            let (support, weights): (Vec<u32>, Vec<Complex64>) = pairs.into_iter().unzip();
            Ok(CoeffVec::new(subset(p, &support)?, weights)?)
        };
        let alpha = coeffs(slice(m, nm, "m")?, slice(alpha_re, nm, "alpha_re")?, slice(alpha_im, nm, "alpha_im")?)?;
        let beta = coeffs(slice(n, nn, "n")?, slice(beta_re, nn, "beta_re")?, slice(beta_im, nn, "beta_im")?)?;
        let (re, im) = (as_mut(re, "re")?, as_mut(im, "im")?);
        let z = bilinear_form(&alpha, &beta, &t.0)?;
        *re = z.re;
        *im = z.im;
        Ok(())
    })
}
