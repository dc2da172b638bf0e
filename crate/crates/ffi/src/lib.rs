//! C ABI over `welch-core`.
//!
//! Every fallible function returns a [`WelchStatus`]; on failure the message
//! is available from [`welch_last_error`] on the same thread. Objects are
//! handed out as opaque `WelchPair *` handles and must be released with
//! [`welch_pair_free`]. Strings returned through `char **` out-parameters
//! are owned by the caller and released with [`welch_string_free`].
//!
//! Complex matrices cross the boundary as interleaved `(re, im)` doubles in
//! row-major order, so an `r × c` matrix occupies `2·r·c` doubles.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};

use welch_core::asf::{DualPair, Exponent, Field, LpSpace};
use welch_core::bounds::{full_report, welch_rhs, BoundConfig, ReportRequest};
use welch_core::continuous::continuous_report;
use welch_core::numkernel::DenseMatrix;
use welch_core::optimize::{self, SearchConfig};
use welch_core::symlift::sym_dim;
use welch_core::{io, Error};

use num_complex::Complex64;

/// Result code of every fallible call.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum WelchStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    Parse = 3,
    Numerical = 4,
    BufferTooSmall = 5,
    Panic = 6,
}

pub const WELCH_FIELD_REAL: u32 = 0;
pub const WELCH_FIELD_COMPLEX: u32 = 1;

pub const WELCH_SEARCH_GRASSMANNIAN: u32 = 0;
pub const WELCH_SEARCH_ETF: u32 = 1;
pub const WELCH_SEARCH_POTENTIAL: u32 = 2;

/// Opaque handle to a vector/functional pair.
pub struct WelchPair {
    inner: DualPair,
}

thread_local! {
    static LAST_ERROR: RefCell<CString> = RefCell::new(CString::default());
}

fn set_last_error(msg: &str) {
    let c = CString::new(msg.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = c);
}

struct Failure(WelchStatus, String);

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let status = match e {
            Error::Parse(_) | Error::Json(_) => WelchStatus::Parse,
            Error::NumericalFailure(_) | Error::NegativeSpectrum | Error::NegativeRadicand(_) | Error::NonFinite(_) => {
                WelchStatus::Numerical
            }
            _ => WelchStatus::InvalidArgument,
        };
        Failure(status, e.to_string())
    }
}

fn null(what: &str) -> Failure {
    Failure(WelchStatus::NullPointer, format!("{what} is null"))
}

fn invalid(msg: impl Into<String>) -> Failure {
    Failure(WelchStatus::InvalidArgument, msg.into())
}

/// Runs `f`, converting errors and panics into a status code.
fn guard(f: impl FnOnce() -> Result<(), Failure>) -> WelchStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => {
            set_last_error("");
            WelchStatus::Ok
        }
        Ok(Err(Failure(status, msg))) => {
            set_last_error(&msg);
            status
        }
        Err(payload) => {
            let msg = payload
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| payload.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_else(|| "panic".into());
            set_last_error(&format!("internal panic: {msg}"));
            WelchStatus::Panic
        }
    }
}

unsafe fn pair_ref<'a>(pair: *const WelchPair) -> Result<&'a DualPair, Failure> {
    pair.as_ref().map(|p| &p.inner).ok_or_else(|| null("pair"))
}

unsafe fn c_str<'a>(s: *const c_char, what: &str) -> Result<&'a str, Failure> {
    if s.is_null() {
        return Err(null(what));
    }
    CStr::from_ptr(s).to_str().map_err(|_| Failure(WelchStatus::Parse, format!("{what} is not UTF-8")))
}

unsafe fn slice<'a, T>(data: *const T, len: usize, what: &str) -> Result<&'a [T], Failure> {
    if len == 0 {
        return Ok(&[]);
    }
    if data.is_null() {
        return Err(null(what));
    }
    Ok(std::slice::from_raw_parts(data, len))
}

unsafe fn write_out<T>(out: *mut T, value: T, what: &str) -> Result<(), Failure> {
    if out.is_null() {
        return Err(null(what));
    }
    out.write(value);
    Ok(())
}

unsafe fn give_string(out: *mut *mut c_char, s: String) -> Result<(), Failure> {
    let c = CString::new(s).map_err(|_| invalid("output contains a NUL byte"))?;
    write_out(out, c.into_raw(), "output string pointer")
}

unsafe fn give_pair(out: *mut *mut WelchPair, pair: DualPair) -> Result<(), Failure> {
    if out.is_null() {
        return Err(null("output pair pointer"));
    }
    out.write(Box::into_raw(Box::new(WelchPair { inner: pair })));
    Ok(())
}

fn exponent(p: f64) -> Result<Exponent, Failure> {
    if p == f64::INFINITY {
        Ok(Exponent::Infinity)
    } else {
        Ok(Exponent::new(p)?)
    }
}

fn field(code: u32) -> Result<Field, Failure> {
    match code {
        WELCH_FIELD_REAL => Ok(Field::Real),
        WELCH_FIELD_COMPLEX => Ok(Field::Complex),
        other => Err(invalid(format!("unknown field code {other}"))),
    }
}

fn interleaved(rows: usize, cols: usize, data: &[f64]) -> Result<DenseMatrix, Failure> {
    let want = rows.checked_mul(cols).and_then(|x| x.checked_mul(2)).ok_or_else(|| invalid("size overflow"))?;
    if data.len() != want {
        return Err(invalid(format!("expected {want} doubles, got {}", data.len())));
    }
    let z = data.chunks_exact(2).map(|c| Complex64::new(c[0], c[1])).collect();
    Ok(DenseMatrix::new(rows, cols, z)?)
}

unsafe fn fill_matrix(m: &DenseMatrix, out: *mut f64, len: usize) -> Result<(), Failure> {
    let need = 2 * m.rows() * m.cols();
    if len < need {
        return Err(Failure(WelchStatus::BufferTooSmall, format!("buffer holds {len} doubles, need {need}")));
    }
    if out.is_null() {
        return Err(null("output buffer"));
    }
    let dst = std::slice::from_raw_parts_mut(out, need);
    for (i, z) in m.as_slice().iter().enumerate() {
        dst[2 * i] = z.re;
        dst[2 * i + 1] = z.im;
    }
    Ok(())
}

fn request(orders: &[usize], p_list: &[f64]) -> ReportRequest {
    let orders = if orders.is_empty() { vec![1] } else { orders.to_vec() };
    ReportRequest::new(orders, p_list.to_vec())
}

/// Message of the last failed call on this thread, or an empty string. The
/// pointer stays valid until the next call into this library on the same
/// thread.
#[no_mangle]
pub extern "C" fn welch_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ptr())
}

/// Parses a pair from JSON text (the format written by the `welch` tool).
///
/// # Safety
/// `json` must be a NUL-terminated string and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn welch_pair_from_json(json: *const c_char, out: *mut *mut WelchPair) -> WelchStatus {
    guard(|| {
        let text = c_str(json, "json")?;
        give_pair(out, io::pair_from_json(text)?)
    })
}

/// Builds a pair from interleaved complex rows: `vectors` and `functionals`
/// each hold `2·n·dim` doubles. Pass `p = INFINITY` for ℓ∞.
///
/// # Safety
/// Both arrays must hold `2·n·dim` doubles and `out` must be valid.
#[no_mangle]
pub unsafe extern "C" fn welch_pair_new(
    n: usize,
    dim: usize,
    p: f64,
    field_code: u32,
    vectors: *const f64,
    functionals: *const f64,
    out: *mut *mut WelchPair,
) -> WelchStatus {
    guard(|| {
        let space = LpSpace::new(dim, exponent(p)?, field(field_code)?)?;
        let len = 2 * n * dim;
        let v = interleaved(n, dim, slice(vectors, len, "vectors")?)?;
        let f = interleaved(n, dim, slice(functionals, len, "functionals")?)?;
        give_pair(out, DualPair::new(space, v, f)?)
    })
}

/// Pairs each vector with its conjugate functional in ℓ2.
///
/// # Safety
/// `vectors` must hold `2·n·dim` doubles and `out` must be valid.
#[no_mangle]
pub unsafe extern "C" fn welch_pair_hilbert(
    n: usize,
    dim: usize,
    field_code: u32,
    vectors: *const f64,
    out: *mut *mut WelchPair,
) -> WelchStatus {
    guard(|| {
        let space = LpSpace::hilbert(dim, field(field_code)?);
        let v = interleaved(n, dim, slice(vectors, 2 * n * dim, "vectors")?)?;
        give_pair(out, DualPair::hilbert_embed(v, space)?)
    })
}

/// Releases a pair. Null is ignored.
///
/// # Safety
/// `pair` must come from this library and not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn welch_pair_free(pair: *mut WelchPair) {
    if !pair.is_null() {
        drop(Box::from_raw(pair));
    }
}

/// Number of vectors, or 0 for a null handle.
///
/// # Safety
/// `pair` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn welch_pair_count(pair: *const WelchPair) -> usize {
    pair.as_ref().map_or(0, |p| p.inner.n())
}

/// Ambient dimension, or 0 for a null handle.
///
/// # Safety
/// `pair` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn welch_pair_dim(pair: *const WelchPair) -> usize {
    pair.as_ref().map_or(0, |p| p.inner.dim())
}

/// Writes the `n × n` Gram matrix into `out` (`2·n·n` doubles).
///
/// # Safety
/// `out` must hold at least `len` doubles.
#[no_mangle]
pub unsafe extern "C" fn welch_pair_gram(pair: *const WelchPair, out: *mut f64, len: usize) -> WelchStatus {
    guard(|| fill_matrix(&pair_ref(pair)?.gram(), out, len))
}

/// Writes the `dim × dim` frame operator into `out` (`2·dim·dim` doubles).
///
/// # Safety
/// `out` must hold at least `len` doubles.
#[no_mangle]
pub unsafe extern "C" fn welch_pair_frame_operator(pair: *const WelchPair, out: *mut f64, len: usize) -> WelchStatus {
    guard(|| fill_matrix(&pair_ref(pair)?.frame_operator(), out, len))
}

/// Canonical JSON text of the pair.
///
/// # Safety
/// `out` must be valid; free the result with [`welch_string_free`].
#[no_mangle]
pub unsafe extern "C" fn welch_pair_to_json(pair: *const WelchPair, out: *mut *mut c_char) -> WelchStatus {
    guard(|| give_string(out, io::pair_to_json(pair_ref(pair)?)))
}

/// Releases a string returned by this library. Null is ignored.
///
/// # Safety
/// `s` must come from this library and not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn welch_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}

/// Full bound report as JSON, with default tolerances. An empty `orders`
/// list means order 1 only.
///
/// # Safety
/// Arrays must hold the stated number of elements; `out` must be valid.
#[no_mangle]
pub unsafe extern "C" fn welch_report_json(
    pair: *const WelchPair,
    orders: *const usize,
    n_orders: usize,
    p_list: *const f64,
    n_p: usize,
    out: *mut *mut c_char,
) -> WelchStatus {
    guard(|| {
        let req = request(slice(orders, n_orders, "orders")?, slice(p_list, n_p, "p_list")?);
        let report = full_report(pair_ref(pair)?, &req, &BoundConfig::default())?;
        give_string(out, io::canonical_json(&report)?)
    })
}

/// Continuous report for a measure/pair document given as JSON text.
///
/// # Safety
/// As for [`welch_report_json`]; `casf_json` must be NUL-terminated.
#[no_mangle]
pub unsafe extern "C" fn welch_continuous_report_json(
    casf_json: *const c_char,
    orders: *const usize,
    n_orders: usize,
    p_list: *const f64,
    n_p: usize,
    out: *mut *mut c_char,
) -> WelchStatus {
    guard(|| {
        let casf = io::casf_from_json(c_str(casf_json, "casf_json")?)?;
        let req = request(slice(orders, n_orders, "orders")?, slice(p_list, n_p, "p_list")?);
        let report = continuous_report(&casf, &req, &BoundConfig::default())?;
        give_string(out, io::canonical_json(&report)?)
    })
}

/// Largest off-diagonal `|f_j(τ_k)|`.
///
/// # Safety
/// `out` must be valid.
#[no_mangle]
pub unsafe extern "C" fn welch_frame_correlation(pair: *const WelchPair, out: *mut f64) -> WelchStatus {
    guard(|| write_out(out, optimize::frame_correlation(pair_ref(pair)?)?, "out"))
}

/// Right-hand side of the order-m max form for n unit vectors in dimension d.
///
/// # Safety
/// `out` must be valid.
#[no_mangle]
pub unsafe extern "C" fn welch_rhs_value(n: usize, d: usize, m: usize, out: *mut f64) -> WelchStatus {
    guard(|| write_out(out, welch_rhs(n, d, m)?, "out"))
}

/// Dimension of the m-th symmetric power of a d-dimensional space.
///
/// # Safety
/// `out` must be valid.
#[no_mangle]
pub unsafe extern "C" fn welch_sym_dim(d: usize, m: usize, out: *mut usize) -> WelchStatus {
    guard(|| write_out(out, sym_dim(d, m)?, "out"))
}

/// Runs a seeded search. `count` is ignored for the ETF mode (which uses
/// `dim²` vectors); `restarts` and `max_iters` of 0 select the defaults.
/// On success the best pair, its objective value and whether the search
/// converged are written to the out-parameters.
///
/// # Safety
/// All out-pointers must be valid.
#[no_mangle]
pub unsafe extern "C" fn welch_search(
    mode: u32,
    dim: usize,
    count: usize,
    p: f64,
    field_code: u32,
    seed: u64,
    restarts: usize,
    max_iters: usize,
    out_pair: *mut *mut WelchPair,
    out_objective: *mut f64,
    out_converged: *mut bool,
) -> WelchStatus {
    guard(|| {
        if out_pair.is_null() || out_objective.is_null() || out_converged.is_null() {
            return Err(null("output pointer"));
        }
        let space = LpSpace::new(dim, exponent(p)?, field(field_code)?)?;
        let defaults = SearchConfig::default();
        let cfg = SearchConfig {
            seed,
            restarts: if restarts == 0 { defaults.restarts } else { restarts },
            max_iters: if max_iters == 0 { defaults.max_iters } else { max_iters },
            ..defaults
        };
        let result = match mode {
            WELCH_SEARCH_GRASSMANNIAN => optimize::grassmannian_search(space, count, &cfg)?,
            WELCH_SEARCH_ETF => optimize::etf_search_in(space, &cfg)?,
            WELCH_SEARCH_POTENTIAL => optimize::potential_minimize(space, count, &cfg)?,
            other => return Err(invalid(format!("unknown search mode {other}"))),
        };
        out_objective.write(result.objective_value);
        out_converged.write(result.converged);
        give_pair(out_pair, result.pair)
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::ptr;

    #[test]
    fn null_handles_are_reported() {
        let mut x = 0.0;
        let status = unsafe { welch_frame_correlation(ptr::null(), &mut x) };
        assert_eq!(status, WelchStatus::NullPointer);
        let msg = unsafe { CStr::from_ptr(welch_last_error()) }.to_str().unwrap();
        assert!(msg.contains("pair"));
    }
}
