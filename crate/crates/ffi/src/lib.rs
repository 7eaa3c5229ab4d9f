//! C ABI for `tvalues`.
//!
//! Objects cross the boundary as opaque heap handles released by their
//! `*_free` function. Every call returns a [`TvStatus`]; on failure the
//! message is available from [`tv_last_error`] on the same thread until the
//! next failing call. Strings handed out by the library are released with
//! [`tv_string_free`].

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use tvalues::evaluator::{eval, EvalRequest};
use tvalues::order::{Certifier, Verdict};
use tvalues::{parse_index, Enclosure, MultiIndex, PrecisionBudget, TvError, ValueSpec};

#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum TvStatus {
    Ok = 0,
    InvalidArgument = 1,
    Parse = 2,
    Divergent = 3,
    BudgetExceeded = 4,
    Unresolved = 5,
    Io = 6,
    NullPointer = 7,
    Panic = 8,
}

#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum TvVerdict {
    Less = -1,
    Unresolved = 0,
    Greater = 1,
}

/// Opaque multi-index.
pub struct TvIndex(MultiIndex);

/// Opaque enclosure `[lo, hi]`.
pub struct TvEnclosure(Enclosure);

/// Opaque memoizing comparison context.
pub struct TvCertifier(Certifier);

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: String) {
    let c = CString::new(msg.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

fn status_of(e: &TvError) -> TvStatus {
    match e {
        TvError::InvalidArgument(_) => TvStatus::InvalidArgument,
        TvError::Parse { .. } => TvStatus::Parse,
        TvError::Divergent(_) => TvStatus::Divergent,
        TvError::BudgetExceeded { .. } => TvStatus::BudgetExceeded,
        TvError::Frontier { .. } | TvError::Band { .. } | TvError::Collision { .. } => TvStatus::Unresolved,
        TvError::Io { .. } => TvStatus::Io,
    }
}

fn guard(f: impl FnOnce() -> Result<(), TvError>) -> TvStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => TvStatus::Ok,
        Ok(Err(e)) => {
            set_error(e.to_string());
            status_of(&e)
        }
        Err(_) => {
            set_error("internal panic".into());
            TvStatus::Panic
        }
    }
}

fn null() -> TvError {
    TvError::InvalidArgument("null pointer".into())
}

fn budget(max_bits: u32) -> Result<PrecisionBudget, TvError> {
    let mut b = PrecisionBudget::default();
    if max_bits != 0 {
        b.max_bits = max_bits;
        b.start_bits = b.start_bits.min(max_bits);
    }
    b.validate()?;
    Ok(b)
}

macro_rules! nonnull {
    ($($p:expr),+) => {
        if $($p.is_null())||+ {
            set_error("null pointer".into());
            return TvStatus::NullPointer;
        }
    };
}

/// Message of the last failure on this thread, or NULL. Owned by the library.
#[no_mangle]
pub extern "C" fn tv_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |c| c.as_ptr()))
}

/// Releases a string returned by this library.
///
/// # Safety
/// `s` must come from this library and not have been freed.
#[no_mangle]
pub unsafe extern "C" fn tv_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}

/// Parses `"2,1,3"` or `"empty"`.
///
/// # Safety
/// `text` must be a NUL-terminated string; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn tv_index_parse(text: *const c_char, out: *mut *mut TvIndex) -> TvStatus {
    nonnull!(text, out);
    guard(|| {
        let s = CStr::from_ptr(text)
            .to_str()
            .map_err(|_| TvError::InvalidArgument("index text is not UTF-8".into()))?;
        let k = parse_index(s)?;
        *out = Box::into_raw(Box::new(TvIndex(k)));
        Ok(())
    })
}

/// Builds an index from `len` exponents; `len = 0` gives the empty index.
///
/// # Safety
/// `exponents` must point to `len` values (may be NULL when `len = 0`).
#[no_mangle]
pub unsafe extern "C" fn tv_index_new(exponents: *const u32, len: usize, out: *mut *mut TvIndex) -> TvStatus {
    nonnull!(out);
    if len > 0 && exponents.is_null() {
        set_error("null pointer".into());
        return TvStatus::NullPointer;
    }
    guard(|| {
        let v = if len == 0 { Vec::new() } else { std::slice::from_raw_parts(exponents, len).to_vec() };
        let k = MultiIndex::admissible(v)?;
        *out = Box::into_raw(Box::new(TvIndex(k)));
        Ok(())
    })
}

/// # Safety
/// `index` must come from this library and not have been freed.
#[no_mangle]
pub unsafe extern "C" fn tv_index_free(index: *mut TvIndex) {
    if !index.is_null() {
        drop(Box::from_raw(index));
    }
}

/// # Safety
/// `index` must be a live handle.
#[no_mangle]
pub unsafe extern "C" fn tv_index_depth(index: *const TvIndex) -> usize {
    index.as_ref().map_or(0, |k| k.0.depth())
}

/// # Safety
/// `index` must be a live handle.
#[no_mangle]
pub unsafe extern "C" fn tv_index_weight(index: *const TvIndex) -> u32 {
    index.as_ref().map_or(0, |k| k.0.weight())
}

/// Canonical text of the index; release with [`tv_string_free`].
///
/// # Safety
/// `index` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn tv_index_to_string(index: *const TvIndex, out: *mut *mut c_char) -> TvStatus {
    nonnull!(index, out);
    guard(|| {
        *out = CString::new((*index).0.to_string()).map_err(|_| null())?.into_raw();
        Ok(())
    })
}

/// Encloses `t(k)_tail` to width at most `width`; `max_bits = 0` keeps the
/// default ceiling. On `BUDGET_EXCEEDED` the best partial enclosure is still
/// stored in `out`.
///
/// # Safety
/// `index` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn tv_eval(
    index: *const TvIndex,
    tail: u64,
    width: f64,
    max_bits: u32,
    out: *mut *mut TvEnclosure,
) -> TvStatus {
    nonnull!(index, out);
    *out = ptr::null_mut();
    guard(|| {
        let spec = ValueSpec::new((*index).0.clone(), tail)?;
        let req = EvalRequest::new(spec, width, budget(max_bits)?)?;
        match eval(&req) {
            Ok(e) => {
                *out = Box::into_raw(Box::new(TvEnclosure(e)));
                Ok(())
            }
            Err(TvError::BudgetExceeded { partial, bits, width }) => {
                *out = Box::into_raw(Box::new(TvEnclosure(partial.clone())));
                Err(TvError::BudgetExceeded { partial, bits, width })
            }
            Err(e) => Err(e),
        }
    })
}

/// # Safety
/// `e` must come from this library and not have been freed.
#[no_mangle]
pub unsafe extern "C" fn tv_enclosure_free(e: *mut TvEnclosure) {
    if !e.is_null() {
        drop(Box::from_raw(e));
    }
}

/// Endpoints as doubles, rounded outward.
///
/// # Safety
/// `e` must be a live handle; `lo` and `hi` must be writable.
#[no_mangle]
pub unsafe extern "C" fn tv_enclosure_bounds(e: *const TvEnclosure, lo: *mut f64, hi: *mut f64) -> TvStatus {
    nonnull!(e, lo, hi);
    *lo = (*e).0.lo_f64();
    *hi = (*e).0.hi_f64();
    TvStatus::Ok
}

/// Endpoints as decimal strings with `digits` fractional digits, rounded
/// outward; release both with [`tv_string_free`].
///
/// # Safety
/// `e` must be a live handle; `lo` and `hi` must be writable.
#[no_mangle]
pub unsafe extern "C" fn tv_enclosure_decimal(
    e: *const TvEnclosure,
    digits: usize,
    lo: *mut *mut c_char,
    hi: *mut *mut c_char,
) -> TvStatus {
    nonnull!(e, lo, hi);
    guard(|| {
        if digits > 10_000 {
            return Err(TvError::InvalidArgument(format!("digits {digits} too large")));
        }
        let (a, b) = (*e).0.to_decimal_bounds(digits);
        *lo = CString::new(a).map_err(|_| null())?.into_raw();
        *hi = CString::new(b).map_err(|_| null())?.into_raw();
        Ok(())
    })
}

/// A fresh comparison context; `max_bits = 0` keeps the default ceiling.
///
/// # Safety
/// `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn tv_certifier_new(max_bits: u32, out: *mut *mut TvCertifier) -> TvStatus {
    nonnull!(out);
    guard(|| {
        *out = Box::into_raw(Box::new(TvCertifier(Certifier::new(budget(max_bits)?))));
        Ok(())
    })
}

/// # Safety
/// `c` must come from this library and not have been freed.
#[no_mangle]
pub unsafe extern "C" fn tv_certifier_free(c: *mut TvCertifier) {
    if !c.is_null() {
        drop(Box::from_raw(c));
    }
}

/// Certified order of `t(a)_ta` and `t(b)_tb`. An unresolved comparison is
/// reported through `verdict`, not as an error.
///
/// # Safety
/// All handles must be live; `verdict` must be writable; `separation` may be NULL.
#[no_mangle]
pub unsafe extern "C" fn tv_compare(
    c: *const TvCertifier,
    a: *const TvIndex,
    ta: u64,
    b: *const TvIndex,
    tb: u64,
    verdict: *mut TvVerdict,
    separation: *mut f64,
) -> TvStatus {
    nonnull!(c, a, b, verdict);
    guard(|| {
        let sa = ValueSpec::new((*a).0.clone(), ta)?;
        let sb = ValueSpec::new((*b).0.clone(), tb)?;
        let o = (*c).0.compare(&sa, &sb)?;
        *verdict = match o.verdict {
            Verdict::Less => TvVerdict::Less,
            Verdict::Greater => TvVerdict::Greater,
            Verdict::Unresolved => TvVerdict::Unresolved,
        };
        if !separation.is_null() {
            *separation = o.separation;
        }
        Ok(())
    })
}

/// Band and position of `t(k)`.
///
/// # Safety
/// Handles must be live; `band` and `position` must be writable.
#[no_mangle]
pub unsafe extern "C" fn tv_phi(
    c: *const TvCertifier,
    index: *const TvIndex,
    band: *mut usize,
    position: *mut usize,
) -> TvStatus {
    nonnull!(c, index, band, position);
    guard(|| {
        let p = (*c).0.phi(&(*index).0)?;
        *band = p.band;
        *position = p.position;
        Ok(())
    })
}

/// The index generating `β_rank` (1-based) and, optionally, its value.
///
/// # Safety
/// `c` must be live; `source` must be writable; `value` may be NULL.
#[no_mangle]
pub unsafe extern "C" fn tv_beta(
    c: *const TvCertifier,
    rank: usize,
    source: *mut *mut TvIndex,
    value: *mut *mut TvEnclosure,
) -> TvStatus {
    nonnull!(c, source);
    guard(|| {
        if rank == 0 {
            return Err(TvError::InvalidArgument("rank is 1-based".into()));
        }
        let e = (*c).0.beta(rank)?;
        *source = Box::into_raw(Box::new(TvIndex(e.source)));
        if !value.is_null() {
            *value = Box::into_raw(Box::new(TvEnclosure(e.value)));
        }
        Ok(())
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn last_error_is_per_call() {
        let mut k = ptr::null_mut();
        let text = CString::new("1,2").unwrap();
        let s = unsafe { tv_index_parse(text.as_ptr(), &mut k) };
        assert_eq!(s, TvStatus::Parse);
        let msg = unsafe { CStr::from_ptr(tv_last_error()) }.to_str().unwrap();
        assert!(msg.contains("first exponent"));
        assert!(k.is_null());
    }

    #[test]
    fn null_handles_rejected() {
        let mut e = ptr::null_mut();
        assert_eq!(unsafe { tv_eval(ptr::null(), 0, 1e-10, 0, &mut e) }, TvStatus::NullPointer);
        assert_eq!(unsafe { tv_index_depth(ptr::null()) }, 0);
        unsafe { tv_index_free(ptr::null_mut()) };
        unsafe { tv_string_free(ptr::null_mut()) };
    }
}
