//! C ABI over the `lefschetz` crate.
//!
//! Factorizations cross the boundary as opaque `LfFactorization` handles.
//! Every function returns an `LfStatus`; on failure a message is kept per
//! thread and can be read with `lf_last_error`. Strings handed out by this
//! library are released with `lf_string_free`, handles with `lf_free`.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use lefschetz::catalog;
use lefschetz::dsl;
use lefschetz::factorizations::Factorization;
use lefschetz::groups::h1_pipeline;
use lefschetz::invariants::{signature_meyer, InvariantReport};
use lefschetz::symplectic::verify;

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LfStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidUtf8 = 2,
    Parse = 3,
    UnknownEntry = 4,
    Compute = 5,
    BufferTooSmall = 6,
    Panic = 7,
}

/// Opaque factorization handle.
pub struct LfFactorization {
    inner: Factorization,
}

thread_local! {
    static LAST_ERROR: RefCell<CString> = RefCell::new(CString::default());
}

fn set_error(msg: &str) {
    let c = CString::new(msg.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = c);
}

fn guard(f: impl FnOnce() -> Result<(), (LfStatus, String)>) -> LfStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => {
            set_error("");
            LfStatus::Ok
        }
        Ok(Err((status, msg))) => {
            set_error(&msg);
            status
        }
        Err(p) => {
            let msg = p
                .downcast_ref::<&str>()
                .map(|s| s.to_string())
                .or_else(|| p.downcast_ref::<String>().cloned())
                .unwrap_or_else(|| "panic".into());
            set_error(&msg);
            LfStatus::Panic
        }
    }
}

fn null() -> (LfStatus, String) {
    (LfStatus::NullPointer, "null pointer argument".into())
}

unsafe fn read_str<'a>(s: *const c_char) -> Result<&'a str, (LfStatus, String)> {
    if s.is_null() {
        return Err(null());
    }
    CStr::from_ptr(s).to_str().map_err(|e| (LfStatus::InvalidUtf8, e.to_string()))
}

unsafe fn handle<'a>(h: *const LfFactorization) -> Result<&'a Factorization, (LfStatus, String)> {
    h.as_ref().map(|h| &h.inner).ok_or_else(null)
}

unsafe fn give(out: *mut *mut LfFactorization, f: Factorization) -> Result<(), (LfStatus, String)> {
    if out.is_null() {
        return Err(null());
    }
    *out = Box::into_raw(Box::new(LfFactorization { inner: f }));
    Ok(())
}

fn compute<T, E: ToString>(r: Result<T, E>) -> Result<T, (LfStatus, String)> {
    r.map_err(|e| (LfStatus::Compute, e.to_string()))
}

/// Message for the last failed call on this thread; empty after a success.
/// Valid until the next call into this library on the same thread.
#[no_mangle]
pub extern "C" fn lf_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ptr())
}

/// Parses factorization-file text.
///
/// # Safety
/// `src` must be a NUL-terminated string and `out` a writable pointer.
#[no_mangle]
pub unsafe extern "C" fn lf_parse(src: *const c_char, out: *mut *mut LfFactorization) -> LfStatus {
    guard(|| {
        let text = read_str(src)?;
        let f = dsl::parse(text).map_err(|d| (LfStatus::Parse, d.to_string()))?;
        give(out, f)
    })
}

/// Looks up a catalog entry such as `W`, `W1(2,3)` or `K2`.
///
/// # Safety
/// `id` must be a NUL-terminated string and `out` a writable pointer.
#[no_mangle]
pub unsafe extern "C" fn lf_catalog_entry(id: *const c_char, out: *mut *mut LfFactorization) -> LfStatus {
    guard(|| {
        let id = read_str(id)?;
        let e = catalog::entry(id).map_err(|e| (LfStatus::UnknownEntry, e.to_string()))?;
        give(out, e.factorization)
    })
}

/// Releases a handle; null is ignored.
///
/// # Safety
/// `h` must come from this library and not have been freed.
#[no_mangle]
pub unsafe extern "C" fn lf_free(h: *mut LfFactorization) {
    if !h.is_null() {
        drop(Box::from_raw(h));
    }
}

/// Releases a string returned by this library; null is ignored.
///
/// # Safety
/// `s` must come from this library and not have been freed.
#[no_mangle]
pub unsafe extern "C" fn lf_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}

/// Number of twists.
///
/// # Safety
/// `h` must be a live handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn lf_length(h: *const LfFactorization, out: *mut usize) -> LfStatus {
    guard(|| {
        let f = handle(h)?;
        *out.as_mut().ok_or_else(null)? = f.len();
        Ok(())
    })
}

/// Whether the symplectic product equals the target.
///
/// # Safety
/// `h` must be a live handle and `pass` writable.
#[no_mangle]
pub unsafe extern "C" fn lf_verify(h: *const LfFactorization, pass: *mut bool) -> LfStatus {
    guard(|| {
        let f = handle(h)?;
        let pass = pass.as_mut().ok_or_else(null)?;
        let v = verify(f);
        *pass = v.pass;
        Ok(())
    })
}

/// Signature through the Meyer cocycle.
///
/// # Safety
/// `h` must be a live handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn lf_signature(h: *const LfFactorization, out: *mut i64) -> LfStatus {
    guard(|| {
        let f = handle(h)?;
        let out = out.as_mut().ok_or_else(null)?;
        *out = compute(signature_meyer(f))?;
        Ok(())
    })
}

/// First homology as `ℤ^rank ⊕ ℤ/t_1 ⊕ … ⊕ ℤ/t_k`.
///
/// `torsion` may be null when `capacity` is 0. `count` always receives `k`;
/// when `k > capacity` nothing is written to `torsion` and the call returns
/// `BufferTooSmall`.
///
/// # Safety
/// `h` must be a live handle, `rank` and `count` writable and `torsion`
/// valid for `capacity` elements.
#[no_mangle]
pub unsafe extern "C" fn lf_h1(
    h: *const LfFactorization,
    rank: *mut usize,
    torsion: *mut i64,
    capacity: usize,
    count: *mut usize,
) -> LfStatus {
    guard(|| {
        let f = handle(h)?;
        let (rank, count) = (rank.as_mut().ok_or_else(null)?, count.as_mut().ok_or_else(null)?);
        let g = compute(h1_pipeline(f))?;
        *rank = g.rank;
        *count = g.torsion.len();
        if g.torsion.len() > capacity {
            return Err((LfStatus::BufferTooSmall, format!("{} torsion factors", g.torsion.len())));
        }
        if !g.torsion.is_empty() {
            if torsion.is_null() {
                return Err(null());
            }
            ptr::copy_nonoverlapping(g.torsion.as_ptr(), torsion, g.torsion.len());
        }
        Ok(())
    })
}

/// Full invariant report as JSON; free with `lf_string_free`.
///
/// # Safety
/// `h` must be a live handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn lf_invariants_json(h: *const LfFactorization, out: *mut *mut c_char) -> LfStatus {
    guard(|| {
        let f = handle(h)?;
        let out = out.as_mut().ok_or_else(null)?;
        let r = compute(InvariantReport::compute(f))?;
        *out = CString::new(r.to_json()).map_err(|e| (LfStatus::Compute, e.to_string()))?.into_raw();
        Ok(())
    })
}

/// Factorization-file text; free with `lf_string_free`.
///
/// # Safety
/// `h` must be a live handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn lf_serialize(h: *const LfFactorization, out: *mut *mut c_char) -> LfStatus {
    guard(|| {
        let f = handle(h)?;
        let out = out.as_mut().ok_or_else(null)?;
        *out = CString::new(dsl::serialize(f)).map_err(|e| (LfStatus::Compute, e.to_string()))?.into_raw();
        Ok(())
    })
}
