//! C interface: load a curve, compute `H^1_et(X, Z/p^n)` and the cover tower,
//! and the trivial-sheaf cohomology. Results cross the boundary as JSON strings.
//!
//! Every fallible call returns an [`AswStatus`]; the message of the last failure
//! on the calling thread is available from [`asw_last_error`].

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::ptr;

use asw::cover::{compute_h1_from_hw, tower_from_basis, H1EtBasis};
use asw::io::{load, CohomologyReport, CoverReport, Loaded};
use asw::sheaf::{compute_cohomology_complex, cover_group, verify_crossed_law, SheafModule};
use asw::AswError;

/// Status codes returned by every fallible function.
#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum AswStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidUtf8 = 2,
    Parse = 3,
    Io = 4,
    /// Failed certification or another mathematical inconsistency.
    Inconsistent = 5,
    Unsupported = 6,
    Internal = 7,
}

/// A curve with its `H^1(X, O_X)` basis and Hasse-Witt matrix.
pub struct AswCurve {
    loaded: Loaded,
    seed: u64,
}

/// A basis of `H^1_et(X, Z/p^n)`.
pub struct AswH1 {
    et: H1EtBasis,
    seed: u64,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: impl Into<String>) {
    let msg = msg.into().replace('\0', " ");
    LAST_ERROR.with(|e| *e.borrow_mut() = CString::new(msg).ok());
}

fn status_of(e: &AswError) -> AswStatus {
    match e {
        AswError::Parse(_) => AswStatus::Parse,
        AswError::Io(_) => AswStatus::Io,
        AswError::Unsupported(_) | AswError::DegreeCap { .. } => AswStatus::Unsupported,
        _ => AswStatus::Inconsistent,
    }
}

fn fail(e: AswError) -> AswStatus {
    set_error(e.to_string());
    status_of(&e)
}

/// Run `f`, turning panics into [`AswStatus::Internal`].
fn guarded(f: impl FnOnce() -> AswStatus) -> AswStatus {
    match std::panic::catch_unwind(std::panic::AssertUnwindSafe(f)) {
        Ok(s) => s,
        Err(_) => {
            set_error("internal panic");
            AswStatus::Internal
        }
    }
}

unsafe fn read_str<'a>(s: *const c_char) -> Result<&'a str, AswStatus> {
    if s.is_null() {
        set_error("null string argument");
        return Err(AswStatus::NullPointer);
    }
    CStr::from_ptr(s).to_str().map_err(|_| {
        set_error("string argument is not UTF-8");
        AswStatus::InvalidUtf8
    })
}

unsafe fn write_string(out: *mut *mut c_char, s: String) -> AswStatus {
    match CString::new(s) {
        Ok(c) => {
            *out = c.into_raw();
            AswStatus::Ok
        }
        Err(_) => {
            set_error("output contains a NUL byte");
            AswStatus::Internal
        }
    }
}

fn to_json<T: serde::Serialize>(v: &T) -> Result<String, AswStatus> {
    serde_json::to_string_pretty(v).map_err(|e| {
        set_error(e.to_string());
        AswStatus::Internal
    })
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn asw_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Message of the last failure on this thread, or NULL. Free with [`asw_string_free`].
#[no_mangle]
pub extern "C" fn asw_last_error() -> *mut c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null_mut(), |c| c.clone().into_raw()))
}

/// Parse a curve description (the JSON accepted by the `asw` tool).
///
/// `hasse_witt` may be NULL to use the matrix embedded in the JSON; otherwise it is
/// an inline matrix `"a,b;c,d"` or a JSON array. On success `*out` owns a new
/// handle to be released with [`asw_curve_free`].
///
/// # Safety
/// `curve_json` must be a valid NUL-terminated string; `hasse_witt` must be NULL or
/// a valid NUL-terminated string; `out` must be a valid pointer to writable storage.
#[no_mangle]
pub unsafe extern "C" fn asw_curve_load(
    curve_json: *const c_char,
    hasse_witt: *const c_char,
    seed: u64,
    out: *mut *mut AswCurve,
) -> AswStatus {
    guarded(|| {
        if out.is_null() {
            set_error("null output pointer");
            return AswStatus::NullPointer;
        }
        let text = match read_str(curve_json) {
            Ok(s) => s,
            Err(s) => return s,
        };
        let hw = if hasse_witt.is_null() {
            None
        } else {
            match read_str(hasse_witt) {
                Ok(s) => Some(s),
                Err(s) => return s,
            }
        };
        match load(text, hw, Some(seed)) {
            Ok(loaded) => {
                *out = Box::into_raw(Box::new(AswCurve { loaded, seed }));
                AswStatus::Ok
            }
            Err(e) => fail(e),
        }
    })
}

/// Genus of the curve, 0 for NULL.
///
/// # Safety
/// `curve` must be NULL or a live handle from [`asw_curve_load`].
#[no_mangle]
pub unsafe extern "C" fn asw_curve_genus(curve: *const AswCurve) -> usize {
    curve.as_ref().map_or(0, |c| c.loaded.curve.genus())
}

/// Release a curve handle. NULL is ignored.
///
/// # Safety
/// `curve` must be NULL or a handle from [`asw_curve_load`] not freed before.
#[no_mangle]
pub unsafe extern "C" fn asw_curve_free(curve: *mut AswCurve) {
    if !curve.is_null() {
        drop(Box::from_raw(curve));
    }
}

/// Compute and certify a basis of `H^1_et(X, Z/p^n)`.
///
/// On success `*out` owns a new handle to be released with [`asw_h1_free`].
///
/// # Safety
/// `curve` must be a live handle from [`asw_curve_load`]; `out` must be a valid
/// pointer to writable storage.
#[no_mangle]
pub unsafe extern "C" fn asw_h1_compute(curve: *const AswCurve, n: u32, out: *mut *mut AswH1) -> AswStatus {
    guarded(|| {
        let Some(c) = curve.as_ref() else {
            set_error("null curve handle");
            return AswStatus::NullPointer;
        };
        if out.is_null() {
            set_error("null output pointer");
            return AswStatus::NullPointer;
        }
        if n == 0 {
            return fail(AswError::Parse("level must be at least 1".into()));
        }
        let et = match compute_h1_from_hw(&c.loaded.basis, &c.loaded.hasse_witt, n as usize) {
            Ok(et) => et,
            Err(e) => return fail(e),
        };
        if let Err(e) = et.certify() {
            return fail(e);
        }
        *out = Box::into_raw(Box::new(AswH1 { et, seed: c.seed }));
        AswStatus::Ok
    })
}

/// Rank `s` of the basis, 0 for NULL.
///
/// # Safety
/// `h1` must be NULL or a live handle from [`asw_h1_compute`].
#[no_mangle]
pub unsafe extern "C" fn asw_h1_rank(h1: *const AswH1) -> usize {
    h1.as_ref().map_or(0, |h| h.et.rank())
}

/// Witt level `n` of the basis, 0 for NULL.
///
/// # Safety
/// `h1` must be NULL or a live handle from [`asw_h1_compute`].
#[no_mangle]
pub unsafe extern "C" fn asw_h1_level(h1: *const AswH1) -> usize {
    h1.as_ref().map_or(0, |h| h.et.level)
}

/// The basis report as JSON; with `with_tower` the tower equations are included.
/// `*out` receives a string to be released with [`asw_string_free`].
///
/// # Safety
/// `h1` must be a live handle from [`asw_h1_compute`]; `out` must be a valid
/// pointer to writable storage.
#[no_mangle]
pub unsafe extern "C" fn asw_h1_to_json(h1: *const AswH1, with_tower: bool, out: *mut *mut c_char) -> AswStatus {
    guarded(|| {
        let Some(h) = h1.as_ref() else {
            set_error("null basis handle");
            return AswStatus::NullPointer;
        };
        if out.is_null() {
            set_error("null output pointer");
            return AswStatus::NullPointer;
        }
        let tower = if with_tower {
            match tower_from_basis(&h.et) {
                Ok(t) => Some(t),
                Err(e) => return fail(e),
            }
        } else {
            None
        };
        let report = CoverReport::from_basis(&h.et, h.seed, true, tower.as_ref());
        match to_json(&report) {
            Ok(s) => write_string(out, s),
            Err(s) => s,
        }
    })
}

/// Release a basis handle. NULL is ignored.
///
/// # Safety
/// `h1` must be NULL or a handle from [`asw_h1_compute`] not freed before.
#[no_mangle]
pub unsafe extern "C" fn asw_h1_free(h1: *mut AswH1) {
    if !h1.is_null() {
        drop(Box::from_raw(h1));
    }
}

/// Cohomology of the constant sheaf `Z/p^n` on the curve, as the JSON report
/// written by `asw sheaf`. `*out` receives a string to be released with
/// [`asw_string_free`].
///
/// # Safety
/// `curve` must be a live handle from [`asw_curve_load`]; `out` must be a valid
/// pointer to writable storage.
#[no_mangle]
pub unsafe extern "C" fn asw_trivial_sheaf_cohomology(
    curve: *const AswCurve,
    n: u32,
    out: *mut *mut c_char,
) -> AswStatus {
    guarded(|| {
        let Some(c) = curve.as_ref() else {
            set_error("null curve handle");
            return AswStatus::NullPointer;
        };
        if out.is_null() {
            set_error("null output pointer");
            return AswStatus::NullPointer;
        }
        if n == 0 {
            return fail(AswError::Parse("level must be at least 1".into()));
        }
        let run = || -> asw::Result<CohomologyReport> {
            let cg = cover_group(&c.loaded.basis, &c.loaded.hasse_witt, n as usize, &[])?;
            let module = SheafModule::trivial(n, 0);
            let complex = compute_cohomology_complex(&cg.group, &module)?;
            verify_crossed_law(&cg.group, &module, &complex)?;
            Ok(CohomologyReport::new(&cg, &module, &complex, c.seed))
        };
        match run() {
            Ok(report) => match to_json(&report) {
                Ok(s) => write_string(out, s),
                Err(s) => s,
            },
            Err(e) => fail(e),
        }
    })
}

/// Release a string returned by this library. NULL is ignored.
///
/// # Safety
/// `s` must be NULL or a pointer returned by this library and not freed before.
#[no_mangle]
pub unsafe extern "C" fn asw_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}
