//! C interface to `kframe`.
//!
//! Every fallible function returns a `KframeStatus`; on failure a message
//! is kept per thread and can be read with `kframe_last_error_message`.
//! Handles are opaque and must be released with their `_free` function.
//! Matrices are passed as row-major arrays of `n * n` doubles.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use kframe::linalg::MatN;
use kframe::matgroups::{self, ClassifyResult, GroupSpec, KValue, Speed};
use kframe::Error;

#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum KframeStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidInput = 2,
    ShapeMismatch = 3,
    Singular = 4,
    NotInGroup = 5,
    Numerical = 6,
    Panic = 7,
}

#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum KframeClassKind {
    Unique = 0,
    Arbitrary = 1,
    Inconsistent = 2,
    Residual = 3,
}

/// Result of `kframe_classify`. `k` is meaningful for `Unique` only, and
/// is ignored when `k_is_omega` is set.
#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct KframeClassification {
    pub kind: KframeClassKind,
    pub k: f64,
    pub k_is_omega: bool,
}

#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum KframeSpeedKind {
    Finite = 0,
    Infinite = 1,
    Zero = 2,
    Undefined = 3,
}

#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct KframeSpeed {
    pub kind: KframeSpeedKind,
    pub c: f64,
}

/// A list of 4x4 transition matrices.
pub struct KframeMatrixSet {
    matrices: Vec<MatN>,
}

/// A fiber group specification.
pub struct KframeGroup {
    spec: GroupSpec,
}

thread_local! {
    static LAST_ERROR: RefCell<CString> = RefCell::new(CString::default());
}

fn set_error(msg: &str) {
    let msg = CString::new(msg.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = msg);
}

fn status_of(e: &Error) -> KframeStatus {
    match e {
        Error::InvalidInput(_) => KframeStatus::InvalidInput,
        Error::ShapeMismatch(_) => KframeStatus::ShapeMismatch,
        Error::SingularMatrix { .. } | Error::SingularMetric { .. } | Error::SingularFrame { .. } => KframeStatus::Singular,
        Error::NotInFiberGroup { .. } | Error::CollarViolation { .. } => KframeStatus::NotInGroup,
        Error::SymmetryViolated { .. } | Error::LogBranchFailure(_) | Error::NonInvariantForm { .. } => KframeStatus::Numerical,
    }
}

fn guarded(f: impl FnOnce() -> Result<(), (KframeStatus, String)>) -> KframeStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => {
            set_error("");
            KframeStatus::Ok
        }
        Ok(Err((status, msg))) => {
            set_error(&msg);
            status
        }
        Err(_) => {
            set_error("internal panic");
            KframeStatus::Panic
        }
    }
}

fn lib_err(e: Error) -> (KframeStatus, String) {
    (status_of(&e), e.to_string())
}

fn null(what: &str) -> (KframeStatus, String) {
    (KframeStatus::NullPointer, format!("{what} is null"))
}

fn k_value(k: f64, omega: bool) -> Result<KValue, (KframeStatus, String)> {
    if omega {
        Ok(KValue::Omega)
    } else if k.is_finite() {
        Ok(KValue::Finite(k))
    } else {
        Err((KframeStatus::InvalidInput, "k must be finite".into()))
    }
}

/// # Safety
/// `data` must point to `n * n` readable doubles.
unsafe fn read_matrix(data: *const f64, n: usize) -> Result<MatN, (KframeStatus, String)> {
    if data.is_null() {
        return Err(null("matrix data"));
    }
    if n == 0 {
        return Err((KframeStatus::ShapeMismatch, "matrix dimension must be positive".into()));
    }
    let slice = std::slice::from_raw_parts(data, n * n);
    if slice.iter().any(|x| !x.is_finite()) {
        return Err((KframeStatus::InvalidInput, "matrix entries must be finite".into()));
    }
    Ok(MatN::from_row_slice(n, slice))
}

/// Message for the last failed call on this thread; empty after a success.
/// The pointer stays valid until the next call on the same thread.
#[no_mangle]
pub extern "C" fn kframe_last_error_message() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ptr())
}

/// Static, NUL-terminated crate version.
#[no_mangle]
pub extern "C" fn kframe_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

#[no_mangle]
pub extern "C" fn kframe_matrix_set_new() -> *mut KframeMatrixSet {
    Box::into_raw(Box::new(KframeMatrixSet { matrices: Vec::new() }))
}

/// # Safety
/// `set` must come from `kframe_matrix_set_new` and not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn kframe_matrix_set_free(set: *mut KframeMatrixSet) {
    if !set.is_null() {
        drop(Box::from_raw(set));
    }
}

/// Appends a 4x4 matrix given as 16 row-major doubles.
///
/// # Safety
/// `set` must be a live handle and `data` must point to 16 doubles.
#[no_mangle]
pub unsafe extern "C" fn kframe_matrix_set_push(set: *mut KframeMatrixSet, data: *const f64) -> KframeStatus {
    guarded(|| {
        let set = set.as_mut().ok_or_else(|| null("set"))?;
        set.matrices.push(read_matrix(data, 4)?);
        Ok(())
    })
}

/// # Safety
/// `set` must be a live handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn kframe_matrix_set_len(set: *const KframeMatrixSet, out: *mut usize) -> KframeStatus {
    guarded(|| {
        let set = set.as_ref().ok_or_else(|| null("set"))?;
        let out = out.as_mut().ok_or_else(|| null("out"))?;
        *out = set.matrices.len();
        Ok(())
    })
}

/// # Safety
/// `set` must be a live handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn kframe_classify(set: *const KframeMatrixSet, tol: f64, out: *mut KframeClassification) -> KframeStatus {
    guarded(|| {
        let set = set.as_ref().ok_or_else(|| null("set"))?;
        let out = out.as_mut().ok_or_else(|| null("out"))?;
        if !(tol > 0.0) {
            return Err((KframeStatus::InvalidInput, "tolerance must be positive".into()));
        }
        *out = match matgroups::classify(&set.matrices, tol) {
            ClassifyResult::Unique { k } => KframeClassification {
                kind: KframeClassKind::Unique,
                k: k.finite().unwrap_or(0.0),
                k_is_omega: k.is_omega(),
            },
            ClassifyResult::Arbitrary => KframeClassification { kind: KframeClassKind::Arbitrary, k: 0.0, k_is_omega: false },
            ClassifyResult::Inconsistent { .. } => KframeClassification { kind: KframeClassKind::Inconsistent, k: 0.0, k_is_omega: false },
            ClassifyResult::Residual { .. } => KframeClassification { kind: KframeClassKind::Residual, k: 0.0, k_is_omega: false },
        };
        Ok(())
    })
}

/// Membership of a 4x4 matrix in `O^k`.
///
/// # Safety
/// `data` must point to 16 doubles and `out` be writable.
#[no_mangle]
pub unsafe extern "C" fn kframe_in_group(data: *const f64, k: f64, k_is_omega: bool, tol: f64, pto: bool, out: *mut bool) -> KframeStatus {
    guarded(|| {
        let out = out.as_mut().ok_or_else(|| null("out"))?;
        let a = read_matrix(data, 4)?;
        *out = matgroups::in_group(&a, k_value(k, k_is_omega)?, tol, pto).map_err(lib_err)?;
        Ok(())
    })
}

/// # Safety
/// `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn kframe_speed_of_interactions(k: f64, k_is_omega: bool, out: *mut KframeSpeed) -> KframeStatus {
    guarded(|| {
        let out = out.as_mut().ok_or_else(|| null("out"))?;
        *out = match matgroups::speed_of_interactions(k_value(k, k_is_omega)?) {
            Speed::Finite(c) => KframeSpeed { kind: KframeSpeedKind::Finite, c },
            Speed::Infinite => KframeSpeed { kind: KframeSpeedKind::Infinite, c: f64::INFINITY },
            Speed::Zero => KframeSpeed { kind: KframeSpeedKind::Zero, c: 0.0 },
            Speed::Undefined => KframeSpeed { kind: KframeSpeedKind::Undefined, c: f64::NAN },
        };
        Ok(())
    })
}

fn put_group(out: *mut *mut KframeGroup, spec: GroupSpec) -> Result<(), (KframeStatus, String)> {
    // SAFETY: checked non-null; callers pass a writable slot.
    let slot = unsafe { out.as_mut() }.ok_or_else(|| null("out"))?;
    *slot = Box::into_raw(Box::new(KframeGroup { spec }));
    Ok(())
}

/// The group `O^k` on 4x4 matrices.
///
/// # Safety
/// `out` must be writable; on success it receives a new handle.
#[no_mangle]
pub unsafe extern "C" fn kframe_group_ok(k: f64, k_is_omega: bool, out: *mut *mut KframeGroup) -> KframeStatus {
    guarded(|| put_group(out, GroupSpec::ok(k_value(k, k_is_omega)?)))
}

/// A group from its JSON description, e.g. `{"ok": -1.0}` or `{"generators": [...]}`.
///
/// # Safety
/// `json` must be a NUL-terminated string and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn kframe_group_from_json(json: *const c_char, out: *mut *mut KframeGroup) -> KframeStatus {
    guarded(|| {
        if json.is_null() {
            return Err(null("json"));
        }
        let text = CStr::from_ptr(json).to_str().map_err(|e| (KframeStatus::InvalidInput, e.to_string()))?;
        let spec: GroupSpec = serde_json::from_str(text).map_err(|e| (KframeStatus::InvalidInput, e.to_string()))?;
        put_group(out, spec)
    })
}

/// # Safety
/// `group` must come from a `kframe_group_*` constructor and not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn kframe_group_free(group: *mut KframeGroup) {
    if !group.is_null() {
        drop(Box::from_raw(group));
    }
}

/// Size of the matrices in the group.
///
/// # Safety
/// `group` must be a live handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn kframe_group_matrix_dim(group: *const KframeGroup, out: *mut usize) -> KframeStatus {
    guarded(|| {
        let g = group.as_ref().ok_or_else(|| null("group"))?;
        *out.as_mut().ok_or_else(|| null("out"))? = g.spec.dim();
        Ok(())
    })
}

/// # Safety
/// `group` must be a live handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn kframe_group_algebra_dimension(group: *const KframeGroup, out: *mut usize) -> KframeStatus {
    guarded(|| {
        let g = group.as_ref().ok_or_else(|| null("group"))?;
        *out.as_mut().ok_or_else(|| null("out"))? = g.spec.algebra_dimension();
        Ok(())
    })
}

/// # Safety
/// `group` must be a live handle, `data` must point to `dim * dim`
/// doubles with `dim` the group's matrix size, and `out` be writable.
#[no_mangle]
pub unsafe extern "C" fn kframe_group_contains(group: *const KframeGroup, data: *const f64, tol: f64, out: *mut bool) -> KframeStatus {
    guarded(|| {
        let g = group.as_ref().ok_or_else(|| null("group"))?;
        let out = out.as_mut().ok_or_else(|| null("out"))?;
        let a = read_matrix(data, g.spec.dim())?;
        *out = g.spec.contains(&a, tol).map_err(lib_err)?;
        Ok(())
    })
}

/// Writes a seeded element of the group's identity component into `out`
/// (`dim * dim` doubles, row-major).
///
/// # Safety
/// `group` must be a live handle and `out` must have room for `dim * dim` doubles.
#[no_mangle]
pub unsafe extern "C" fn kframe_group_random_element(group: *const KframeGroup, seed: u64, scale: f64, out: *mut f64) -> KframeStatus {
    guarded(|| {
        let g = group.as_ref().ok_or_else(|| null("group"))?;
        if out.is_null() {
            return Err(null("out"));
        }
        let m = g.spec.random_element(seed, scale).row_major();
        ptr::copy_nonoverlapping(m.as_ptr(), out, m.len());
        Ok(())
    })
}
