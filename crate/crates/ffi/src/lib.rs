//! C ABI for the mispolar library.
//!
//! Pairs are exposed as opaque handles. All functions return a status code;
//! results are written through out-pointers. On error, a thread-local message
//! is retrievable with `mispolar_last_error`.

use std::cell::RefCell;
use std::ffi::{CStr, CString};
use std::os::raw::{c_char, c_int};
use std::path::Path;

use mispolar::capacity::{bound_profile, capacity_of_pair, mismatched_info};
use mispolar::channel::{read_pair, write_pair};
use mispolar::codec::{select_info_set, simulate_fer, ConstructionOptions};
use mispolar::polar::{transform_by_sequence, SignSequence, TransformOptions};
use mispolar::{Error, SymmetricPair};

/// Status codes returned by every fallible function.
#[repr(C)]
#[derive(Clone, Copy, PartialEq, Eq)]
pub enum MispolarStatus {
    Ok = 0,
    InvalidArgument = 1,
    ValidationFailed = 2,
    ResourceCap = 3,
    NonConvergence = 4,
    Io = 5,
}

/// Opaque handle to a symmetric channel pair.
pub struct MispolarPair {
    inner: SymmetricPair,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: &str) {
    let c = CString::new(msg.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

fn status_of(err: &Error) -> MispolarStatus {
    match err {
        Error::Validation(_) | Error::Format(_) => MispolarStatus::ValidationFailed,
        Error::AlphabetCap { .. } => MispolarStatus::ResourceCap,
        Error::NonConvergence(_) => MispolarStatus::NonConvergence,
        Error::Io(_) | Error::Json(_) => MispolarStatus::Io,
    }
}

fn fail(err: &Error) -> MispolarStatus {
    set_error(&err.to_string());
    status_of(err)
}

fn invalid(msg: &str) -> MispolarStatus {
    set_error(msg);
    MispolarStatus::InvalidArgument
}

/// Returns the last error message for this thread, or NULL if none.
/// The pointer is valid until the next failing call on the same thread.
#[no_mangle]
pub extern "C" fn mispolar_last_error() -> *const c_char {
    LAST_ERROR.with(|e| match &*e.borrow() {
        Some(c) => c.as_ptr(),
        None => std::ptr::null(),
    })
}

unsafe fn path_arg<'a>(ptr: *const c_char) -> Result<&'a Path, MispolarStatus> {
    if ptr.is_null() {
        return Err(invalid("path is NULL"));
    }
    match CStr::from_ptr(ptr).to_str() {
        Ok(s) => Ok(Path::new(s)),
        Err(_) => Err(invalid("path is not valid UTF-8")),
    }
}

/// Loads a pair from a JSON file into a new handle.
///
/// # Safety
/// `path` must be a NUL-terminated string; `out` must be a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn mispolar_pair_load(
    path: *const c_char,
    out: *mut *mut MispolarPair,
) -> MispolarStatus {
    if out.is_null() {
        return invalid("out is NULL");
    }
    let path = match path_arg(path) {
        Ok(p) => p,
        Err(s) => return s,
    };
    match read_pair(path) {
        Ok(pair) => {
            *out = Box::into_raw(Box::new(MispolarPair { inner: pair }));
            MispolarStatus::Ok
        }
        Err(e) => fail(&e),
    }
}

/// Builds a pair from row-major probability tables.
///
/// `w` and `v` are length `2 * l` (row 0 then row 1); `pi` is length `l`.
///
/// # Safety
/// All pointers must reference buffers of the stated lengths.
#[no_mangle]
pub unsafe extern "C" fn mispolar_pair_new(
    l: usize,
    w: *const f64,
    v: *const f64,
    pi: *const usize,
    out: *mut *mut MispolarPair,
) -> MispolarStatus {
    if out.is_null() || w.is_null() || v.is_null() || pi.is_null() {
        return invalid("NULL pointer argument");
    }
    if l == 0 {
        return invalid("alphabet size is zero");
    }
    let row = |p: *const f64, r: usize| std::slice::from_raw_parts(p.add(r * l), l).to_vec();
    let w = match mispolar::Channel::new(row(w, 0), row(w, 1)) {
        Ok(c) => c,
        Err(e) => return fail(&e),
    };
    let v = match mispolar::Channel::new(row(v, 0), row(v, 1)) {
        Ok(c) => c,
        Err(e) => return fail(&e),
    };
    let pi = std::slice::from_raw_parts(pi, l).to_vec();
    match SymmetricPair::new(w, v, pi) {
        Ok(pair) => {
            *out = Box::into_raw(Box::new(MispolarPair { inner: pair }));
            MispolarStatus::Ok
        }
        Err(e) => fail(&e),
    }
}

/// Writes a pair to a JSON file.
///
/// # Safety
/// `pair` must be a live handle; `path` a NUL-terminated string.
#[no_mangle]
pub unsafe extern "C" fn mispolar_pair_save(
    pair: *const MispolarPair,
    path: *const c_char,
) -> MispolarStatus {
    let Some(pair) = pair.as_ref() else {
        return invalid("pair is NULL");
    };
    let path = match path_arg(path) {
        Ok(p) => p,
        Err(s) => return s,
    };
    match write_pair(path, &pair.inner) {
        Ok(()) => MispolarStatus::Ok,
        Err(e) => fail(&e),
    }
}

/// Returns the output alphabet size, or 0 for a NULL handle.
///
/// # Safety
/// `pair` must be a live handle or NULL.
#[no_mangle]
pub unsafe extern "C" fn mispolar_pair_num_outputs(pair: *const MispolarPair) -> usize {
    pair.as_ref().map_or(0, |p| p.inner.num_outputs())
}

/// Frees a handle. NULL is allowed.
///
/// # Safety
/// `pair` must have come from this library and not be freed twice.
#[no_mangle]
pub unsafe extern "C" fn mispolar_pair_free(pair: *mut MispolarPair) {
    if !pair.is_null() {
        drop(Box::from_raw(pair));
    }
}

/// Computes C(W,V) and the tilting exponent alpha.
///
/// # Safety
/// `pair` must be a live handle; out-pointers may be NULL to skip a field.
#[no_mangle]
pub unsafe extern "C" fn mispolar_capacity(
    pair: *const MispolarPair,
    out_capacity: *mut f64,
    out_alpha: *mut f64,
) -> MispolarStatus {
    let Some(pair) = pair.as_ref() else {
        return invalid("pair is NULL");
    };
    match capacity_of_pair(&pair.inner) {
        Ok((c, tilted)) => {
            if !out_capacity.is_null() {
                *out_capacity = c;
            }
            if !out_alpha.is_null() {
                *out_alpha = tilted.alpha;
            }
            MispolarStatus::Ok
        }
        Err(e) => fail(&e),
    }
}

/// Computes the mismatched mutual information I(W,V); -inf is possible.
///
/// # Safety
/// `pair` must be a live handle; `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn mispolar_mismatched_info(
    pair: *const MispolarPair,
    out: *mut f64,
) -> MispolarStatus {
    let Some(pair) = pair.as_ref() else {
        return invalid("pair is NULL");
    };
    if out.is_null() {
        return invalid("out is NULL");
    }
    *out = mismatched_info(&pair.inner);
    MispolarStatus::Ok
}

/// Applies a sign sequence ('+'/'-' string) of polar transforms.
///
/// # Safety
/// `pair` must be a live handle; `seq` NUL-terminated; `out` valid.
#[no_mangle]
pub unsafe extern "C" fn mispolar_transform(
    pair: *const MispolarPair,
    seq: *const c_char,
    alphabet_cap: usize,
    out: *mut *mut MispolarPair,
) -> MispolarStatus {
    let Some(pair) = pair.as_ref() else {
        return invalid("pair is NULL");
    };
    if out.is_null() {
        return invalid("out is NULL");
    }
    if seq.is_null() {
        return invalid("seq is NULL");
    }
    let seq = match CStr::from_ptr(seq).to_str() {
        Ok(s) => s,
        Err(_) => return invalid("seq is not valid UTF-8"),
    };
    let seq = match SignSequence::parse(seq) {
        Ok(s) => s,
        Err(e) => return fail(&e),
    };
    let opts = TransformOptions { alphabet_cap, ..TransformOptions::default() };
    match transform_by_sequence(&pair.inner, &seq, &opts) {
        Ok(result) => {
            *out = Box::into_raw(Box::new(MispolarPair { inner: result }));
            MispolarStatus::Ok
        }
        Err(e) => fail(&e),
    }
}

/// Fills `out[0..=depth]` with the per-depth lower-bound profile.
///
/// # Safety
/// `pair` must be a live handle; `out` must hold `depth + 1` doubles.
#[no_mangle]
pub unsafe extern "C" fn mispolar_bound_profile(
    pair: *const MispolarPair,
    depth: usize,
    alphabet_cap: usize,
    out: *mut f64,
) -> MispolarStatus {
    let Some(pair) = pair.as_ref() else {
        return invalid("pair is NULL");
    };
    if out.is_null() {
        return invalid("out is NULL");
    }
    let opts = TransformOptions { alphabet_cap, ..TransformOptions::default() };
    match bound_profile(&pair.inner, depth, &opts) {
        Ok(profile) => {
            let dst = std::slice::from_raw_parts_mut(out, depth + 1);
            dst.copy_from_slice(&profile.per_depth_bounds);
            MispolarStatus::Ok
        }
        Err(e) => fail(&e),
    }
}

/// Monte Carlo frame error rate of mismatched polar coding.
///
/// `log2_blocklen` is n with block length N = 2^n.
///
/// # Safety
/// `pair` must be a live handle; out-pointers may be NULL to skip a field.
#[no_mangle]
pub unsafe extern "C" fn mispolar_simulate_fer(
    pair: *const MispolarPair,
    log2_blocklen: usize,
    rate: f64,
    trials: u64,
    seed: u64,
    out_fer: *mut f64,
    out_block_errors: *mut u64,
) -> MispolarStatus {
    let Some(pair) = pair.as_ref() else {
        return invalid("pair is NULL");
    };
    if log2_blocklen == 0 || log2_blocklen > 20 {
        return invalid("log2_blocklen must be in 1..=20");
    }
    let cfg = match select_info_set(
        &pair.inner,
        log2_blocklen,
        rate,
        seed ^ 0xc0ffee,
        &ConstructionOptions::default(),
    ) {
        Ok(cfg) => cfg,
        Err(e) => return fail(&e),
    };
    match simulate_fer(&pair.inner, &cfg, trials, seed) {
        Ok(result) => {
            if !out_fer.is_null() {
                *out_fer = result.fer;
            }
            if !out_block_errors.is_null() {
                *out_block_errors = result.block_errors;
            }
            MispolarStatus::Ok
        }
        Err(e) => fail(&e),
    }
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn mispolar_version() -> *const c_char {
    static VERSION: &str = concat!(env!("CARGO_PKG_VERSION"), "\0");
    VERSION.as_ptr() as *const c_char
}

const _: fn() = || {
    // status codes are part of the ABI; keep them aligned with the header
    assert!(MispolarStatus::Ok as c_int == 0);
};
