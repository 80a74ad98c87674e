//! C ABI for the SATD mining toolchain.
//!
//! Every function is panic-safe: failures set a thread-local error message
//! retrievable through [`satd_last_error_message`] and report a status code
//! (or a sentinel value). Handles returned by constructors are opaque and
//! must be released with their matching `_free` function.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::PathBuf;

use satd_miner::cluster::cloning_rate;
use satd_miner::detect::{sample_size, KeywordSet, MatchMode};
use satd_miner::pipeline::{run_pipeline, PipelineConfig};
use satd_miner::stats::{cliffs_delta, mann_whitney_u, Magnitude};

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(message: impl Into<Vec<u8>>) {
    let cstring = CString::new(message).unwrap_or_default();
    LAST_ERROR.with(|slot| *slot.borrow_mut() = Some(cstring));
}

fn clear_error() {
    LAST_ERROR.with(|slot| *slot.borrow_mut() = None);
}

/// Status codes returned by fallible functions.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SatdStatus {
    Ok = 0,
    NullArgument = 1,
    InvalidArgument = 2,
    InvalidUtf8 = 3,
    Failed = 4,
    Panic = 5,
}

/// Keyword matching modes, mirroring the library configuration.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SatdMatchMode {
    WordBoundary = 0,
    Substring = 1,
}

impl From<SatdMatchMode> for MatchMode {
    fn from(mode: SatdMatchMode) -> Self {
        match mode {
            SatdMatchMode::WordBoundary => MatchMode::WordBoundary,
            SatdMatchMode::Substring => MatchMode::Substring,
        }
    }
}

/// Effect-size interpretation bands.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SatdMagnitude {
    Negligible = 0,
    Small = 1,
    Medium = 2,
    Large = 3,
}

impl From<Magnitude> for SatdMagnitude {
    fn from(m: Magnitude) -> Self {
        match m {
            Magnitude::Negligible => SatdMagnitude::Negligible,
            Magnitude::Small => SatdMagnitude::Small,
            Magnitude::Medium => SatdMagnitude::Medium,
            Magnitude::Large => SatdMagnitude::Large,
        }
    }
}

/// Opaque SATD keyword detector.
pub struct SatdDetector {
    keywords: KeywordSet,
}

fn guarded<T>(fallback: T, body: impl FnOnce() -> T) -> T {
    match catch_unwind(AssertUnwindSafe(body)) {
        Ok(value) => value,
        Err(_) => {
            set_error("internal panic");
            fallback
        }
    }
}

unsafe fn cstr_arg<'a>(ptr: *const c_char) -> Result<&'a str, SatdStatus> {
    if ptr.is_null() {
        set_error("null pointer argument");
        return Err(SatdStatus::NullArgument);
    }
    unsafe { CStr::from_ptr(ptr) }.to_str().map_err(|_| {
        set_error("argument is not valid UTF-8");
        SatdStatus::InvalidUtf8
    })
}

unsafe fn slice_arg<'a>(ptr: *const f64, len: usize) -> Result<&'a [f64], SatdStatus> {
    if ptr.is_null() {
        set_error("null pointer argument");
        return Err(SatdStatus::NullArgument);
    }
    Ok(unsafe { std::slice::from_raw_parts(ptr, len) })
}

/// Library version as a static NUL-terminated string; never freed.
#[no_mangle]
pub extern "C" fn satd_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr() as *const c_char
}

/// The last error message on this thread, or NULL when none is set. The
/// caller owns the returned string and releases it with
/// [`satd_string_free`].
#[no_mangle]
pub extern "C" fn satd_last_error_message() -> *mut c_char {
    LAST_ERROR.with(|slot| match slot.borrow().as_ref() {
        Some(msg) => msg.clone().into_raw(),
        None => std::ptr::null_mut(),
    })
}

/// Release a string previously returned by this library.
///
/// # Safety
/// `s` must be a pointer returned by a `satd_*` function that documents
/// this contract, and must not be freed twice.
#[no_mangle]
pub unsafe extern "C" fn satd_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(unsafe { CString::from_raw(s) });
    }
}

/// Detector over the bundled keyword list. Returns NULL on failure.
#[no_mangle]
pub extern "C" fn satd_detector_new_default(mode: SatdMatchMode) -> *mut SatdDetector {
    guarded(std::ptr::null_mut(), || {
        clear_error();
        Box::into_raw(Box::new(SatdDetector {
            keywords: KeywordSet::bundled(mode.into()),
        }))
    })
}

/// Detector over a keyword file (one lowercase pattern per line, `#`
/// comment lines ignored). Returns NULL on failure.
///
/// # Safety
/// `path` must point to a NUL-terminated string.
#[no_mangle]
pub unsafe extern "C" fn satd_detector_from_file(
    path: *const c_char,
    mode: SatdMatchMode,
) -> *mut SatdDetector {
    guarded(std::ptr::null_mut(), || {
        clear_error();
        let path = match unsafe { cstr_arg(path) } {
            Ok(p) => p,
            Err(_) => return std::ptr::null_mut(),
        };
        match KeywordSet::from_file(std::path::Path::new(path), mode.into()) {
            Ok(keywords) => Box::into_raw(Box::new(SatdDetector { keywords })),
            Err(err) => {
                set_error(err.to_string());
                std::ptr::null_mut()
            }
        }
    })
}

/// Number of keyword patterns matching the comment text; 0 means the text
/// is not SATD, -1 signals an error.
///
/// # Safety
/// `detector` must come from a detector constructor and not be freed;
/// `text` must point to a NUL-terminated string.
#[no_mangle]
pub unsafe extern "C" fn satd_detector_match_count(
    detector: *const SatdDetector,
    text: *const c_char,
) -> i32 {
    guarded(-1, || {
        clear_error();
        if detector.is_null() {
            set_error("null detector");
            return -1;
        }
        let text = match unsafe { cstr_arg(text) } {
            Ok(t) => t,
            Err(_) => return -1,
        };
        let detector = unsafe { &*detector };
        detector.keywords.matches(text).len() as i32
    })
}

/// Release a detector.
///
/// # Safety
/// `detector` must come from a detector constructor and not be freed twice.
#[no_mangle]
pub unsafe extern "C" fn satd_detector_free(detector: *mut SatdDetector) {
    if !detector.is_null() {
        drop(unsafe { Box::from_raw(detector) });
    }
}

/// Clone prevalence: s_ci5 / (s_original - (s_ci4 - s_ci5)).
///
/// # Safety
/// `out_rate` must be NULL or point to a writable double.
#[no_mangle]
pub unsafe extern "C" fn satd_cloning_rate(
    s_original: u64,
    s_ci4: u64,
    s_ci5: u64,
    out_rate: *mut f64,
) -> SatdStatus {
    guarded(SatdStatus::Panic, || {
        clear_error();
        if out_rate.is_null() {
            set_error("null output pointer");
            return SatdStatus::NullArgument;
        }
        match cloning_rate(s_original, s_ci4, s_ci5) {
            Ok(rate) => {
                unsafe { *out_rate = rate };
                SatdStatus::Ok
            }
            Err(err) => {
                set_error(err.to_string());
                SatdStatus::InvalidArgument
            }
        }
    })
}

/// Cochran sample size with finite-population correction at p = 0.5.
/// Confidence must be one of 0.90, 0.95, 0.99.
///
/// # Safety
/// `out_size` must be NULL or point to a writable uint64.
#[no_mangle]
pub unsafe extern "C" fn satd_sample_size(
    population: u64,
    confidence: f64,
    interval: f64,
    out_size: *mut u64,
) -> SatdStatus {
    guarded(SatdStatus::Panic, || {
        clear_error();
        if out_size.is_null() {
            set_error("null output pointer");
            return SatdStatus::NullArgument;
        }
        match sample_size(population as usize, confidence, interval) {
            Ok(n) => {
                unsafe { *out_size = n as u64 };
                SatdStatus::Ok
            }
            Err(err) => {
                set_error(err.to_string());
                SatdStatus::InvalidArgument
            }
        }
    })
}

/// Two-sided Mann-Whitney U test; writes the U statistic of `x` and the
/// p-value.
///
/// # Safety
/// `x` and `y` must point to arrays of at least `x_len`/`y_len` doubles.
#[no_mangle]
pub unsafe extern "C" fn satd_mann_whitney_u(
    x: *const f64,
    x_len: usize,
    y: *const f64,
    y_len: usize,
    out_statistic: *mut f64,
    out_p_value: *mut f64,
) -> SatdStatus {
    guarded(SatdStatus::Panic, || {
        clear_error();
        if out_statistic.is_null() || out_p_value.is_null() {
            set_error("null output pointer");
            return SatdStatus::NullArgument;
        }
        let (xs, ys) = match (unsafe { slice_arg(x, x_len) }, unsafe { slice_arg(y, y_len) }) {
            (Ok(a), Ok(b)) => (a, b),
            (Err(s), _) | (_, Err(s)) => return s,
        };
        match mann_whitney_u(xs, ys) {
            Ok(result) => {
                unsafe {
                    *out_statistic = result.statistic;
                    *out_p_value = result.p_value;
                }
                SatdStatus::Ok
            }
            Err(err) => {
                set_error(err.to_string());
                SatdStatus::InvalidArgument
            }
        }
    })
}

/// Cliff's delta with its magnitude band.
///
/// # Safety
/// `x` and `y` must point to arrays of at least `x_len`/`y_len` doubles.
#[no_mangle]
pub unsafe extern "C" fn satd_cliffs_delta(
    x: *const f64,
    x_len: usize,
    y: *const f64,
    y_len: usize,
    out_delta: *mut f64,
    out_magnitude: *mut SatdMagnitude,
) -> SatdStatus {
    guarded(SatdStatus::Panic, || {
        clear_error();
        if out_delta.is_null() || out_magnitude.is_null() {
            set_error("null output pointer");
            return SatdStatus::NullArgument;
        }
        let (xs, ys) = match (unsafe { slice_arg(x, x_len) }, unsafe { slice_arg(y, y_len) }) {
            (Ok(a), Ok(b)) => (a, b),
            (Err(s), _) | (_, Err(s)) => return s,
        };
        match cliffs_delta(xs, ys) {
            Ok(effect) => {
                unsafe {
                    *out_delta = effect.delta;
                    *out_magnitude = effect.magnitude.into();
                }
                SatdStatus::Ok
            }
            Err(err) => {
                set_error(err.to_string());
                SatdStatus::InvalidArgument
            }
        }
    })
}

/// Run the full pipeline for a TOML or JSON config file.
///
/// # Safety
/// `config_path` must point to a NUL-terminated string.
#[no_mangle]
pub unsafe extern "C" fn satd_run_pipeline(config_path: *const c_char) -> SatdStatus {
    guarded(SatdStatus::Panic, || {
        clear_error();
        let path = match unsafe { cstr_arg(config_path) } {
            Ok(p) => p,
            Err(status) => return status,
        };
        let cfg = match PipelineConfig::from_file(&PathBuf::from(path)) {
            Ok(cfg) => cfg,
            Err(err) => {
                set_error(err.to_string());
                return SatdStatus::InvalidArgument;
            }
        };
        match run_pipeline(cfg) {
            Ok(_) => SatdStatus::Ok,
            Err(err) => {
                set_error(err.to_string());
                SatdStatus::Failed
            }
        }
    })
}
