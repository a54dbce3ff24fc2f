//! C ABI over the `nacifs` library.
//!
//! Conventions:
//! - Handles (`NacifsSystem`, `NacifsMeasure`) are opaque pointers created by
//!   the constructor functions and released by the matching `_free` function.
//! - Every fallible call returns a `NacifsStatus`; `NACIFS_STATUS_OK` is zero.
//!   On failure the output parameters are left untouched and a per-thread
//!   message is available from `nacifs_last_error_message`.
//! - Strings returned by the library are NUL-terminated UTF-8 owned by the
//!   caller, to be released with `nacifs_string_free`.
//! - Panics never unwind across the boundary; they surface as
//!   `NACIFS_STATUS_BAD_INPUT` with a message.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::sync::Arc;

use nacifs::conformal::{system_distance, SystemSpec};
use nacifs::harmonic::{estimate_direct, MeasureEstimate, WalkerConfig, DEFAULT_APPROX_MARGIN};
use nacifs::perturb::alpha_exponent;
use nacifs::symbolic::{DerivProxyDiameter, UniformMeasure};
use nacifs::thermo::dimension_report;
use nacifs::conformal::Word;
use nacifs::Error;

/// Result of every fallible library call. Zero means success; nonzero codes
/// partition failures by which stage of a run they invalidate.
#[repr(C)]
#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum NacifsStatus {
    /// The call succeeded and all output parameters are set.
    Ok = 0,
    /// Null pointer, malformed UTF-8, or an internal invariant failure.
    BadInput = 1,
    /// The input could not be parsed or describes an impossible request.
    Config = 2,
    /// The system's geometry fails a contraction, containment, or
    /// separation requirement.
    Validation = 3,
    /// An estimate could not be produced (budget, depth, or degeneracy).
    Estimation = 4,
}

/// Opaque handle to a validated contraction system.
pub struct NacifsSystem {
    inner: Arc<SystemSpec>,
}

/// Opaque handle to a Monte-Carlo cylinder-measure estimate.
pub struct NacifsMeasure {
    inner: MeasureEstimate,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(message: &str) {
    let sanitized = message.replace('\0', " ");
    LAST_ERROR.with(|slot| {
        *slot.borrow_mut() = Some(CString::new(sanitized).unwrap_or_default());
    });
}

fn status_of(err: &Error) -> NacifsStatus {
    match err.exit_code() {
        2 => NacifsStatus::Config,
        3 => NacifsStatus::Validation,
        4 => NacifsStatus::Estimation,
        _ => NacifsStatus::BadInput,
    }
}

fn fail(err: &Error) -> NacifsStatus {
    set_error(&err.to_string());
    status_of(err)
}

fn bad_input(message: &str) -> NacifsStatus {
    set_error(message);
    NacifsStatus::BadInput
}

/// Runs a fallible body, converting panics into `BadInput` instead of
/// unwinding across the ABI.
fn guarded<F: FnOnce() -> NacifsStatus>(body: F) -> NacifsStatus {
    match catch_unwind(AssertUnwindSafe(body)) {
        Ok(status) => status,
        Err(_) => bad_input("internal panic"),
    }
}

unsafe fn read_str<'a>(ptr: *const c_char, what: &str) -> Result<&'a str, NacifsStatus> {
    if ptr.is_null() {
        return Err(bad_input(&format!("{what} pointer is null")));
    }
    CStr::from_ptr(ptr)
        .to_str()
        .map_err(|_| bad_input(&format!("{what} is not valid UTF-8")))
}

unsafe fn system_ref<'a>(ptr: *const NacifsSystem) -> Result<&'a NacifsSystem, NacifsStatus> {
    ptr.as_ref()
        .ok_or_else(|| bad_input("system handle is null"))
}

unsafe fn measure_ref<'a>(ptr: *const NacifsMeasure) -> Result<&'a NacifsMeasure, NacifsStatus> {
    ptr.as_ref()
        .ok_or_else(|| bad_input("measure handle is null"))
}

/// Returns the library version as a static NUL-terminated string.
/// The pointer must not be freed.
#[no_mangle]
pub extern "C" fn nacifs_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr() as *const c_char
}

/// Returns the message of the most recent failure on the calling thread,
/// or null if no failure has occurred. The pointer stays valid until the
/// next failing call on the same thread and must not be freed.
#[no_mangle]
pub extern "C" fn nacifs_last_error_message() -> *const c_char {
    LAST_ERROR.with(|slot| {
        slot.borrow()
            .as_ref()
            .map_or(std::ptr::null(), |s| s.as_ptr())
    })
}

/// Releases a string returned by this library. Null is ignored.
///
/// # Safety
/// `s` must be a pointer previously returned by a `nacifs_*` call that
/// documents `nacifs_string_free` as its release function.
#[no_mangle]
pub unsafe extern "C" fn nacifs_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}

/// Parses a system from a JSON document and validates its explicit
/// generations. On success writes a new handle to `out`.
///
/// # Safety
/// `json` must point to a NUL-terminated string and `out` to writable
/// storage for one pointer.
#[no_mangle]
pub unsafe extern "C" fn nacifs_system_from_json(
    json: *const c_char,
    out: *mut *mut NacifsSystem,
) -> NacifsStatus {
    guarded(|| {
        if out.is_null() {
            return bad_input("output pointer is null");
        }
        let text = match read_str(json, "json") {
            Ok(t) => t,
            Err(status) => return status,
        };
        match SystemSpec::from_json(text) {
            Ok(inner) => {
                *out = Box::into_raw(Box::new(NacifsSystem { inner }));
                NacifsStatus::Ok
            }
            Err(e) => fail(&e),
        }
    })
}

/// Reads a JSON system description from a file path.
///
/// # Safety
/// `path` must point to a NUL-terminated string and `out` to writable
/// storage for one pointer.
#[no_mangle]
pub unsafe extern "C" fn nacifs_system_load(
    path: *const c_char,
    out: *mut *mut NacifsSystem,
) -> NacifsStatus {
    guarded(|| {
        if out.is_null() {
            return bad_input("output pointer is null");
        }
        let path = match read_str(path, "path") {
            Ok(t) => t,
            Err(status) => return status,
        };
        match nacifs::io::load_system(std::path::Path::new(path)) {
            Ok(inner) => {
                *out = Box::into_raw(Box::new(NacifsSystem { inner }));
                NacifsStatus::Ok
            }
            Err(e) => fail(&e),
        }
    })
}

/// Releases a system handle. Null is ignored.
///
/// # Safety
/// `sys` must be null or a pointer from a `nacifs_system_*` constructor
/// that has not been freed already.
#[no_mangle]
pub unsafe extern "C" fn nacifs_system_free(sys: *mut NacifsSystem) {
    if !sys.is_null() {
        drop(Box::from_raw(sys));
    }
}

/// Number of generations the system can materialize.
/// Returns 0 for a null handle.
///
/// # Safety
/// `sys` must be null or a live system handle.
#[no_mangle]
pub unsafe extern "C" fn nacifs_system_horizon(sys: *const NacifsSystem) -> usize {
    sys.as_ref().map_or(0, |s| s.inner.horizon())
}

/// Writes the branch count of one generation to `out`.
///
/// # Safety
/// `sys` must be a live system handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn nacifs_system_degree(
    sys: *const NacifsSystem,
    generation: usize,
    out: *mut usize,
) -> NacifsStatus {
    guarded(|| {
        let sys = match system_ref(sys) {
            Ok(s) => s,
            Err(status) => return status,
        };
        if out.is_null() {
            return bad_input("output pointer is null");
        }
        match sys.inner.degree(generation) {
            Ok(d) => {
                *out = d;
                NacifsStatus::Ok
            }
            Err(e) => fail(&e),
        }
    })
}

/// Re-checks contraction, containment, and separation for generations
/// `0..upto`.
///
/// # Safety
/// `sys` must be a live system handle.
#[no_mangle]
pub unsafe extern "C" fn nacifs_system_validate(
    sys: *const NacifsSystem,
    upto: usize,
) -> NacifsStatus {
    guarded(|| {
        let sys = match system_ref(sys) {
            Ok(s) => s,
            Err(status) => return status,
        };
        match sys.inner.validate(upto) {
            Ok(reports) => match reports.iter().find(|r| !r.ok) {
                None => NacifsStatus::Ok,
                Some(bad) => fail(&Error::ValidationFailed {
                    generation: bad.generation,
                    detail: bad
                        .first_defect()
                        .unwrap_or_else(|| "unspecified defect".into()),
                }),
            },
            Err(e) => fail(&e),
        }
    })
}

/// Writes the sup-norm coefficient distance between two systems over
/// generations `0..upto`, weighted by the localization radius.
///
/// # Safety
/// `a` and `b` must be live system handles and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn nacifs_system_distance(
    a: *const NacifsSystem,
    b: *const NacifsSystem,
    upto: usize,
    out: *mut f64,
) -> NacifsStatus {
    guarded(|| {
        let (a, b) = match (system_ref(a), system_ref(b)) {
            (Ok(a), Ok(b)) => (a, b),
            (Err(s), _) | (_, Err(s)) => return s,
        };
        if out.is_null() {
            return bad_input("output pointer is null");
        }
        match system_distance(&a.inner, &b.inner, upto) {
            Ok(d) => {
                *out = d.distance;
                NacifsStatus::Ok
            }
            Err(e) => fail(&e),
        }
    })
}

/// Runs walk-on-spheres walkers against the depth-`approx_depth` disk
/// approximation and tallies exits on depth-`assign_depth` cylinders.
/// On success writes a new measure handle to `out`.
///
/// # Safety
/// `sys` must be a live system handle and `out` writable storage for one
/// pointer.
#[no_mangle]
pub unsafe extern "C" fn nacifs_measure_estimate(
    sys: *const NacifsSystem,
    offset: usize,
    approx_depth: usize,
    assign_depth: usize,
    walkers: u64,
    seed: u64,
    out: *mut *mut NacifsMeasure,
) -> NacifsStatus {
    guarded(|| {
        let sys = match system_ref(sys) {
            Ok(s) => s,
            Err(status) => return status,
        };
        if out.is_null() {
            return bad_input("output pointer is null");
        }
        let cfg = WalkerConfig {
            walkers,
            seed,
            ..WalkerConfig::default()
        };
        match estimate_direct(&sys.inner, offset, approx_depth, assign_depth, &cfg) {
            Ok(inner) => {
                *out = Box::into_raw(Box::new(NacifsMeasure { inner }));
                NacifsStatus::Ok
            }
            Err(e) => fail(&e),
        }
    })
}

/// Releases a measure handle. Null is ignored.
///
/// # Safety
/// `m` must be null or a pointer from `nacifs_measure_estimate` that has
/// not been freed already.
#[no_mangle]
pub unsafe extern "C" fn nacifs_measure_free(m: *mut NacifsMeasure) {
    if !m.is_null() {
        drop(Box::from_raw(m));
    }
}

/// Total number of walkers absorbed into the tally.
/// Returns 0 for a null handle.
///
/// # Safety
/// `m` must be null or a live measure handle.
#[no_mangle]
pub unsafe extern "C" fn nacifs_measure_total(m: *const NacifsMeasure) -> u64 {
    m.as_ref().map_or(0, |m| m.inner.total)
}

/// Writes the estimated probability of the cylinder named by `letters`
/// (branch indices, one per generation from the estimate's offset) and its
/// binomial standard error.
///
/// # Safety
/// `m` must be a live measure handle, `letters` must point to `len`
/// readable entries (or be null when `len` is zero), and the output
/// pointers must be writable.
#[no_mangle]
pub unsafe extern "C" fn nacifs_measure_value(
    m: *const NacifsMeasure,
    letters: *const u32,
    len: usize,
    out_value: *mut f64,
    out_stderr: *mut f64,
) -> NacifsStatus {
    guarded(|| {
        let m = match measure_ref(m) {
            Ok(m) => m,
            Err(status) => return status,
        };
        if letters.is_null() && len > 0 {
            return bad_input("letters pointer is null");
        }
        if out_value.is_null() || out_stderr.is_null() {
            return bad_input("output pointer is null");
        }
        let branches = if len == 0 {
            Vec::new()
        } else {
            std::slice::from_raw_parts(letters, len).to_vec()
        };
        let word = Word::new(m.inner.offset, branches);
        match (m.inner.value(&word), m.inner.stderr(&word)) {
            (Ok(v), Ok(s)) => {
                *out_value = v;
                *out_stderr = s;
                NacifsStatus::Ok
            }
            (Err(e), _) | (_, Err(e)) => fail(&e),
        }
    })
}

/// Serializes the full cylinder table as CSV into a newly allocated string
/// written to `out`; release it with `nacifs_string_free`.
///
/// # Safety
/// `m` must be a live measure handle and `out` writable storage for one
/// pointer.
#[no_mangle]
pub unsafe extern "C" fn nacifs_measure_csv(
    m: *const NacifsMeasure,
    out: *mut *mut c_char,
) -> NacifsStatus {
    guarded(|| {
        let m = match measure_ref(m) {
            Ok(m) => m,
            Err(status) => return status,
        };
        if out.is_null() {
            return bad_input("output pointer is null");
        }
        let mut buf = Vec::new();
        if let Err(e) = m.inner.to_csv(&mut buf) {
            return fail(&e);
        }
        match CString::new(buf) {
            Ok(s) => {
                *out = s.into_raw();
                NacifsStatus::Ok
            }
            Err(_) => bad_input("serialized table contained a NUL byte"),
        }
    })
}

/// Computes the entropy-to-contraction ratio interval over depths
/// `1..=nmax` and writes its endpoints. With `use_harmonic` false the
/// uniform branch measure is used and no walkers run; with it true a
/// walk-on-spheres estimate with the given budget and seed backs the
/// ratios.
///
/// # Safety
/// `sys` must be a live system handle and `out_lo`, `out_hi` writable.
#[no_mangle]
pub unsafe extern "C" fn nacifs_dimension_interval(
    sys: *const NacifsSystem,
    nmax: usize,
    window: usize,
    walkers: u64,
    seed: u64,
    use_harmonic: bool,
    out_lo: *mut f64,
    out_hi: *mut f64,
) -> NacifsStatus {
    guarded(|| {
        let sys = match system_ref(sys) {
            Ok(s) => s,
            Err(status) => return status,
        };
        if out_lo.is_null() || out_hi.is_null() {
            return bad_input("output pointer is null");
        }
        if nmax == 0 {
            return fail(&Error::Config("nmax must be at least 1".into()));
        }
        let result = (|| {
            let diam = DerivProxyDiameter::new(&sys.inner, 0, nmax)?;
            let depths: Vec<usize> = (1..=nmax).collect();
            if use_harmonic {
                let cfg = WalkerConfig {
                    walkers,
                    seed,
                    ..WalkerConfig::default()
                };
                let est = estimate_direct(
                    &sys.inner,
                    0,
                    nmax + DEFAULT_APPROX_MARGIN,
                    nmax,
                    &cfg,
                )?;
                dimension_report(&est, &diam, &depths, window)
            } else {
                let mu = UniformMeasure::new(0, sys.inner.degrees(0, nmax)?);
                dimension_report(&mu, &diam, &depths, window)
            }
        })();
        match result {
            Ok(report) => {
                *out_lo = report.hd_estimate;
                *out_hi = report.pd_estimate;
                NacifsStatus::Ok
            }
            Err(e) => fail(&e),
        }
    })
}

/// Writes the continuity exponent `ln(1 - eta) / ln(eta (1 - eta))`
/// governing how fast measure distances shrink with coefficient distance.
///
/// # Safety
/// `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn nacifs_alpha_exponent(eta: f64, out: *mut f64) -> NacifsStatus {
    guarded(|| {
        if out.is_null() {
            return bad_input("output pointer is null");
        }
        match alpha_exponent(eta) {
            Ok(v) => {
                *out = v;
                NacifsStatus::Ok
            }
            Err(e) => fail(&e),
        }
    })
}
