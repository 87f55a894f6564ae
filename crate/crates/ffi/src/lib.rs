//! C ABI for `hamsys`.
//!
//! Problems are opaque handles created from a JSON specification (or a
//! shipped example) and released with `hamsys_problem_free`.  Every entry
//! point returns a `HamsysStatus`; on failure the message is available from
//! `hamsys_last_error` until the next call on the same thread.  Strings
//! returned through `char **` out-parameters are owned by the caller and
//! released with `hamsys_string_free`.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;
use std::sync::Arc;

use hamsys::criteria;
use hamsys::fixtures;
use hamsys::gram;
use hamsys::propagator::FundamentalSolution;
use hamsys::report::{self, AnalysisOptions, ReportStatus};
use hamsys::system::{IntervalKind, Problem};
use hamsys::HamsysError;
use num_complex::Complex64;

/// Result code of every entry point.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum HamsysStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidUtf8 = 2,
    Parse = 3,
    Spec = 4,
    Validation = 5,
    Numerical = 6,
    Precondition = 7,
    UnknownId = 8,
    Inconclusive = 9,
    BufferTooSmall = 10,
    Panic = 11,
    /// An example did not reproduce its expected results.
    Mismatch = 12,
}

/// Opaque problem handle.
pub struct HamsysProblem {
    problem: Problem,
}

thread_local! {
    static LAST_ERROR: RefCell<CString> = RefCell::new(CString::default());
}

fn set_error(msg: &str) {
    let c = CString::new(msg.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = c);
}

fn status_of(e: &HamsysError) -> HamsysStatus {
    match e {
        HamsysError::Parse { .. } => HamsysStatus::Parse,
        HamsysError::Spec(_) | HamsysError::Dimension(_) => HamsysStatus::Spec,
        HamsysError::Validation(_) => HamsysStatus::Validation,
        HamsysError::Precondition(_) | HamsysError::Refused(_) => HamsysStatus::Precondition,
        HamsysError::UnknownId(_) => HamsysStatus::UnknownId,
        _ => HamsysStatus::Numerical,
    }
}

fn fail(status: HamsysStatus, msg: &str) -> HamsysStatus {
    set_error(msg);
    status
}

/// Run `f`, translating errors and panics into status codes.
fn guard<F>(f: F) -> HamsysStatus
where
    F: FnOnce() -> Result<(), (HamsysStatus, String)>,
{
    set_error("");
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => HamsysStatus::Ok,
        Ok(Err((s, m))) => fail(s, &m),
        Err(_) => fail(HamsysStatus::Panic, "internal panic"),
    }
}

fn lib_err(e: HamsysError) -> (HamsysStatus, String) {
    (status_of(&e), e.to_string())
}

fn null(what: &str) -> (HamsysStatus, String) {
    (HamsysStatus::NullPointer, format!("{what} is null"))
}

unsafe fn str_arg<'a>(p: *const c_char, what: &str) -> Result<&'a str, (HamsysStatus, String)> {
    if p.is_null() {
        return Err(null(what));
    }
    CStr::from_ptr(p)
        .to_str()
        .map_err(|_| (HamsysStatus::InvalidUtf8, format!("{what} is not valid UTF-8")))
}

unsafe fn problem_arg<'a>(p: *const HamsysProblem) -> Result<&'a Problem, (HamsysStatus, String)> {
    p.as_ref().map(|h| &h.problem).ok_or_else(|| null("problem"))
}

unsafe fn put<T>(out: *mut T, v: T) {
    if !out.is_null() {
        *out = v;
    }
}

fn into_c_string(s: String) -> Result<*mut c_char, (HamsysStatus, String)> {
    CString::new(s)
        .map(CString::into_raw)
        .map_err(|_| (HamsysStatus::Numerical, "output contains a NUL byte".to_string()))
}

/// Library version (static string).
#[no_mangle]
pub extern "C" fn hamsys_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Message of the last failure on this thread (empty after a success).
/// Valid until the next call on the same thread.
#[no_mangle]
pub extern "C" fn hamsys_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ptr())
}

/// Release a string returned by this library.
///
/// # Safety
/// `s` must come from this library and not have been freed.
#[no_mangle]
pub unsafe extern "C" fn hamsys_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}

/// Parse a JSON specification.
///
/// # Safety
/// `json` must be a NUL-terminated string; `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn hamsys_problem_from_json(json: *const c_char, out: *mut *mut HamsysProblem) -> HamsysStatus {
    guard(|| {
        if out.is_null() {
            return Err(null("out"));
        }
        let text = str_arg(json, "json")?;
        let problem = Problem::from_json(text).map_err(lib_err)?;
        *out = Box::into_raw(Box::new(HamsysProblem { problem }));
        Ok(())
    })
}

/// Problem of a shipped example.
///
/// # Safety
/// `id` must be a NUL-terminated string; `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn hamsys_problem_from_example(id: *const c_char, out: *mut *mut HamsysProblem) -> HamsysStatus {
    guard(|| {
        if out.is_null() {
            return Err(null("out"));
        }
        let id = str_arg(id, "id")?;
        let f = fixtures::find(id).ok_or_else(|| (HamsysStatus::UnknownId, format!("unknown example '{id}'")))?;
        let problem = f.problem().map_err(lib_err)?;
        *out = Box::into_raw(Box::new(HamsysProblem { problem }));
        Ok(())
    })
}

/// Release a problem handle.
///
/// # Safety
/// `p` must come from `hamsys_problem_from_*` and not have been freed.
#[no_mangle]
pub unsafe extern "C" fn hamsys_problem_free(p: *mut HamsysProblem) {
    if !p.is_null() {
        drop(Box::from_raw(p));
    }
}

/// Dimension n of the first-order system (2n for an embedded
/// Sturm–Liouville problem of block size n).
///
/// # Safety
/// `p` must be a live handle; `n` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn hamsys_problem_dimension(p: *const HamsysProblem, n: *mut usize) -> HamsysStatus {
    guard(|| {
        let s = problem_arg(p)?.system().map_err(lib_err)?;
        put(n, s.n);
        Ok(())
    })
}

/// Structural validation.  `acceptable` is false on a hard failure;
/// `passed` additionally requires every condition within τ_struct.
///
/// # Safety
/// `p` must be a live handle; the out-pointers valid or null.
#[no_mangle]
pub unsafe extern "C" fn hamsys_validate(p: *const HamsysProblem, acceptable: *mut bool, passed: *mut bool) -> HamsysStatus {
    guard(|| {
        let r = report::validate_problem(problem_arg(p)?).map_err(lib_err)?;
        put(acceptable, r.acceptable());
        put(passed, r.passed());
        Ok(())
    })
}

/// Rank of the Gram matrices on the interval and definiteness.  Returns
/// `Inconclusive` (with the outputs set) if the rank did not stabilize.
///
/// # Safety
/// `p` must be a live handle; the out-pointers valid or null.
#[no_mangle]
pub unsafe extern "C" fn hamsys_rank(p: *const HamsysProblem, rank: *mut usize, definite: *mut bool) -> HamsysStatus {
    guard(|| {
        let s = problem_arg(p)?.system().map_err(lib_err)?;
        let r = gram::rank_of_system(&s).map_err(lib_err)?;
        put(rank, r.rank);
        put(definite, r.is_definite());
        if r.stabilized {
            Ok(())
        } else {
            Err((HamsysStatus::Inconclusive, "the rank did not stabilize".into()))
        }
    })
}

/// Formal deficiency indices `ñ±` and `N±` on the problem's interval
/// (both ends for a full line).  Returns `Inconclusive` (with the outputs
/// set) if some trajectory could not be classified.
///
/// # Safety
/// `p` must be a live handle; the out-pointers valid or null.
#[no_mangle]
pub unsafe extern "C" fn hamsys_deficiency(
    p: *const HamsysProblem,
    n_tilde_plus: *mut usize,
    n_tilde_minus: *mut usize,
    deficiency_plus: *mut i64,
    deficiency_minus: *mut i64,
) -> HamsysStatus {
    guard(|| {
        let s = problem_arg(p)?.system().map_err(lib_err)?;
        let o = AnalysisOptions::default().deficiency;
        let (np, nm, dp, dm, inconclusive) = if s.interval.kind == IntervalKind::FullLine {
            let r = hamsys::deficiency::line_indices(&s, &o).map_err(lib_err)?;
            (r.n_tilde_plus, r.n_tilde_minus, r.deficiency_plus, r.deficiency_minus, r.inconclusive)
        } else {
            let r = hamsys::deficiency::formal_deficiency_indices(&s, &o).map_err(lib_err)?;
            (r.n_tilde_plus, r.n_tilde_minus, r.deficiency_plus, r.deficiency_minus, r.inconclusive)
        };
        put(n_tilde_plus, np);
        put(n_tilde_minus, nm);
        put(deficiency_plus, dp);
        put(deficiency_minus, dm);
        if inconclusive == 0 {
            Ok(())
        } else {
            Err((HamsysStatus::Inconclusive, format!("{inconclusive} trajectories inconclusive")))
        }
    })
}

/// Fundamental matrix `Y(x, λ)` (with `Y(x0) = I`), written row-major as
/// interleaved `(re, im)` pairs into `out`, which must hold `2·n·n`
/// doubles (`len` is its length in doubles).
///
/// # Safety
/// `p` must be a live handle; `out` must point to `len` doubles.
#[no_mangle]
pub unsafe extern "C" fn hamsys_fundamental_matrix(
    p: *const HamsysProblem,
    lambda_re: f64,
    lambda_im: f64,
    x: f64,
    out: *mut f64,
    len: usize,
) -> HamsysStatus {
    guard(|| {
        let s = problem_arg(p)?.system().map_err(lib_err)?;
        let n = s.n;
        if out.is_null() {
            return Err(null("out"));
        }
        if len < 2 * n * n {
            return Err((HamsysStatus::BufferTooSmall, format!("need {} doubles, got {len}", 2 * n * n)));
        }
        let x0 = s.interval.x0;
        let fs = Arc::new(
            FundamentalSolution::solve(&s, Complex64::new(lambda_re, lambda_im), x.min(x0), x.max(x0)).map_err(lib_err)?,
        );
        let y = fs.matrix(x).map_err(lib_err)?;
        let dst = std::slice::from_raw_parts_mut(out, 2 * n * n);
        for i in 0..n {
            for j in 0..n {
                dst[2 * (i * n + j)] = y[(i, j)].re;
                dst[2 * (i * n + j) + 1] = y[(i, j)].im;
            }
        }
        Ok(())
    })
}

/// Full analysis as a JSON report.  The report is written even when the
/// analysis ends in a validation failure (`Validation`) or is inconclusive
/// (`Inconclusive`).
///
/// # Safety
/// `p` must be a live handle; `json_out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn hamsys_analyze(p: *const HamsysProblem, json_out: *mut *mut c_char) -> HamsysStatus {
    guard(|| {
        if json_out.is_null() {
            return Err(null("json_out"));
        }
        let r = report::analyze(problem_arg(p)?, &AnalysisOptions::default()).map_err(lib_err)?;
        let text = serde_json::to_string_pretty(&r).map_err(|e| (HamsysStatus::Numerical, e.to_string()))?;
        *json_out = into_c_string(text)?;
        match r.status {
            ReportStatus::Ok => Ok(()),
            ReportStatus::ValidationFailed => Err((HamsysStatus::Validation, "validation failed".into())),
            ReportStatus::Inconclusive => Err((HamsysStatus::Inconclusive, "inconclusive numerics".into())),
            ReportStatus::Inconsistent => Err((
                HamsysStatus::Numerical,
                "a criterion's conclusion disagrees with the measured indices".into(),
            )),
        }
    })
}

/// Evaluate one criterion; the verdict is returned as JSON.
///
/// # Safety
/// `p` must be a live handle, `id` NUL-terminated, `json_out` valid.
#[no_mangle]
pub unsafe extern "C" fn hamsys_criterion_evaluate(
    p: *const HamsysProblem,
    id: *const c_char,
    json_out: *mut *mut c_char,
) -> HamsysStatus {
    guard(|| {
        if json_out.is_null() {
            return Err(null("json_out"));
        }
        let id = str_arg(id, "id")?;
        let v = criteria::evaluate_criterion(id, problem_arg(p)?, &AnalysisOptions::default().criteria).map_err(lib_err)?;
        let text = serde_json::to_string_pretty(&v).map_err(|e| (HamsysStatus::Numerical, e.to_string()))?;
        *json_out = into_c_string(text)?;
        Ok(())
    })
}

/// Number of registered criteria.
#[no_mangle]
pub extern "C" fn hamsys_criteria_count() -> usize {
    criteria::registry().len()
}

/// Id of the `index`-th registered criterion (static string), or null.
#[no_mangle]
pub extern "C" fn hamsys_criterion_id(index: usize) -> *const c_char {
    static IDS: std::sync::OnceLock<Vec<CString>> = std::sync::OnceLock::new();
    let ids = IDS.get_or_init(|| criteria::registry().iter().map(|c| CString::new(c.id).unwrap_or_default()).collect());
    ids.get(index).map_or(ptr::null(), |c| c.as_ptr())
}

/// Run a shipped example and compare with its expected results.
///
/// # Safety
/// `id` must be NUL-terminated; `passed` valid or null.
#[no_mangle]
pub unsafe extern "C" fn hamsys_example_run(id: *const c_char, passed: *mut bool) -> HamsysStatus {
    guard(|| {
        let id = str_arg(id, "id")?;
        let f = fixtures::find(id).ok_or_else(|| (HamsysStatus::UnknownId, format!("unknown example '{id}'")))?;
        let r = report::run_example(&f, &AnalysisOptions::default()).map_err(lib_err)?;
        put(passed, r.passed);
        if r.passed {
            Ok(())
        } else {
            Err((HamsysStatus::Mismatch, r.mismatches.join("; ")))
        }
    })
}
