//! C ABI over the qaiccc allocator.
//!
//! Inputs are JSON strings in the same layout the command-line tool reads.
//! Every fallible call returns a [`QaicccStatus`]; on failure the message is
//! available from [`qaiccc_last_error`] on the same thread. Strings handed
//! out by the library are owned by the caller and released with
//! [`qaiccc_string_free`].

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use qaiccc::model::RequestId;
use qaiccc::oracle::oracle_report;
use qaiccc::report::{run, OracleDocument, RunOptions, RunReport};
use qaiccc::{error::exit, ingest, ConnectivityGraph, CrosstalkRate, Error, QubitId, SearchConfig, SizeRequests};

/// Result of every fallible call. The first five values match the
/// command-line exit codes.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum QaicccStatus {
    Ok = 0,
    /// Malformed or inconsistent input.
    Input = 1,
    InsufficientQubits = 2,
    NoFeasibleAllocation = 3,
    /// Exhaustive oracle refused: too many qubits for the cap.
    InstanceTooLarge = 4,
    NullPointer = 16,
    InvalidUtf8 = 17,
    /// Argument out of range (qubit index, zero limits).
    InvalidArgument = 18,
    /// A Rust panic was caught at the boundary.
    Panic = 19,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum QaicccOwnerKind {
    Trusted = 0,
    Untrusted = 1,
    /// Filler user holding leftover qubits.
    Idle = 2,
}

/// Owner of a qubit in the selected allocation. `index` is the position of
/// the request in its trust class, 0 for idle.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct QaicccOwner {
    pub kind: QaicccOwnerKind,
    pub index: u32,
}

/// Parsed platform, requests and rates plus search limits.
pub struct QaicccInstance {
    graph: ConnectivityGraph,
    sizes: SizeRequests,
    rates: Vec<CrosstalkRate>,
    config: SearchConfig,
}

/// Outcome of an allocation run.
pub struct QaicccResult {
    report: RunReport,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: String) {
    let c = CString::new(msg.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

struct Fail(QaicccStatus, String);

impl From<Error> for Fail {
    fn from(e: Error) -> Self {
        let status = match e.exit_code() {
            exit::INSUFFICIENT_QUBITS => QaicccStatus::InsufficientQubits,
            exit::NO_FEASIBLE_ALLOCATION => QaicccStatus::NoFeasibleAllocation,
            exit::INSTANCE_TOO_LARGE => QaicccStatus::InstanceTooLarge,
            _ => QaicccStatus::Input,
        };
        Fail(status, e.to_string())
    }
}

fn null(what: &str) -> Fail {
    Fail(QaicccStatus::NullPointer, format!("{what} is null"))
}

/// Runs `f`, recording any failure or panic as the thread's last error.
fn guard(f: impl FnOnce() -> Result<(), Fail>) -> QaicccStatus {
    LAST_ERROR.with(|e| *e.borrow_mut() = None);
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => QaicccStatus::Ok,
        Ok(Err(Fail(status, msg))) => {
            set_error(msg);
            status
        }
        Err(payload) => {
            let msg = payload
                .downcast_ref::<&str>()
                .map(|s| s.to_string())
                .or_else(|| payload.downcast_ref::<String>().cloned())
                .unwrap_or_else(|| "unknown panic".into());
            set_error(format!("panic: {msg}"));
            QaicccStatus::Panic
        }
    }
}

unsafe fn str_arg<'a>(p: *const c_char, what: &str) -> Result<&'a str, Fail> {
    if p.is_null() {
        return Err(null(what));
    }
    CStr::from_ptr(p)
        .to_str()
        .map_err(|e| Fail(QaicccStatus::InvalidUtf8, format!("{what}: {e}")))
}

unsafe fn out_arg<'a, T>(p: *mut T, what: &str) -> Result<&'a mut T, Fail> {
    p.as_mut().ok_or_else(|| null(what))
}

unsafe fn handle<'a, T>(p: *const T, what: &str) -> Result<&'a T, Fail> {
    p.as_ref().ok_or_else(|| null(what))
}

fn give_string(s: String, out: &mut *mut c_char) -> Result<(), Fail> {
    let c = CString::new(s).map_err(|e| Fail(QaicccStatus::Input, e.to_string()))?;
    *out = c.into_raw();
    Ok(())
}

/// Message for the last failed call on this thread, or null. Valid until the
/// next call into the library on the same thread; do not free.
#[no_mangle]
pub extern "C" fn qaiccc_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |c| c.as_ptr()))
}

/// Library version as a static string.
#[no_mangle]
pub extern "C" fn qaiccc_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Frees a string returned by this library. Null is ignored.
///
/// # Safety
/// `s` must come from this library and not have been freed already.
#[no_mangle]
pub unsafe extern "C" fn qaiccc_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}

/// Parses an instance from the three JSON documents. On success `*out`
/// holds a handle to release with [`qaiccc_instance_free`].
///
/// # Safety
/// String arguments must be null or NUL-terminated; `out` must be null or
/// writable.
#[no_mangle]
pub unsafe extern "C" fn qaiccc_instance_new(
    platform_json: *const c_char,
    requests_json: *const c_char,
    rates_json: *const c_char,
    out: *mut *mut QaicccInstance,
) -> QaicccStatus {
    guard(|| {
        let out = out_arg(out, "out")?;
        *out = ptr::null_mut();
        let platform = str_arg(platform_json, "platform_json")?;
        let requests = str_arg(requests_json, "requests_json")?;
        let rates = str_arg(rates_json, "rates_json")?;
        let graph = ingest::parse_platform(platform, "platform").map_err(Error::from)?;
        let sizes = ingest::parse_requests(requests, "requests").map_err(Error::from)?;
        let rates = ingest::parse_rates(rates, &graph, "rates").map_err(Error::from)?;
        *out = Box::into_raw(Box::new(QaicccInstance {
            graph,
            sizes,
            rates,
            config: SearchConfig::default(),
        }));
        Ok(())
    })
}

/// Releases an instance. Null is ignored.
///
/// # Safety
/// `inst` must come from [`qaiccc_instance_new`] and not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn qaiccc_instance_free(inst: *mut QaicccInstance) {
    if !inst.is_null() {
        drop(Box::from_raw(inst));
    }
}

/// Caps the search population; 0 removes the cap.
///
/// # Safety
/// `inst` must be null or a live instance.
#[no_mangle]
pub unsafe extern "C" fn qaiccc_instance_set_max_population(inst: *mut QaicccInstance, limit: usize) -> QaicccStatus {
    guard(|| {
        let inst = out_arg(inst, "inst")?;
        inst.config.max_population = (limit > 0).then_some(limit);
        Ok(())
    })
}

/// Caps connector paths explored per connection step. Must be positive.
///
/// # Safety
/// `inst` must be null or a live instance.
#[no_mangle]
pub unsafe extern "C" fn qaiccc_instance_set_max_paths(inst: *mut QaicccInstance, limit: usize) -> QaicccStatus {
    guard(|| {
        let inst = out_arg(inst, "inst")?;
        if limit == 0 {
            return Err(Fail(QaicccStatus::InvalidArgument, "max paths must be at least 1".into()));
        }
        inst.config.max_paths_per_connect = limit;
        Ok(())
    })
}

/// Number of qubits on the platform.
///
/// # Safety
/// `inst` must be null or a live instance.
#[no_mangle]
pub unsafe extern "C" fn qaiccc_instance_qubit_count(inst: *const QaicccInstance, out: *mut usize) -> QaicccStatus {
    guard(|| {
        *out_arg(out, "out")? = handle(inst, "inst")?.graph.vertex_count();
        Ok(())
    })
}

/// Runs the search and selection. `snapshots` keeps per-rate population
/// snapshots in the JSON report. Release the result with
/// [`qaiccc_result_free`].
///
/// # Safety
/// `inst` must be null or a live instance; `out` must be null or writable.
#[no_mangle]
pub unsafe extern "C" fn qaiccc_allocate(
    inst: *const QaicccInstance,
    snapshots: bool,
    out: *mut *mut QaicccResult,
) -> QaicccStatus {
    guard(|| {
        let out = out_arg(out, "out")?;
        *out = ptr::null_mut();
        let inst = handle(inst, "inst")?;
        let opts = RunOptions {
            snapshots,
            timings: false,
        };
        let report = run(&inst.graph, &inst.sizes, &inst.rates, &inst.config, opts)?;
        *out = Box::into_raw(Box::new(QaicccResult { report }));
        Ok(())
    })
}

/// Releases a result. Null is ignored.
///
/// # Safety
/// `res` must come from [`qaiccc_allocate`] and not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn qaiccc_result_free(res: *mut QaicccResult) {
    if !res.is_null() {
        drop(Box::from_raw(res));
    }
}

/// Score and penalty of the selected allocation.
///
/// # Safety
/// `res` must be null or a live result; outputs must be null or writable.
#[no_mangle]
pub unsafe extern "C" fn qaiccc_result_scores(
    res: *const QaicccResult,
    score: *mut f64,
    penalty: *mut f64,
) -> QaicccStatus {
    guard(|| {
        let a = &handle(res, "res")?.report.selected.allocation;
        *out_arg(score, "score")? = a.score;
        *out_arg(penalty, "penalty")? = a.penalty;
        Ok(())
    })
}

/// Who controls `qubit` in the selected allocation.
///
/// # Safety
/// `res` must be null or a live result; `out` must be null or writable.
#[no_mangle]
pub unsafe extern "C" fn qaiccc_result_owner(res: *const QaicccResult, qubit: u32, out: *mut QaicccOwner) -> QaicccStatus {
    guard(|| {
        let out = out_arg(out, "out")?;
        let sel = &handle(res, "res")?.report.selected;
        let (id, _) = sel
            .assignment
            .iter()
            .find(|(_, qs)| qs.contains(&QubitId(qubit)))
            .ok_or_else(|| Fail(QaicccStatus::InvalidArgument, format!("qubit {qubit} is not on the platform")))?;
        *out = match *id {
            RequestId::Trusted(i) => QaicccOwner {
                kind: QaicccOwnerKind::Trusted,
                index: i as u32,
            },
            RequestId::Untrusted(i) => QaicccOwner {
                kind: QaicccOwnerKind::Untrusted,
                index: i as u32,
            },
            RequestId::Idle => QaicccOwner {
                kind: QaicccOwnerKind::Idle,
                index: 0,
            },
        };
        Ok(())
    })
}

/// Canonical form of the selected allocation, e.g. `{U:{q0,q1}, U:{q2,q3,q4}}`.
///
/// # Safety
/// `res` must be null or a live result; `out` must be null or writable.
#[no_mangle]
pub unsafe extern "C" fn qaiccc_result_key(res: *const QaicccResult, out: *mut *mut c_char) -> QaicccStatus {
    guard(|| {
        let out = out_arg(out, "out")?;
        give_string(handle(res, "res")?.report.selected.allocation.key().to_string(), out)
    })
}

/// Full run report. `text` selects the human-readable layout instead of JSON.
///
/// # Safety
/// `res` must be null or a live result; `out` must be null or writable.
#[no_mangle]
pub unsafe extern "C" fn qaiccc_result_report(res: *const QaicccResult, text: bool, out: *mut *mut c_char) -> QaicccStatus {
    guard(|| {
        let out = out_arg(out, "out")?;
        let report = &handle(res, "res")?.report;
        let body = if text {
            report.to_text()
        } else {
            serde_json::to_string_pretty(report).map_err(|e| Fail(QaicccStatus::Input, e.to_string()))?
        };
        give_string(body, out)
    })
}

/// Exhaustive comparison against every complete allocation, as a JSON
/// document. Refuses instances with more than `cap` qubits.
///
/// # Safety
/// `inst` must be null or a live instance; `out` must be null or writable.
#[no_mangle]
pub unsafe extern "C" fn qaiccc_oracle_json(inst: *const QaicccInstance, cap: usize, out: *mut *mut c_char) -> QaicccStatus {
    guard(|| {
        let out = out_arg(out, "out")?;
        let inst = handle(inst, "inst")?;
        let rep = oracle_report(&inst.graph, &inst.sizes, &inst.rates, &inst.config, cap).map_err(Error::from)?;
        let body = serde_json::to_string_pretty(&OracleDocument::new(rep)).map_err(|e| Fail(QaicccStatus::Input, e.to_string()))?;
        give_string(body, out)
    })
}
