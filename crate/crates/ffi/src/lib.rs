//! C ABI for the layered-qkd simulator.
//!
//! Every entry point returns an [`LqkdStatus`]. On failure a message is
//! stored per thread and can be read with [`lqkd_last_error`]. Handles are
//! opaque and must be released with their `_free` function; strings
//! returned through `char **` out-parameters must be released with
//! [`lqkd_string_free`].

use std::cell::RefCell;
use std::ffi::{c_char, c_int, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use layered_qkd::analysis::{summarize, verify_table, Decision, TableId, TableSpec};
use layered_qkd::cli::{factorize_report, oracle_table, resolve_bases, RunSettings};
use layered_qkd::protocol::{RoundRecord, Session};
use layered_qkd::qudit::format::parse_state;
use layered_qkd::qudit::{builtin, BasisKind, PureState};

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LqkdStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    Failed = 3,
    Panic = 4,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LqkdDecision {
    Accept = 0,
    Abort = 1,
    Inconclusive = 2,
}

pub struct LqkdState(PureState);

pub struct LqkdSession {
    settings: RunSettings,
}

pub struct LqkdRun {
    decision: LqkdDecision,
    records: Vec<RoundRecord>,
    summary_json: String,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: impl Into<String>) {
    let msg = msg.into().replace('\0', " ");
    LAST_ERROR.with(|e| *e.borrow_mut() = CString::new(msg).ok());
}

struct Fail(LqkdStatus, String);

impl Fail {
    fn invalid(msg: impl ToString) -> Self {
        Fail(LqkdStatus::InvalidArgument, msg.to_string())
    }

    fn failed(msg: impl ToString) -> Self {
        Fail(LqkdStatus::Failed, msg.to_string())
    }
}

fn guard(f: impl FnOnce() -> Result<(), Fail>) -> LqkdStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => {
            LAST_ERROR.with(|e| *e.borrow_mut() = None);
            LqkdStatus::Ok
        }
        Ok(Err(Fail(status, msg))) => {
            set_error(msg);
            status
        }
        Err(_) => {
            set_error("internal panic");
            LqkdStatus::Panic
        }
    }
}

unsafe fn str_arg<'a>(p: *const c_char, name: &str) -> Result<&'a str, Fail> {
    if p.is_null() {
        return Err(Fail(LqkdStatus::NullPointer, format!("`{name}` is null")));
    }
    CStr::from_ptr(p)
        .to_str()
        .map_err(|_| Fail::invalid(format!("`{name}` is not valid UTF-8")))
}

unsafe fn ref_arg<'a, T>(p: *const T, name: &str) -> Result<&'a T, Fail> {
    p.as_ref()
        .ok_or_else(|| Fail(LqkdStatus::NullPointer, format!("`{name}` is null")))
}

unsafe fn put<T>(out: *mut T, value: T, name: &str) -> Result<(), Fail> {
    if out.is_null() {
        return Err(Fail(LqkdStatus::NullPointer, format!("`{name}` is null")));
    }
    out.write(value);
    Ok(())
}

unsafe fn put_string(out: *mut *mut c_char, s: String) -> Result<(), Fail> {
    let c = CString::new(s).map_err(|_| Fail::failed("output contains a NUL byte"))?;
    put(out, c.into_raw(), "out")
}

/// Message for the last failed call on this thread, or NULL. Valid until
/// the next call into the library from the same thread.
#[no_mangle]
pub extern "C" fn lqkd_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |c| c.as_ptr()))
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn lqkd_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// # Safety
/// `s` must be NULL or a string returned by this library, not yet freed.
#[no_mangle]
pub unsafe extern "C" fn lqkd_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}

/// Built-in state by id: eq1, eq3, eq6, eq8, bell, ghz3.
///
/// # Safety
/// `id` must be a NUL-terminated string; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn lqkd_state_builtin(id: *const c_char, out: *mut *mut LqkdState) -> LqkdStatus {
    guard(|| {
        let id = str_arg(id, "id")?;
        let s = builtin::by_name(id).map_err(Fail::invalid)?;
        put(out, Box::into_raw(Box::new(LqkdState(s))), "out")
    })
}

/// State from the plain-text literal format (`dims` line plus terms).
///
/// # Safety
/// `text` must be a NUL-terminated string; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn lqkd_state_parse(text: *const c_char, out: *mut *mut LqkdState) -> LqkdStatus {
    guard(|| {
        let text = str_arg(text, "text")?;
        let s = parse_state(text).map_err(Fail::invalid)?;
        put(out, Box::into_raw(Box::new(LqkdState(s))), "out")
    })
}

/// # Safety
/// `state` must be NULL or a handle from this library, not yet freed.
#[no_mangle]
pub unsafe extern "C" fn lqkd_state_free(state: *mut LqkdState) {
    if !state.is_null() {
        drop(Box::from_raw(state));
    }
}

/// Writes up to `cap` subsystem dimensions into `dims` and the subsystem
/// count into `count`. `dims` may be NULL when `cap` is 0.
///
/// # Safety
/// `state` must be a live handle; `dims` must have room for `cap` values.
#[no_mangle]
pub unsafe extern "C" fn lqkd_state_dims(
    state: *const LqkdState,
    dims: *mut usize,
    cap: usize,
    count: *mut usize,
) -> LqkdStatus {
    guard(|| {
        let s = &ref_arg(state, "state")?.0;
        let d = s.dims();
        if cap > 0 {
            if dims.is_null() {
                return Err(Fail(LqkdStatus::NullPointer, "`dims` is null".into()));
            }
            for (i, &x) in d.iter().take(cap).enumerate() {
                dims.add(i).write(x);
            }
        }
        put(count, d.len(), "count")
    })
}

/// Exact outcome distribution as JSON. `bases` is a comma-separated list,
/// one of comp, conj, fourier, mub4 per subsystem. `eve` may be NULL or an
/// intercept-resend spec whose targets are subsystem indices.
///
/// # Safety
/// Pointers must be valid as documented; `out_json` must be writable.
#[no_mangle]
pub unsafe extern "C" fn lqkd_state_oracle_json(
    state: *const LqkdState,
    bases: *const c_char,
    eve: *const c_char,
    out_json: *mut *mut c_char,
) -> LqkdStatus {
    guard(|| {
        let s = &ref_arg(state, "state")?.0;
        let bases = str_arg(bases, "bases")?;
        let eve = if eve.is_null() { None } else { Some(str_arg(eve, "eve")?) };
        let kinds = resolve_bases(bases, s.dims(), BasisKind::Mub4).map_err(Fail::invalid)?;
        let table = oracle_table(s, &kinds, eve, BasisKind::Mub4).map_err(Fail::invalid)?;
        put_string(out_json, serde_json::to_string(&table).map_err(Fail::failed)?)
    })
}

/// Bipartition scan of the binary-mapped state as JSON.
///
/// # Safety
/// `state` must be a live handle; `out_json` must be writable.
#[no_mangle]
pub unsafe extern "C" fn lqkd_state_factorize_json(
    state: *const LqkdState,
    tolerance: f64,
    out_json: *mut *mut c_char,
) -> LqkdStatus {
    guard(|| {
        let s = &ref_arg(state, "state")?.0;
        if tolerance.is_nan() || tolerance < 0.0 {
            return Err(Fail::invalid("tolerance must be non-negative"));
        }
        let report = factorize_report("state", s, tolerance).map_err(Fail::invalid)?;
        put_string(out_json, serde_json::to_string(&report).map_err(Fail::failed)?)
    })
}

/// Session from a JSON settings object: the session fields (`protocol`,
/// `rounds`, `seed`, `eve`, ...) plus an optional `check` object. Missing
/// fields take their defaults.
///
/// # Safety
/// `config_json` must be a NUL-terminated string; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn lqkd_session_new(config_json: *const c_char, out: *mut *mut LqkdSession) -> LqkdStatus {
    guard(|| {
        let text = str_arg(config_json, "config_json")?;
        let settings: RunSettings = serde_json::from_str(text).map_err(Fail::invalid)?;
        settings.session.validate().map_err(Fail::invalid)?;
        put(out, Box::into_raw(Box::new(LqkdSession { settings })), "out")
    })
}

/// # Safety
/// `session` must be NULL or a handle from this library, not yet freed.
#[no_mangle]
pub unsafe extern "C" fn lqkd_session_free(session: *mut LqkdSession) {
    if !session.is_null() {
        drop(Box::from_raw(session));
    }
}

/// Runs, sifts and checks the session. Output is identical for any
/// `workers >= 1`.
///
/// # Safety
/// `session` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn lqkd_session_run(session: *const LqkdSession, workers: usize, out: *mut *mut LqkdRun) -> LqkdStatus {
    guard(|| {
        let settings = &ref_arg(session, "session")?.settings;
        if workers == 0 {
            return Err(Fail::invalid("workers must be at least 1"));
        }
        let records = Session::new(settings.session.clone())
            .and_then(|s| s.execute(workers))
            .map_err(Fail::failed)?;
        let summary = summarize(&settings.session, &records, &settings.check).map_err(Fail::failed)?;
        let decision = match summary.verdict.decision {
            Decision::Accept => LqkdDecision::Accept,
            Decision::Abort => LqkdDecision::Abort,
            Decision::Inconclusive => LqkdDecision::Inconclusive,
        };
        let summary_json = serde_json::to_string(&summary).map_err(Fail::failed)?;
        put(
            out,
            Box::into_raw(Box::new(LqkdRun {
                decision,
                records,
                summary_json,
            })),
            "out",
        )
    })
}

/// # Safety
/// `run` must be NULL or a handle from this library, not yet freed.
#[no_mangle]
pub unsafe extern "C" fn lqkd_run_free(run: *mut LqkdRun) {
    if !run.is_null() {
        drop(Box::from_raw(run));
    }
}

/// # Safety
/// `run` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn lqkd_run_decision(run: *const LqkdRun, out: *mut LqkdDecision) -> LqkdStatus {
    guard(|| {
        let r = ref_arg(run, "run")?;
        put(out, r.decision, "out")
    })
}

/// # Safety
/// `run` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn lqkd_run_num_records(run: *const LqkdRun, out: *mut usize) -> LqkdStatus {
    guard(|| {
        let r = ref_arg(run, "run")?;
        put(out, r.records.len(), "out")
    })
}

/// Round records, one JSON object per line.
///
/// # Safety
/// `run` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn lqkd_run_records_jsonl(run: *const LqkdRun, out: *mut *mut c_char) -> LqkdStatus {
    guard(|| {
        let r = ref_arg(run, "run")?;
        let mut s = String::new();
        for rec in &r.records {
            s.push_str(&rec.to_json());
            s.push('\n');
        }
        put_string(out, s)
    })
}

/// # Safety
/// `run` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn lqkd_run_summary_json(run: *const LqkdRun, out: *mut *mut c_char) -> LqkdStatus {
    guard(|| {
        let r = ref_arg(run, "run")?;
        put_string(out, r.summary_json.clone())
    })
}

/// Verification report for table 3, 4 or 5 as JSON; `consistent` receives
/// 1 when support and relations match the oracle, else 0.
///
/// # Safety
/// `out_json` and `consistent` must be writable.
#[no_mangle]
pub unsafe extern "C" fn lqkd_verify_table(table: c_int, out_json: *mut *mut c_char, consistent: *mut c_int) -> LqkdStatus {
    guard(|| {
        let id: TableId = table.to_string().parse().map_err(Fail::invalid)?;
        let report = verify_table(&TableSpec::builtin(id));
        if consistent.is_null() {
            return Err(Fail(LqkdStatus::NullPointer, "`consistent` is null".into()));
        }
        let json = serde_json::to_string(&report).map_err(Fail::failed)?;
        put_string(out_json, json)?;
        consistent.write(report.is_consistent() as c_int);
        Ok(())
    })
}
