use std::ffi::{c_char, c_int, CStr, CString};
use std::ptr;

use layered_qkd::analysis::SessionSummary;
use layered_qkd::qudit::DistributionTable;
use layered_qkd_ffi::*;

fn take(s: *mut c_char) -> String {
    assert!(!s.is_null());
    let out = unsafe { CStr::from_ptr(s) }.to_str().unwrap().to_string();
    unsafe { lqkd_string_free(s) };
    out
}

fn last_error() -> String {
    let p = lqkd_last_error();
    assert!(!p.is_null());
    unsafe { CStr::from_ptr(p) }.to_string_lossy().into_owned()
}

fn builtin(id: &str) -> *mut LqkdState {
    let id = CString::new(id).unwrap();
    let mut s = ptr::null_mut();
    assert_eq!(unsafe { lqkd_state_builtin(id.as_ptr(), &mut s) }, LqkdStatus::Ok);
    s
}

#[test]
fn state_dims_and_oracle() {
    let s = builtin("eq8");
    let mut dims = [0usize; 8];
    let mut n = 0;
    assert_eq!(unsafe { lqkd_state_dims(s, dims.as_mut_ptr(), dims.len(), &mut n) }, LqkdStatus::Ok);
    assert_eq!(&dims[..n], &[4, 4, 2]);

    let bases = CString::new("comp,comp,comp").unwrap();
    let mut json = ptr::null_mut();
    assert_eq!(unsafe { lqkd_state_oracle_json(s, bases.as_ptr(), ptr::null(), &mut json) }, LqkdStatus::Ok);
    let t: DistributionTable = serde_json::from_str(&take(json)).unwrap();
    assert_eq!(t.len(), 4);
    assert!(t.iter().all(|(_, p)| (p - 0.25).abs() < 1e-12));
    unsafe { lqkd_state_free(s) };
}

#[test]
fn parse_and_factorize() {
    let text = CString::new("dims 2 2\n0,0 1 0\n1,1 1 0\n").unwrap();
    let mut s = ptr::null_mut();
    assert_eq!(unsafe { lqkd_state_parse(text.as_ptr(), &mut s) }, LqkdStatus::Ok);
    let mut json = ptr::null_mut();
    assert_eq!(unsafe { lqkd_state_factorize_json(s, 1e-10, &mut json) }, LqkdStatus::Ok);
    let v: serde_json::Value = serde_json::from_str(&take(json)).unwrap();
    assert_eq!(v["reducible"], false);
    unsafe { lqkd_state_free(s) };
}

#[test]
fn errors_set_status_and_message() {
    let bad = CString::new("eq99").unwrap();
    let mut s = ptr::null_mut();
    assert_eq!(unsafe { lqkd_state_builtin(bad.as_ptr(), &mut s) }, LqkdStatus::InvalidArgument);
    assert!(s.is_null());
    assert!(last_error().contains("eq99"));

    assert_eq!(unsafe { lqkd_state_builtin(ptr::null(), &mut s) }, LqkdStatus::NullPointer);

    let s = builtin("bell");
    let bases = CString::new("comp").unwrap();
    let mut json = ptr::null_mut();
    assert_eq!(
        unsafe { lqkd_state_oracle_json(s, bases.as_ptr(), ptr::null(), &mut json) },
        LqkdStatus::InvalidArgument
    );
    assert!(json.is_null());
    unsafe { lqkd_state_free(s) };

    let cfg = CString::new(r#"{"protocol":"p9"}"#).unwrap();
    let mut session = ptr::null_mut();
    assert_eq!(unsafe { lqkd_session_new(cfg.as_ptr(), &mut session) }, LqkdStatus::InvalidArgument);
    assert!(last_error().contains("p9"));

    let mut consistent: c_int = -1;
    assert_eq!(unsafe { lqkd_verify_table(7, &mut json, &mut consistent) }, LqkdStatus::InvalidArgument);
}

#[test]
fn free_functions_accept_null() {
    unsafe {
        lqkd_string_free(ptr::null_mut());
        lqkd_state_free(ptr::null_mut());
        lqkd_session_free(ptr::null_mut());
        lqkd_run_free(ptr::null_mut());
    }
}

fn run(config: &str, workers: usize) -> (LqkdDecision, String, SessionSummary) {
    let cfg = CString::new(config).unwrap();
    let mut session = ptr::null_mut();
    assert_eq!(unsafe { lqkd_session_new(cfg.as_ptr(), &mut session) }, LqkdStatus::Ok);
    let mut run = ptr::null_mut();
    assert_eq!(unsafe { lqkd_session_run(session, workers, &mut run) }, LqkdStatus::Ok);
    let mut decision = LqkdDecision::Inconclusive;
    let mut n = 0;
    let (mut records, mut summary) = (ptr::null_mut(), ptr::null_mut());
    unsafe {
        assert_eq!(lqkd_run_decision(run, &mut decision), LqkdStatus::Ok);
        assert_eq!(lqkd_run_num_records(run, &mut n), LqkdStatus::Ok);
        assert_eq!(lqkd_run_records_jsonl(run, &mut records), LqkdStatus::Ok);
        assert_eq!(lqkd_run_summary_json(run, &mut summary), LqkdStatus::Ok);
        lqkd_run_free(run);
        lqkd_session_free(session);
    }
    let records = take(records);
    assert_eq!(records.lines().count(), n);
    (decision, records, serde_json::from_str(&take(summary)).unwrap())
}

#[test]
fn session_runs_and_is_worker_invariant() {
    let cfg = r#"{"protocol":"bd-ssskd","rounds":100000,"seed":11}"#;
    let (d1, r1, s1) = run(cfg, 1);
    let (d8, r8, s8) = run(cfg, 8);
    assert_eq!(d1, LqkdDecision::Accept);
    assert_eq!((d1, &r1, &s1), (d8, &r8, &s8));
    assert_eq!(s1.rounds, 100_000);
}

#[test]
fn session_with_eve_aborts() {
    let cfg = r#"{"protocol":"c-sskd","rounds":50000,"seed":7,"eve":"intercept-resend:alice,bob:computational"}"#;
    assert_eq!(run(cfg, 2).0, LqkdDecision::Abort);
}

#[test]
fn tables() {
    for (t, want) in [(3, 1), (4, 0), (5, 1)] {
        let mut json = ptr::null_mut();
        let mut consistent: c_int = -1;
        assert_eq!(unsafe { lqkd_verify_table(t, &mut json, &mut consistent) }, LqkdStatus::Ok);
        assert_eq!(consistent, want, "table {t}");
        let v: serde_json::Value = serde_json::from_str(&take(json)).unwrap();
        assert_eq!(v["table"], format!("T{t}"));
    }
}

#[test]
fn version_is_static() {
    let v = unsafe { CStr::from_ptr(lqkd_version()) }.to_str().unwrap();
    assert_eq!(v, env!("CARGO_PKG_VERSION"));
}
