use std::ffi::{c_char, CStr, CString};
use std::ptr;

use qaiccc_ffi::*;

const PLATFORM: &str = r#"{"qubits": 5, "edges": [[0,1],[0,2],[1,2],[2,3],[2,4],[3,4]]}"#;
const REQUESTS: &str = r#"{"untrusted": [2, 3]}"#;
const RATES: &str = r#"[
  {"score": 0.0027, "impacting": [3, 4], "impacted": [2]},
  {"score": 0.0017, "impacting": [1, 2], "impacted": [0]},
  {"score": 0.0013, "impacting": [2, 4], "impacted": [0]}
]"#;

fn c(s: &str) -> CString {
    CString::new(s).unwrap()
}

fn take(p: *mut c_char) -> String {
    assert!(!p.is_null());
    let s = unsafe { CStr::from_ptr(p) }.to_str().unwrap().to_owned();
    unsafe { qaiccc_string_free(p) };
    s
}

fn last_error() -> String {
    let p = qaiccc_last_error();
    assert!(!p.is_null());
    unsafe { CStr::from_ptr(p) }.to_string_lossy().into_owned()
}

fn instance(platform: &str, requests: &str, rates: &str) -> Result<*mut QaicccInstance, QaicccStatus> {
    let (p, q, r) = (c(platform), c(requests), c(rates));
    let mut inst = ptr::null_mut();
    match unsafe { qaiccc_instance_new(p.as_ptr(), q.as_ptr(), r.as_ptr(), &mut inst) } {
        QaicccStatus::Ok => Ok(inst),
        s => {
            assert!(inst.is_null());
            Err(s)
        }
    }
}

#[test]
fn running_example_round_trip() {
    let inst = instance(PLATFORM, REQUESTS, RATES).unwrap();
    let mut n = 0;
    assert_eq!(unsafe { qaiccc_instance_qubit_count(inst, &mut n) }, QaicccStatus::Ok);
    assert_eq!(n, 5);

    let mut res = ptr::null_mut();
    assert_eq!(unsafe { qaiccc_allocate(inst, true, &mut res) }, QaicccStatus::Ok);
    let mut key = ptr::null_mut();
    assert_eq!(unsafe { qaiccc_result_key(res, &mut key) }, QaicccStatus::Ok);
    assert_eq!(take(key), "{U:{q0,q1}, U:{q2,q3,q4}}");

    let (mut score, mut penalty) = (0.0, 0.0);
    assert_eq!(unsafe { qaiccc_result_scores(res, &mut score, &mut penalty) }, QaicccStatus::Ok);
    assert_eq!((score, penalty), (0.0017, 0.0017));

    let mut owner = QaicccOwner { kind: QaicccOwnerKind::Idle, index: 9 };
    assert_eq!(unsafe { qaiccc_result_owner(res, 3, &mut owner) }, QaicccStatus::Ok);
    assert_eq!(owner, QaicccOwner { kind: QaicccOwnerKind::Untrusted, index: 1 });
    assert_eq!(unsafe { qaiccc_result_owner(res, 7, &mut owner) }, QaicccStatus::InvalidArgument);
    assert!(last_error().contains("qubit 7"));

    let mut json = ptr::null_mut();
    assert_eq!(unsafe { qaiccc_result_report(res, false, &mut json) }, QaicccStatus::Ok);
    let doc: serde_json::Value = serde_json::from_str(&take(json)).unwrap();
    assert_eq!(doc["schema"], "qaiccc.run/v1");
    assert_eq!(doc["snapshots"].as_array().unwrap().len(), 3);
    assert!(doc.get("timings").is_none());

    let mut text = ptr::null_mut();
    assert_eq!(unsafe { qaiccc_result_report(res, true, &mut text) }, QaicccStatus::Ok);
    assert!(take(text).contains("selected: {U:{q0,q1}, U:{q2,q3,q4}}"));

    let mut oracle = ptr::null_mut();
    assert_eq!(unsafe { qaiccc_oracle_json(inst, 8, &mut oracle) }, QaicccStatus::Ok);
    let doc: serde_json::Value = serde_json::from_str(&take(oracle)).unwrap();
    assert_eq!((doc["optimum_safe_prefix"].as_u64(), doc["gap"].as_i64()), (Some(2), Some(0)));
    assert_eq!(unsafe { qaiccc_oracle_json(inst, 4, &mut oracle) }, QaicccStatus::InstanceTooLarge);

    unsafe {
        qaiccc_result_free(res);
        qaiccc_instance_free(inst);
    }
}

#[test]
fn status_codes_match_exit_codes() {
    assert_eq!(instance("{", REQUESTS, RATES), Err(QaicccStatus::Input));
    assert!(last_error().contains("platform"));
    let pairs = r#"{"qubits": 4, "edges": [[0, 1], [2, 3]]}"#;
    for (platform, requests, want) in [
        (PLATFORM, r#"{"untrusted": [6]}"#, QaicccStatus::InsufficientQubits),
        (pairs, r#"{"untrusted": [3]}"#, QaicccStatus::NoFeasibleAllocation),
    ] {
        let rates = if platform == PLATFORM { RATES } else { "[]" };
        let inst = instance(platform, requests, rates).unwrap();
        let mut res = ptr::null_mut();
        assert_eq!(unsafe { qaiccc_allocate(inst, false, &mut res) }, want);
        assert!(res.is_null());
        unsafe { qaiccc_instance_free(inst) };
    }
}

#[test]
fn search_limits() {
    let inst = instance(PLATFORM, REQUESTS, RATES).unwrap();
    unsafe {
        assert_eq!(qaiccc_instance_set_max_paths(inst, 0), QaicccStatus::InvalidArgument);
        assert_eq!(qaiccc_instance_set_max_paths(inst, 8), QaicccStatus::Ok);
        assert_eq!(qaiccc_instance_set_max_population(inst, 2), QaicccStatus::Ok);
        let mut res = ptr::null_mut();
        assert_eq!(qaiccc_allocate(inst, false, &mut res), QaicccStatus::Ok);
        let mut json = ptr::null_mut();
        assert_eq!(qaiccc_result_report(res, false, &mut json), QaicccStatus::Ok);
        let doc: serde_json::Value = serde_json::from_str(&take(json)).unwrap();
        assert_eq!(doc["config"]["max_population"], 2);
        assert_eq!(doc["config"]["max_paths_per_connect"], 8);
        qaiccc_result_free(res);
        qaiccc_instance_free(inst);
    }
}

#[test]
fn null_and_utf8_arguments() {
    let mut inst = ptr::null_mut();
    let (p, q) = (c(PLATFORM), c(REQUESTS));
    let status = unsafe { qaiccc_instance_new(p.as_ptr(), q.as_ptr(), ptr::null(), &mut inst) };
    assert_eq!(status, QaicccStatus::NullPointer);
    assert!(last_error().contains("rates_json"));
    let status = unsafe { qaiccc_instance_new(p.as_ptr(), q.as_ptr(), ptr::null(), ptr::null_mut()) };
    assert_eq!(status, QaicccStatus::NullPointer);

    let bad = [0xffu8 as c_char, 0];
    let status = unsafe { qaiccc_instance_new(bad.as_ptr(), q.as_ptr(), q.as_ptr(), &mut inst) };
    assert_eq!(status, QaicccStatus::InvalidUtf8);

    let mut res = ptr::null_mut();
    assert_eq!(unsafe { qaiccc_allocate(ptr::null(), false, &mut res) }, QaicccStatus::NullPointer);
    unsafe {
        qaiccc_string_free(ptr::null_mut());
        qaiccc_result_free(ptr::null_mut());
        qaiccc_instance_free(ptr::null_mut());
    }
}

#[test]
fn success_clears_last_error() {
    assert!(instance("{", REQUESTS, RATES).is_err());
    assert!(!qaiccc_last_error().is_null());
    let inst = instance(PLATFORM, REQUESTS, RATES).unwrap();
    assert!(qaiccc_last_error().is_null());
    unsafe { qaiccc_instance_free(inst) };
}

#[test]
fn version_is_package_version() {
    let v = unsafe { CStr::from_ptr(qaiccc_version()) };
    assert_eq!(v.to_str().unwrap(), env!("CARGO_PKG_VERSION"));
}
