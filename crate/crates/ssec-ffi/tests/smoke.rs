//! Exercises the C ABI the way a foreign caller would: raw pointers in,
//! status codes and JSON strings out.

use ssec_ffi::*;
use std::ffi::{CStr, CString};
use std::os::raw::c_char;

const KEYDIST: &str = include_str!("../../../models/keydist.ssec");

fn parse(sources: &[(&str, &str)]) -> (SsecStatus, *mut SsecModel, Option<String>) {
    let texts: Vec<CString> = sources.iter().map(|(_, t)| CString::new(*t).unwrap()).collect();
    let names: Vec<CString> = sources.iter().map(|(n, _)| CString::new(*n).unwrap()).collect();
    let text_ptrs: Vec<*const c_char> = texts.iter().map(|c| c.as_ptr()).collect();
    let name_ptrs: Vec<*const c_char> = names.iter().map(|c| c.as_ptr()).collect();
    let mut model: *mut SsecModel = std::ptr::null_mut();
    let mut diags: *mut c_char = std::ptr::null_mut();
    let status = unsafe {
        ssec_model_parse(
            text_ptrs.as_ptr(),
            name_ptrs.as_ptr(),
            sources.len(),
            &mut model,
            &mut diags,
        )
    };
    let diag_json = if diags.is_null() {
        None
    } else {
        let s = unsafe { CStr::from_ptr(diags) }.to_str().unwrap().to_string();
        unsafe { ssec_string_free(diags) };
        Some(s)
    };
    (status, model, diag_json)
}

fn take_string(ptr: *mut c_char) -> String {
    assert!(!ptr.is_null());
    let s = unsafe { CStr::from_ptr(ptr) }.to_str().unwrap().to_string();
    unsafe { ssec_string_free(ptr) };
    s
}

#[test]
fn version_is_a_static_string() {
    let v = unsafe { CStr::from_ptr(ssec_version()) };
    assert!(!v.to_str().unwrap().is_empty());
}

#[test]
fn parse_verify_emit_report_roundtrip() {
    let (status, model, diags) = parse(&[("keydist.ssec", KEYDIST)]);
    assert_eq!(status, SsecStatus::Ok);
    assert!(!model.is_null());
    let diags: serde_json::Value = serde_json::from_str(&diags.unwrap()).unwrap();
    assert_eq!(diags.as_array().unwrap().len(), 0);

    let mut out: *mut c_char = std::ptr::null_mut();
    assert_eq!(
        unsafe { ssec_verify_json(model, 1, 20, 6, &mut out) },
        SsecStatus::Ok
    );
    let verdicts: serde_json::Value = serde_json::from_str(&take_string(out)).unwrap();
    let list = verdicts["verdicts"].as_array().unwrap();
    assert_eq!(list.len(), 2);
    assert!(list.iter().all(|v| v["status"] == "satisfied"));

    let mut pv: *mut c_char = std::ptr::null_mut();
    assert_eq!(unsafe { ssec_emit_pv(model, 0, &mut pv) }, SsecStatus::Ok);
    let pv_text = take_string(pv);
    assert!(pv_text.contains("query attacker(sys_ECU1_PSK1)."));

    let mut rep: *mut c_char = std::ptr::null_mut();
    assert_eq!(
        unsafe { ssec_report_json(model, 1, 20, 6, 0, 4, &mut rep) },
        SsecStatus::Ok
    );
    let report: serde_json::Value = serde_json::from_str(&take_string(rep)).unwrap();
    assert_eq!(report["schema_version"], 1);
    assert_eq!(report["pi_export"]["self_check"], "passed");

    let mut tr: *mut c_char = std::ptr::null_mut();
    assert_eq!(
        unsafe { ssec_traceability_json(model, &mut tr) },
        SsecStatus::Ok
    );
    let trace: serde_json::Value = serde_json::from_str(&take_string(tr)).unwrap();
    assert_eq!(trace["traced"].as_array().unwrap().len(), 2);

    unsafe { ssec_model_free(model) };
}

#[test]
fn validation_errors_return_status_and_diagnostics() {
    let (status, model, diags) = parse(&[("bad.ssec", "pragma InitialSystemKnowledge ECU9.x\n")]);
    assert_eq!(status, SsecStatus::ValidationError);
    assert!(model.is_null());
    let diags = diags.unwrap();
    assert!(diags.contains("unknown block"), "{diags}");
}

#[test]
fn null_arguments_are_rejected() {
    let mut out: *mut c_char = std::ptr::null_mut();
    assert_eq!(
        unsafe { ssec_verify_json(std::ptr::null(), 0, 0, 0, &mut out) },
        SsecStatus::InvalidArgument
    );
    let mut model: *mut SsecModel = std::ptr::null_mut();
    assert_eq!(
        unsafe {
            ssec_model_parse(
                std::ptr::null(),
                std::ptr::null(),
                0,
                &mut model,
                std::ptr::null_mut(),
            )
        },
        SsecStatus::InvalidArgument
    );
    // Freeing null is a no-op.
    unsafe {
        ssec_model_free(std::ptr::null_mut());
        ssec_string_free(std::ptr::null_mut());
    }
}

#[test]
fn multiple_sources_merge_into_one_model() {
    let design = "block A {\n  attribute k : key\n  port p\n}\nblock B {\n  attribute x : data\n  port q\n}\nlink A.p B.q : public\n";
    let props = "# Confidentiality A.k\n";
    let (status, model, _) = parse(&[("design.ssec", design), ("props.ssec", props)]);
    assert_eq!(status, SsecStatus::Ok);
    let mut out: *mut c_char = std::ptr::null_mut();
    assert_eq!(
        unsafe { ssec_verify_json(model, 1, 10, 4, &mut out) },
        SsecStatus::Ok
    );
    let verdicts: serde_json::Value = serde_json::from_str(&take_string(out)).unwrap();
    assert_eq!(verdicts["verdicts"].as_array().unwrap().len(), 1);
    unsafe { ssec_model_free(model) };
}

#[test]
fn analysis_error_for_erased_property() {
    let text = "block A {\n  attribute x : data\n  port p\n}\nblock B {\n  attribute y : data\n  port q\n}\nlink A.p B.q : public\n# Confidentiality A.x\n";
    let (status, model, diags) = parse(&[("t.ssec", text)]);
    // The validator warns but does not reject; the analysis then refuses.
    assert_eq!(status, SsecStatus::Ok, "{diags:?}");
    let mut out: *mut c_char = std::ptr::null_mut();
    assert_eq!(
        unsafe { ssec_verify_json(model, 1, 10, 4, &mut out) },
        SsecStatus::AnalysisError
    );
    let msg = take_string(out);
    assert!(msg.contains("erased by abstraction"), "{msg}");
    unsafe { ssec_model_free(model) };
}
