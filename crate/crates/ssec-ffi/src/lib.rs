//! C ABI over the ssec toolchain. Models are opaque handles created from
//! UTF-8 sources; every analysis returns a JSON document (same schemas as the
//! CLI `--json` output) in a caller-freed string. All functions return a
//! status code and never unwind across the boundary.
//!
//! Ownership rules: strings returned through `char **` out-parameters are
//! freed with `ssec_string_free`; model handles with `ssec_model_free`.
//! Passing a pointer not obtained from this library is undefined behavior.

use libc::{c_char, c_int, size_t};
use ssec_core::diag::has_errors;
use ssec_core::dy::Bounds;
use ssec_core::model::trace_requirements;
use ssec_core::report;
use std::ffi::{CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};

/// Result of every API call.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SsecStatus {
    /// Success.
    Ok = 0,
    /// A required pointer was null or a bound was zero.
    InvalidArgument = 1,
    /// A source was not valid UTF-8.
    Utf8Error = 2,
    /// The sources did not parse or validate; inspect the diagnostics JSON.
    ValidationError = 3,
    /// The analysis rejected the model (for example a property erased by
    /// abstraction); inspect the diagnostics JSON.
    AnalysisError = 4,
    /// Internal failure.
    Internal = 5,
}

/// Opaque parsed-and-validated model.
pub struct SsecModel {
    model: ssec_core::Model,
    diagnostics: Vec<ssec_core::Diagnostic>,
    inputs: Vec<String>,
}

fn to_cstring(s: String) -> *mut c_char {
    match CString::new(s) {
        Ok(c) => c.into_raw(),
        Err(_) => std::ptr::null_mut(),
    }
}

fn json_out<T: serde::Serialize>(value: &T, out: *mut *mut c_char) -> SsecStatus {
    let text = match serde_json::to_string_pretty(value) {
        Ok(t) => t,
        Err(_) => return SsecStatus::Internal,
    };
    unsafe { *out = to_cstring(text) };
    SsecStatus::Ok
}

fn guarded(f: impl FnOnce() -> SsecStatus) -> SsecStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(s) => s,
        Err(_) => SsecStatus::Internal,
    }
}

fn bounds_from(sessions: u32, steps: u32, depth: u32) -> Bounds {
    let d = Bounds::default();
    Bounds {
        sessions: if sessions == 0 { d.sessions } else { sessions as usize },
        steps: if steps == 0 { d.steps } else { steps as usize },
        depth: if depth == 0 { d.depth } else { depth as usize },
        max_states: d.max_states,
    }
}

/// Library version as a static string; do not free.
#[no_mangle]
pub extern "C" fn ssec_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr() as *const c_char
}

/// Free a string returned by any function of this library.
///
/// # Safety
/// `s` must have been returned by this library and not freed before.
#[no_mangle]
pub unsafe extern "C" fn ssec_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}

/// Free a model handle.
///
/// # Safety
/// `model` must have been returned by `ssec_model_parse` and not freed
/// before.
#[no_mangle]
pub unsafe extern "C" fn ssec_model_free(model: *mut SsecModel) {
    if !model.is_null() {
        drop(Box::from_raw(model));
    }
}

/// Parse `count` UTF-8 sources (with display names) and validate the merged
/// model. On success `*out_model` owns the handle. Diagnostics, including
/// warnings, are always written to `*out_diagnostics_json` when the pointer
/// is non-null.
///
/// # Safety
/// `sources` and `names` must point to `count` valid NUL-terminated strings;
/// `out_model` must be a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn ssec_model_parse(
    sources: *const *const c_char,
    names: *const *const c_char,
    count: size_t,
    out_model: *mut *mut SsecModel,
    out_diagnostics_json: *mut *mut c_char,
) -> SsecStatus {
    if sources.is_null() || names.is_null() || out_model.is_null() || count == 0 {
        return SsecStatus::InvalidArgument;
    }
    let mut pairs: Vec<(String, String)> = Vec::with_capacity(count);
    for i in 0..count {
        let src = *sources.add(i);
        let name = *names.add(i);
        if src.is_null() || name.is_null() {
            return SsecStatus::InvalidArgument;
        }
        let src = match CStr::from_ptr(src).to_str() {
            Ok(s) => s.to_string(),
            Err(_) => return SsecStatus::Utf8Error,
        };
        let name = match CStr::from_ptr(name).to_str() {
            Ok(s) => s.to_string(),
            Err(_) => return SsecStatus::Utf8Error,
        };
        pairs.push((name, src));
    }
    guarded(|| {
        let (model, mut diags) = report::load_sources(&pairs);
        if !has_errors(&diags) {
            diags.extend(ssec_core::model::validate(&model));
            ssec_core::diag::sort_diagnostics(&mut diags);
        }
        if !out_diagnostics_json.is_null() {
            let _ = json_out(&diags, out_diagnostics_json);
        }
        if has_errors(&diags) {
            *out_model = std::ptr::null_mut();
            return SsecStatus::ValidationError;
        }
        let inputs = pairs.iter().map(|(n, _)| n.clone()).collect();
        *out_model = Box::into_raw(Box::new(SsecModel {
            model,
            diagnostics: diags,
            inputs,
        }));
        SsecStatus::Ok
    })
}

macro_rules! model_ref {
    ($model:expr, $out:expr) => {{
        if $model.is_null() || $out.is_null() {
            return SsecStatus::InvalidArgument;
        }
        &*$model
    }};
}

/// Requirement traceability report as JSON.
///
/// # Safety
/// `model` must be a live handle; `out_json` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn ssec_traceability_json(
    model: *const SsecModel,
    out_json: *mut *mut c_char,
) -> SsecStatus {
    let handle = model_ref!(model, out_json);
    guarded(|| json_out(&trace_requirements(&handle.model), out_json))
}

/// Attack coverage, achievability, and up to `max_traces` orderings per
/// root, as JSON.
///
/// # Safety
/// `model` must be a live handle; `out_json` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn ssec_attacks_json(
    model: *const SsecModel,
    max_traces: u32,
    out_json: *mut *mut c_char,
) -> SsecStatus {
    let handle = model_ref!(model, out_json);
    guarded(|| json_out(&report::analyze_attacks(&handle.model, max_traces as usize), out_json))
}

/// Verify all declared properties with the built-in bounded engine. Zero
/// bounds select the defaults (sessions 2, steps 40, depth 6).
///
/// # Safety
/// `model` must be a live handle; `out_json` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn ssec_verify_json(
    model: *const SsecModel,
    sessions: u32,
    steps: u32,
    depth: u32,
    out_json: *mut *mut c_char,
) -> SsecStatus {
    let handle = model_ref!(model, out_json);
    guarded(|| {
        let bounds = bounds_from(sessions, steps, depth);
        match report::run_verification(&handle.model, &bounds) {
            Ok(outcome) => json_out(&outcome, out_json),
            Err(diags) => {
                let _ = json_out(&diags, out_json);
                SsecStatus::AnalysisError
            }
        }
    })
}

/// Emit the applied-pi specification text (not JSON); it already passed the
/// internal grammar and scope self-check.
///
/// # Safety
/// `model` must be a live handle; `out_text` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn ssec_emit_pv(
    model: *const SsecModel,
    injective: c_int,
    out_text: *mut *mut c_char,
) -> SsecStatus {
    let handle = model_ref!(model, out_text);
    guarded(|| match report::export_pi(&handle.model, injective != 0) {
        Ok(text) => {
            *out_text = to_cstring(text);
            SsecStatus::Ok
        }
        Err(diags) => {
            let _ = json_out(&diags, out_text);
            SsecStatus::AnalysisError
        }
    })
}

/// Bus load, processor utilization and channel latency estimates as JSON.
///
/// # Safety
/// `model` must be a live handle; `out_json` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn ssec_estimate_json(
    model: *const SsecModel,
    out_json: *mut *mut c_char,
) -> SsecStatus {
    let handle = model_ref!(model, out_json);
    guarded(|| {
        let (estimates, _warnings) = ssec_core::partition::estimate(&handle.model);
        json_out(&estimates, out_json)
    })
}

/// Consolidated report over every analysis, as JSON with a versioned schema.
/// Zero bounds select the defaults.
///
/// # Safety
/// `model` must be a live handle; `out_json` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn ssec_report_json(
    model: *const SsecModel,
    sessions: u32,
    steps: u32,
    depth: u32,
    injective: c_int,
    max_traces: u32,
    out_json: *mut *mut c_char,
) -> SsecStatus {
    let handle = model_ref!(model, out_json);
    guarded(|| {
        let bounds = bounds_from(sessions, steps, depth);
        let report = report::build_report(
            handle.inputs.clone(),
            &handle.model,
            handle.diagnostics.clone(),
            &bounds,
            injective != 0,
            max_traces.max(1) as usize,
        );
        json_out(&report, out_json)
    })
}
