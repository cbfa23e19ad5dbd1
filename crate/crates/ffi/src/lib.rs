//! C ABI over the organon session API.
//!
//! Every fallible call returns an [`OrganonStatus`]. On failure the message
//! is available from [`organon_last_error`] on the same thread until the next
//! call. Strings handed out by the library are freed with
//! [`organon_string_free`], sessions with [`organon_session_free`].

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use organon::comprehension::abstract_term;
use organon::kernel::Bounds;
use organon::lang::{parse_expr, parse_script, Script};
use organon::session::{Options, Session, Stage};

/// Result of every fallible call.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OrganonStatus {
    Ok = 0,
    NullArgument = 1,
    InvalidUtf8 = 2,
    ParseError = 3,
    EvalError = 4,
    Disagreement = 5,
    Panic = 6,
}

/// Opaque handle to a loaded script.
pub struct OrganonSession {
    inner: Session,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: impl Into<String>) {
    let text = msg.into().replace('\0', " ");
    LAST_ERROR.with(|e| *e.borrow_mut() = CString::new(text).ok());
}

fn clear_error() {
    LAST_ERROR.with(|e| *e.borrow_mut() = None);
}

/// Message for the last failed call on this thread, or NULL. The pointer is
/// valid until the next call into the library on this thread.
#[no_mangle]
pub extern "C" fn organon_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |s| s.as_ptr()))
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn organon_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// # Safety
/// `p` must be NULL or a valid NUL-terminated string.
unsafe fn text<'a>(p: *const c_char) -> Result<Option<&'a str>, OrganonStatus> {
    if p.is_null() {
        return Ok(None);
    }
    CStr::from_ptr(p).to_str().map(Some).map_err(|_| {
        set_error("argument is not valid UTF-8");
        OrganonStatus::InvalidUtf8
    })
}

/// # Safety
/// As for [`text`], and the pointer must not be NULL.
unsafe fn required<'a>(p: *const c_char, what: &str) -> Result<&'a str, OrganonStatus> {
    text(p)?.ok_or_else(|| {
        set_error(format!("{what} is NULL"));
        OrganonStatus::NullArgument
    })
}

fn out_string(s: String, out: *mut *mut c_char) -> OrganonStatus {
    match CString::new(s) {
        Ok(c) => {
            // SAFETY: callers check `out` for NULL before producing output.
            unsafe { *out = c.into_raw() };
            OrganonStatus::Ok
        }
        Err(_) => {
            set_error("result contains a NUL byte");
            OrganonStatus::EvalError
        }
    }
}

fn guarded(f: impl FnOnce() -> Result<(), OrganonStatus>) -> OrganonStatus {
    clear_error();
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => OrganonStatus::Ok,
        Ok(Err(status)) => status,
        Err(_) => {
            set_error("internal panic");
            OrganonStatus::Panic
        }
    }
}

fn parse_bounds(b: Option<&str>) -> Result<Bounds, OrganonStatus> {
    match b {
        None => Ok(Bounds::default()),
        Some(t) => Bounds::parse(t).map_err(|e| {
            set_error(e.to_string());
            OrganonStatus::ParseError
        }),
    }
}

/// Parses and elaborates `script`. `bounds` is `"L,S,C"` or NULL for the
/// defaults. On success `*out` receives a new session.
///
/// # Safety
/// `script` must be a valid NUL-terminated string, `bounds` NULL or one, and
/// `out` a valid pointer to writable storage.
#[no_mangle]
pub unsafe extern "C" fn organon_session_new(
    script: *const c_char,
    bounds: *const c_char,
    out: *mut *mut OrganonSession,
) -> OrganonStatus {
    guarded(|| {
        if out.is_null() {
            set_error("out is NULL");
            return Err(OrganonStatus::NullArgument);
        }
        let src = required(script, "script")?;
        let bounds = parse_bounds(text(bounds)?)?;
        let session = Session::load(src, None, Options { bounds, ..Options::default() }).map_err(|f| {
            set_error(f.to_string());
            match f.stage {
                Stage::Parse => OrganonStatus::ParseError,
                Stage::Eval => OrganonStatus::EvalError,
            }
        })?;
        *out = Box::into_raw(Box::new(OrganonSession { inner: session }));
        Ok(())
    })
}

/// Releases a session. NULL is ignored.
///
/// # Safety
/// `session` must be NULL or a handle from [`organon_session_new`] that has
/// not been freed.
#[no_mangle]
pub unsafe extern "C" fn organon_session_free(session: *mut OrganonSession) {
    if !session.is_null() {
        drop(Box::from_raw(session));
    }
}

/// Runs every query of the session and writes the JSON report to `*out`.
/// With `compare` set each query is also checked against the oracles and an
/// unexplained disagreement yields `Disagreement` (the report is still
/// written).
///
/// # Safety
/// `session` must be a live handle and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn organon_session_run_json(
    session: *const OrganonSession,
    compare: bool,
    out: *mut *mut c_char,
) -> OrganonStatus {
    guarded(|| {
        if session.is_null() || out.is_null() {
            set_error("session or out is NULL");
            return Err(OrganonStatus::NullArgument);
        }
        let s = &(*session).inner;
        let report = if compare { s.compare() } else { s.run() }.map_err(|e| {
            set_error(e.to_string());
            OrganonStatus::EvalError
        })?;
        match out_string(report.to_json(), out) {
            OrganonStatus::Ok => {}
            other => return Err(other),
        }
        if compare && report.disagreements() > 0 {
            set_error(format!("{} disagreement(s) with the oracle", report.disagreements()));
            return Err(OrganonStatus::Disagreement);
        }
        Ok(())
    })
}

/// Adds declarations to the session and writes the reports of the queries
/// among them to `*out` as a JSON array.
///
/// # Safety
/// `session` must be a live handle, `input` a valid NUL-terminated string and
/// `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn organon_session_extend(
    session: *mut OrganonSession,
    input: *const c_char,
    out: *mut *mut c_char,
) -> OrganonStatus {
    guarded(|| {
        if session.is_null() || out.is_null() {
            set_error("session or out is NULL");
            return Err(OrganonStatus::NullArgument);
        }
        let src = required(input, "input")?;
        let reports = (*session).inner.extend(src).map_err(|f| {
            set_error(f.to_string());
            match f.stage {
                Stage::Parse => OrganonStatus::ParseError,
                Stage::Eval => OrganonStatus::EvalError,
            }
        })?;
        let json = serde_json::to_string(&reports).map_err(|e| {
            set_error(e.to_string());
            OrganonStatus::EvalError
        })?;
        match out_string(json, out) {
            OrganonStatus::Ok => Ok(()),
            other => Err(other),
        }
    })
}

/// Abstracts `vars` (comma-separated, outermost first) from `expr` and writes
/// the S/K term to `*out`. Other names resolve against `script`, which may
/// be NULL.
///
/// # Safety
/// `expr` and `vars` must be valid NUL-terminated strings, `script` NULL or
/// one, and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn organon_abstract(
    expr: *const c_char,
    vars: *const c_char,
    script: *const c_char,
    out: *mut *mut c_char,
) -> OrganonStatus {
    guarded(|| {
        if out.is_null() {
            set_error("out is NULL");
            return Err(OrganonStatus::NullArgument);
        }
        let src = required(expr, "expr")?;
        let vars: Vec<String> =
            required(vars, "vars")?.split(',').map(str::trim).filter(|v| !v.is_empty()).map(String::from).collect();
        let prior = match text(script)? {
            Some(t) => parse_script(t).map_err(|e| {
                set_error(e.to_string());
                OrganonStatus::ParseError
            })?,
            None => Script::default(),
        };
        let e = parse_expr(src, &prior, &vars).map_err(|e| {
            set_error(e.to_string());
            OrganonStatus::ParseError
        })?;
        let term = abstract_term(&e, &vars).map_err(|e| {
            set_error(e.to_string());
            OrganonStatus::EvalError
        })?;
        match out_string(term.to_string(), out) {
            OrganonStatus::Ok => Ok(()),
            other => Err(other),
        }
    })
}

/// Frees a string returned by the library. NULL is ignored.
///
/// # Safety
/// `s` must be NULL or a string from this library that has not been freed.
#[no_mangle]
pub unsafe extern "C" fn organon_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}
