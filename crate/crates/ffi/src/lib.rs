//! C interface to `treehom`.
//!
//! Objects cross the boundary as opaque handles (`ThWtg`, `ThHom`,
//! `ThVerdict`) owned by the caller and released with the matching
//! `*_free` function. Every fallible call returns a [`ThStatus`]; on
//! failure [`th_last_error_message`] describes the problem. Strings
//! returned through `char **` parameters are freed with [`th_string_free`].
//! Weights are arbitrary-precision and cross the boundary as decimal
//! strings.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use treehom::decide::{decide_hom, DecideOptions, Decision};
use treehom::formats::{parse_hom, parse_tree, parse_wtg, render_wtg, verdict_json};
use treehom::grammar::semantics;
use treehom::transform::hom_image;
use treehom::{Error, TreeHomomorphism, Wtg};

/// Result of every fallible call.
#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ThStatus {
    Ok = 0,
    /// A required pointer argument was NULL.
    NullArgument = 1,
    /// An input string was not valid UTF-8.
    InvalidUtf8 = 2,
    /// Input text could not be parsed.
    Syntax = 3,
    /// Input parsed but is not acceptable (ranks, shape, homomorphism).
    Invalid = 4,
    /// The linearization guard was exceeded.
    Blowup = 5,
    Internal = 6,
    /// The library panicked; the handle arguments should be considered lost.
    Panic = 7,
}

/// A weighted tree grammar (WTA, WTG, WTGc or WTGh).
pub struct ThWtg(Wtg);

/// A tree homomorphism.
pub struct ThHom(TreeHomomorphism);

/// The image grammar and the verdict about it.
pub struct ThVerdict(Decision);

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(message: String) {
    let c = CString::new(message.replace('\0', " ")).expect("no interior NUL");
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

fn status_of(e: &Error) -> ThStatus {
    match e.kind() {
        Error::Syntax { .. } => ThStatus::Syntax,
        Error::Blowup { .. } => ThStatus::Blowup,
        Error::Io(_) | Error::Internal(_) => ThStatus::Internal,
        _ => ThStatus::Invalid,
    }
}

struct Failure(ThStatus);

impl From<Error> for Failure {
    fn from(e: Error) -> Failure {
        let s = status_of(&e);
        set_error(e.to_string());
        Failure(s)
    }
}

fn fail(status: ThStatus, message: &str) -> Failure {
    set_error(message.to_string());
    Failure(status)
}

/// Runs `f`, records its error and turns panics into [`ThStatus::Panic`].
fn guard(f: impl FnOnce() -> Result<(), Failure>) -> ThStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => {
            LAST_ERROR.with(|e| *e.borrow_mut() = None);
            ThStatus::Ok
        }
        Ok(Err(Failure(s))) => s,
        Err(payload) => {
            let msg = payload
                .downcast_ref::<&str>()
                .map(|s| s.to_string())
                .or_else(|| payload.downcast_ref::<String>().cloned())
                .unwrap_or_else(|| "unknown panic".into());
            set_error(format!("panic: {msg}"));
            ThStatus::Panic
        }
    }
}

unsafe fn utf8<'a>(p: *const c_char, what: &str) -> Result<&'a str, Failure> {
    if p.is_null() {
        return Err(fail(ThStatus::NullArgument, &format!("{what} is NULL")));
    }
    CStr::from_ptr(p)
        .to_str()
        .map_err(|e| fail(ThStatus::InvalidUtf8, &format!("{what}: {e}")))
}

unsafe fn handle<'a, T>(p: *const T, what: &str) -> Result<&'a T, Failure> {
    p.as_ref()
        .ok_or_else(|| fail(ThStatus::NullArgument, &format!("{what} is NULL")))
}

unsafe fn out_ptr<'a, T>(p: *mut *mut T, what: &str) -> Result<&'a mut *mut T, Failure> {
    let out = p
        .as_mut()
        .ok_or_else(|| fail(ThStatus::NullArgument, &format!("{what} is NULL")))?;
    *out = ptr::null_mut();
    Ok(out)
}

fn c_string(s: String) -> *mut c_char {
    CString::new(s.replace('\0', " "))
        .expect("no interior NUL")
        .into_raw()
}

/// The message for the last failed call on this thread, or NULL if the
/// last call succeeded. Valid until the next call on this thread.
#[no_mangle]
pub extern "C" fn th_last_error_message() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |c| c.as_ptr()))
}

/// The library version as a static string.
#[no_mangle]
pub extern "C" fn th_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Releases a string returned by this library. NULL is ignored.
///
/// # Safety
/// `s` must come from this library and not have been freed.
#[no_mangle]
pub unsafe extern "C" fn th_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}

/// Parses a grammar in the `wtg { ... }` text format.
///
/// # Safety
/// `text` must be NUL-terminated; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn th_wtg_parse(text: *const c_char, out: *mut *mut ThWtg) -> ThStatus {
    guard(|| {
        let out = out_ptr(out, "out")?;
        let g = parse_wtg(utf8(text, "text")?)?;
        *out = Box::into_raw(Box::new(ThWtg(g)));
        Ok(())
    })
}

/// Releases a grammar. NULL is ignored.
///
/// # Safety
/// `g` must come from this library and not have been freed.
#[no_mangle]
pub unsafe extern "C" fn th_wtg_free(g: *mut ThWtg) {
    if !g.is_null() {
        drop(Box::from_raw(g));
    }
}

/// Renders a grammar in the text format accepted by [`th_wtg_parse`].
///
/// # Safety
/// `g` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn th_wtg_render(g: *const ThWtg, out: *mut *mut c_char) -> ThStatus {
    guard(|| {
        let out = out_ptr(out, "out")?;
        *out = c_string(render_wtg(&handle(g, "grammar")?.0));
        Ok(())
    })
}

/// The weight the grammar assigns to `tree`, as a decimal string.
///
/// # Safety
/// `g` must be a live handle, `tree` NUL-terminated, `out` writable.
#[no_mangle]
pub unsafe extern "C" fn th_wtg_eval(
    g: *const ThWtg,
    tree: *const c_char,
    out: *mut *mut c_char,
) -> ThStatus {
    guard(|| {
        let out = out_ptr(out, "out")?;
        let g = &handle(g, "grammar")?.0;
        let t = parse_tree(utf8(tree, "tree")?, g.alphabet())?;
        *out = c_string(semantics(g, &t).to_string());
        Ok(())
    })
}

/// Parses a homomorphism in the `hom { ... }` text format.
///
/// # Safety
/// `text` must be NUL-terminated; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn th_hom_parse(text: *const c_char, out: *mut *mut ThHom) -> ThStatus {
    guard(|| {
        let out = out_ptr(out, "out")?;
        let h = parse_hom(utf8(text, "text")?)?;
        *out = Box::into_raw(Box::new(ThHom(h)));
        Ok(())
    })
}

/// Releases a homomorphism. NULL is ignored.
///
/// # Safety
/// `h` must come from this library and not have been freed.
#[no_mangle]
pub unsafe extern "C" fn th_hom_free(h: *mut ThHom) {
    if !h.is_null() {
        drop(Box::from_raw(h));
    }
}

/// A WTGh for the image of the WTA `a` under `h`.
///
/// # Safety
/// `a` and `h` must be live handles; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn th_hom_image(
    a: *const ThWtg,
    h: *const ThHom,
    out: *mut *mut ThWtg,
) -> ThStatus {
    guard(|| {
        let out = out_ptr(out, "out")?;
        let image = hom_image(&handle(a, "automaton")?.0, &handle(h, "homomorphism")?.0)?;
        *out = Box::into_raw(Box::new(ThWtg(image)));
        Ok(())
    })
}

/// Decides whether the image of `a` under `h` is regular. With
/// `emit_grammar`, a regular verdict carries an equivalent WTG built
/// under the production cap `cap` (0 selects the default).
///
/// # Safety
/// `a` and `h` must be live handles; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn th_decide(
    a: *const ThWtg,
    h: *const ThHom,
    emit_grammar: bool,
    cap: usize,
    out: *mut *mut ThVerdict,
) -> ThStatus {
    guard(|| {
        let out = out_ptr(out, "out")?;
        let mut options = DecideOptions {
            emit_grammar,
            emit_witness: true,
            ..DecideOptions::default()
        };
        if cap > 0 {
            options.cap = cap;
        }
        let d = decide_hom(
            &handle(a, "automaton")?.0,
            &handle(h, "homomorphism")?.0,
            options,
        )?;
        *out = Box::into_raw(Box::new(ThVerdict(d)));
        Ok(())
    })
}

/// Releases a verdict. NULL is ignored.
///
/// # Safety
/// `v` must come from this library and not have been freed.
#[no_mangle]
pub unsafe extern "C" fn th_verdict_free(v: *mut ThVerdict) {
    if !v.is_null() {
        drop(Box::from_raw(v));
    }
}

/// Whether the verdict says the image is regular. False for NULL.
///
/// # Safety
/// `v` must be NULL or a live handle.
#[no_mangle]
pub unsafe extern "C" fn th_verdict_is_regular(v: *const ThVerdict) -> bool {
    v.as_ref().is_some_and(|v| v.0.verdict.is_regular())
}

/// A copy of the image grammar the verdict is about.
///
/// # Safety
/// `v` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn th_verdict_image(v: *const ThVerdict, out: *mut *mut ThWtg) -> ThStatus {
    guard(|| {
        let out = out_ptr(out, "out")?;
        *out = Box::into_raw(Box::new(ThWtg(handle(v, "verdict")?.0.image.clone())));
        Ok(())
    })
}

/// A copy of the equivalent WTG of a regular verdict. `*out` is set to
/// NULL when there is none (nonregular, or not requested).
///
/// # Safety
/// `v` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn th_verdict_grammar(v: *const ThVerdict, out: *mut *mut ThWtg) -> ThStatus {
    guard(|| {
        let out = out_ptr(out, "out")?;
        if let treehom::decide::Verdict::Regular { grammar: Some(g) } =
            &handle(v, "verdict")?.0.verdict
        {
            *out = Box::into_raw(Box::new(ThWtg(g.clone())));
        }
        Ok(())
    })
}

/// The verdict as a JSON object: `verdict`, plus `grammar` or `witness`
/// and `decomposition`.
///
/// # Safety
/// `v` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn th_verdict_render(v: *const ThVerdict, out: *mut *mut c_char) -> ThStatus {
    guard(|| {
        let out = out_ptr(out, "out")?;
        let d = &handle(v, "verdict")?.0;
        *out = c_string(verdict_json(&d.image, &d.verdict).to_string());
        Ok(())
    })
}
