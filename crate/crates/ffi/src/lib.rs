//! C ABI over `sofic-core`.
//!
//! Objects cross the boundary as opaque handles owned by the caller and
//! released with the matching `*_free`. Every fallible call returns a
//! [`SoficStatus`]; on failure the message is available from
//! [`sofic_last_error`] on the same thread. Strings handed out by the
//! library must be released with [`sofic_string_free`].

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{self, AssertUnwindSafe};
use std::ptr;

use sofic_core::catalog::{builtin, parse_group};
use sofic_core::conjgraph::graph_norm;
use sofic_core::groups::{Caps, FiniteGroup, Perm};
use sofic_core::metrics::hamming_distance;
use sofic_core::separability::NonmemberCertificate;
use sofic_core::words::{evaluate, GenImages, Word};
use sofic_core::Error;

/// Status codes returned by every fallible entry point.
#[repr(i32)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SoficStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidUtf8 = 2,
    Malformed = 3,
    Mismatch = 4,
    SizeLimit = 5,
    NotAnElement = 6,
    Inapplicable = 7,
    Io = 8,
    Panic = 9,
}

/// A finite group with its multiplication table and conjugacy classes.
pub struct SoficGroup {
    inner: FiniteGroup,
}

/// A reduced word in a free group of fixed rank.
pub struct SoficWord {
    inner: Word,
}

thread_local! {
    static LAST_ERROR: RefCell<CString> = RefCell::new(CString::default());
}

fn set_last_error(msg: &str) {
    let c = CString::new(msg.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = c);
}

fn status_of(e: &Error) -> SoficStatus {
    match e {
        Error::Malformed(_) | Error::Parse { .. } | Error::InvalidTable { .. } | Error::InvalidCharacter(_) => {
            SoficStatus::Malformed
        }
        Error::RankMismatch { .. } | Error::DegreeMismatch { .. } => SoficStatus::Mismatch,
        Error::SizeLimit { .. } => SoficStatus::SizeLimit,
        Error::NotAnElement(_) => SoficStatus::NotAnElement,
        Error::Io(_) => SoficStatus::Io,
        _ => SoficStatus::Inapplicable,
    }
}

struct Fail(SoficStatus, String);

impl From<Error> for Fail {
    fn from(e: Error) -> Self {
        Fail(status_of(&e), e.to_string())
    }
}

fn null(what: &str) -> Fail {
    Fail(SoficStatus::NullPointer, format!("{what} is null"))
}

// Runs `f`, records any failure and turns panics into a status.
fn guard(f: impl FnOnce() -> Result<(), Fail>) -> SoficStatus {
    match panic::catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => {
            set_last_error("");
            SoficStatus::Ok
        }
        Ok(Err(Fail(status, msg))) => {
            set_last_error(&msg);
            status
        }
        Err(_) => {
            set_last_error("internal panic");
            SoficStatus::Panic
        }
    }
}

unsafe fn str_arg<'a>(p: *const c_char, what: &str) -> Result<&'a str, Fail> {
    if p.is_null() {
        return Err(null(what));
    }
    CStr::from_ptr(p).to_str().map_err(|_| Fail(SoficStatus::InvalidUtf8, format!("{what} is not UTF-8")))
}

unsafe fn ref_arg<'a, T>(p: *const T, what: &str) -> Result<&'a T, Fail> {
    p.as_ref().ok_or_else(|| null(what))
}

unsafe fn write<T>(out: *mut T, value: T, what: &str) -> Result<(), Fail> {
    if out.is_null() {
        return Err(null(what));
    }
    out.write(value);
    Ok(())
}

unsafe fn slice_arg<'a, T>(p: *const T, len: usize, what: &str) -> Result<&'a [T], Fail> {
    if len == 0 {
        return Ok(&[]);
    }
    if p.is_null() {
        return Err(null(what));
    }
    Ok(std::slice::from_raw_parts(p, len))
}

// Nulls `out` first so callers never see a stale handle on failure.
unsafe fn new_handle<T>(out: *mut *mut T, make: impl FnOnce() -> Result<T, Fail>) -> Result<(), Fail> {
    if out.is_null() {
        return Err(null("out"));
    }
    out.write(ptr::null_mut());
    out.write(Box::into_raw(Box::new(make()?)));
    Ok(())
}

fn owned_string(s: String) -> *mut c_char {
    CString::new(s.replace('\0', " ")).unwrap_or_default().into_raw()
}

/// Message for the most recent failure on this thread, or an empty string.
/// The pointer stays valid until the next call into the library.
#[no_mangle]
pub extern "C" fn sofic_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ptr())
}

/// Releases a string returned by the library. Null is ignored.
///
/// # Safety
/// `s` must come from this library and not have been freed.
#[no_mangle]
pub unsafe extern "C" fn sofic_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}

/// Loads a bundled group by label, e.g. "S5", "Q8", "Z4xZ2".
///
/// # Safety
/// `name` must be a NUL-terminated string and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn sofic_group_builtin(name: *const c_char, out: *mut *mut SoficGroup) -> SoficStatus {
    guard(|| {
        new_handle(out, || Ok(SoficGroup { inner: builtin(str_arg(name, "name")?)? }))
    })
}

/// Parses a group in catalog text format (`perm` or `table`).
///
/// # Safety
/// `text` must be a NUL-terminated string and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn sofic_group_parse(text: *const c_char, out: *mut *mut SoficGroup) -> SoficStatus {
    guard(|| {
        new_handle(out, || Ok(SoficGroup { inner: parse_group(str_arg(text, "text")?, Caps::default())? }))
    })
}

/// Releases a group handle. Null is ignored.
///
/// # Safety
/// `g` must come from this library and not have been freed.
#[no_mangle]
pub unsafe extern "C" fn sofic_group_free(g: *mut SoficGroup) {
    if !g.is_null() {
        drop(Box::from_raw(g));
    }
}

/// Writes the group order.
///
/// # Safety
/// `g` must be a live handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn sofic_group_order(g: *const SoficGroup, out: *mut usize) -> SoficStatus {
    guard(|| write(out, ref_arg(g, "group")?.inner.order(), "out"))
}

/// Writes the number of conjugacy classes.
///
/// # Safety
/// `g` must be a live handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn sofic_group_num_classes(g: *const SoficGroup, out: *mut usize) -> SoficStatus {
    guard(|| write(out, ref_arg(g, "group")?.inner.classes().num_classes(), "out"))
}

/// Writes the label of class `c` as a new string.
///
/// # Safety
/// `g` must be a live handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn sofic_group_class_label(g: *const SoficGroup, c: usize, out: *mut *mut c_char) -> SoficStatus {
    guard(|| {
        let p = ref_arg(g, "group")?.inner.classes();
        if c >= p.num_classes() {
            return Err(Fail(SoficStatus::NotAnElement, format!("class index {c} out of range")));
        }
        write(out, owned_string(p.label(c).to_string()), "out")
    })
}

fn check_elem(g: &FiniteGroup, x: usize) -> Result<(), Fail> {
    if x < g.order() {
        Ok(())
    } else {
        Err(Error::NotAnElement(x.to_string()).into())
    }
}

/// Parses an element (cycle notation or table label) into its index.
///
/// # Safety
/// `g` must be a live handle, `text` NUL-terminated and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn sofic_group_parse_element(
    g: *const SoficGroup,
    text: *const c_char,
    out: *mut usize,
) -> SoficStatus {
    guard(|| {
        let g = &ref_arg(g, "group")?.inner;
        write(out, g.parse_element(str_arg(text, "text")?)?, "out")
    })
}

/// Writes the label of element `x` as a new string.
///
/// # Safety
/// `g` must be a live handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn sofic_group_element_label(
    g: *const SoficGroup,
    x: usize,
    out: *mut *mut c_char,
) -> SoficStatus {
    guard(|| {
        let g = &ref_arg(g, "group")?.inner;
        check_elem(g, x)?;
        write(out, owned_string(g.element_label(x)), "out")
    })
}

/// Writes the product `a * b` (apply `a`, then `b`).
///
/// # Safety
/// `g` must be a live handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn sofic_group_mul(g: *const SoficGroup, a: usize, b: usize, out: *mut usize) -> SoficStatus {
    guard(|| {
        let g = &ref_arg(g, "group")?.inner;
        check_elem(g, a)?;
        check_elem(g, b)?;
        write(out, g.mul(a, b), "out")
    })
}

/// Graph distance from the identity class to the class of `x` in the
/// conjugacy graph generated by the space-separated class labels.
/// `reachable` receives 0 when no path exists; the distance then falls
/// back to the largest finite one.
///
/// # Safety
/// `g` must be a live handle, `classes` NUL-terminated, outputs writable.
#[no_mangle]
pub unsafe extern "C" fn sofic_graph_distance(
    g: *const SoficGroup,
    classes: *const c_char,
    x: usize,
    dist: *mut u32,
    reachable: *mut i32,
) -> SoficStatus {
    guard(|| {
        let g = &ref_arg(g, "group")?.inner;
        check_elem(g, x)?;
        let p = g.classes();
        let mut gen = Vec::new();
        for label in str_arg(classes, "classes")?.split_whitespace() {
            gen.push(p.find(label).ok_or_else(|| Error::Malformed(format!("unknown class {label}")))?);
        }
        let gn = graph_norm(g, &gen)?;
        let c = p.class_of(x);
        write(dist, gn.class_value(c), "dist")?;
        write(reachable, gn.is_reachable(c) as i32, "reachable")
    })
}

/// Normalized Hamming distance of two permutations of {0, .., n-1} given
/// as image arrays, as the reduced fraction `num / den`.
///
/// # Safety
/// `a` and `b` must point to `n` values each; outputs writable.
#[no_mangle]
pub unsafe extern "C" fn sofic_hamming_distance(
    a: *const u32,
    b: *const u32,
    n: usize,
    num: *mut i64,
    den: *mut i64,
) -> SoficStatus {
    guard(|| {
        let f = Perm::from_images(slice_arg(a, n, "a")?.to_vec())?;
        let g = Perm::from_images(slice_arg(b, n, "b")?.to_vec())?;
        let d = hamming_distance(&f, &g)
            .as_exact()
            .ok_or_else(|| Fail(SoficStatus::Inapplicable, "inexact distance".into()))?;
        write(num, *d.numer(), "num")?;
        write(den, *d.denom(), "den")
    })
}

/// Parses a word such as "x^-2(xy)^5" over `rank` generators.
///
/// # Safety
/// `text` must be NUL-terminated and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn sofic_word_parse(text: *const c_char, rank: usize, out: *mut *mut SoficWord) -> SoficStatus {
    guard(|| {
        new_handle(out, || Ok(SoficWord { inner: Word::parse(str_arg(text, "text")?, rank)? }))
    })
}

/// Releases a word handle. Null is ignored.
///
/// # Safety
/// `w` must come from this library and not have been freed.
#[no_mangle]
pub unsafe extern "C" fn sofic_word_free(w: *mut SoficWord) {
    if !w.is_null() {
        drop(Box::from_raw(w));
    }
}

/// Writes the reduced length.
///
/// # Safety
/// `w` must be a live handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn sofic_word_length(w: *const SoficWord, out: *mut usize) -> SoficStatus {
    guard(|| write(out, ref_arg(w, "word")?.inner.len(), "out"))
}

/// Writes the reduced word as a new string.
///
/// # Safety
/// `w` must be a live handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn sofic_word_to_string(w: *const SoficWord, out: *mut *mut c_char) -> SoficStatus {
    guard(|| write(out, owned_string(ref_arg(w, "word")?.inner.to_string()), "out"))
}

/// Evaluates `w` in `g` with generator `i` sent to `images[i]`.
///
/// # Safety
/// `images` must point to `n_images` indices; handles live, `out` writable.
#[no_mangle]
pub unsafe extern "C" fn sofic_word_evaluate(
    w: *const SoficWord,
    g: *const SoficGroup,
    images: *const usize,
    n_images: usize,
    out: *mut usize,
) -> SoficStatus {
    guard(|| {
        let w = &ref_arg(w, "word")?.inner;
        let g = &ref_arg(g, "group")?.inner;
        let imgs = slice_arg(images, n_images, "images")?.to_vec();
        for &x in &imgs {
            check_elem(g, x)?;
        }
        write(out, evaluate(w, &GenImages::new(imgs)?, g)?, "out")
    })
}

/// Replays a non-membership certificate. `valid` receives 1 when every
/// claim checks out and 0 when the certificate is refuted.
///
/// # Safety
/// `text` must be NUL-terminated and `valid` writable.
#[no_mangle]
pub unsafe extern "C" fn sofic_certificate_verify(text: *const c_char, valid: *mut i32) -> SoficStatus {
    guard(|| {
        let cert = NonmemberCertificate::parse(str_arg(text, "text")?, Caps::default())?;
        write(valid, cert.check()?.valid as i32, "valid")
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn status_mapping() {
        assert_eq!(status_of(&Error::Parse { line: 1, msg: "x".into() }), SoficStatus::Malformed);
        assert_eq!(status_of(&Error::RankMismatch { left: 1, right: 2 }), SoficStatus::Mismatch);
        assert_eq!(status_of(&Error::UndefinedMargin), SoficStatus::Inapplicable);
    }

    #[test]
    fn panics_become_status() {
        let s = guard(|| panic!("boom"));
        assert_eq!(s, SoficStatus::Panic);
        let msg = unsafe { CStr::from_ptr(sofic_last_error()) };
        assert_eq!(msg.to_str().unwrap(), "internal panic");
    }

    #[test]
    fn null_out_is_reported() {
        let name = CString::new("S3").unwrap();
        let s = unsafe { sofic_group_builtin(name.as_ptr(), ptr::null_mut()) };
        assert_eq!(s, SoficStatus::NullPointer);
    }
}
