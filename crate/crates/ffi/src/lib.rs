//! C ABI for `hsb-core`.
//!
//! Sign assignments and fields cross the boundary as opaque handles that the
//! caller releases with the matching `*_free` function. Every fallible call
//! returns an [`HsbStatus`]; on failure [`hsb_last_error`] describes the
//! error on the calling thread. Strings returned by the library are released
//! with [`hsb_string_free`].

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use hsb_core::levelsets::{binomial_expected, histogram, verify_theorem};
use hsb_core::normalize::{normalize, replay, RearrangementWitness};
use hsb_core::{allones_value, eval_grid, eval_grid_fast, DyadicRect, Error, GridField, SignAssignment, SignSampler};

/// Opaque sign assignment.
pub struct HsbSigns(SignAssignment);

/// Opaque evaluated field.
pub struct HsbField(GridField);

/// Result code of every fallible call.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum HsbStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    TooLarge = 3,
    RegionTooSmall = 4,
    ParseError = 5,
    PreconditionFailed = 6,
    BufferTooSmall = 7,
    Panic = 8,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(message: String) {
    let c = CString::new(message.replace('\0', " ")).expect("interior NULs removed");
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

fn status_of(e: &Error) -> HsbStatus {
    match e {
        Error::GridTooLarge { .. } | Error::SearchSpaceTooLarge { .. } | Error::Overflow(_) => HsbStatus::TooLarge,
        Error::RegionTooSmall { .. } => HsbStatus::RegionTooSmall,
        Error::Parse { .. } => HsbStatus::ParseError,
        Error::PreconditionViolated(_) | Error::LayerOutOfRange { .. } => HsbStatus::PreconditionFailed,
        _ => HsbStatus::InvalidArgument,
    }
}

/// Runs `f`, recording any error or panic for [`hsb_last_error`].
fn guard(f: impl FnOnce() -> Result<(), (HsbStatus, String)>) -> HsbStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => HsbStatus::Ok,
        Ok(Err((status, message))) => {
            set_error(message);
            status
        }
        Err(_) => {
            set_error("internal panic".to_string());
            HsbStatus::Panic
        }
    }
}

fn core(e: Error) -> (HsbStatus, String) {
    (status_of(&e), e.to_string())
}

fn null(what: &str) -> (HsbStatus, String) {
    (HsbStatus::NullPointer, format!("{what} is null"))
}

unsafe fn deref<'a, T>(p: *const T, what: &str) -> Result<&'a T, (HsbStatus, String)> {
    p.as_ref().ok_or_else(|| null(what))
}

unsafe fn write_out<T>(out: *mut T, value: T, what: &str) -> Result<(), (HsbStatus, String)> {
    if out.is_null() {
        return Err(null(what));
    }
    out.write(value);
    Ok(())
}

fn to_c_string(s: String) -> *mut c_char {
    CString::new(s).expect("library strings have no NUL").into_raw()
}

unsafe fn region(levels: *const u32, offsets: *const u64, d: usize) -> Result<DyadicRect, (HsbStatus, String)> {
    if levels.is_null() || offsets.is_null() {
        return Ok(DyadicRect::unit(d));
    }
    let levels = std::slice::from_raw_parts(levels, d);
    let offsets = std::slice::from_raw_parts(offsets, d);
    DyadicRect::from_parts(levels, offsets).map_err(core)
}

/// Message for the last failed call on this thread, or null. Valid until the
/// next failing call on the same thread.
#[no_mangle]
pub extern "C" fn hsb_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |c| c.as_ptr()))
}

/// Releases a string returned by this library.
///
/// # Safety
/// `s` must come from this library and not be freed twice.
#[no_mangle]
pub unsafe extern "C" fn hsb_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}

/// Every sign equal to `sign` (`+1` or `-1`).
///
/// # Safety
/// `out` must be valid for writes.
#[no_mangle]
pub unsafe extern "C" fn hsb_signs_constant(n: u32, d: usize, sign: i8, out: *mut *mut HsbSigns) -> HsbStatus {
    guard(|| {
        let s = SignAssignment::constant(n, d, sign).map_err(core)?;
        write_out(out, Box::into_raw(Box::new(HsbSigns(s))), "out")
    })
}

/// The `index`-th assignment (counting from 0) drawn from the seeded sampler.
///
/// # Safety
/// `out` must be valid for writes.
#[no_mangle]
pub unsafe extern "C" fn hsb_signs_random(
    n: u32,
    d: usize,
    seed: u64,
    index: u64,
    out: *mut *mut HsbSigns,
) -> HsbStatus {
    guard(|| {
        let mut sampler = SignSampler::new(n, d, seed).map_err(core)?;
        for _ in 0..index {
            sampler.next_assignment();
        }
        let s = sampler.next_assignment();
        write_out(out, Box::into_raw(Box::new(HsbSigns(s))), "out")
    })
}

/// Parses the text sign-file format.
///
/// # Safety
/// `text` must be a NUL-terminated string and `out` valid for writes.
#[no_mangle]
pub unsafe extern "C" fn hsb_signs_parse(text: *const c_char, out: *mut *mut HsbSigns) -> HsbStatus {
    guard(|| {
        if text.is_null() {
            return Err(null("text"));
        }
        let text = CStr::from_ptr(text)
            .to_str()
            .map_err(|e| (HsbStatus::ParseError, e.to_string()))?;
        let s = SignAssignment::parse(text).map_err(core)?;
        write_out(out, Box::into_raw(Box::new(HsbSigns(s))), "out")
    })
}

/// Serializes to the text sign-file format; free with [`hsb_string_free`].
///
/// # Safety
/// `signs` must be a live handle and `out` valid for writes.
#[no_mangle]
pub unsafe extern "C" fn hsb_signs_to_string(signs: *const HsbSigns, out: *mut *mut c_char) -> HsbStatus {
    guard(|| {
        let s = deref(signs, "signs")?;
        write_out(out, to_c_string(s.0.to_string()), "out")
    })
}

/// Number of rectangles, or 0 for a null handle.
///
/// # Safety
/// `signs` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn hsb_signs_len(signs: *const HsbSigns) -> usize {
    signs.as_ref().map_or(0, |s| s.0.len())
}

/// Sign of the rectangle with canonical id `id`.
///
/// # Safety
/// `signs` must be a live handle and `out` valid for writes.
#[no_mangle]
pub unsafe extern "C" fn hsb_signs_get(signs: *const HsbSigns, id: u64, out: *mut i8) -> HsbStatus {
    guard(|| {
        let s = deref(signs, "signs")?;
        write_out(out, s.0.get(id).map_err(core)?, "out")
    })
}

/// Flips the sign of rectangle `id` in place.
///
/// # Safety
/// `signs` must be a live handle.
#[no_mangle]
pub unsafe extern "C" fn hsb_signs_negate(signs: *mut HsbSigns, id: u64) -> HsbStatus {
    guard(|| {
        let s = signs.as_mut().ok_or_else(|| null("signs"))?;
        s.0.negate(id).map_err(core)
    })
}

/// 64-bit FNV-1a digest of the sign string, or 0 for a null handle.
///
/// # Safety
/// `signs` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn hsb_signs_digest(signs: *const HsbSigns) -> u64 {
    signs.as_ref().map_or(0, |s| s.0.digest())
}

/// # Safety
/// `signs` must be null or a handle not yet freed.
#[no_mangle]
pub unsafe extern "C" fn hsb_signs_free(signs: *mut HsbSigns) {
    if !signs.is_null() {
        drop(Box::from_raw(signs));
    }
}

/// Evaluates the field on the full grid, by the layer sweep when `fast` is
/// true and cell by cell otherwise.
///
/// # Safety
/// `signs` must be a live handle and `out` valid for writes.
#[no_mangle]
pub unsafe extern "C" fn hsb_field_eval(signs: *const HsbSigns, fast: bool, out: *mut *mut HsbField) -> HsbStatus {
    guard(|| {
        let s = deref(signs, "signs")?;
        let n = s.0.n();
        let field = if fast {
            eval_grid_fast(n, &s.0)
        } else {
            eval_grid(n, &s.0)
        }
        .map_err(core)?;
        write_out(out, Box::into_raw(Box::new(HsbField(field))), "out")
    })
}

/// Cells per axis, or 0 for a null handle.
///
/// # Safety
/// `field` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn hsb_field_side(field: *const HsbField) -> u64 {
    field.as_ref().map_or(0, |f| f.0.side())
}

/// Borrows the cell values (first coordinate slowest). The pointer stays
/// valid until the field is freed.
///
/// # Safety
/// `field` must be a live handle; `values` and `len` valid for writes.
#[no_mangle]
pub unsafe extern "C" fn hsb_field_values(
    field: *const HsbField,
    values: *mut *const i8,
    len: *mut usize,
) -> HsbStatus {
    guard(|| {
        let f = deref(field, "field")?;
        write_out(values, f.0.values().as_ptr(), "values")?;
        write_out(len, f.0.values().len(), "len")
    })
}

/// 64-bit FNV-1a digest of the cell bytes, or 0 for a null handle.
///
/// # Safety
/// `field` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn hsb_field_digest(field: *const HsbField) -> u64 {
    field.as_ref().map_or(0, |f| f.0.digest())
}

/// # Safety
/// `field` must be null or a handle not yet freed.
#[no_mangle]
pub unsafe extern "C" fn hsb_field_free(field: *mut HsbField) {
    if !field.is_null() {
        drop(Box::from_raw(field));
    }
}

/// Level-set histogram of `field` on the region with the given per-axis
/// levels and offsets (both null for the whole cube). Writes the nonzero
/// `(value, count)` pairs in ascending value order. `len` receives the
/// number of pairs; if it exceeds `capacity` nothing else is written and
/// `BufferTooSmall` is returned.
///
/// # Safety
/// `levels`/`offsets` must be null or hold `d` entries; `values` and
/// `counts` must hold `capacity` entries; `len` must be valid for writes.
#[no_mangle]
pub unsafe extern "C" fn hsb_histogram(
    field: *const HsbField,
    levels: *const u32,
    offsets: *const u64,
    values: *mut i32,
    counts: *mut u64,
    capacity: usize,
    len: *mut usize,
) -> HsbStatus {
    guard(|| {
        let f = deref(field, "field")?;
        let q = region(levels, offsets, f.0.dim())?;
        let h = histogram(&f.0, &q).map_err(core)?;
        let pairs = h.counts();
        write_out(len, pairs.len(), "len")?;
        if pairs.len() > capacity {
            return Err((
                HsbStatus::BufferTooSmall,
                format!("{} entries needed, capacity {capacity}", pairs.len()),
            ));
        }
        if values.is_null() || counts.is_null() {
            return Err(null("values or counts"));
        }
        for (i, (&v, &c)) in pairs.iter().enumerate() {
            values.add(i).write(v);
            counts.add(i).write(c);
        }
        Ok(())
    })
}

/// Predicted cell count of value `n + 1 - 2k` on a region with levels
/// `(a, b)` in the plane.
///
/// # Safety
/// `out` must be valid for writes.
#[no_mangle]
pub unsafe extern "C" fn hsb_binomial_expected(n: u32, a: u32, b: u32, k: u32, out: *mut u64) -> HsbStatus {
    guard(|| {
        let q = DyadicRect::from_parts(&[a, b], &[0, 0]).map_err(core)?;
        write_out(out, binomial_expected(n, &q, k).map_err(core)?, "out")
    })
}

/// All-ones field value at finest cell `(i, j)`.
///
/// # Safety
/// `out` must be valid for writes.
#[no_mangle]
pub unsafe extern "C" fn hsb_allones_value(n: u32, i: u64, j: u64, out: *mut i32) -> HsbStatus {
    guard(|| write_out(out, allones_value(n, i, j).map_err(core)?, "out"))
}

/// Checks the binomial law on every admissible region of the plane.
/// `passed` is set to whether all regions agree and `total_q` to the number
/// of regions checked.
///
/// # Safety
/// `signs` must be a live handle; `passed` and `total_q` valid for writes.
#[no_mangle]
pub unsafe extern "C" fn hsb_verify_theorem(signs: *const HsbSigns, passed: *mut bool, total_q: *mut u64) -> HsbStatus {
    guard(|| {
        let s = deref(signs, "signs")?;
        let report = verify_theorem(s.0.n(), &s.0).map_err(core)?;
        write_out(passed, report.passed(), "passed")?;
        write_out(total_q, report.total_q(), "total_q")
    })
}

/// Normalizes every sign to `+1` for the planar region given by `levels` and
/// `offsets` (two entries each, or both null for the whole square). Writes
/// the all-ones assignment to `out_signs` and the rearrangement witness as
/// JSON to `out_witness`.
///
/// # Safety
/// `signs` must be a live handle; `levels`/`offsets` null or two entries
/// each; the output pointers valid for writes.
#[no_mangle]
pub unsafe extern "C" fn hsb_normalize(
    signs: *const HsbSigns,
    levels: *const u32,
    offsets: *const u64,
    out_signs: *mut *mut HsbSigns,
    out_witness: *mut *mut c_char,
) -> HsbStatus {
    guard(|| {
        let s = deref(signs, "signs")?;
        if out_signs.is_null() || out_witness.is_null() {
            return Err(null("output pointer"));
        }
        let q = region(levels, offsets, 2)?;
        let (normalized, witness) = normalize(s.0.n(), &s.0, &q).map_err(core)?;
        write_out(out_signs, Box::into_raw(Box::new(HsbSigns(normalized))), "out_signs")?;
        write_out(out_witness, to_c_string(witness.to_json()), "out_witness")
    })
}

/// Applies a witness to the field of `signs` and counts the cells of its
/// region that differ from the all-ones field.
///
/// # Safety
/// `witness_json` must be a NUL-terminated string, `signs` a live handle and
/// `mismatched` valid for writes.
#[no_mangle]
pub unsafe extern "C" fn hsb_replay(
    witness_json: *const c_char,
    signs: *const HsbSigns,
    mismatched: *mut u64,
) -> HsbStatus {
    guard(|| {
        if witness_json.is_null() {
            return Err(null("witness_json"));
        }
        let text = CStr::from_ptr(witness_json)
            .to_str()
            .map_err(|e| (HsbStatus::ParseError, e.to_string()))?;
        let witness = RearrangementWitness::from_json(text).map_err(core)?;
        let s = deref(signs, "signs")?;
        let outcome = replay(&witness, &s.0).map_err(core)?;
        write_out(mismatched, outcome.mismatched_cells, "mismatched")
    })
}
