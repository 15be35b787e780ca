//! C ABI for `grauert-core`.
//!
//! Objects cross the boundary as opaque handles created by `gt_*_new` and released by the
//! matching `gt_*_free`. Every fallible call returns a [`GtStatus`]; the message of the last
//! failure on the calling thread is available through [`gt_last_error_message`]. Complex
//! vectors are passed as interleaved `(re, im)` doubles.

use std::cell::RefCell;
use std::ffi::{c_char, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use grauert_core::adapted_structure::{self, BlockModel, ProbeOptions, TubeRadius};
use grauert_core::cohomology::{self, CohomologyTable, ModelCohomology};
use grauert_core::geodesic_jacobi;
use grauert_core::model_embedding::{self, Extended, LeafCoordinate, ProductPoint};
use grauert_core::numerics::{CVec, C64};
use grauert_core::projective_geometry::GeodesicFrame;
use grauert_core::Error;

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GtStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    Numerical = 3,
    Overflow = 4,
    Panic = 5,
}

/// Space selector for [`GtCohomology`] queries.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GtSpace {
    UnitTangentBundle = 0,
    Divisor = 1,
    Compactification = 2,
}

/// Closed geodesic `[cos(t/2) z + sin(t/2) w]` of `CP^n`.
pub struct GtFrame(GeodesicFrame);

/// Point of `CP^n x CP^n`.
pub struct GtProductPoint(ProductPoint);

/// Integral cohomology of `UM`, `D` and `X` for one `n`.
pub struct GtCohomology(ModelCohomology);

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(message: String) {
    let c = CString::new(message.replace('\0', " ")).expect("no interior nul");
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

fn status_of(e: &Error) -> GtStatus {
    match e {
        Error::InvalidParameter(_)
        | Error::DimensionMismatch { .. }
        | Error::ZeroVector
        | Error::NonUnitVector { .. }
        | Error::NotTangent { .. }
        | Error::InvalidFrame { .. }
        | Error::OutOfRange { .. } => GtStatus::InvalidArgument,
        _ => GtStatus::Numerical,
    }
}

fn fail(status: GtStatus, message: impl Into<String>) -> GtStatus {
    set_error(message.into());
    status
}

/// Runs `f`, converting errors and panics into status codes.
fn guard<F: FnOnce() -> Result<(), GtStatus>>(f: F) -> GtStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => GtStatus::Ok,
        Ok(Err(status)) => status,
        Err(_) => fail(GtStatus::Panic, "internal panic"),
    }
}

fn core_err(e: Error) -> GtStatus {
    fail(status_of(&e), e.to_string())
}

unsafe fn read_cvec(data: *const f64, len: usize) -> Result<CVec, GtStatus> {
    if data.is_null() {
        return Err(fail(GtStatus::NullPointer, "null vector"));
    }
    // SAFETY: the caller provides 2 * len readable doubles.
    let raw = unsafe { std::slice::from_raw_parts(data, 2 * len) };
    Ok(CVec::from_iterator(len, raw.chunks_exact(2).map(|c| C64::new(c[0], c[1]))))
}

unsafe fn write_cvec(v: &CVec, out: *mut f64, len: usize) -> Result<(), GtStatus> {
    if out.is_null() {
        return Err(fail(GtStatus::NullPointer, "null output buffer"));
    }
    if len != v.len() {
        return Err(fail(GtStatus::InvalidArgument, format!("buffer holds {len} entries, need {}", v.len())));
    }
    // SAFETY: the caller provides 2 * len writable doubles.
    let raw = unsafe { std::slice::from_raw_parts_mut(out, 2 * len) };
    for (c, x) in raw.chunks_exact_mut(2).zip(v.iter()) {
        c[0] = x.re;
        c[1] = x.im;
    }
    Ok(())
}

unsafe fn put<T>(out: *mut T, value: T) -> Result<(), GtStatus> {
    if out.is_null() {
        return Err(fail(GtStatus::NullPointer, "null output pointer"));
    }
    // SAFETY: checked non-null; the caller provides a writable slot.
    unsafe { out.write(value) };
    Ok(())
}

unsafe fn get<'a, T>(handle: *const T) -> Result<&'a T, GtStatus> {
    // SAFETY: non-null handles come from the matching constructor.
    unsafe { handle.as_ref() }.ok_or_else(|| fail(GtStatus::NullPointer, "null handle"))
}

fn extended(value: Extended) -> f64 {
    match value {
        Extended::Finite(x) => x,
        Extended::Infinite => f64::INFINITY,
    }
}

/// Library version as a static nul-terminated string.
#[no_mangle]
pub extern "C" fn gt_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Copies the last error message of this thread into `buf` (nul-terminated, truncated to
/// `len`). Returns the full message length without the terminator, `0` if none.
///
/// # Safety
/// `buf` must be null or point to `len` writable bytes.
#[no_mangle]
pub unsafe extern "C" fn gt_last_error_message(buf: *mut c_char, len: usize) -> usize {
    LAST_ERROR.with(|e| {
        let e = e.borrow();
        let Some(msg) = e.as_ref() else { return 0 };
        let bytes = msg.as_bytes();
        if !buf.is_null() && len > 0 {
            let n = bytes.len().min(len - 1);
            // SAFETY: n + 1 <= len bytes are writable.
            unsafe {
                ptr::copy_nonoverlapping(bytes.as_ptr().cast(), buf, n);
                *buf.add(n) = 0;
            }
        }
        bytes.len()
    })
}

/// Frame from `n + 1` complex entries each of `z` and `w`, orthonormalized.
///
/// # Safety
/// `z` and `w` must point to `2 (n + 1)` doubles; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn gt_frame_new(n: usize, z: *const f64, w: *const f64, out: *mut *mut GtFrame) -> GtStatus {
    guard(|| {
        let z = unsafe { read_cvec(z, n + 1) }?;
        let w = unsafe { read_cvec(w, n + 1) }?;
        let frame = GeodesicFrame::orthonormalized(z, w).map_err(core_err)?;
        unsafe { put(out, Box::into_raw(Box::new(GtFrame(frame)))) }
    })
}

/// Frame `(e_0, e_1)` of `CP^n`, `n >= 1`.
///
/// # Safety
/// `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn gt_frame_standard(n: usize, out: *mut *mut GtFrame) -> GtStatus {
    guard(|| {
        if n == 0 {
            return Err(fail(GtStatus::InvalidArgument, "n must be at least 1"));
        }
        unsafe { put(out, Box::into_raw(Box::new(GtFrame(GeodesicFrame::standard(n))))) }
    })
}

/// # Safety
/// `frame` must be null or a handle from `gt_frame_new`/`gt_frame_standard`, freed once.
#[no_mangle]
pub unsafe extern "C" fn gt_frame_free(frame: *mut GtFrame) {
    if !frame.is_null() {
        // SAFETY: created by Box::into_raw in a constructor.
        drop(unsafe { Box::from_raw(frame) });
    }
}

/// Point `φ_γ(σ + iτ)` on the leaf of `frame`.
///
/// # Safety
/// `frame` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn gt_leaf_map(frame: *const GtFrame, sigma: f64, tau: f64, out: *mut *mut GtProductPoint) -> GtStatus {
    guard(|| {
        let frame = unsafe { get(frame) }?;
        if !sigma.is_finite() || !tau.is_finite() {
            return Err(fail(GtStatus::InvalidArgument, "leaf coordinates must be finite"));
        }
        let p = model_embedding::leaf_map(&frame.0, LeafCoordinate::new(sigma, tau));
        unsafe { put(out, Box::into_raw(Box::new(GtProductPoint(p)))) }
    })
}

/// # Safety
/// `z` and `w` must point to `2 (n + 1)` doubles; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn gt_product_point_new(n: usize, z: *const f64, w: *const f64, out: *mut *mut GtProductPoint) -> GtStatus {
    guard(|| {
        let z = unsafe { read_cvec(z, n + 1) }?;
        let w = unsafe { read_cvec(w, n + 1) }?;
        let p = ProductPoint::from_reps(z, w).map_err(core_err)?;
        unsafe { put(out, Box::into_raw(Box::new(GtProductPoint(p)))) }
    })
}

/// # Safety
/// `p` must be null or a live handle, freed once.
#[no_mangle]
pub unsafe extern "C" fn gt_product_point_free(p: *mut GtProductPoint) {
    if !p.is_null() {
        // SAFETY: created by Box::into_raw in a constructor.
        drop(unsafe { Box::from_raw(p) });
    }
}

/// Complex dimension `n`, or `0` for a null handle.
///
/// # Safety
/// `p` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn gt_product_point_dim(p: *const GtProductPoint) -> usize {
    // SAFETY: see above.
    unsafe { p.as_ref() }.map_or(0, |p| p.0.n())
}

/// Unit representatives of both factors; `len` is the number of complex entries (`n + 1`).
///
/// # Safety
/// `p` must be a live handle; `z_out`, `w_out` must hold `2 len` doubles.
#[no_mangle]
pub unsafe extern "C" fn gt_product_point_coords(p: *const GtProductPoint, z_out: *mut f64, w_out: *mut f64, len: usize) -> GtStatus {
    guard(|| {
        let p = unsafe { get(p) }?;
        unsafe { write_cvec(p.0.first().rep(), z_out, len) }?;
        unsafe { write_cvec(p.0.second().rep(), w_out, len) }
    })
}

unsafe fn scalar(p: *const GtProductPoint, out: *mut f64, f: fn(&ProductPoint) -> Extended) -> GtStatus {
    guard(|| {
        let p = unsafe { get(p) }?;
        unsafe { put(out, extended(f(&p.0))) }
    })
}

/// Exhaustion `𝒩`; `+∞` on the divisor.
///
/// # Safety
/// `p` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn gt_exhaustion(p: *const GtProductPoint, out: *mut f64) -> GtStatus {
    unsafe { scalar(p, out, model_embedding::exhaustion_n) }
}

/// Length `u0` of the represented tangent vector; `+∞` on the divisor.
///
/// # Safety
/// `p` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn gt_u0(p: *const GtProductPoint, out: *mut f64) -> GtStatus {
    unsafe { scalar(p, out, model_embedding::u0) }
}

/// Kähler potential `log(2𝒩)`; `+∞` on the divisor.
///
/// # Safety
/// `p` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn gt_kahler_potential(p: *const GtProductPoint, out: *mut f64) -> GtStatus {
    unsafe { scalar(p, out, model_embedding::kahler_potential) }
}

/// Image under `[z] x [w] ↦ [w̄] x [z̄]`.
///
/// # Safety
/// `p` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn gt_involution(p: *const GtProductPoint, out: *mut *mut GtProductPoint) -> GtStatus {
    guard(|| {
        let p = unsafe { get(p) }?;
        let q = model_embedding::involution_n(&p.0);
        unsafe { put(out, Box::into_raw(Box::new(GtProductPoint(q)))) }
    })
}

/// # Safety
/// `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn gt_cohomology_new(n: usize, out: *mut *mut GtCohomology) -> GtStatus {
    guard(|| {
        let c = cohomology::model_cohomology(n).map_err(core_err)?;
        unsafe { put(out, Box::into_raw(Box::new(GtCohomology(c)))) }
    })
}

/// # Safety
/// `h` must be null or a live handle, freed once.
#[no_mangle]
pub unsafe extern "C" fn gt_cohomology_free(h: *mut GtCohomology) {
    if !h.is_null() {
        // SAFETY: created by Box::into_raw in gt_cohomology_new.
        drop(unsafe { Box::from_raw(h) });
    }
}

fn table(h: &GtCohomology, space: GtSpace) -> &CohomologyTable {
    match space {
        GtSpace::UnitTangentBundle => &h.0.um,
        GtSpace::Divisor => &h.0.d,
        GtSpace::Compactification => &h.0.x,
    }
}

/// Top degree of the table for `space`.
///
/// # Safety
/// `h` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn gt_cohomology_dim(h: *const GtCohomology, space: GtSpace, out: *mut usize) -> GtStatus {
    guard(|| {
        let h = unsafe { get(h) }?;
        unsafe { put(out, table(h, space).dim()) }
    })
}

/// Free rank of `H^degree`.
///
/// # Safety
/// `h` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn gt_cohomology_rank(h: *const GtCohomology, space: GtSpace, degree: usize, out: *mut usize) -> GtStatus {
    guard(|| {
        let h = unsafe { get(h) }?;
        unsafe { put(out, table(h, space).get(degree as i64).rank()) }
    })
}

/// Number of torsion factors of `H^degree`.
///
/// # Safety
/// `h` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn gt_cohomology_torsion_count(h: *const GtCohomology, space: GtSpace, degree: usize, out: *mut usize) -> GtStatus {
    guard(|| {
        let h = unsafe { get(h) }?;
        unsafe { put(out, table(h, space).get(degree as i64).torsion().len()) }
    })
}

/// Torsion factor `index` of `H^degree`; `Overflow` if it does not fit in 64 bits.
///
/// # Safety
/// `h` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn gt_cohomology_torsion(h: *const GtCohomology, space: GtSpace, degree: usize, index: usize, out: *mut i64) -> GtStatus {
    guard(|| {
        let h = unsafe { get(h) }?;
        let g = table(h, space).get(degree as i64);
        let t = g.torsion().get(index).ok_or_else(|| fail(GtStatus::InvalidArgument, format!("no torsion factor {index}")))?;
        let v = i64::try_from(t).map_err(|_| fail(GtStatus::Overflow, "torsion factor exceeds 64 bits"))?;
        unsafe { put(out, v) }
    })
}

/// Morse index and total vanishing order of the closed geodesic of `frame`.
///
/// # Safety
/// `frame` must be a live handle; both outputs must be writable.
#[no_mangle]
pub unsafe extern "C" fn gt_morse_index(frame: *const GtFrame, index: *mut usize, vanishing: *mut usize) -> GtStatus {
    guard(|| {
        let frame = unsafe { get(frame) }?;
        let period = 2.0 * std::f64::consts::PI;
        let (chart, path) = geodesic_jacobi::cpn_closed_geodesic(&frame.0, period * 5e-4).map_err(core_err)?;
        let summary = geodesic_jacobi::morse_summary(&chart, &path, period).map_err(core_err)?;
        unsafe { put(index, summary.index) }?;
        unsafe { put(vanishing, summary.vanishing_order) }
    })
}

/// Tube radius of the constant-curvature block `K`; `+∞` when entire up to `tau_max`.
///
/// # Safety
/// `radius` must be writable.
#[no_mangle]
pub unsafe extern "C" fn gt_tube_probe_block(k: f64, tau_max: f64, radius: *mut f64) -> GtStatus {
    guard(|| {
        let model = BlockModel::block(k).map_err(core_err)?;
        let options = ProbeOptions { tau_max, ..ProbeOptions::default() };
        let r = match adapted_structure::tube_radius_probe(&model, options).map_err(core_err)? {
            TubeRadius::Entire => f64::INFINITY,
            TubeRadius::Finite(r) => r,
        };
        unsafe { put(radius, r) }
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn last_error() -> String {
        let mut buf = [0 as c_char; 256];
        let len = unsafe { gt_last_error_message(buf.as_mut_ptr(), buf.len()) };
        let bytes: Vec<u8> = buf.iter().take(len.min(255)).map(|&c| c as u8).collect();
        String::from_utf8(bytes).unwrap()
    }

    #[test]
    fn status_mapping() {
        assert_eq!(status_of(&Error::ZeroVector), GtStatus::InvalidArgument);
        assert_eq!(status_of(&Error::InvalidParameter("x".into())), GtStatus::InvalidArgument);
        assert_eq!(status_of(&Error::OutOfRange { value: 9.0, lo: 1.0, hi: 3.0 }), GtStatus::InvalidArgument);
        assert_eq!(status_of(&Error::NotInvertible { sigma: 0.0, tau: 1.0 }), GtStatus::Numerical);
    }

    #[test]
    fn guard_catches_panics() {
        let status = guard(|| panic!("boom"));
        assert_eq!(status, GtStatus::Panic);
        assert_eq!(last_error(), "internal panic");
        assert_eq!(guard(|| Ok(())), GtStatus::Ok);
    }

    #[test]
    fn error_message_truncates() {
        set_error("abcdefghij".into());
        let mut buf = [1 as c_char; 4];
        let len = unsafe { gt_last_error_message(buf.as_mut_ptr(), buf.len()) };
        assert_eq!(len, 10);
        assert_eq!(buf.map(|c| c as u8), *b"abc\0");
        // null buffer only reports the length
        assert_eq!(unsafe { gt_last_error_message(ptr::null_mut(), 0) }, 10);
        set_error("nul\0inside".into());
        assert_eq!(last_error(), "nul inside");
    }

    #[test]
    fn buffer_length_is_checked() {
        let v = CVec::from_element(3, C64::new(1.0, 2.0));
        let mut out = [0.0; 4];
        assert_eq!(unsafe { write_cvec(&v, out.as_mut_ptr(), 2) }, Err(GtStatus::InvalidArgument));
        assert_eq!(unsafe { write_cvec(&v, ptr::null_mut(), 3) }, Err(GtStatus::NullPointer));
        let back = unsafe { read_cvec([1.0, 2.0, 3.0, 4.0].as_ptr(), 2) }.unwrap();
        assert_eq!(back[1], C64::new(3.0, 4.0));
    }
}
