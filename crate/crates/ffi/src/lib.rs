// SPDX-License-Identifier: MIT OR Apache-2.0

//! C ABI over the `rfpop` detector.
//!
//! Handles are opaque and owned by the caller once returned; free each with
//! its `_free` function. Every function returns an [`RfpopStatus`]; on a
//! non-zero status [`rfpop_last_error_message`] describes the failure for the
//! calling thread. Panics never cross the boundary.

use std::cell::RefCell;
use std::ffi::{c_char, CStr};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;
use std::slice;

use rfpop::loss::{default_config, LossKind, LossSpec};
use rfpop::{Error, OnlineState, Segmentation};

/// Result code of every call.
#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum RfpopStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    NonFinite = 3,
    DegenerateScale = 4,
    TooShort = 5,
    BufferTooSmall = 6,
    Panic = 7,
}

#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum RfpopLoss {
    L2 = 0,
    L1 = 1,
    Huber = 2,
    Biweight = 3,
    Quantile = 4,
}

/// Loss and penalty. `k` is read only by Huber and biweight, `quantile`
/// only by the quantile loss.
#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct RfpopParams {
    pub loss: RfpopLoss,
    pub k: f64,
    pub quantile: f64,
    pub beta: f64,
}

/// Streaming detector state.
pub struct RfpopOnline {
    state: OnlineState,
}

/// A finished segmentation.
pub struct RfpopSegmentation {
    inner: Segmentation,
}

thread_local! {
    static LAST_ERROR: RefCell<Vec<u8>> = const { RefCell::new(Vec::new()) };
}

fn set_error(msg: &str) {
    LAST_ERROR.with(|e| {
        let mut e = e.borrow_mut();
        e.clear();
        e.extend_from_slice(msg.as_bytes());
    });
}

fn status_of(err: &Error) -> RfpopStatus {
    match err {
        Error::NonFinite { .. } => RfpopStatus::NonFinite,
        Error::DegenerateScale => RfpopStatus::DegenerateScale,
        Error::TooShort { .. } | Error::Empty => RfpopStatus::TooShort,
        _ => RfpopStatus::InvalidArgument,
    }
}

/// Runs `f`, converting errors and panics into a status.
fn guard<F: FnOnce() -> Result<(), (RfpopStatus, String)>>(f: F) -> RfpopStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => RfpopStatus::Ok,
        Ok(Err((status, msg))) => {
            set_error(&msg);
            status
        }
        Err(_) => {
            set_error("internal panic");
            RfpopStatus::Panic
        }
    }
}

fn core_err(e: Error) -> (RfpopStatus, String) {
    (status_of(&e), e.to_string())
}

fn null(what: &str) -> (RfpopStatus, String) {
    (RfpopStatus::NullPointer, format!("{what} is null"))
}

impl From<RfpopLoss> for LossKind {
    fn from(l: RfpopLoss) -> Self {
        match l {
            RfpopLoss::L2 => LossKind::L2,
            RfpopLoss::L1 => LossKind::L1,
            RfpopLoss::Huber => LossKind::Huber,
            RfpopLoss::Biweight => LossKind::Biweight,
            RfpopLoss::Quantile => LossKind::Quantile,
        }
    }
}

impl From<LossKind> for RfpopLoss {
    fn from(l: LossKind) -> Self {
        match l {
            LossKind::L2 => RfpopLoss::L2,
            LossKind::L1 => RfpopLoss::L1,
            LossKind::Huber => RfpopLoss::Huber,
            LossKind::Biweight => RfpopLoss::Biweight,
            LossKind::Quantile => RfpopLoss::Quantile,
        }
    }
}

impl RfpopParams {
    fn spec(&self) -> Result<LossSpec, (RfpopStatus, String)> {
        let spec = match self.loss {
            RfpopLoss::L2 => LossSpec::L2,
            RfpopLoss::L1 => LossSpec::L1,
            RfpopLoss::Huber => LossSpec::Huber { k: self.k },
            RfpopLoss::Biweight => LossSpec::Biweight { k: self.k },
            RfpopLoss::Quantile => LossSpec::Quantile { u: self.quantile },
        };
        spec.validate().map_err(core_err)?;
        Ok(spec)
    }
}

/// # Safety
/// `data` must point to `n` readable doubles when `n > 0`.
unsafe fn series<'a>(data: *const f64, n: usize) -> Result<&'a [f64], (RfpopStatus, String)> {
    if n == 0 {
        return Ok(&[]);
    }
    if data.is_null() {
        return Err(null("data"));
    }
    Ok(slice::from_raw_parts(data, n))
}

/// Fills `out` with the default K, quantile level and β for `data`.
///
/// # Safety
/// `data` must point to `n` doubles; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn rfpop_default_params(
    loss: RfpopLoss,
    data: *const f64,
    n: usize,
    out: *mut RfpopParams,
) -> RfpopStatus {
    guard(|| {
        let data = series(data, n)?;
        if out.is_null() {
            return Err(null("out"));
        }
        let cfg = default_config(loss.into(), data).map_err(core_err)?;
        *out = RfpopParams {
            loss: cfg.spec.kind().into(),
            k: cfg.spec.threshold().unwrap_or(0.0),
            quantile: cfg.spec.quantile().unwrap_or(0.5),
            beta: cfg.penalty.beta,
        };
        Ok(())
    })
}

/// Segments `data` in one call.
///
/// # Safety
/// `data` must point to `n` doubles, `params` must be readable and `out`
/// writable. On success `*out` owns a handle for
/// [`rfpop_segmentation_free`].
#[no_mangle]
pub unsafe extern "C" fn rfpop_detect(
    data: *const f64,
    n: usize,
    params: *const RfpopParams,
    out: *mut *mut RfpopSegmentation,
) -> RfpopStatus {
    guard(|| {
        if params.is_null() {
            return Err(null("params"));
        }
        if out.is_null() {
            return Err(null("out"));
        }
        let data = series(data, n)?;
        let spec = (*params).spec()?;
        let (seg, _) = rfpop::run(data, &spec, (*params).beta).map_err(core_err)?;
        *out = Box::into_raw(Box::new(RfpopSegmentation { inner: seg }));
        Ok(())
    })
}

/// Creates a streaming detector.
///
/// # Safety
/// `params` must be readable and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn rfpop_online_new(
    params: *const RfpopParams,
    out: *mut *mut RfpopOnline,
) -> RfpopStatus {
    guard(|| {
        if params.is_null() {
            return Err(null("params"));
        }
        if out.is_null() {
            return Err(null("out"));
        }
        let spec = (*params).spec()?;
        let state = OnlineState::init(spec, (*params).beta).map_err(core_err)?;
        *out = Box::into_raw(Box::new(RfpopOnline { state }));
        Ok(())
    })
}

/// Feeds one observation. Either output pointer may be null.
///
/// # Safety
/// `handle` must come from [`rfpop_online_new`]; non-null outputs must be
/// writable.
#[no_mangle]
pub unsafe extern "C" fn rfpop_online_push(
    handle: *mut RfpopOnline,
    y: f64,
    most_recent_cp: *mut usize,
    cost: *mut f64,
) -> RfpopStatus {
    guard(|| {
        let h = handle.as_mut().ok_or_else(|| null("handle"))?;
        let cp = h.state.step(y).map_err(core_err)?;
        if !most_recent_cp.is_null() {
            *most_recent_cp = cp.most_recent_cp;
        }
        if !cost.is_null() {
            *cost = cp.cost;
        }
        Ok(())
    })
}

/// Number of observations consumed so far.
///
/// # Safety
/// `handle` must come from [`rfpop_online_new`]; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn rfpop_online_len(
    handle: *const RfpopOnline,
    out: *mut usize,
) -> RfpopStatus {
    guard(|| {
        let h = handle.as_ref().ok_or_else(|| null("handle"))?;
        if out.is_null() {
            return Err(null("out"));
        }
        *out = h.state.t();
        Ok(())
    })
}

/// Optimal segmentation of the data seen so far; the detector stays usable.
///
/// # Safety
/// `handle` must come from [`rfpop_online_new`]; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn rfpop_online_segment(
    handle: *const RfpopOnline,
    out: *mut *mut RfpopSegmentation,
) -> RfpopStatus {
    guard(|| {
        let h = handle.as_ref().ok_or_else(|| null("handle"))?;
        if out.is_null() {
            return Err(null("out"));
        }
        let seg = h.state.backtrack().map_err(core_err)?;
        *out = Box::into_raw(Box::new(RfpopSegmentation { inner: seg }));
        Ok(())
    })
}

/// # Safety
/// `handle` must be null or come from [`rfpop_online_new`], and must not be
/// used afterwards.
#[no_mangle]
pub unsafe extern "C" fn rfpop_online_free(handle: *mut RfpopOnline) {
    if !handle.is_null() {
        drop(Box::from_raw(handle));
    }
}

/// Number of changepoints; there are one more segment means.
///
/// # Safety
/// `seg` must be a live segmentation handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn rfpop_segmentation_len(
    seg: *const RfpopSegmentation,
    out: *mut usize,
) -> RfpopStatus {
    guard(|| {
        let s = seg.as_ref().ok_or_else(|| null("seg"))?;
        if out.is_null() {
            return Err(null("out"));
        }
        *out = s.inner.changepoints.len();
        Ok(())
    })
}

/// # Safety
/// `seg` must be a live segmentation handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn rfpop_segmentation_total_cost(
    seg: *const RfpopSegmentation,
    out: *mut f64,
) -> RfpopStatus {
    guard(|| {
        let s = seg.as_ref().ok_or_else(|| null("seg"))?;
        if out.is_null() {
            return Err(null("out"));
        }
        *out = s.inner.total_cost;
        Ok(())
    })
}

fn copy_out<T: Copy>(src: &[T], buf: *mut T, cap: usize) -> Result<(), (RfpopStatus, String)> {
    if src.len() > cap {
        return Err((
            RfpopStatus::BufferTooSmall,
            format!("need {} elements, buffer holds {cap}", src.len()),
        ));
    }
    if !src.is_empty() {
        if buf.is_null() {
            return Err(null("buffer"));
        }
        // SAFETY: the caller guarantees `cap` writable elements at `buf`.
        unsafe { ptr::copy_nonoverlapping(src.as_ptr(), buf, src.len()) };
    }
    Ok(())
}

/// Copies the 1-based changepoints (last index of each segment but the
/// final one) into `buf`, which must hold at least
/// [`rfpop_segmentation_len`] elements.
///
/// # Safety
/// `seg` must be a live segmentation handle; `buf` must hold `cap` elements.
#[no_mangle]
pub unsafe extern "C" fn rfpop_segmentation_changepoints(
    seg: *const RfpopSegmentation,
    buf: *mut usize,
    cap: usize,
) -> RfpopStatus {
    guard(|| {
        let s = seg.as_ref().ok_or_else(|| null("seg"))?;
        copy_out(&s.inner.changepoints, buf, cap)
    })
}

/// Copies the fitted segment locations; `buf` needs one more element than
/// there are changepoints.
///
/// # Safety
/// `seg` must be a live segmentation handle; `buf` must hold `cap` elements.
#[no_mangle]
pub unsafe extern "C" fn rfpop_segmentation_means(
    seg: *const RfpopSegmentation,
    buf: *mut f64,
    cap: usize,
) -> RfpopStatus {
    guard(|| {
        let s = seg.as_ref().ok_or_else(|| null("seg"))?;
        copy_out(&s.inner.segment_means, buf, cap)
    })
}

/// # Safety
/// `seg` must be null or a live segmentation handle, not used afterwards.
#[no_mangle]
pub unsafe extern "C" fn rfpop_segmentation_free(seg: *mut RfpopSegmentation) {
    if !seg.is_null() {
        drop(Box::from_raw(seg));
    }
}

/// Copies the calling thread's last error message, NUL-terminated and
/// truncated to `cap` bytes, and returns its full length in bytes.
///
/// # Safety
/// `buf` must be null or hold `cap` bytes.
#[no_mangle]
pub unsafe extern "C" fn rfpop_last_error_message(buf: *mut c_char, cap: usize) -> usize {
    LAST_ERROR.with(|e| {
        let e = e.borrow();
        if !buf.is_null() && cap > 0 {
            let n = e.len().min(cap - 1);
            ptr::copy_nonoverlapping(e.as_ptr().cast::<c_char>(), buf, n);
            *buf.add(n) = 0;
        }
        e.len()
    })
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn rfpop_version() -> *const c_char {
    static VERSION: &CStr =
        match CStr::from_bytes_with_nul(concat!(env!("CARGO_PKG_VERSION"), "\0").as_bytes()) {
            Ok(v) => v,
            Err(_) => panic!("version string"),
        };
    VERSION.as_ptr()
}
