//! C ABI over the fracbern kernels, weights, cubature and rate predictions.
//!
//! Every fallible call returns an `FbStatus`; on failure the message is kept
//! per thread and read with `fb_last_error`. Objects are opaque handles that
//! the caller releases with the matching `*_free`.

use fracbern::cubature::{self, Cubature};
use fracbern::jacobi::JacobiParams;
use fracbern::kernels::{self, ZonalKernel};
use fracbern::operators::{self, RateMode};
use fracbern::sphere::SpherePoint;
use fracbern::weights::Weight;
use fracbern::Error;
use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

/// Status codes; `FB_STATUS_OK` is zero.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FbStatus {
    Ok = 0,
    NullPointer = 1,
    Parameter = 2,
    Range = 3,
    Numerical = 4,
    Convergence = 5,
    Precondition = 6,
    Infeasible = 7,
    Io = 8,
    Internal = 9,
    Panic = 10,
}

/// Zonal kernel Σ c_k E_k^{(α,β)}(t).
pub struct FbKernel(ZonalKernel);

/// Normalized doubling weight.
pub struct FbWeight(Weight);

/// Positive cubature with certified exactness.
pub struct FbCubature(Cubature);

thread_local! {
    static LAST_ERROR: RefCell<CString> = RefCell::new(CString::default());
}

fn set_error(msg: &str) {
    let c = CString::new(msg.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = c);
}

fn status_of(e: &Error) -> FbStatus {
    match e {
        Error::Parameter(_) => FbStatus::Parameter,
        Error::Range(_) => FbStatus::Range,
        Error::Numerical { .. } => FbStatus::Numerical,
        Error::Convergence(_) => FbStatus::Convergence,
        Error::Precondition(_) => FbStatus::Precondition,
        Error::Infeasible(_) => FbStatus::Infeasible,
        Error::Io(_) => FbStatus::Io,
        Error::Internal(_) => FbStatus::Internal,
    }
}

fn guard(f: impl FnOnce() -> Result<(), FbStatus>) -> FbStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => {
            set_error("");
            FbStatus::Ok
        }
        Ok(Err(s)) => s,
        Err(_) => {
            set_error("panic inside fracbern");
            FbStatus::Panic
        }
    }
}

fn fail(e: Error) -> FbStatus {
    set_error(&e.to_string());
    status_of(&e)
}

fn null(what: &str) -> FbStatus {
    set_error(&format!("null pointer: {what}"));
    FbStatus::NullPointer
}

unsafe fn out<'a, T>(p: *mut T, what: &str) -> Result<&'a mut T, FbStatus> {
    p.as_mut().ok_or_else(|| null(what))
}

unsafe fn handle<'a, T>(p: *const T, what: &str) -> Result<&'a T, FbStatus> {
    p.as_ref().ok_or_else(|| null(what))
}

unsafe fn string<'a>(p: *const c_char, what: &str) -> Result<&'a str, FbStatus> {
    if p.is_null() {
        return Err(null(what));
    }
    CStr::from_ptr(p).to_str().map_err(|_| {
        set_error(&format!("{what} is not valid UTF-8"));
        FbStatus::Parameter
    })
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn fb_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr() as *const c_char
}

/// Copies the calling thread's last error message into `buf` (NUL-terminated,
/// truncated to `len`) and returns the full message length without the NUL.
///
/// # Safety
/// `buf` must be NULL or point to `len` writable bytes.
#[no_mangle]
pub unsafe extern "C" fn fb_last_error(buf: *mut c_char, len: usize) -> usize {
    LAST_ERROR.with(|e| {
        let e = e.borrow();
        let bytes = e.as_bytes();
        if !buf.is_null() && len > 0 {
            let n = bytes.len().min(len - 1);
            ptr::copy_nonoverlapping(bytes.as_ptr() as *const c_char, buf, n);
            *buf.add(n) = 0;
        }
        bytes.len()
    })
}

/// Builds G_{n,r} = Σ η(k/n)(k(k+α+β+1))^{r/2} E_k^{(α,β)}.
///
/// # Safety
/// `out_kernel` must be a valid pointer; the handle written there is owned by the caller.
#[no_mangle]
pub unsafe extern "C" fn fb_kernel_g_new(n: usize, r: f64, alpha: f64, beta: f64, out_kernel: *mut *mut FbKernel) -> FbStatus {
    guard(|| {
        let slot = out(out_kernel, "out_kernel")?;
        *slot = ptr::null_mut();
        let q = JacobiParams::new(alpha, beta).map_err(fail)?;
        let k = kernels::build_g(n, r, q).map_err(fail)?;
        *slot = Box::into_raw(Box::new(FbKernel(k)));
        Ok(())
    })
}

/// Releases a kernel; NULL is ignored.
///
/// # Safety
/// `kernel` must be NULL or a handle from `fb_kernel_g_new` not yet freed.
#[no_mangle]
pub unsafe extern "C" fn fb_kernel_free(kernel: *mut FbKernel) {
    if !kernel.is_null() {
        drop(Box::from_raw(kernel));
    }
}

/// Polynomial degree of the kernel.
///
/// # Safety
/// `kernel` must be a live handle and `out_degree` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn fb_kernel_degree(kernel: *const FbKernel, out_degree: *mut usize) -> FbStatus {
    guard(|| {
        let k = handle(kernel, "kernel")?;
        *out(out_degree, "out_degree")? = k.0.degree();
        Ok(())
    })
}

/// Evaluates the kernel at t ∈ [−1, 1].
///
/// # Safety
/// `kernel` must be a live handle and `out_value` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn fb_kernel_eval(kernel: *const FbKernel, t: f64, out_value: *mut f64) -> FbStatus {
    guard(|| {
        let k = handle(kernel, "kernel")?;
        let o = out(out_value, "out_value")?;
        *o = k.0.eval_checked(t).map_err(fail)?;
        Ok(())
    })
}

/// ‖kernel‖_{p,α,β} with relative tolerance `tol` (≤ 0 selects the default).
///
/// # Safety
/// `kernel` must be a live handle and `out_value` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn fb_kernel_norm(kernel: *const FbKernel, p: f64, tol: f64, out_value: *mut f64) -> FbStatus {
    guard(|| {
        let k = handle(kernel, "kernel")?;
        let o = out(out_value, "out_value")?;
        *o = k.0.norm(p, if tol > 0.0 { Some(tol) } else { None }).map_err(fail)?;
        Ok(())
    })
}

/// Parses "unit" or "power:a1,a2,a3".
///
/// # Safety
/// `spec` must be a NUL-terminated string and `out_weight` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn fb_weight_parse(spec: *const c_char, out_weight: *mut *mut FbWeight) -> FbStatus {
    guard(|| {
        let slot = out(out_weight, "out_weight")?;
        *slot = ptr::null_mut();
        let s = string(spec, "spec")?;
        let w = Weight::parse(s).map_err(fail)?;
        *slot = Box::into_raw(Box::new(FbWeight(w)));
        Ok(())
    })
}

/// Releases a weight; NULL is ignored.
///
/// # Safety
/// `weight` must be NULL or a handle from `fb_weight_parse` not yet freed.
#[no_mangle]
pub unsafe extern "C" fn fb_weight_free(weight: *mut FbWeight) {
    if !weight.is_null() {
        drop(Box::from_raw(weight));
    }
}

/// Normalized weight value at the unit vector (x, y, z).
///
/// # Safety
/// `weight` must be a live handle and `out_value` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn fb_weight_eval(weight: *const FbWeight, x: f64, y: f64, z: f64, out_value: *mut f64) -> FbStatus {
    guard(|| {
        let w = handle(weight, "weight")?;
        let o = out(out_value, "out_value")?;
        let pt = SpherePoint::new(x, y, z).map_err(fail)?;
        *o = w.0.eval(&pt);
        Ok(())
    })
}

/// Dyadic growth exponent s_w.
///
/// # Safety
/// `weight` must be a live handle and `out_value` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn fb_weight_s_w(weight: *const FbWeight, out_value: *mut f64) -> FbStatus {
    guard(|| {
        let w = handle(weight, "weight")?;
        *out(out_value, "out_value")? = w.0.s_w;
        Ok(())
    })
}

/// Positive cubature exact on Π_{4n} for the weight, nodes δ/n-separated.
///
/// # Safety
/// `weight` must be a live handle and `out_cubature` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn fb_cubature_build(
    weight: *const FbWeight,
    n: usize,
    delta: f64,
    seed: u64,
    out_cubature: *mut *mut FbCubature,
) -> FbStatus {
    guard(|| {
        let slot = out(out_cubature, "out_cubature")?;
        *slot = ptr::null_mut();
        let w = handle(weight, "weight")?;
        let c = cubature::build_cubature(&w.0, n, delta, seed).map_err(fail)?;
        *slot = Box::into_raw(Box::new(FbCubature(c)));
        Ok(())
    })
}

/// Releases a cubature; NULL is ignored.
///
/// # Safety
/// `cubature` must be NULL or a handle from `fb_cubature_build` not yet freed.
#[no_mangle]
pub unsafe extern "C" fn fb_cubature_free(cubature: *mut FbCubature) {
    if !cubature.is_null() {
        drop(Box::from_raw(cubature));
    }
}

/// Node count, exactness degree and certified moment residual.
///
/// # Safety
/// `cubature` must be a live handle; each out pointer may be NULL.
#[no_mangle]
pub unsafe extern "C" fn fb_cubature_info(
    cubature: *const FbCubature,
    out_len: *mut usize,
    out_degree: *mut usize,
    out_residual: *mut f64,
) -> FbStatus {
    guard(|| {
        let c = &handle(cubature, "cubature")?.0;
        if let Some(o) = out_len.as_mut() {
            *o = c.weights.len();
        }
        if let Some(o) = out_degree.as_mut() {
            *o = c.exactness_degree;
        }
        if let Some(o) = out_residual.as_mut() {
            *o = c.residual;
        }
        Ok(())
    })
}

/// Copies nodes (x, y, z triples) and weights into caller buffers of `capacity`
/// nodes; fails with a range status when the cubature is larger.
///
/// # Safety
/// `xyz` must hold 3·capacity doubles and `weights` capacity doubles.
#[no_mangle]
pub unsafe extern "C" fn fb_cubature_nodes(cubature: *const FbCubature, xyz: *mut f64, weights: *mut f64, capacity: usize) -> FbStatus {
    guard(|| {
        let c = &handle(cubature, "cubature")?.0;
        if xyz.is_null() {
            return Err(null("xyz"));
        }
        if weights.is_null() {
            return Err(null("weights"));
        }
        let n = c.weights.len();
        if capacity < n {
            return Err(fail(Error::Range(format!("buffer holds {capacity} nodes, cubature has {n}"))));
        }
        for (i, (p, w)) in c.nodes.points.iter().zip(&c.weights).enumerate() {
            let v = p.coords();
            *xyz.add(3 * i) = v[0];
            *xyz.add(3 * i + 1) = v[1];
            *xyz.add(3 * i + 2) = v[2];
            *weights.add(i) = *w;
        }
        Ok(())
    })
}

/// Predicted exponent and log power of the sharp Bernstein constant.
/// `mode` is "unweighted-thm1.1", "jacobi-thm2.3" or "doubling-thm4.1".
///
/// # Safety
/// `mode` must be a NUL-terminated string; out pointers must be valid.
#[no_mangle]
pub unsafe extern "C" fn fb_predict_rate(
    mode: *const c_char,
    d: usize,
    alpha: f64,
    s_w: f64,
    p: f64,
    r: f64,
    out_exponent: *mut f64,
    out_log_power: *mut f64,
) -> FbStatus {
    guard(|| {
        let m = RateMode::from_tag(string(mode, "mode")?, d, alpha, s_w).map_err(fail)?;
        let e = out(out_exponent, "out_exponent")?;
        let l = out(out_log_power, "out_log_power")?;
        let pred = operators::predict_rate(m, p, r).map_err(fail)?;
        *e = pred.exponent;
        *l = pred.log_power;
        Ok(())
    })
}
