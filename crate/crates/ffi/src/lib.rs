//! C ABI over `gsl_pgnn`.
//!
//! Every function returns a [`GslStatus`]; on failure the message is kept in
//! a thread-local buffer readable through [`gsl_last_error_message`]. Handles
//! are opaque and must be released with the matching `_free` function.
//! Panics never cross the boundary.

#![allow(clippy::missing_safety_doc)]

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use gsl_pgnn::fem::{ForwardModel, NodalField};
use gsl_pgnn::inverse::{localize, ObservationSet, StartPolicy};
use gsl_pgnn::surrogate::{load_checkpoint, Surrogate};
use gsl_pgnn::Error;

/// Result code of every call.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GslStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    Shape = 3,
    UnsupportedVersion = 4,
    Format = 5,
    Io = 6,
    Numerical = 7,
    Panic = 8,
}

/// Start points of the localizer.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GslStartPolicy {
    /// 3x3 grid over the source box.
    Grid3 = 0,
    /// Box center only.
    Center = 1,
}

/// Trained surrogate.
pub struct GslModel {
    inner: Surrogate,
}

/// Factored forward solver for one mesh and coefficient set.
pub struct GslFemSolver {
    inner: ForwardModel,
}

/// Nodal solution of one forward solve.
pub struct GslField {
    inner: NodalField,
}

/// Output of [`gsl_model_localize`].
#[repr(C)]
#[derive(Debug, Clone, Copy, Default)]
pub struct GslLocalization {
    /// Estimated source position, km.
    pub p_hat: [f64; 2],
    pub objective: f64,
    pub iterations: usize,
    pub starts_tried: usize,
    pub converged: bool,
}

thread_local! {
    static LAST_ERROR: RefCell<CString> = RefCell::new(CString::default());
}

fn set_error(msg: &str) {
    let c = CString::new(msg.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = c);
}

fn status_of(e: &Error) -> GslStatus {
    match e {
        Error::InvalidArgument(_) => GslStatus::InvalidArgument,
        Error::Shape(_) => GslStatus::Shape,
        Error::UnsupportedVersion { .. } => GslStatus::UnsupportedVersion,
        Error::Format { .. } | Error::Json(_) | Error::Csv(_) => GslStatus::Format,
        Error::Io(_) => GslStatus::Io,
        Error::Solver(_) | Error::NonFinite { .. } | Error::Numerical(_) => GslStatus::Numerical,
    }
}

struct Fail(GslStatus, String);

impl From<Error> for Fail {
    fn from(e: Error) -> Self {
        Fail(status_of(&e), e.to_string())
    }
}

fn null(what: &str) -> Fail {
    Fail(GslStatus::NullPointer, format!("{what} is null"))
}

fn guard(f: impl FnOnce() -> Result<(), Fail>) -> GslStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => {
            set_error("");
            GslStatus::Ok
        }
        Ok(Err(Fail(status, msg))) => {
            set_error(&msg);
            status
        }
        Err(payload) => {
            let msg = payload
                .downcast_ref::<&str>()
                .map(|s| s.to_string())
                .or_else(|| payload.downcast_ref::<String>().cloned())
                .unwrap_or_else(|| "unknown panic".into());
            set_error(&format!("internal panic: {msg}"));
            GslStatus::Panic
        }
    }
}

unsafe fn path_arg(p: *const c_char) -> Result<String, Fail> {
    if p.is_null() {
        return Err(null("path"));
    }
    CStr::from_ptr(p)
        .to_str()
        .map(str::to_owned)
        .map_err(|_| Fail(GslStatus::InvalidArgument, "path is not valid UTF-8".into()))
}

/// Message of the last failed call on this thread, or an empty string. The
/// pointer stays valid until the next call on the same thread.
#[no_mangle]
pub extern "C" fn gsl_last_error_message() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ptr())
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn gsl_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Loads a checkpoint. On success `*out` owns a new handle.
#[no_mangle]
pub unsafe extern "C" fn gsl_model_load(path: *const c_char, out: *mut *mut GslModel) -> GslStatus {
    guard(|| {
        if out.is_null() {
            return Err(null("out"));
        }
        *out = ptr::null_mut();
        let path = path_arg(path)?;
        let inner = load_checkpoint(path)?;
        *out = Box::into_raw(Box::new(GslModel { inner }));
        Ok(())
    })
}

#[no_mangle]
pub unsafe extern "C" fn gsl_model_free(model: *mut GslModel) {
    if !model.is_null() {
        drop(Box::from_raw(model));
    }
}

/// Surrogate value and first derivatives at query `x` for source `p` (km).
/// `grad_x` and `grad_p` may be null.
#[no_mangle]
pub unsafe extern "C" fn gsl_model_eval(
    model: *const GslModel,
    x: *const f64,
    p: *const f64,
    value: *mut f64,
    grad_x: *mut f64,
    grad_p: *mut f64,
) -> GslStatus {
    guard(|| {
        let model = model.as_ref().ok_or_else(|| null("model"))?;
        if x.is_null() || p.is_null() || value.is_null() {
            return Err(null("x, p or value"));
        }
        let e = model.inner.eval([*x, *x.add(1)], [*p, *p.add(1)])?;
        *value = e.value;
        if !grad_x.is_null() {
            ptr::copy_nonoverlapping(e.grad_x.as_ptr(), grad_x, 2);
        }
        if !grad_p.is_null() {
            ptr::copy_nonoverlapping(e.grad_p.as_ptr(), grad_p, 2);
        }
        Ok(())
    })
}

/// Localizes the source from `n` measurements. `points` holds `2n`
/// interleaved coordinates, `values` holds `n` concentrations.
#[no_mangle]
pub unsafe extern "C" fn gsl_model_localize(
    model: *const GslModel,
    points: *const f64,
    values: *const f64,
    n: usize,
    policy: GslStartPolicy,
    out: *mut GslLocalization,
) -> GslStatus {
    guard(|| {
        let model = model.as_ref().ok_or_else(|| null("model"))?;
        if out.is_null() {
            return Err(null("out"));
        }
        if n == 0 {
            return Err(Fail(GslStatus::InvalidArgument, "no observations".into()));
        }
        if points.is_null() || values.is_null() {
            return Err(null("points or values"));
        }
        let coords = std::slice::from_raw_parts(points, 2 * n);
        let pts = coords.chunks_exact(2).map(|c| [c[0], c[1]]).collect();
        let vals = std::slice::from_raw_parts(values, n).to_vec();
        let obs = ObservationSet::new(pts, vals, 0.0, &model.inner.p_box)?;
        let starts = match policy {
            GslStartPolicy::Grid3 => StartPolicy::Grid3,
            GslStartPolicy::Center => StartPolicy::Center,
        };
        let r = localize(&model.inner, &obs, &starts)?;
        *out = GslLocalization {
            p_hat: r.p_hat,
            objective: r.objective_value,
            iterations: r.iterations,
            starts_tried: r.starts_tried,
            converged: r.converged,
        };
        Ok(())
    })
}

/// Assembles and factors the forward operator on an `n x n` node grid.
#[no_mangle]
pub unsafe extern "C" fn gsl_fem_solver_new(
    n_per_side: usize,
    kappa: f64,
    vx: f64,
    vy: f64,
    out: *mut *mut GslFemSolver,
) -> GslStatus {
    guard(|| {
        if out.is_null() {
            return Err(null("out"));
        }
        *out = ptr::null_mut();
        let inner = ForwardModel::new(n_per_side, kappa, [vx, vy])?;
        *out = Box::into_raw(Box::new(GslFemSolver { inner }));
        Ok(())
    })
}

#[no_mangle]
pub unsafe extern "C" fn gsl_fem_solver_free(solver: *mut GslFemSolver) {
    if !solver.is_null() {
        drop(Box::from_raw(solver));
    }
}

/// Field of a unit point source at `(px, py)`.
#[no_mangle]
pub unsafe extern "C" fn gsl_fem_solve(
    solver: *const GslFemSolver,
    px: f64,
    py: f64,
    out: *mut *mut GslField,
) -> GslStatus {
    guard(|| {
        let solver = solver.as_ref().ok_or_else(|| null("solver"))?;
        if out.is_null() {
            return Err(null("out"));
        }
        *out = ptr::null_mut();
        let inner = solver.inner.solve_source([px, py])?;
        *out = Box::into_raw(Box::new(GslField { inner }));
        Ok(())
    })
}

/// Interpolated value and element gradient at `(x, y)`. `grad` may be null.
#[no_mangle]
pub unsafe extern "C" fn gsl_field_eval(
    field: *const GslField,
    x: f64,
    y: f64,
    value: *mut f64,
    grad: *mut f64,
) -> GslStatus {
    guard(|| {
        let field = field.as_ref().ok_or_else(|| null("field"))?;
        if value.is_null() {
            return Err(null("value"));
        }
        let (v, g) = field.inner.eval([x, y])?;
        *value = v;
        if !grad.is_null() {
            ptr::copy_nonoverlapping(g.as_ptr(), grad, 2);
        }
        Ok(())
    })
}

#[no_mangle]
pub unsafe extern "C" fn gsl_field_free(field: *mut GslField) {
    if !field.is_null() {
        drop(Box::from_raw(field));
    }
}
