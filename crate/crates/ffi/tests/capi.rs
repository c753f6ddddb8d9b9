use std::ffi::{CStr, CString};
use std::ptr;

use gsl_pgnn::surrogate::{save_checkpoint, MlpParameters, Surrogate, DEFAULT_LAYERS};
use gsl_pgnn_ffi::*;

fn last_error() -> String {
    unsafe { CStr::from_ptr(gsl_last_error_message()) }.to_string_lossy().into_owned()
}

fn saved_model(dir: &tempfile::TempDir) -> (Surrogate, CString) {
    let model = Surrogate::new(MlpParameters::init(&DEFAULT_LAYERS, 9).unwrap());
    let path = dir.path().join("m.json");
    save_checkpoint(&model, &path).unwrap();
    (model, CString::new(path.to_str().unwrap()).unwrap())
}

#[test]
fn version_string() {
    let v = unsafe { CStr::from_ptr(gsl_version()) }.to_str().unwrap();
    assert_eq!(v, env!("CARGO_PKG_VERSION"));
}

#[test]
fn load_eval_matches_rust() {
    let dir = tempfile::tempdir().unwrap();
    let (model, path) = saved_model(&dir);
    let mut handle: *mut GslModel = ptr::null_mut();
    unsafe {
        assert_eq!(gsl_model_load(path.as_ptr(), &mut handle), GslStatus::Ok);
        assert!(!handle.is_null());
        let (x, p) = ([0.2, 0.8], [0.4, 0.6]);
        let mut value = 0.0;
        let mut gx = [0.0; 2];
        let mut gp = [0.0; 2];
        let st = gsl_model_eval(handle, x.as_ptr(), p.as_ptr(), &mut value, gx.as_mut_ptr(), gp.as_mut_ptr());
        assert_eq!(st, GslStatus::Ok);
        let e = model.eval(x, p).unwrap();
        assert_eq!(value, e.value);
        assert_eq!(gx, e.grad_x);
        assert_eq!(gp, e.grad_p);
        // optional outputs
        let st = gsl_model_eval(handle, x.as_ptr(), p.as_ptr(), &mut value, ptr::null_mut(), ptr::null_mut());
        assert_eq!(st, GslStatus::Ok);
        gsl_model_free(handle);
    }
}

#[test]
fn localize_self_closure() {
    let dir = tempfile::tempdir().unwrap();
    let (model, path) = saved_model(&dir);
    let truth = [0.47, 0.58];
    let mut points = Vec::new();
    let mut values = Vec::new();
    for k in 0..100 {
        let t = std::f64::consts::TAU * k as f64 / 100.0;
        let x = [0.5 + 0.25 * t.cos(), 0.5 + 0.25 * t.sin()];
        points.extend_from_slice(&x);
        values.push(model.value(x, truth));
    }
    unsafe {
        let mut handle = ptr::null_mut();
        assert_eq!(gsl_model_load(path.as_ptr(), &mut handle), GslStatus::Ok);
        let mut out = GslLocalization::default();
        let st = gsl_model_localize(
            handle,
            points.as_ptr(),
            values.as_ptr(),
            values.len(),
            GslStartPolicy::Grid3,
            &mut out,
        );
        assert_eq!(st, GslStatus::Ok, "{}", last_error());
        assert_eq!(out.starts_tried, 9);
        assert!(out.p_hat[0] >= 0.35 && out.p_hat[0] <= 0.65);
        assert!(out.p_hat[1] >= 0.35 && out.p_hat[1] <= 0.65);

        let st = gsl_model_localize(handle, points.as_ptr(), values.as_ptr(), 0, GslStartPolicy::Center, &mut out);
        assert_eq!(st, GslStatus::InvalidArgument);
        gsl_model_free(handle);
    }
}

#[test]
fn errors_are_codes_with_messages() {
    unsafe {
        let mut handle: *mut GslModel = ptr::null_mut();
        assert_eq!(gsl_model_load(ptr::null(), &mut handle), GslStatus::NullPointer);
        assert!(handle.is_null());
        assert!(last_error().contains("null"));

        let missing = CString::new("/nonexistent/model.json").unwrap();
        assert_eq!(gsl_model_load(missing.as_ptr(), &mut handle), GslStatus::Io);
        assert!(!last_error().is_empty());

        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("v.json");
        std::fs::write(&path, r#"{"version": 7}"#).unwrap();
        let c = CString::new(path.to_str().unwrap()).unwrap();
        assert_eq!(gsl_model_load(c.as_ptr(), &mut handle), GslStatus::UnsupportedVersion);

        let mut v = 0.0;
        let x = [0.5, 0.5];
        assert_eq!(
            gsl_model_eval(ptr::null(), x.as_ptr(), x.as_ptr(), &mut v, ptr::null_mut(), ptr::null_mut()),
            GslStatus::NullPointer
        );

        // freeing null is a no-op
        gsl_model_free(ptr::null_mut());
        gsl_fem_solver_free(ptr::null_mut());
        gsl_field_free(ptr::null_mut());
    }
}

#[test]
fn forward_solve_roundtrip() {
    unsafe {
        let mut solver = ptr::null_mut();
        assert_eq!(gsl_fem_solver_new(31, 1.0, 3.0, 3.0, &mut solver), GslStatus::Ok);
        let mut field = ptr::null_mut();
        assert_eq!(gsl_fem_solve(solver, 0.5, 0.5, &mut field), GslStatus::Ok);
        let mut v = -1.0;
        let mut g = [0.0; 2];
        assert_eq!(gsl_field_eval(field, 0.0, 0.3, &mut v, g.as_mut_ptr()), GslStatus::Ok);
        assert_eq!(v, 0.0);
        assert_eq!(gsl_field_eval(field, 0.6, 0.6, &mut v, ptr::null_mut()), GslStatus::Ok);
        assert!(v > 0.0);
        assert_eq!(gsl_field_eval(field, 1.5, 0.6, &mut v, ptr::null_mut()), GslStatus::InvalidArgument);
        let mut on_edge = ptr::null_mut();
        assert_eq!(gsl_fem_solve(solver, 0.0, 0.5, &mut on_edge), GslStatus::InvalidArgument);
        assert!(on_edge.is_null());
        gsl_field_free(field);

        let mut bad = ptr::null_mut();
        assert_eq!(gsl_fem_solver_new(2, 1.0, 0.0, 0.0, &mut bad), GslStatus::InvalidArgument);
        assert!(bad.is_null());
        assert_eq!(gsl_fem_solver_new(11, -1.0, 0.0, 0.0, &mut bad), GslStatus::InvalidArgument);
        gsl_fem_solver_free(solver);
    }
}
