use std::f64::consts::PI;

use gsl_pgnn::fem::{
    assemble_delta_load, assemble_system, delta_load_full, solve_steady, verify_manufactured,
    ForwardModel, Mesh, NodalField,
};
use proptest::prelude::*;

fn max_abs(v: &[f64]) -> f64 {
    v.iter().fold(0.0, |m, x| m.max(x.abs()))
}

#[test]
fn manufactured_solution_converges_second_order() {
    let e61 = verify_manufactured(1.0, [3.0, 3.0], 61).unwrap();
    let e121 = verify_manufactured(1.0, [3.0, 3.0], 121).unwrap();
    let ratio = e61.l2 / e121.l2;
    assert!((3.4..=4.6).contains(&ratio), "ratio {ratio}");
    assert!(e121.linf < e61.linf);

    let e31 = verify_manufactured(1.0, [3.0, 3.0], 31).unwrap();
    let ratio = e31.l2 / e61.l2;
    assert!((3.4..=4.6).contains(&ratio), "ratio {ratio}");
}

#[test]
fn manufactured_solution_pure_diffusion() {
    let a = verify_manufactured(1.0, [0.0, 0.0], 31).unwrap();
    let b = verify_manufactured(1.0, [0.0, 0.0], 61).unwrap();
    let ratio = a.l2 / b.l2;
    assert!((3.4..=4.6).contains(&ratio), "ratio {ratio}");
}

#[test]
fn manufactured_solution_refines_monotonically_at_241() {
    let e121 = verify_manufactured(1.0, [3.0, 3.0], 121).unwrap();
    let e241 = verify_manufactured(1.0, [3.0, 3.0], 241).unwrap();
    assert!(e241.l2 < e121.l2);
}

#[test]
fn centered_pure_diffusion_is_symmetric() {
    let model = ForwardModel::new(61, 1.0, [0.0, 0.0]).unwrap();
    let field = model.solve_source([0.5, 0.5]).unwrap();
    let n = 61;
    let u = field.values();
    let scale = max_abs(u);
    for j in 0..n {
        for i in 0..n {
            let k = i + n * j;
            assert!((u[k] - u[j + n * i]).abs() <= 1e-8 * scale);
            assert!((u[k] - u[(n - 1 - i) + n * j]).abs() <= 1e-8 * scale);
        }
    }
}

#[test]
fn default_configuration_is_nearly_positive() {
    let model = ForwardModel::standard(241).unwrap();
    let field = model.solve_source([0.5, 0.5]).unwrap();
    let min = field.values().iter().copied().fold(f64::INFINITY, f64::min);
    assert!(min >= -1e-6, "min {min}");
    for (k, &b) in field.mesh().boundary_mask().iter().enumerate() {
        if b {
            assert_eq!(field.values()[k], 0.0);
        }
    }
}

#[test]
fn operator_is_nonsymmetric_with_wind() {
    let mesh = Mesh::new(241).unwrap();
    let op = assemble_system(&mesh, 1.0, [3.0, 3.0]).unwrap();
    assert_eq!(op.dimension(), 239 * 239);
    assert!(op.asymmetry() > 0.0);
    let op = assemble_system(&mesh, 1.0, [0.0, 0.0]).unwrap();
    assert!(op.asymmetry() < 1e-14);
}

#[test]
fn krylov_fallback_agrees_with_direct() {
    let direct = ForwardModel::standard(41).unwrap();
    assert!(direct.is_factored());
    let krylov = direct.clone().without_factorization();
    let a = direct.solve_source([0.43, 0.61]).unwrap();
    let b = krylov.solve_source([0.43, 0.61]).unwrap();
    let scale = max_abs(a.values());
    for (x, y) in a.values().iter().zip(b.values()) {
        assert!((x - y).abs() <= 1e-8 * scale);
    }
}

#[test]
fn solve_residual_meets_tolerance() {
    let mesh = Mesh::new(81).unwrap();
    let op = assemble_system(&mesh, 1.0, [3.0, 3.0]).unwrap();
    let load = assemble_delta_load(&mesh, [0.52, 0.47]).unwrap();
    let x = solve_steady(&op, &load).unwrap();
    assert!(op.relative_residual(&x, &load) <= 1e-10);
    assert!(solve_steady(&op, &load[1..]).is_err());
}

#[test]
fn field_export_has_expected_header() {
    let model = ForwardModel::standard(5).unwrap();
    let field = model.solve_source([0.5, 0.5]).unwrap();
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("field.csv");
    field.write_csv(&path).unwrap();
    let text = std::fs::read_to_string(path).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("x_km,y_km,u"));
    assert_eq!(lines.count(), 25);
}

#[test]
fn interpolated_smooth_field_gradients_are_consistent() {
    let mesh = std::sync::Arc::new(Mesh::new(121).unwrap());
    let f = NodalField::interpolate(mesh, |x| (PI * x[0]).sin() * (PI * x[1]).sin()).unwrap();
    let (v, g) = f.eval([0.5, 0.5]).unwrap();
    assert!((v - 1.0).abs() < 1e-12);
    assert!(g[0].abs() < 0.05 && g[1].abs() < 0.05);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(1000))]

    #[test]
    fn delta_load_is_a_partition_of_unity(x in 1e-6f64..1.0 - 1e-6, y in 1e-6f64..1.0 - 1e-6) {
        let mesh = Mesh::new(37).unwrap();
        let load = delta_load_full(&mesh, [x, y]).unwrap();
        prop_assert!((load.iter().sum::<f64>() - 1.0).abs() <= 1e-12);
        prop_assert!(load.iter().all(|&w| w >= -1e-15));
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn solutions_vanish_on_boundary_and_scale_linearly(
        px in 0.36f64..0.64, py in 0.36f64..0.64, alpha in -50.0f64..50.0,
    ) {
        let model = ForwardModel::standard(41).unwrap();
        let field = model.solve_source([px, py]).unwrap();
        for (k, &b) in field.mesh().boundary_mask().iter().enumerate() {
            if b {
                prop_assert_eq!(field.values()[k], 0.0);
            }
        }
        let load = assemble_delta_load(model.mesh(), [px, py]).unwrap();
        let base = model.solve_load(&load).unwrap();
        let scaled_load: Vec<f64> = load.iter().map(|v| alpha * v).collect();
        let scaled = model.solve_load(&scaled_load).unwrap();
        let scale = max_abs(&base) * alpha.abs();
        for (s, b) in scaled.iter().zip(&base) {
            prop_assert!((s - alpha * b).abs() <= 1e-12 * scale.max(f64::MIN_POSITIVE));
        }
    }
}
