use gsl_pgnn::surrogate::{load_checkpoint, save_checkpoint, AdfSpec, MlpParameters, Surrogate, DEFAULT_LAYERS};
use gsl_pgnn::Rect;
use proptest::prelude::*;

const H: f64 = 1e-6;

fn model(seed: u64) -> Surrogate {
    Surrogate::new(MlpParameters::init(&DEFAULT_LAYERS, seed).unwrap())
}

fn rel(a: [f64; 2], b: [f64; 2]) -> f64 {
    let d = (a[0] - b[0]).abs().max((a[1] - b[1]).abs());
    let s = a[0].abs().max(a[1].abs()).max(b[0].abs()).max(b[1].abs());
    if s == 0.0 {
        d
    } else {
        d / s
    }
}

fn fd_x(m: &Surrogate, x: [f64; 2], p: [f64; 2]) -> [f64; 2] {
    let d = |k: usize| {
        let (mut a, mut b) = (x, x);
        a[k] += H;
        b[k] -= H;
        (m.value(a, p) - m.value(b, p)) / (2.0 * H)
    };
    [d(0), d(1)]
}

fn fd_p(m: &Surrogate, x: [f64; 2], p: [f64; 2]) -> [f64; 2] {
    let d = |k: usize| {
        let (mut a, mut b) = (p, p);
        a[k] += H;
        b[k] -= H;
        (m.value(x, a) - m.value(x, b)) / (2.0 * H)
    };
    [d(0), d(1)]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(100))]

    #[test]
    fn spatial_gradient_matches_finite_differences(
        x in prop::array::uniform2(0.01f64..0.99),
        p in prop::array::uniform2(0.35f64..0.65),
        seed in 0u64..4,
    ) {
        let m = model(seed);
        let e = m.eval(x, p).unwrap();
        let err = rel(e.grad_x, fd_x(&m, x, p));
        prop_assert!(err < 1e-6, "rel err {err:e}");
    }

    #[test]
    fn source_gradient_matches_finite_differences(
        x in prop::array::uniform2(0.01f64..0.99),
        p in prop::array::uniform2(0.35f64..0.65),
        seed in 0u64..4,
    ) {
        let m = model(seed);
        let e = m.eval(x, p).unwrap();
        let err = rel(e.grad_p, fd_p(&m, x, p));
        prop_assert!(err < 1e-6, "rel err {err:e}");
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(1000))]

    #[test]
    fn boundary_condition_is_exact(
        t in 0.0f64..=1.0,
        side in 0usize..4,
        p in prop::array::uniform2(0.35f64..0.65),
    ) {
        let x = match side {
            0 => [t, 0.0],
            1 => [1.0, t],
            2 => [t, 1.0],
            _ => [0.0, t],
        };
        let m = model(1);
        let e = m.eval(x, p).unwrap();
        prop_assert_eq!(e.value, 0.0);
        prop_assert_eq!(m.value(x, p), 0.0);
        prop_assert_eq!(e.grad_p, [0.0, 0.0]);
    }
}

#[test]
fn cutoff_reference_values() {
    let adf = AdfSpec::default();
    assert!((adf.eval([0.5, 0.5]).0 - 0.125).abs() < 1e-15);
    assert!((adf.eval([0.25, 0.5]).0 - 3.0 / 28.0).abs() < 1e-15);
    assert_eq!(adf.eval([0.0, 0.3]).0, 0.0);
}

#[test]
fn checkpoint_roundtrip_preserves_outputs() {
    let m = model(21);
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("ck.json");
    save_checkpoint(&m, &path).unwrap();
    let back = load_checkpoint(&path).unwrap();
    for (x, p) in [([0.1, 0.2], [0.4, 0.4]), ([0.77, 0.31], [0.6, 0.5])] {
        assert_eq!(m.eval(x, p).unwrap(), back.eval(x, p).unwrap());
    }
    assert_eq!(back.p_box, Rect::SOURCES);
}

#[test]
fn non_finite_inputs_rejected() {
    let m = model(0);
    assert!(m.eval([f64::NAN, 0.5], [0.5, 0.5]).is_err());
    assert!(m.eval([0.5, 0.5], [0.5, f64::INFINITY]).is_err());
}
