//! Self-checks behind the `verify` subcommand: FEM convergence on a
//! manufactured solution and finite-difference checks of every analytic
//! derivative.

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rand::SeedableRng;

use crate::fem::{verify_manufactured, ForwardModel, KAPPA, VELOCITY};
use crate::inverse::{objective_and_gradient, ObservationSet};
use crate::surrogate::{MlpParameters, Surrogate, DEFAULT_LAYERS};
use crate::trainer::{label_dataset, pg_loss, pg_loss_and_grad, sample_dataset, Adam, TrainConfig, TrainingSample};
use crate::{Point, Rect, Result};

/// Step of every central difference below.
pub const FD_STEP: f64 = 1e-6;

#[derive(Debug, Clone, PartialEq)]
pub struct CheckOutcome {
    pub name: String,
    pub passed: bool,
    pub detail: String,
}

fn rel_err(analytic: &[f64], fd: &[f64]) -> f64 {
    let diff = analytic.iter().zip(fd).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
    let scale = analytic.iter().chain(fd).map(|v| v.abs()).fold(0.0, f64::max);
    if scale == 0.0 {
        diff
    } else {
        diff / scale
    }
}

fn point_in(rng: &mut ChaCha8Rng, b: &Rect, inset: f64) -> Point {
    [
        rng.random_range(b.lo[0] + inset..b.hi[0] - inset),
        rng.random_range(b.lo[1] + inset..b.hi[1] - inset),
    ]
}

/// Surrogates used by the derivative checks: a fresh initialization and two
/// perturbed copies.
pub fn check_models(seed: u64) -> Vec<Surrogate> {
    let base = MlpParameters::init(&DEFAULT_LAYERS, seed).expect("default layers");
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x5eed);
    let mut out = vec![Surrogate::new(base.clone())];
    for scale in [0.1, 0.3] {
        let mut p = base.clone();
        for v in p.flat_mut() {
            *v += scale * rng.random_range(-1.0..1.0);
        }
        out.push(Surrogate::new(p));
    }
    out
}

/// Worst relative error of `grad_x` and `grad_p` against central differences
/// over `n` random `(x, p)`.
pub fn surrogate_gradient_error(model: &Surrogate, n: usize, seed: u64) -> (f64, f64) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let (mut ex, mut ep) = (0.0f64, 0.0f64);
    let h = FD_STEP;
    for _ in 0..n {
        let x = point_in(&mut rng, &Rect::UNIT, 0.01);
        let p = point_in(&mut rng, &model.p_box, 0.0);
        let e = model.eval(x, p).expect("finite input");
        let fx: Vec<f64> = (0..2)
            .map(|d| {
                let (mut a, mut b) = (x, x);
                a[d] += h;
                b[d] -= h;
                (model.value(a, p) - model.value(b, p)) / (2.0 * h)
            })
            .collect();
        let fp: Vec<f64> = (0..2)
            .map(|d| {
                let (mut a, mut b) = (p, p);
                a[d] += h;
                b[d] -= h;
                (model.value(x, a) - model.value(x, b)) / (2.0 * h)
            })
            .collect();
        ex = ex.max(rel_err(&e.grad_x, &fx));
        ep = ep.max(rel_err(&e.grad_p, &fp));
    }
    (ex, ep)
}

/// A small FEM-labeled batch for loss checks.
pub fn check_batch(seed: u64) -> Result<Vec<TrainingSample>> {
    let cfg = TrainConfig {
        n_sources: 4,
        n_queries_per_source: 16,
        seed,
        ..TrainConfig::default()
    };
    let pairs = sample_dataset(&cfg, &cfg.p_box, &Rect::UNIT);
    let forward = ForwardModel::new(41, KAPPA, VELOCITY)?;
    Ok(label_dataset(&pairs, &forward)?.samples)
}

/// Worst relative error of the loss gradient along `n_dirs` random unit
/// directions.
pub fn loss_gradient_error(model: &Surrogate, batch: &[TrainingSample], n_dirs: usize, seed: u64) -> Result<f64> {
    let (_, g) = pg_loss_and_grad(model, batch)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut worst = 0.0f64;
    for _ in 0..n_dirs {
        let mut d: Vec<f64> = (0..g.len()).map(|_| rng.random_range(-1.0..1.0)).collect();
        let norm = d.iter().map(|v| v * v).sum::<f64>().sqrt();
        d.iter_mut().for_each(|v| *v /= norm);
        let shifted = |sign: f64| -> Result<f64> {
            let mut m = model.clone();
            for (w, dv) in m.params.flat_mut().iter_mut().zip(&d) {
                *w += sign * FD_STEP * dv;
            }
            pg_loss(&m, batch)
        };
        let fd = (shifted(1.0)? - shifted(-1.0)?) / (2.0 * FD_STEP);
        let analytic: f64 = g.iter().zip(&d).map(|(a, b)| a * b).sum();
        worst = worst.max(rel_err(&[analytic], &[fd]));
    }
    Ok(worst)
}

/// Worst relative error of `grad_p J` over `n` random configurations:
/// surrogate data for one source, slightly perturbed, misfit at another.
pub fn objective_gradient_error(model: &Surrogate, n: usize, seed: u64) -> Result<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut worst = 0.0f64;
    for _ in 0..n {
        let n_obs = rng.random_range(5..40);
        let points: Vec<Point> = (0..n_obs)
            .map(|k| {
                let t = std::f64::consts::TAU * (k as f64 + rng.random_range(0.0..1.0)) / n_obs as f64;
                let r = rng.random_range(0.22..0.45);
                [0.5 + r * t.cos(), 0.5 + r * t.sin()]
            })
            .collect();
        let p_true = point_in(&mut rng, &model.p_box, 0.0);
        let values = points
            .iter()
            .map(|&x| model.value(x, p_true) + rng.random_range(-1e-3..1e-3))
            .collect();
        let obs = ObservationSet::new(points, values, 0.0, &model.p_box)?;
        let p = point_in(&mut rng, &model.p_box, 2.0 * FD_STEP);
        let (_, g) = objective_and_gradient(model, &obs, p)?;
        // central difference of J, summed per observation as (r+ - r-)(r+ + r-)
        let fd: Vec<f64> = (0..2)
            .map(|d| {
                let (mut a, mut b) = (p, p);
                a[d] += FD_STEP;
                b[d] -= FD_STEP;
                let s: f64 = obs
                    .points()
                    .iter()
                    .zip(obs.values())
                    .map(|(&x, &y)| {
                        let (ua, ub) = (model.value(x, a), model.value(x, b));
                        (ub - ua) * ((y - ua) + (y - ub))
                    })
                    .sum();
                s / (2.0 * FD_STEP)
            })
            .collect();
        worst = worst.max(rel_err(&g, &fd));
    }
    Ok(worst)
}

/// Ratio of manufactured-solution L2 errors between two resolutions.
pub fn manufactured_ratio(coarse: usize, fine: usize) -> Result<f64> {
    let a = verify_manufactured(KAPPA, VELOCITY, coarse)?;
    let b = verify_manufactured(KAPPA, VELOCITY, fine)?;
    Ok(a.l2 / b.l2)
}

/// The verify suite: manufactured convergence plus all derivative checks.
pub fn run_verification() -> Result<Vec<CheckOutcome>> {
    let mut out = Vec::new();
    let ratio = manufactured_ratio(61, 121)?;
    out.push(CheckOutcome {
        name: "fem manufactured L2 ratio 61/121".into(),
        passed: (3.4..=4.6).contains(&ratio),
        detail: format!("ratio {ratio:.4}, expected [3.4, 4.6]"),
    });

    let models = check_models(17);
    let (mut ex, mut ep) = (0.0f64, 0.0f64);
    for (i, m) in models.iter().enumerate() {
        let (a, b) = surrogate_gradient_error(m, 100, 100 + i as u64);
        ex = ex.max(a);
        ep = ep.max(b);
    }
    out.push(CheckOutcome {
        name: "surrogate grad_x vs finite differences".into(),
        passed: ex < 1e-6,
        detail: format!("max rel err {ex:.3e} over {} points", 100 * models.len()),
    });
    out.push(CheckOutcome {
        name: "surrogate grad_p vs finite differences".into(),
        passed: ep < 1e-6,
        detail: format!("max rel err {ep:.3e} over {} points", 100 * models.len()),
    });

    let batch = check_batch(3)?;
    let mut snapshots = vec![models[0].clone()];
    let mut m = models[0].clone();
    let mut adam = Adam::new(m.params.param_count(), 1e-2);
    for _ in 0..25 {
        let (_, g) = pg_loss_and_grad(&m, &batch)?;
        adam.step(m.params.flat_mut(), &g);
    }
    snapshots.push(m);
    snapshots.push(models[2].clone());
    let mut el = 0.0f64;
    for (i, s) in snapshots.iter().enumerate() {
        el = el.max(loss_gradient_error(s, &batch, 20, 200 + i as u64)?);
    }
    out.push(CheckOutcome {
        name: "H1 loss parameter gradient vs finite differences".into(),
        passed: el < 1e-5,
        detail: format!("max rel err {el:.3e} over 20 directions at 3 snapshots"),
    });

    let mut ej = 0.0f64;
    for (i, m) in models.iter().enumerate() {
        ej = ej.max(objective_gradient_error(m, 50, 300 + i as u64)?);
    }
    out.push(CheckOutcome {
        name: "misfit grad_p vs finite differences".into(),
        passed: ej < 1e-6,
        detail: format!("max rel err {ej:.3e} over {} configurations", 50 * models.len()),
    });
    Ok(out)
}
