use std::path::Path;

use rand::seq::SliceRandom;

use super::loss::{accumulate, pg_loss, Tape};
use super::{Adam, TrainConfig, TrainingSample};
use crate::rng::{self, Stream};
use crate::surrogate::Surrogate;
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CurveRecord {
    /// 1-based epoch index.
    pub epoch: usize,
    pub train_h1_loss: f64,
    pub test_mse: f64,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct TrainingCurve {
    pub records: Vec<CurveRecord>,
}

impl TrainingCurve {
    pub fn write_csv(&self, path: impl AsRef<Path>) -> Result<()> {
        let mut w = csv::Writer::from_path(path)?;
        w.write_record(["epoch", "train_h1_loss", "test_mse"])?;
        for r in &self.records {
            w.write_record([r.epoch.to_string(), r.train_h1_loss.to_string(), r.test_mse.to_string()])?;
        }
        w.flush()?;
        Ok(())
    }

    pub fn read_csv(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let rows = crate::io::read_table(path, &["epoch", "train_h1_loss", "test_mse"])?;
        let records = rows
            .into_iter()
            .map(|r| CurveRecord {
                epoch: r[0] as usize,
                train_h1_loss: r[1],
                test_mse: r[2],
            })
            .collect();
        Ok(TrainingCurve { records })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum TrainStatus {
    Completed,
    /// Training stopped at a non-finite loss or update; the final model is
    /// the last finite one.
    Diverged { epoch: usize, reason: String },
}

#[derive(Debug, Clone)]
pub struct TrainOutcome {
    pub final_model: Surrogate,
    pub best_model: Surrogate,
    pub best_epoch: usize,
    pub best_test_mse: f64,
    /// Full-pass H1 loss and test MSE of the starting parameters.
    pub initial_train_h1_loss: f64,
    pub initial_test_mse: f64,
    pub curve: TrainingCurve,
    pub status: TrainStatus,
}

/// Mean squared value error; gradients play no part in the test metric.
pub fn evaluate_test_mse(model: &Surrogate, test_set: &[TrainingSample]) -> f64 {
    if test_set.is_empty() {
        return 0.0;
    }
    let sum: f64 = test_set
        .iter()
        .map(|s| {
            let r = model.value(s.q, s.p) - s.u_ref;
            r * r
        })
        .sum();
    sum / test_set.len() as f64
}

/// Mini-batch Adam on the H1 loss. Batches are reshuffled every epoch from
/// a generator seeded by `config.seed`; gradients are summed in sample
/// order, so the trajectory is a pure function of the inputs.
pub fn train(
    model: Surrogate,
    dataset: &[TrainingSample],
    test_set: &[TrainingSample],
    config: &TrainConfig,
) -> Result<TrainOutcome> {
    train_with_progress(model, dataset, test_set, config, |_| {})
}

pub fn train_with_progress(
    mut model: Surrogate,
    dataset: &[TrainingSample],
    test_set: &[TrainingSample],
    config: &TrainConfig,
    mut progress: impl FnMut(&CurveRecord),
) -> Result<TrainOutcome> {
    config.validate()?;
    if dataset.is_empty() {
        return Err(Error::invalid("empty training set"));
    }
    if test_set.is_empty() {
        return Err(Error::invalid("empty test set"));
    }

    let n_params = model.params.param_count();
    let mut adam = Adam::new(n_params, config.learning_rate);
    let mut tape = Tape::new(&model.params);
    let mut grad = vec![0.0; n_params];
    let mut order: Vec<usize> = (0..dataset.len()).collect();
    let mut shuffle = rng::stream(config.seed, Stream::Shuffle);
    let mut batch = Vec::with_capacity(config.batch_size);

    let mut curve = TrainingCurve::default();
    let mut best_model = model.clone();
    let mut best_epoch = 0;
    let initial_train_h1_loss = pg_loss(&model, dataset)?;
    let initial_test_mse = evaluate_test_mse(&model, test_set);
    let mut best_test_mse = initial_test_mse;
    let mut status = TrainStatus::Completed;

    'epochs: for epoch in 1..=config.epochs {
        order.shuffle(&mut shuffle);
        let mut loss_sum = 0.0;
        for chunk in order.chunks(config.batch_size) {
            batch.clear();
            batch.extend(chunk.iter().map(|&i| dataset[i]));
            grad.fill(0.0);
            let loss = match accumulate(&model, &batch, &mut tape, &mut grad) {
                Ok(l) => l,
                Err(e) => {
                    status = TrainStatus::Diverged { epoch, reason: e.to_string() };
                    break 'epochs;
                }
            };
            let inv = 1.0 / batch.len() as f64;
            grad.iter_mut().for_each(|g| *g *= inv);
            if grad.iter().any(|g| !g.is_finite()) {
                status = TrainStatus::Diverged {
                    epoch,
                    reason: "non-finite parameter gradient".into(),
                };
                break 'epochs;
            }
            let before = model.params.clone();
            adam.step(model.params.flat_mut(), &grad);
            if !model.params.is_finite() {
                model.params = before;
                status = TrainStatus::Diverged {
                    epoch,
                    reason: "non-finite parameter after update".into(),
                };
                break 'epochs;
            }
            loss_sum += loss * batch.len() as f64;
        }

        let record = CurveRecord {
            epoch,
            train_h1_loss: loss_sum / dataset.len() as f64,
            test_mse: evaluate_test_mse(&model, test_set),
        };
        if !(record.train_h1_loss.is_finite() && record.test_mse.is_finite()) {
            status = TrainStatus::Diverged {
                epoch,
                reason: "non-finite epoch metrics".into(),
            };
            break;
        }
        if record.test_mse < best_test_mse {
            best_test_mse = record.test_mse;
            best_epoch = epoch;
            best_model = model.clone();
        }
        progress(&record);
        curve.records.push(record);
    }

    Ok(TrainOutcome {
        final_model: model,
        best_model,
        best_epoch,
        best_test_mse,
        initial_train_h1_loss,
        initial_test_mse,
        curve,
        status,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::surrogate::{MlpParameters, DEFAULT_LAYERS};

    fn toy_set(n: usize, shift: f64) -> Vec<TrainingSample> {
        (0..n)
            .map(|i| {
                let t = i as f64 / n as f64;
                TrainingSample {
                    p: [0.4 + 0.2 * t, 0.5],
                    q: [0.1 + 0.8 * t, 0.9 - 0.7 * t],
                    u_ref: 0.05 * (1.0 + t) + shift,
                    grad_ref: [0.1, -0.2],
                }
            })
            .collect()
    }

    fn small_config() -> TrainConfig {
        TrainConfig {
            epochs: 3,
            batch_size: 8,
            layer_sizes: vec![4, 8, 1],
            ..TrainConfig::default()
        }
    }

    #[test]
    fn zero_learning_rate_keeps_parameters() {
        let cfg = TrainConfig {
            learning_rate: 0.0,
            ..small_config()
        };
        let model = cfg.initial_model().unwrap();
        let out = train(model.clone(), &toy_set(20, 0.0), &toy_set(5, 0.01), &cfg).unwrap();
        assert_eq!(out.final_model, model);
        assert_eq!(out.curve.records.len(), 3);
        assert_eq!(out.best_epoch, 0);
    }

    #[test]
    fn same_seed_same_trajectory() {
        let cfg = small_config();
        let run = || train(cfg.initial_model().unwrap(), &toy_set(30, 0.0), &toy_set(5, 0.0), &cfg).unwrap();
        let (a, b) = (run(), run());
        assert_eq!(a.final_model, b.final_model);
        assert_eq!(a.curve, b.curve);
        let other = TrainConfig { seed: 1, ..cfg.clone() };
        let c = train(other.initial_model().unwrap(), &toy_set(30, 0.0), &toy_set(5, 0.0), &other).unwrap();
        assert_ne!(a.final_model, c.final_model);
    }

    #[test]
    fn test_mse_ignores_gradient_labels_and_order() {
        let model = Surrogate::new(MlpParameters::init(&DEFAULT_LAYERS, 2).unwrap());
        let set = toy_set(17, 0.0);
        let mut wrong = set.clone();
        for s in &mut wrong {
            s.grad_ref = [1e3, -1e3];
        }
        let base = evaluate_test_mse(&model, &set);
        assert_eq!(base, evaluate_test_mse(&model, &wrong));
        let mut rev = set.clone();
        rev.reverse();
        assert!((base - evaluate_test_mse(&model, &rev)).abs() <= 1e-15 * base);
    }

    #[test]
    fn self_labeled_test_set_has_zero_mse() {
        let model = Surrogate::new(MlpParameters::init(&DEFAULT_LAYERS, 2).unwrap());
        let set: Vec<TrainingSample> = toy_set(10, 0.0)
            .into_iter()
            .map(|mut s| {
                s.u_ref = model.value(s.q, s.p);
                s
            })
            .collect();
        assert_eq!(evaluate_test_mse(&model, &set), 0.0);
    }

    #[test]
    fn empty_sets_rejected() {
        let cfg = small_config();
        let m = cfg.initial_model().unwrap();
        assert!(train(m.clone(), &[], &toy_set(3, 0.0), &cfg).is_err());
        assert!(train(m, &toy_set(3, 0.0), &[], &cfg).is_err());
    }

    #[test]
    fn divergence_keeps_last_finite_parameters() {
        let cfg = TrainConfig {
            learning_rate: 1e300,
            ..small_config()
        };
        let out = train(cfg.initial_model().unwrap(), &toy_set(20, 0.0), &toy_set(5, 0.0), &cfg).unwrap();
        assert!(matches!(out.status, TrainStatus::Diverged { epoch: 1, .. }), "{:?}", out.status);
        assert!(out.final_model.params.is_finite());
        assert!(out.best_model.params.is_finite());
    }

    #[test]
    fn curve_csv_roundtrip() {
        let curve = TrainingCurve {
            records: vec![
                CurveRecord {
                    epoch: 1,
                    train_h1_loss: 0.1 + 0.2,
                    test_mse: 1e-7 / 3.0,
                },
                CurveRecord {
                    epoch: 2,
                    train_h1_loss: 0.05,
                    test_mse: 2e-8,
                },
            ],
        };
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("c.csv");
        curve.write_csv(&path).unwrap();
        assert!(std::fs::read_to_string(&path).unwrap().starts_with("epoch,train_h1_loss,test_mse\n"));
        assert_eq!(TrainingCurve::read_csv(&path).unwrap(), curve);
    }
}
