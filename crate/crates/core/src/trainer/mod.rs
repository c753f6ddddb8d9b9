//! Reference data generation and surrogate training.

mod adam;
mod dataset;
mod loss;
mod train;

use serde::{Deserialize, Serialize};

pub use adam::Adam;
pub use dataset::{label_dataset, sample_dataset, sample_test_set, LabeledSet, SamplePair, EXCLUSION_RADIUS};
pub use loss::{pg_loss, pg_loss_and_grad, sample_loss};
pub use train::{
    evaluate_test_mse, train, train_with_progress, CurveRecord, TrainOutcome, TrainStatus, TrainingCurve,
};

use crate::surrogate::{AdfSpec, MlpParameters, Surrogate, DEFAULT_LAYERS};
use crate::{Error, Point, Rect, Result};

/// One labeled point: source `p`, query `q`, and the reference value and
/// spatial gradient at `q`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrainingSample {
    pub p: Point,
    pub q: Point,
    pub u_ref: f64,
    pub grad_ref: [f64; 2],
}

fn default_layers() -> Vec<usize> {
    DEFAULT_LAYERS.to_vec()
}
fn default_mu() -> f64 {
    1.0
}
fn default_kappa() -> f64 {
    crate::fem::KAPPA
}
fn default_velocity() -> [f64; 2] {
    crate::fem::VELOCITY
}
fn default_exclusion() -> f64 {
    EXCLUSION_RADIUS
}
fn default_p_box() -> Rect {
    Rect::SOURCES
}

/// Training protocol. Serialized as the `--config` JSON of `gen-data` and
/// `train`; every field has a default.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TrainConfig {
    pub n_sources: usize,
    pub n_queries_per_source: usize,
    pub learning_rate: f64,
    pub epochs: usize,
    pub batch_size: usize,
    pub seed: u64,
    pub test_set_size: usize,
    #[serde(default = "default_layers")]
    pub layer_sizes: Vec<usize>,
    #[serde(default = "default_mu")]
    pub adf_mu: f64,
    #[serde(default = "default_kappa")]
    pub kappa: f64,
    #[serde(default = "default_velocity")]
    pub velocity: [f64; 2],
    #[serde(default = "default_exclusion")]
    pub exclusion_radius: f64,
    #[serde(default = "default_p_box")]
    pub p_box: Rect,
}

impl Default for TrainConfig {
    fn default() -> Self {
        TrainConfig {
            n_sources: 400,
            n_queries_per_source: 200,
            learning_rate: 1e-3,
            epochs: 1500,
            batch_size: 512,
            seed: 0,
            test_set_size: 20_000,
            layer_sizes: default_layers(),
            adf_mu: default_mu(),
            kappa: default_kappa(),
            velocity: default_velocity(),
            exclusion_radius: default_exclusion(),
            p_box: default_p_box(),
        }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<()> {
        let counts = [
            ("n_sources", self.n_sources),
            ("n_queries_per_source", self.n_queries_per_source),
            ("batch_size", self.batch_size),
            ("test_set_size", self.test_set_size),
        ];
        if let Some((name, _)) = counts.iter().find(|(_, v)| *v == 0) {
            return Err(Error::invalid(format!("{name} must be positive")));
        }
        if !(self.learning_rate >= 0.0 && self.learning_rate.is_finite()) {
            return Err(Error::invalid(format!(
                "learning_rate must be non-negative, got {}",
                self.learning_rate
            )));
        }
        if !(self.exclusion_radius >= 0.0 && self.exclusion_radius < 0.5) {
            return Err(Error::invalid("exclusion_radius must lie in [0, 0.5)"));
        }
        if !Rect::UNIT.contains(self.p_box.lo) || !Rect::UNIT.contains(self.p_box.hi) {
            return Err(Error::invalid("p_box must lie inside the unit square"));
        }
        Ok(())
    }

    /// Total number of training pairs.
    pub fn n_training(&self) -> usize {
        self.n_sources * self.n_queries_per_source
    }

    /// Freshly initialized surrogate for this architecture and seed.
    pub fn initial_model(&self) -> Result<Surrogate> {
        let params = MlpParameters::init(&self.layer_sizes, self.seed)?;
        Ok(Surrogate {
            params,
            adf: AdfSpec::new(self.adf_mu, Rect::UNIT)?,
            p_box: self.p_box,
        })
    }

    pub fn load(path: impl AsRef<std::path::Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path)?;
        let cfg: TrainConfig =
            serde_json::from_str(&text).map_err(|e| Error::format(path, e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_match_protocol() {
        let c = TrainConfig::default();
        assert_eq!(c.n_training(), 80_000);
        assert_eq!(c.learning_rate, 1e-3);
        assert_eq!(c.epochs, 1500);
        assert_eq!(c.test_set_size, 20_000);
        c.validate().unwrap();
    }

    #[test]
    fn partial_json_fills_defaults() {
        let c: TrainConfig = serde_json::from_str(r#"{"n_sources": 10, "epochs": 3}"#).unwrap();
        assert_eq!(c.n_sources, 10);
        assert_eq!(c.epochs, 3);
        assert_eq!(c.batch_size, 512);
        assert_eq!(c.layer_sizes, DEFAULT_LAYERS.to_vec());
    }

    #[test]
    fn invalid_configs_rejected() {
        let mut c = TrainConfig::default();
        c.batch_size = 0;
        assert!(c.validate().is_err());
        let mut c = TrainConfig::default();
        c.learning_rate = -1.0;
        assert!(c.validate().is_err());
        assert!(serde_json::from_str::<TrainConfig>(r#"{"n_source": 10}"#).is_err());
    }
}
