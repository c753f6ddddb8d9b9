use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::{Activation, AdfSpec, MlpParameters, Surrogate};
use crate::{Error, Rect, Result};

pub const CHECKPOINT_VERSION: u64 = 1;

#[derive(Debug, Serialize, Deserialize)]
struct LayerRecord {
    /// Row-major `n_out x n_in`.
    weights: Vec<f64>,
    biases: Vec<f64>,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct CheckpointFile {
    version: u64,
    layer_sizes: Vec<usize>,
    activation: Activation,
    adf_mu: f64,
    domain: [[f64; 2]; 2],
    p_box: [[f64; 2]; 2],
    layers: Vec<LayerRecord>,
}

pub fn save_checkpoint(model: &Surrogate, path: impl AsRef<Path>) -> Result<()> {
    let params = &model.params;
    let file = CheckpointFile {
        version: CHECKPOINT_VERSION,
        layer_sizes: params.layer_sizes().to_vec(),
        activation: params.activation(),
        adf_mu: model.adf.mu,
        domain: model.adf.domain.as_pairs(),
        p_box: model.p_box.as_pairs(),
        layers: (0..params.layer_count())
            .map(|k| LayerRecord {
                weights: params.weights(k).to_vec(),
                biases: params.bias(k).to_vec(),
            })
            .collect(),
    };
    let text = serde_json::to_string_pretty(&file)?;
    fs::write(path, text + "\n")?;
    Ok(())
}

pub fn load_checkpoint(path: impl AsRef<Path>) -> Result<Surrogate> {
    let path = path.as_ref();
    let text = fs::read_to_string(path)?;
    let raw: serde_json::Value = serde_json::from_str(&text)?;
    let version = raw
        .get("version")
        .and_then(serde_json::Value::as_u64)
        .ok_or_else(|| Error::format(path, "missing integer `version` field"))?;
    if version != CHECKPOINT_VERSION {
        return Err(Error::UnsupportedVersion {
            found: version,
            expected: CHECKPOINT_VERSION,
        });
    }
    let file: CheckpointFile =
        serde_json::from_value(raw).map_err(|e| Error::format(path, e.to_string()))?;

    let sizes = &file.layer_sizes;
    if file.layers.len() + 1 != sizes.len() {
        return Err(Error::Shape(format!(
            "{} layer records for declared sizes {sizes:?}",
            file.layers.len()
        )));
    }
    let mut flat = Vec::new();
    for (k, layer) in file.layers.iter().enumerate() {
        let (n_in, n_out) = (sizes[k], sizes[k + 1]);
        if layer.weights.len() != n_in * n_out || layer.biases.len() != n_out {
            return Err(Error::Shape(format!(
                "layer {k} declares {n_out}x{n_in} but stores {} weights and {} biases",
                layer.weights.len(),
                layer.biases.len()
            )));
        }
        flat.extend_from_slice(&layer.weights);
        flat.extend_from_slice(&layer.biases);
    }
    let params = MlpParameters::from_flat(sizes, flat)?;
    let adf = AdfSpec::new(file.adf_mu, Rect::from_pairs(file.domain)?)?;
    let p_box = Rect::from_pairs(file.p_box)?;
    Ok(Surrogate { params, adf, p_box })
}
