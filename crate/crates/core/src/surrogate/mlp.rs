use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::rng::{self, Stream};
use crate::{Error, Result};

/// Default architecture: `[x; p]` in, four hidden layers of 30, scalar out.
pub const DEFAULT_LAYERS: [usize; 6] = [4, 30, 30, 30, 30, 1];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Activation {
    Softplus,
}

/// `log(1 + e^a)` without overflow.
#[inline]
pub fn softplus(a: f64) -> f64 {
    if a > 0.0 {
        a + (-a).exp().ln_1p()
    } else {
        a.exp().ln_1p()
    }
}

/// Derivative of [`softplus`], the logistic sigmoid.
#[inline]
pub fn sigmoid(a: f64) -> f64 {
    if a >= 0.0 {
        1.0 / (1.0 + (-a).exp())
    } else {
        let e = a.exp();
        e / (1.0 + e)
    }
}

/// Weights and biases of a fully connected network, stored contiguously.
///
/// Layer `k` (0-based) maps `n_k` inputs to `n_{k+1}` outputs; its weight
/// matrix is row-major `n_{k+1} x n_k` and directly followed by its bias.
/// Hidden layers apply the activation, the last layer is affine.
#[derive(Debug, Clone, PartialEq)]
pub struct MlpParameters {
    layer_sizes: Vec<usize>,
    activation: Activation,
    data: Vec<f64>,
    offsets: Vec<usize>,
}

fn validate_sizes(layer_sizes: &[usize]) -> Result<()> {
    if layer_sizes.len() < 2 {
        return Err(Error::Shape(format!(
            "need at least input and output widths, got {layer_sizes:?}"
        )));
    }
    if layer_sizes[0] != 4 || *layer_sizes.last().unwrap() != 1 {
        return Err(Error::Shape(format!(
            "network must map 4 inputs to 1 output, got {layer_sizes:?}"
        )));
    }
    if layer_sizes.contains(&0) {
        return Err(Error::Shape(format!("zero-width layer in {layer_sizes:?}")));
    }
    Ok(())
}

fn layout(layer_sizes: &[usize]) -> (Vec<usize>, usize) {
    let mut offsets = Vec::with_capacity(layer_sizes.len());
    let mut total = 0;
    for w in layer_sizes.windows(2) {
        offsets.push(total);
        total += w[0] * w[1] + w[1];
    }
    offsets.push(total);
    (offsets, total)
}

impl MlpParameters {
    pub fn zeros(layer_sizes: &[usize]) -> Result<Self> {
        validate_sizes(layer_sizes)?;
        let (offsets, total) = layout(layer_sizes);
        Ok(MlpParameters {
            layer_sizes: layer_sizes.to_vec(),
            activation: Activation::Softplus,
            data: vec![0.0; total],
            offsets,
        })
    }

    /// Glorot-uniform weights, zero biases.
    pub fn init(layer_sizes: &[usize], seed: u64) -> Result<Self> {
        let mut params = MlpParameters::zeros(layer_sizes)?;
        let mut rng = rng::stream(seed, Stream::Init);
        for k in 0..params.layer_count() {
            let (n_in, n_out) = params.layer_shape(k);
            let bound = (6.0 / (n_in + n_out) as f64).sqrt();
            for w in params.weights_mut(k) {
                *w = rng.random_range(-bound..bound);
            }
        }
        Ok(params)
    }

    /// Rebuilds parameters from a flat vector in the internal layout.
    pub fn from_flat(layer_sizes: &[usize], flat: Vec<f64>) -> Result<Self> {
        let mut params = MlpParameters::zeros(layer_sizes)?;
        if flat.len() != params.data.len() {
            return Err(Error::Shape(format!(
                "{} parameters supplied, architecture {layer_sizes:?} needs {}",
                flat.len(),
                params.data.len()
            )));
        }
        if flat.iter().any(|v| !v.is_finite()) {
            return Err(Error::invalid("non-finite network parameter"));
        }
        params.data = flat;
        Ok(params)
    }

    pub fn layer_sizes(&self) -> &[usize] {
        &self.layer_sizes
    }

    pub fn activation(&self) -> Activation {
        self.activation
    }

    /// Number of affine layers.
    pub fn layer_count(&self) -> usize {
        self.layer_sizes.len() - 1
    }

    /// `(n_in, n_out)` of layer `k`.
    pub fn layer_shape(&self, k: usize) -> (usize, usize) {
        (self.layer_sizes[k], self.layer_sizes[k + 1])
    }

    pub fn param_count(&self) -> usize {
        self.data.len()
    }

    pub fn flat(&self) -> &[f64] {
        &self.data
    }

    pub fn flat_mut(&mut self) -> &mut [f64] {
        &mut self.data
    }

    pub(crate) fn weight_range(&self, k: usize) -> std::ops::Range<usize> {
        let (n_in, n_out) = self.layer_shape(k);
        self.offsets[k]..self.offsets[k] + n_in * n_out
    }

    pub(crate) fn bias_range(&self, k: usize) -> std::ops::Range<usize> {
        let w = self.weight_range(k);
        w.end..self.offsets[k + 1]
    }

    pub fn weights(&self, k: usize) -> &[f64] {
        &self.data[self.weight_range(k)]
    }

    pub fn bias(&self, k: usize) -> &[f64] {
        &self.data[self.bias_range(k)]
    }

    pub fn weights_mut(&mut self, k: usize) -> &mut [f64] {
        let r = self.weight_range(k);
        &mut self.data[r]
    }

    pub fn bias_mut(&mut self, k: usize) -> &mut [f64] {
        let r = self.bias_range(k);
        &mut self.data[r]
    }

    pub fn is_finite(&self) -> bool {
        self.data.iter().all(|v| v.is_finite())
    }

    /// Network output `N(z)`.
    pub fn eval(&self, z: [f64; 4]) -> f64 {
        let mut l = z.to_vec();
        let last = self.layer_count() - 1;
        for k in 0..=last {
            let (n_in, n_out) = self.layer_shape(k);
            let w = self.weights(k);
            let b = self.bias(k);
            let mut next = Vec::with_capacity(n_out);
            for r in 0..n_out {
                let row = &w[r * n_in..(r + 1) * n_in];
                let mut a = b[r];
                for (w, x) in row.iter().zip(&l) {
                    a += w * x;
                }
                next.push(if k == last { a } else { softplus(a) });
            }
            l = next;
        }
        l[0]
    }

    /// `N(z)` and its gradient with respect to the four inputs, propagated
    /// forward layer by layer.
    pub fn eval_with_jacobian(&self, z: [f64; 4]) -> (f64, [f64; 4]) {
        let mut l = z.to_vec();
        // tangent[i * 4 + d] = d l_i / d z_d
        let mut tangent: Vec<f64> = (0..16).map(|i| if i / 4 == i % 4 { 1.0 } else { 0.0 }).collect();
        let last = self.layer_count() - 1;
        for k in 0..=last {
            let (n_in, n_out) = self.layer_shape(k);
            let w = self.weights(k);
            let b = self.bias(k);
            let mut next = vec![0.0; n_out];
            let mut next_t = vec![0.0; n_out * 4];
            for r in 0..n_out {
                let row = &w[r * n_in..(r + 1) * n_in];
                let mut a = b[r];
                let mut ta = [0.0; 4];
                for (c, &wrc) in row.iter().enumerate() {
                    a += wrc * l[c];
                    let t = &tangent[c * 4..c * 4 + 4];
                    for d in 0..4 {
                        ta[d] += wrc * t[d];
                    }
                }
                let slope = if k == last {
                    next[r] = a;
                    1.0
                } else {
                    next[r] = softplus(a);
                    sigmoid(a)
                };
                for d in 0..4 {
                    next_t[r * 4 + d] = slope * ta[d];
                }
            }
            l = next;
            tangent = next_t;
        }
        (l[0], [tangent[0], tangent[1], tangent[2], tangent[3]])
    }
}
