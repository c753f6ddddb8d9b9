//! Physics-guided H1 loss and its exact parameter gradient.
//!
//! For one sample the network is run forward together with its two spatial
//! tangents `dN/dx_1`, `dN/dx_2`. The loss
//!
//! ```text
//! (psi N - u)^2 + sum_d (psi_d N + psi dN/dx_d - g_d)^2
//! ```
//!
//! depends on the parameters through `N` and the tangents, so the reverse
//! pass carries adjoints for the activations and for their tangents. The
//! tangent adjoints pick up the activation curvature `softplus'' =
//! sigmoid * (1 - sigmoid)`, which is where the mixed second derivatives
//! come from.

use super::TrainingSample;
use crate::surrogate::{sigmoid, softplus, MlpParameters, Surrogate};
use crate::{Error, Result};

#[derive(Debug, Default, Clone)]
struct LayerTape {
    input: Vec<f64>,
    t_input: [Vec<f64>; 2],
    slope: Vec<f64>,
    curvature: Vec<f64>,
    t_pre: [Vec<f64>; 2],
    adj_pre: Vec<f64>,
    adj_t_pre: [Vec<f64>; 2],
}

/// Reusable buffers for forward/reverse passes over one network.
#[derive(Debug, Default, Clone)]
pub(crate) struct Tape {
    layers: Vec<LayerTape>,
    adj: Vec<f64>,
    t_adj: [Vec<f64>; 2],
}

impl Tape {
    pub(crate) fn new(params: &MlpParameters) -> Self {
        let layers = (0..params.layer_count())
            .map(|k| {
                let (n_in, n_out) = params.layer_shape(k);
                LayerTape {
                    input: vec![0.0; n_in],
                    t_input: [vec![0.0; n_in], vec![0.0; n_in]],
                    slope: vec![0.0; n_out],
                    curvature: vec![0.0; n_out],
                    t_pre: [vec![0.0; n_out], vec![0.0; n_out]],
                    adj_pre: vec![0.0; n_out],
                    adj_t_pre: [vec![0.0; n_out], vec![0.0; n_out]],
                }
            })
            .collect();
        let widest = params.layer_sizes().iter().copied().max().unwrap_or(1);
        Tape {
            layers,
            adj: vec![0.0; widest],
            t_adj: [vec![0.0; widest], vec![0.0; widest]],
        }
    }

    /// Returns `N(z)` and `dN/dz_0`, `dN/dz_1`.
    fn forward(&mut self, params: &MlpParameters, z: [f64; 4]) -> (f64, [f64; 2]) {
        let last = params.layer_count() - 1;
        let lt = &mut self.layers[0];
        lt.input.copy_from_slice(&z);
        lt.t_input[0].copy_from_slice(&[1.0, 0.0, 0.0, 0.0]);
        lt.t_input[1].copy_from_slice(&[0.0, 1.0, 0.0, 0.0]);

        let mut out = (0.0, [0.0; 2]);
        for k in 0..=last {
            let (n_in, n_out) = params.layer_shape(k);
            let w = params.weights(k);
            let b = params.bias(k);
            let (head, tail) = self.layers.split_at_mut(k + 1);
            let lt = &mut head[k];
            for r in 0..n_out {
                let row = &w[r * n_in..(r + 1) * n_in];
                let mut a = b[r];
                let mut t0 = 0.0;
                let mut t1 = 0.0;
                for c in 0..n_in {
                    a += row[c] * lt.input[c];
                    t0 += row[c] * lt.t_input[0][c];
                    t1 += row[c] * lt.t_input[1][c];
                }
                lt.t_pre[0][r] = t0;
                lt.t_pre[1][r] = t1;
                if k == last {
                    lt.slope[r] = 1.0;
                    lt.curvature[r] = 0.0;
                    out = (a, [t0, t1]);
                } else {
                    let s = sigmoid(a);
                    lt.slope[r] = s;
                    lt.curvature[r] = s * (1.0 - s);
                    let next = &mut tail[0];
                    next.input[r] = softplus(a);
                    next.t_input[0][r] = s * t0;
                    next.t_input[1][r] = s * t1;
                }
            }
        }
        out
    }

    /// Accumulates `grad += d loss / d theta` given the adjoint of the output
    /// `n_bar` and of its two tangents `t_bar`.
    fn backward(&mut self, params: &MlpParameters, n_bar: f64, t_bar: [f64; 2], grad: &mut [f64]) {
        let last = params.layer_count() - 1;
        self.adj[0] = n_bar;
        self.t_adj[0][0] = t_bar[0];
        self.t_adj[1][0] = t_bar[1];

        for k in (0..=last).rev() {
            let (n_in, n_out) = params.layer_shape(k);
            let w = params.weights(k);
            let lt = &mut self.layers[k];

            // adjoints of the pre-activation and of its tangents
            for r in 0..n_out {
                let s = lt.slope[r];
                let c = lt.curvature[r];
                let ta0 = self.t_adj[0][r];
                let ta1 = self.t_adj[1][r];
                lt.adj_pre[r] = self.adj[r] * s + c * (ta0 * lt.t_pre[0][r] + ta1 * lt.t_pre[1][r]);
                lt.adj_t_pre[0][r] = ta0 * s;
                lt.adj_t_pre[1][r] = ta1 * s;
            }

            let gw = &mut grad[params.weight_range(k)];
            for r in 0..n_out {
                let (p, q0, q1) = (lt.adj_pre[r], lt.adj_t_pre[0][r], lt.adj_t_pre[1][r]);
                let row = &mut gw[r * n_in..(r + 1) * n_in];
                for c in 0..n_in {
                    row[c] += p * lt.input[c] + q0 * lt.t_input[0][c] + q1 * lt.t_input[1][c];
                }
            }
            for (g, &p) in grad[params.bias_range(k)].iter_mut().zip(&lt.adj_pre) {
                *g += p;
            }

            if k > 0 {
                self.adj[..n_in].fill(0.0);
                self.t_adj[0][..n_in].fill(0.0);
                self.t_adj[1][..n_in].fill(0.0);
                for r in 0..n_out {
                    let row = &w[r * n_in..(r + 1) * n_in];
                    let (p, q0, q1) = (lt.adj_pre[r], lt.adj_t_pre[0][r], lt.adj_t_pre[1][r]);
                    for c in 0..n_in {
                        self.adj[c] += row[c] * p;
                        self.t_adj[0][c] += row[c] * q0;
                        self.t_adj[1][c] += row[c] * q1;
                    }
                }
            }
        }
    }
}

/// Per-sample residuals `(value, grad_x1, grad_x2)` of the surrogate against
/// the labels.
fn residuals(model: &Surrogate, tape: &mut Tape, s: &TrainingSample) -> ([f64; 3], f64, [f64; 2]) {
    let (psi, dpsi) = model.adf.eval(s.q);
    let (n, tn) = tape.forward(&model.params, [s.q[0], s.q[1], s.p[0], s.p[1]]);
    let r = [
        psi * n - s.u_ref,
        dpsi[0] * n + psi * tn[0] - s.grad_ref[0],
        dpsi[1] * n + psi * tn[1] - s.grad_ref[1],
    ];
    (r, psi, dpsi)
}

/// Loss of a single sample.
pub fn sample_loss(model: &Surrogate, s: &TrainingSample) -> f64 {
    let mut tape = Tape::new(&model.params);
    let (r, ..) = residuals(model, &mut tape, s);
    r.iter().map(|v| v * v).sum()
}

/// Mean H1 loss over `batch` without the gradient.
pub fn pg_loss(model: &Surrogate, batch: &[TrainingSample]) -> Result<f64> {
    if batch.is_empty() {
        return Err(Error::invalid("empty batch"));
    }
    let mut tape = Tape::new(&model.params);
    let mut total = 0.0;
    for (i, s) in batch.iter().enumerate() {
        let (r, ..) = residuals(model, &mut tape, s);
        let l: f64 = r.iter().map(|v| v * v).sum();
        if !l.is_finite() {
            return Err(Error::NonFinite {
                index: i,
                what: format!("H1 loss {l}"),
            });
        }
        total += l;
    }
    Ok(total / batch.len() as f64)
}

/// Mean H1 loss over `batch` and its gradient with respect to every network
/// parameter (flat layout of [`MlpParameters::flat`]).
pub fn pg_loss_and_grad(model: &Surrogate, batch: &[TrainingSample]) -> Result<(f64, Vec<f64>)> {
    let mut grad = vec![0.0; model.params.param_count()];
    let mut tape = Tape::new(&model.params);
    let loss = accumulate(model, batch, &mut tape, &mut grad)?;
    let inv = 1.0 / batch.len() as f64;
    for g in &mut grad {
        *g *= inv;
    }
    Ok((loss, grad))
}

/// Adds the summed (not averaged) per-sample gradients into `grad` and
/// returns the mean loss. Samples are processed in order.
pub(crate) fn accumulate(
    model: &Surrogate,
    batch: &[TrainingSample],
    tape: &mut Tape,
    grad: &mut [f64],
) -> Result<f64> {
    if batch.is_empty() {
        return Err(Error::invalid("empty batch"));
    }
    let mut total = 0.0;
    for (i, s) in batch.iter().enumerate() {
        let (r, psi, dpsi) = residuals(model, tape, s);
        let l: f64 = r.iter().map(|v| v * v).sum();
        if !l.is_finite() {
            return Err(Error::NonFinite {
                index: i,
                what: format!("H1 loss {l}"),
            });
        }
        total += l;
        let n_bar = 2.0 * (r[0] * psi + r[1] * dpsi[0] + r[2] * dpsi[1]);
        let t_bar = [2.0 * r[1] * psi, 2.0 * r[2] * psi];
        tape.backward(&model.params, n_bar, t_bar, grad);
    }
    Ok(total / batch.len() as f64)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::surrogate::{MlpParameters, DEFAULT_LAYERS};

    fn sample(q: [f64; 2], p: [f64; 2]) -> TrainingSample {
        TrainingSample {
            p,
            q,
            u_ref: 0.3,
            grad_ref: [0.5, -1.0],
        }
    }

    #[test]
    fn tape_forward_matches_inference_path() {
        let model = Surrogate::new(MlpParameters::init(&DEFAULT_LAYERS, 5).unwrap());
        let mut tape = Tape::new(&model.params);
        let z = [0.3, 0.8, 0.5, 0.4];
        let (n, t) = tape.forward(&model.params, z);
        let (n2, j) = model.params.eval_with_jacobian(z);
        assert!((n - n2).abs() < 1e-15);
        assert!((t[0] - j[0]).abs() < 1e-15 && (t[1] - j[1]).abs() < 1e-15);
    }

    #[test]
    fn empty_batch_rejected() {
        let model = Surrogate::new(MlpParameters::zeros(&DEFAULT_LAYERS).unwrap());
        assert!(pg_loss_and_grad(&model, &[]).is_err());
    }

    #[test]
    fn non_finite_label_reports_index() {
        let model = Surrogate::new(MlpParameters::init(&DEFAULT_LAYERS, 1).unwrap());
        let mut batch = vec![sample([0.2, 0.2], [0.5, 0.5]); 4];
        batch[2].u_ref = f64::NAN;
        match pg_loss_and_grad(&model, &batch) {
            Err(Error::NonFinite { index, .. }) => assert_eq!(index, 2),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn wide_single_hidden_layer() {
        let model = Surrogate::new(MlpParameters::init(&[4, 80, 1], 2).unwrap());
        let batch = vec![sample([0.2, 0.7], [0.4, 0.6])];
        let (l, g) = pg_loss_and_grad(&model, &batch).unwrap();
        assert!(l.is_finite() && g.iter().all(|v| v.is_finite()));
        assert!(g.iter().any(|v| *v != 0.0));
    }
}
