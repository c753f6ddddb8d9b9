//! The network surrogate `u(x; p) = psi(x) * N([x; p])`.

mod adf;
mod checkpoint;
mod mlp;

pub use adf::AdfSpec;
pub use checkpoint::{load_checkpoint, save_checkpoint, CHECKPOINT_VERSION};
pub use mlp::{sigmoid, softplus, Activation, MlpParameters, DEFAULT_LAYERS};

use crate::{Error, Point, Rect, Result};

/// Value and first derivatives of the surrogate at one `(x, p)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SurrogateEval {
    pub value: f64,
    pub grad_x: [f64; 2],
    pub grad_p: [f64; 2],
}

/// Trained (or freshly initialized) surrogate with its boundary cutoff and
/// the admissible source box it was trained on.
#[derive(Debug, Clone, PartialEq)]
pub struct Surrogate {
    pub params: MlpParameters,
    pub adf: AdfSpec,
    pub p_box: Rect,
}

impl Surrogate {
    pub fn new(params: MlpParameters) -> Self {
        Surrogate {
            params,
            adf: AdfSpec::default(),
            p_box: Rect::SOURCES,
        }
    }

    /// Value only.
    pub fn value(&self, x: Point, p: Point) -> f64 {
        let (psi, _) = self.adf.eval(x);
        if psi == 0.0 {
            return 0.0;
        }
        psi * self.params.eval([x[0], x[1], p[0], p[1]])
    }

    pub fn eval(&self, x: Point, p: Point) -> Result<SurrogateEval> {
        if !x.iter().chain(&p).all(|v| v.is_finite()) {
            return Err(Error::invalid(format!("non-finite surrogate input x={x:?} p={p:?}")));
        }
        Ok(self.eval_unchecked(x, p))
    }

    pub(crate) fn eval_unchecked(&self, x: Point, p: Point) -> SurrogateEval {
        let (psi, dpsi) = self.adf.eval(x);
        let (n, jac) = self.params.eval_with_jacobian([x[0], x[1], p[0], p[1]]);
        SurrogateEval {
            value: psi * n,
            grad_x: [dpsi[0] * n + psi * jac[0], dpsi[1] * n + psi * jac[1]],
            grad_p: [psi * jac[2], psi * jac[3]],
        }
    }
}
