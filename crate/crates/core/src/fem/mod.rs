//! P1 finite elements for the steady advection-diffusion problem
//!
//! ```text
//! -kappa * Laplace(u) + v . grad(u) = delta_p   in (0, 1)^2
//!                                 u = 0         on the boundary
//! ```

mod assembly;
mod field;
mod manufactured;
mod mesh;
mod quadrature;
mod sparse;

use std::sync::Arc;

pub use assembly::{assemble_delta_load, assemble_smooth_load, assemble_system, delta_load_full};
pub use field::NodalField;
pub use manufactured::{verify_manufactured, ManufacturedErrors};
pub use mesh::Mesh;
pub use sparse::{bicgstab, BandedLu, KrylovReport, SparseOperator};

use crate::{Error, Point, Result};

/// Default diffusivity, km^2/h.
pub const KAPPA: f64 = 1.0;
/// Default wind, km/h.
pub const VELOCITY: [f64; 2] = [3.0, 3.0];
/// Default nodes per side.
pub const MESH_N: usize = 241;

/// Required relative residual of every linear solve.
pub const SOLVE_TOL: f64 = 1e-10;

const KRYLOV_MAX_ITER: usize = 50_000;

/// Factorizes `op` and solves `op * x = load`, falling back to BiCGSTAB if
/// the factorization breaks down or misses the residual target.
pub fn solve_steady(op: &SparseOperator, load: &[f64]) -> Result<Vec<f64>> {
    let factor = BandedLu::factor(op).ok();
    solve_with(op, factor.as_ref(), load)
}

fn solve_with(op: &SparseOperator, factor: Option<&BandedLu>, load: &[f64]) -> Result<Vec<f64>> {
    if load.len() != op.dimension() {
        return Err(Error::Shape(format!(
            "load has {} entries, operator has dimension {}",
            load.len(),
            op.dimension()
        )));
    }
    if let Some(lu) = factor {
        let mut x = lu.solve(load);
        let mut res = op.relative_residual(&x, load);
        if res > SOLVE_TOL && res.is_finite() {
            // one step of iterative refinement
            let mut ax = vec![0.0; x.len()];
            op.mul_vec(&x, &mut ax);
            let r: Vec<f64> = load.iter().zip(&ax).map(|(b, a)| b - a).collect();
            for (xi, di) in x.iter_mut().zip(lu.solve(&r)) {
                *xi += di;
            }
            res = op.relative_residual(&x, load);
        }
        if res <= SOLVE_TOL {
            return Ok(x);
        }
    }
    let (x, _) = bicgstab(op, load, SOLVE_TOL, KRYLOV_MAX_ITER)?;
    Ok(x)
}

/// Mesh, assembled operator and its factorization, reusable across sources.
///
/// Immutable once built and therefore shareable across threads.
#[derive(Debug, Clone)]
pub struct ForwardModel {
    mesh: Arc<Mesh>,
    kappa: f64,
    velocity: [f64; 2],
    op: SparseOperator,
    factor: Option<BandedLu>,
}

impl ForwardModel {
    pub fn new(n_per_side: usize, kappa: f64, velocity: [f64; 2]) -> Result<Self> {
        let mesh = Arc::new(Mesh::new(n_per_side)?);
        let op = assemble_system(&mesh, kappa, velocity)?;
        let factor = BandedLu::factor(&op).ok();
        Ok(ForwardModel {
            mesh,
            kappa,
            velocity,
            op,
            factor,
        })
    }

    /// Forward model with the default physical constants.
    pub fn standard(n_per_side: usize) -> Result<Self> {
        ForwardModel::new(n_per_side, KAPPA, VELOCITY)
    }

    /// Skips the direct factorization; every solve goes through BiCGSTAB.
    pub fn without_factorization(mut self) -> Self {
        self.factor = None;
        self
    }

    pub fn mesh(&self) -> &Arc<Mesh> {
        &self.mesh
    }

    pub fn operator(&self) -> &SparseOperator {
        &self.op
    }

    pub fn kappa(&self) -> f64 {
        self.kappa
    }

    pub fn velocity(&self) -> [f64; 2] {
        self.velocity
    }

    pub fn is_factored(&self) -> bool {
        self.factor.is_some()
    }

    /// Interior solution for an arbitrary interior load.
    pub fn solve_load(&self, load: &[f64]) -> Result<Vec<f64>> {
        solve_with(&self.op, self.factor.as_ref(), load)
    }

    /// Concentration field of a unit point source at `p`.
    pub fn solve_source(&self, p: Point) -> Result<NodalField> {
        let load = assemble_delta_load(&self.mesh, p)?;
        let interior = self
            .solve_load(&load)
            .map_err(|e| Error::Solver(format!("source {p:?}: {e}")))?;
        NodalField::from_interior(self.mesh.clone(), &interior, Some(p))
    }
}
