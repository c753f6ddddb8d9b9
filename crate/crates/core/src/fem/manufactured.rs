use std::f64::consts::PI;
use std::sync::Arc;

use super::quadrature::{map_point, DUNAVANT4};
use super::{assemble_smooth_load, ForwardModel, NodalField};
use crate::Result;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ManufacturedErrors {
    pub l2: f64,
    pub linf: f64,
}

fn exact(x: [f64; 2]) -> f64 {
    (PI * x[0]).sin() * (PI * x[1]).sin()
}

/// Solves with the load that makes `sin(pi x) sin(pi y)` the exact solution
/// and reports the L2 (quadrature) and nodal max errors.
pub fn verify_manufactured(kappa: f64, velocity: [f64; 2], n_per_side: usize) -> Result<ManufacturedErrors> {
    let model = ForwardModel::new(n_per_side, kappa, velocity)?;
    let mesh = model.mesh().clone();
    let source = |x: [f64; 2]| {
        let (sx, cx) = (PI * x[0]).sin_cos();
        let (sy, cy) = (PI * x[1]).sin_cos();
        2.0 * PI * PI * kappa * sx * sy + velocity[0] * PI * cx * sy + velocity[1] * PI * sx * cy
    };
    let load = assemble_smooth_load(&mesh, source);
    let interior = model.solve_load(&load)?;
    let field = NodalField::from_interior(Arc::clone(&mesh), &interior, None)?;

    let linf = mesh
        .nodes()
        .iter()
        .zip(field.values())
        .map(|(&x, u)| (u - exact(x)).abs())
        .fold(0.0, f64::max);

    let mut l2 = 0.0;
    for (e, tri) in mesh.elements().iter().enumerate() {
        let area = 0.5 * mesh.signed_area2(e);
        let corners = tri.map(|k| mesh.nodes()[k]);
        let vals = tri.map(|k| field.values()[k]);
        for &(bary, w) in DUNAVANT4.iter() {
            let uh: f64 = vals.iter().zip(bary).map(|(u, b)| u * b).sum();
            let diff = uh - exact(map_point(&corners, bary));
            l2 += w * area * diff * diff;
        }
    }
    Ok(ManufacturedErrors { l2: l2.sqrt(), linf })
}
