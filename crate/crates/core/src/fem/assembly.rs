use super::mesh::Mesh;
use super::sparse::SparseOperator;
use crate::{Error, Point, Result};

/// Galerkin P1 matrix of `-kappa * Laplace(u) + velocity . grad(u)` on the
/// interior unknowns. Dirichlet rows and columns are dropped, which is exact
/// for homogeneous boundary data. No upwinding or streamline stabilization.
pub fn assemble_system(mesh: &Mesh, kappa: f64, velocity: [f64; 2]) -> Result<SparseOperator> {
    if !(kappa > 0.0 && kappa.is_finite()) {
        return Err(Error::invalid(format!("diffusivity must be positive, got {kappa}")));
    }
    if !velocity.iter().all(|v| v.is_finite()) {
        return Err(Error::invalid(format!("velocity {velocity:?} is not finite")));
    }

    let mut triplets = Vec::with_capacity(mesh.elements().len() * 9);
    for (e, tri) in mesh.elements().iter().enumerate() {
        let area2 = mesh.signed_area2(e);
        if area2.partial_cmp(&0.0) != Some(std::cmp::Ordering::Greater) {
            return Err(Error::invalid(format!("element {e} is degenerate (2A = {area2:e})")));
        }
        let area = 0.5 * area2;
        let grads = mesh.basis_gradients(e);
        for (a, &test) in tri.iter().enumerate() {
            let Some(row) = mesh.interior_index(test) else {
                continue;
            };
            for (b, &trial) in tri.iter().enumerate() {
                let Some(col) = mesh.interior_index(trial) else {
                    continue;
                };
                let stiffness =
                    kappa * area * (grads[a][0] * grads[b][0] + grads[a][1] * grads[b][1]);
                // int phi_a (v . grad phi_b) = |T| / 3 * v . grad phi_b
                let advection =
                    area / 3.0 * (velocity[0] * grads[b][0] + velocity[1] * grads[b][1]);
                triplets.push((row, col, stiffness + advection));
            }
        }
    }
    SparseOperator::from_triplets(mesh.interior_count(), triplets)
}

/// Weak form of a unit point source at `p` against every nodal basis
/// function, boundary nodes included.
pub fn delta_load_full(mesh: &Mesh, p: Point) -> Result<Vec<f64>> {
    let loc = mesh.locate(p)?;
    let mut load = vec![0.0; mesh.node_count()];
    for (&node, w) in mesh.elements()[loc.element].iter().zip(loc.weights) {
        load[node] += w;
    }
    Ok(load)
}

/// Point-source load restricted to the interior unknowns: entry `i` is
/// `phi_i(p)`.
pub fn assemble_delta_load(mesh: &Mesh, p: Point) -> Result<Vec<f64>> {
    if !p.iter().all(|&v| v > 0.0 && v < 1.0) {
        return Err(Error::invalid(format!(
            "source {p:?} must lie strictly inside the domain"
        )));
    }
    let full = delta_load_full(mesh, p)?;
    Ok(restrict(mesh, &full))
}

/// Load vector `int s phi_i` for a smooth source density, using a degree-4
/// quadrature rule on every triangle.
pub fn assemble_smooth_load(mesh: &Mesh, source: impl Fn(Point) -> f64) -> Vec<f64> {
    let mut full = vec![0.0; mesh.node_count()];
    for (e, tri) in mesh.elements().iter().enumerate() {
        let area = 0.5 * mesh.signed_area2(e);
        let corners = tri.map(|k| mesh.nodes()[k]);
        for &(bary, weight) in super::quadrature::DUNAVANT4.iter() {
            let x = super::quadrature::map_point(&corners, bary);
            let s = source(x) * weight * area;
            for (&node, phi) in tri.iter().zip(bary) {
                full[node] += s * phi;
            }
        }
    }
    restrict(mesh, &full)
}

fn restrict(mesh: &Mesh, full: &[f64]) -> Vec<f64> {
    (0..mesh.interior_count())
        .map(|dof| full[mesh.interior_node(dof)])
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn single_interior_node_pure_diffusion() {
        let mesh = Mesh::new(3).unwrap();
        let op = assemble_system(&mesh, 1.0, [0.0, 0.0]).unwrap();
        assert_eq!(op.dimension(), 1);
        assert!((op.get(0, 0) - 4.0).abs() < 1e-14);

        let op = assemble_system(&mesh, 2.5, [0.0, 0.0]).unwrap();
        assert!((op.get(0, 0) - 10.0).abs() < 1e-14);
    }

    #[test]
    fn pure_diffusion_is_the_five_point_stencil() {
        let mesh = Mesh::new(6).unwrap();
        let op = assemble_system(&mesh, 1.0, [0.0, 0.0]).unwrap();
        let m = 4;
        let center = 1 + m; // interior (1, 1)
        assert!((op.get(center, center) - 4.0).abs() < 1e-13);
        for nb in [center - 1, center + 1, center - m, center + m] {
            assert!((op.get(center, nb) + 1.0).abs() < 1e-13);
        }
        // hypotenuse couplings vanish for right triangles
        assert!(op.get(center, center + m + 1).abs() < 1e-13);
        assert!(op.get(center, center - m - 1).abs() < 1e-13);
    }

    #[test]
    fn symmetric_iff_no_wind() {
        let mesh = Mesh::new(9).unwrap();
        let op = assemble_system(&mesh, 1.0, [0.0, 0.0]).unwrap();
        assert!(op.asymmetry() < 1e-15);
        let op = assemble_system(&mesh, 1.0, [3.0, 3.0]).unwrap();
        assert!(op.asymmetry() > 1e-3);
    }

    #[test]
    fn advection_rows_sum_to_zero() {
        // row sums of C over all nodes vanish because sum_b grad phi_b = 0;
        // an interior row away from the boundary sees every neighbor
        let mesh = Mesh::new(7).unwrap();
        let diff = assemble_system(&mesh, 1.0, [0.0, 0.0]).unwrap();
        let full = assemble_system(&mesh, 1.0, [3.0, -2.0]).unwrap();
        let r = 2 + 5 * 2;
        let sum: f64 = full.row(r).map(|(_, v)| v).sum::<f64>() - diff.row(r).map(|(_, v)| v).sum::<f64>();
        assert!(sum.abs() < 1e-14);
    }

    #[test]
    fn element_peclet_at_default_constants() {
        let mesh = Mesh::new(241).unwrap();
        let speed = (3.0f64).hypot(3.0);
        let peclet = speed * mesh.h() / (2.0 * 1.0);
        assert!((peclet - 0.00884).abs() < 1e-5, "{peclet}");
    }

    #[test]
    fn rejects_bad_coefficients() {
        let mesh = Mesh::new(4).unwrap();
        assert!(assemble_system(&mesh, 0.0, [0.0, 0.0]).is_err());
        assert!(assemble_system(&mesh, -1.0, [0.0, 0.0]).is_err());
        assert!(assemble_system(&mesh, 1.0, [f64::NAN, 0.0]).is_err());
    }

    #[test]
    fn delta_load_partition_and_lagrange() {
        let mesh = Mesh::new(11).unwrap();
        let full = delta_load_full(&mesh, [0.123, 0.789]).unwrap();
        assert!((full.iter().sum::<f64>() - 1.0).abs() < 1e-14);

        let node = mesh.nodes()[3 + 11 * 4];
        let load = assemble_delta_load(&mesh, node).unwrap();
        let dof = mesh.interior_index(3 + 11 * 4).unwrap();
        for (i, &v) in load.iter().enumerate() {
            assert_eq!(v, if i == dof { 1.0 } else { 0.0 });
        }
    }

    #[test]
    fn delta_load_at_barycenter() {
        let mesh = Mesh::new(11).unwrap();
        let h = mesh.h();
        // lower triangle of square (2, 5): (a, b, c)
        let p = [(2.0 + 2.0 / 3.0) * h, (5.0 + 1.0 / 3.0) * h];
        let load = assemble_delta_load(&mesh, p).unwrap();
        let nz: Vec<f64> = load.iter().copied().filter(|v| *v != 0.0).collect();
        assert_eq!(nz.len(), 3);
        for v in nz {
            assert!((v - 1.0 / 3.0).abs() < 1e-12);
        }
    }

    #[test]
    fn delta_load_rejects_boundary_sources() {
        let mesh = Mesh::new(5).unwrap();
        assert!(assemble_delta_load(&mesh, [0.0, 0.5]).is_err());
        assert!(assemble_delta_load(&mesh, [0.5, 1.0]).is_err());
        assert!(assemble_delta_load(&mesh, [1.2, 0.5]).is_err());
    }
}
