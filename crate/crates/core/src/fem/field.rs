use std::path::Path;
use std::sync::Arc;

use super::mesh::Mesh;
use crate::{Error, Point, Result};

/// Piecewise-linear nodal field on a [`Mesh`].
#[derive(Debug, Clone)]
pub struct NodalField {
    mesh: Arc<Mesh>,
    values: Vec<f64>,
    source_position: Option<Point>,
}

impl NodalField {
    /// Wraps per-node values; the boundary must already be zero.
    pub fn new(mesh: Arc<Mesh>, values: Vec<f64>, source_position: Option<Point>) -> Result<Self> {
        if values.len() != mesh.node_count() {
            return Err(Error::Shape(format!(
                "{} nodal values for a mesh with {} nodes",
                values.len(),
                mesh.node_count()
            )));
        }
        if let Some(k) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::Numerical(format!("non-finite nodal value at node {k}")));
        }
        Ok(NodalField {
            mesh,
            values,
            source_position,
        })
    }

    /// Scatters interior unknowns into a full field with zero boundary values.
    pub fn from_interior(mesh: Arc<Mesh>, interior: &[f64], source_position: Option<Point>) -> Result<Self> {
        if interior.len() != mesh.interior_count() {
            return Err(Error::Shape(format!(
                "{} interior values, mesh has {} unknowns",
                interior.len(),
                mesh.interior_count()
            )));
        }
        let mut values = vec![0.0; mesh.node_count()];
        for (dof, &v) in interior.iter().enumerate() {
            values[mesh.interior_node(dof)] = v;
        }
        NodalField::new(mesh, values, source_position)
    }

    /// Nodal interpolant of `g` (not forced to vanish on the boundary).
    pub fn interpolate(mesh: Arc<Mesh>, g: impl Fn(Point) -> f64) -> Result<Self> {
        let values = mesh.nodes().iter().map(|&x| g(x)).collect();
        NodalField::new(mesh, values, None)
    }

    pub fn mesh(&self) -> &Arc<Mesh> {
        &self.mesh
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn source_position(&self) -> Option<Point> {
        self.source_position
    }

    /// Value by barycentric interpolation and the constant P1 gradient of the
    /// containing triangle.
    pub fn eval(&self, x: Point) -> Result<(f64, [f64; 2])> {
        let loc = self.mesh.locate(x)?;
        let tri = self.mesh.elements()[loc.element];
        let grads = self.mesh.basis_gradients(loc.element);
        let mut value = 0.0;
        let mut grad = [0.0; 2];
        for ((&node, w), g) in tri.iter().zip(loc.weights).zip(grads) {
            let u = self.values[node];
            value += w * u;
            grad[0] += u * g[0];
            grad[1] += u * g[1];
        }
        Ok((value, grad))
    }

    pub fn value(&self, x: Point) -> Result<f64> {
        self.eval(x).map(|(v, _)| v)
    }

    /// Writes `x_km,y_km,u` rows in node order.
    pub fn write_csv(&self, path: impl AsRef<Path>) -> Result<()> {
        let mut w = csv::Writer::from_path(path)?;
        w.write_record(["x_km", "y_km", "u"])?;
        for (x, u) in self.mesh.nodes().iter().zip(&self.values) {
            w.write_record([x[0].to_string(), x[1].to_string(), u.to_string()])?;
        }
        w.flush()?;
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn interpolation_reproduces_nodes_and_affine_gradients() {
        let mesh = Arc::new(Mesh::new(9).unwrap());
        let field = NodalField::interpolate(mesh.clone(), |x| x[0] + 2.0 * x[1]).unwrap();
        for (k, &x) in mesh.nodes().iter().enumerate() {
            let (v, _) = field.eval(x).unwrap();
            assert_eq!(v, field.values()[k]);
        }
        for e in 0..mesh.elements().len() {
            let tri = mesh.elements()[e];
            let c = tri.map(|k| mesh.nodes()[k]);
            let x = [(c[0][0] + c[1][0] + c[2][0]) / 3.0, (c[0][1] + c[1][1] + c[2][1]) / 3.0];
            let (_, g) = field.eval(x).unwrap();
            assert!((g[0] - 1.0).abs() < 1e-12 && (g[1] - 2.0).abs() < 1e-12, "{g:?}");
        }
    }

    #[test]
    fn boundary_points_evaluate_to_zero() {
        let mesh = Arc::new(Mesh::new(7).unwrap());
        let interior: Vec<f64> = (0..mesh.interior_count()).map(|i| 1.0 + i as f64).collect();
        let field = NodalField::from_interior(mesh, &interior, None).unwrap();
        for x in [[0.0, 0.37], [1.0, 0.41], [0.77, 0.0], [0.123, 1.0], [1.0, 1.0]] {
            assert_eq!(field.value(x).unwrap(), 0.0, "{x:?}");
        }
        assert!(field.eval([1.01, 0.5]).is_err());
    }

    #[test]
    fn shape_and_finiteness_checked() {
        let mesh = Arc::new(Mesh::new(4).unwrap());
        assert!(NodalField::new(mesh.clone(), vec![0.0; 3], None).is_err());
        let mut v = vec![0.0; 16];
        v[5] = f64::NAN;
        assert!(NodalField::new(mesh, v, None).is_err());
    }
}
