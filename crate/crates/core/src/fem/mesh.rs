use crate::{Error, Point, Result};

/// Structured Friedrichs-Keller triangulation of the unit square.
///
/// Nodes are numbered row-major, `k = i + n * j` for the node at
/// `(i * h, j * h)`. Each grid square is split along its lower-left to
/// upper-right diagonal; triangles are stored counterclockwise.
#[derive(Debug, Clone)]
pub struct Mesh {
    n_per_side: usize,
    h: f64,
    nodes: Vec<Point>,
    elements: Vec<[usize; 3]>,
    boundary_mask: Vec<bool>,
}

/// Containing triangle and barycentric weights of a point.
#[derive(Debug, Clone, Copy)]
pub(crate) struct Location {
    pub element: usize,
    pub weights: [f64; 3],
}

impl Mesh {
    pub fn new(n_per_side: usize) -> Result<Self> {
        if n_per_side < 3 {
            return Err(Error::invalid(format!(
                "mesh needs at least 3 nodes per side, got {n_per_side}"
            )));
        }
        let n = n_per_side;
        let m = (n - 1) as f64;
        let h = 1.0 / m;

        let mut nodes = Vec::with_capacity(n * n);
        let mut boundary_mask = Vec::with_capacity(n * n);
        for j in 0..n {
            for i in 0..n {
                nodes.push([i as f64 / m, j as f64 / m]);
                boundary_mask.push(i == 0 || j == 0 || i == n - 1 || j == n - 1);
            }
        }

        let mut elements = Vec::with_capacity(2 * (n - 1) * (n - 1));
        for j in 0..n - 1 {
            for i in 0..n - 1 {
                let a = i + n * j;
                let b = a + 1;
                let c = a + 1 + n;
                let d = a + n;
                elements.push([a, b, c]);
                elements.push([a, c, d]);
            }
        }

        Ok(Mesh {
            n_per_side,
            h,
            nodes,
            elements,
            boundary_mask,
        })
    }

    pub fn n_per_side(&self) -> usize {
        self.n_per_side
    }

    /// Grid spacing in km.
    pub fn h(&self) -> f64 {
        self.h
    }

    pub fn nodes(&self) -> &[Point] {
        &self.nodes
    }

    pub fn elements(&self) -> &[[usize; 3]] {
        &self.elements
    }

    pub fn boundary_mask(&self) -> &[bool] {
        &self.boundary_mask
    }

    pub fn node_count(&self) -> usize {
        self.nodes.len()
    }

    /// Number of interior (unknown) nodes, `(n - 2)^2`.
    pub fn interior_count(&self) -> usize {
        (self.n_per_side - 2) * (self.n_per_side - 2)
    }

    /// Interior unknown index of node `k`, or `None` on the boundary.
    pub fn interior_index(&self, k: usize) -> Option<usize> {
        let n = self.n_per_side;
        let (i, j) = (k % n, k / n);
        if self.boundary_mask[k] {
            None
        } else {
            Some((i - 1) + (n - 2) * (j - 1))
        }
    }

    /// Node index of interior unknown `dof`.
    pub fn interior_node(&self, dof: usize) -> usize {
        let n = self.n_per_side;
        let m = n - 2;
        (dof % m + 1) + n * (dof / m + 1)
    }

    /// Twice the signed area of element `e`.
    pub fn signed_area2(&self, e: usize) -> f64 {
        let [a, b, c] = self.elements[e];
        let (pa, pb, pc) = (self.nodes[a], self.nodes[b], self.nodes[c]);
        (pb[0] - pa[0]) * (pc[1] - pa[1]) - (pc[0] - pa[0]) * (pb[1] - pa[1])
    }

    pub(crate) fn contains(&self, x: Point) -> bool {
        x.iter().all(|v| (0.0..=1.0).contains(v))
    }

    /// Locates `x` in the closed unit square.
    ///
    /// Local coordinates that land within a few ulps of a grid line are
    /// snapped onto it so that node positions reproduce the Lagrange property
    /// exactly.
    pub(crate) fn locate(&self, x: Point) -> Result<Location> {
        if !self.contains(x) {
            return Err(Error::invalid(format!("point {x:?} lies outside the domain")));
        }
        let cells = (self.n_per_side - 1) as f64;
        let last = self.n_per_side - 2;
        let local = |v: f64| {
            let mut g = v * cells;
            let r = g.round();
            if (g - r).abs() <= 8.0 * f64::EPSILON * r.max(1.0) {
                g = r;
            }
            let cell = (g.floor() as usize).min(last);
            (cell, (g - cell as f64).clamp(0.0, 1.0))
        };
        let (i, s) = local(x[0]);
        let (j, t) = local(x[1]);
        let square = i + (self.n_per_side - 1) * j;
        if s >= t {
            // (a, b, c)
            Ok(Location {
                element: 2 * square,
                weights: [1.0 - s, s - t, t],
            })
        } else {
            // (a, c, d)
            Ok(Location {
                element: 2 * square + 1,
                weights: [1.0 - t, s, t - s],
            })
        }
    }

    /// Gradients of the three P1 basis functions on element `e`.
    pub(crate) fn basis_gradients(&self, e: usize) -> [[f64; 2]; 3] {
        let [a, b, c] = self.elements[e];
        let (pa, pb, pc) = (self.nodes[a], self.nodes[b], self.nodes[c]);
        let area2 = self.signed_area2(e);
        [
            [(pb[1] - pc[1]) / area2, (pc[0] - pb[0]) / area2],
            [(pc[1] - pa[1]) / area2, (pa[0] - pc[0]) / area2],
            [(pa[1] - pb[1]) / area2, (pb[0] - pa[0]) / area2],
        ]
    }
}
