use crate::{Error, Point, Rect, Result};

/// Cutoff `psi` that vanishes exactly on the boundary of a rectangle.
///
/// With the four edge distances `phi_i`, `psi = (sum phi_i^-mu)^(-1/mu)`.
/// This is the R-equivalence composition of the edge distances; it is
/// smooth in the interior and behaves like the distance to the nearest edge
/// close to the boundary.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AdfSpec {
    pub mu: f64,
    pub domain: Rect,
}

impl Default for AdfSpec {
    fn default() -> Self {
        AdfSpec {
            mu: 1.0,
            domain: Rect::UNIT,
        }
    }
}

// (distance, d distance / dx)
fn edges(domain: &Rect, x: Point) -> [(f64, [f64; 2]); 4] {
    [
        (x[0] - domain.lo[0], [1.0, 0.0]),
        (domain.hi[0] - x[0], [-1.0, 0.0]),
        (x[1] - domain.lo[1], [0.0, 1.0]),
        (domain.hi[1] - x[1], [0.0, -1.0]),
    ]
}

impl AdfSpec {
    pub fn new(mu: f64, domain: Rect) -> Result<Self> {
        if !(mu >= 1.0 && mu.is_finite()) {
            return Err(Error::invalid(format!("ADF exponent must be >= 1, got {mu}")));
        }
        Ok(AdfSpec { mu, domain })
    }

    /// `(psi, grad psi)` at `x` in the closed domain.
    ///
    /// On the boundary `psi` is exactly zero and the gradient is its limit
    /// from the interior along the edge normal(s).
    pub fn eval(&self, x: Point) -> (f64, [f64; 2]) {
        let e = edges(&self.domain, x);
        let zero: Vec<&(f64, [f64; 2])> = e.iter().filter(|(d, _)| *d <= 0.0).collect();
        if !zero.is_empty() {
            let k = zero.len() as f64;
            let mut g = [0.0; 2];
            for (_, n) in &zero {
                g[0] += n[0];
                g[1] += n[1];
            }
            let s = k.powf(-1.0 / self.mu) / k;
            return (0.0, [g[0] * s, g[1] * s]);
        }
        let mu = self.mu;
        if mu == 1.0 {
            let sum: f64 = e.iter().map(|(d, _)| 1.0 / d).sum();
            let psi = 1.0 / sum;
            let mut g = [0.0; 2];
            for (d, n) in &e {
                let w = psi * psi / (d * d);
                g[0] += w * n[0];
                g[1] += w * n[1];
            }
            (psi, g)
        } else {
            let sum: f64 = e.iter().map(|(d, _)| d.powf(-mu)).sum();
            let psi = sum.powf(-1.0 / mu);
            let outer = sum.powf(-1.0 / mu - 1.0);
            let mut g = [0.0; 2];
            for (d, n) in &e {
                let w = outer * d.powf(-mu - 1.0);
                g[0] += w * n[0];
                g[1] += w * n[1];
            }
            (psi, g)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn center_value_and_flat_gradient() {
        let (psi, g) = AdfSpec::default().eval([0.5, 0.5]);
        assert_eq!(psi, 0.125);
        assert_eq!(g, [0.0, 0.0]);
    }

    #[test]
    fn hand_evaluated_point() {
        let (psi, _) = AdfSpec::default().eval([0.25, 0.5]);
        assert!((psi - 3.0 / 28.0).abs() < 1e-15);
    }

    #[test]
    fn vanishes_on_boundary() {
        let adf = AdfSpec::default();
        for x in [[0.0, 0.37], [1.0, 0.2], [0.4, 0.0], [0.9, 1.0], [0.0, 0.0], [1.0, 1.0]] {
            let (psi, g) = adf.eval(x);
            assert_eq!(psi, 0.0);
            assert!(g.iter().all(|v| v.is_finite()));
        }
        // inward normal on a flat edge
        assert_eq!(adf.eval([0.0, 0.37]).1, [1.0, 0.0]);
    }

    #[test]
    fn gradient_matches_finite_differences() {
        for mu in [1.0, 2.0, 3.5] {
            let adf = AdfSpec::new(mu, Rect::UNIT).unwrap();
            for x in [[0.2, 0.3], [0.9, 0.6], [0.05, 0.97], [0.5, 0.11]] {
                let (_, g) = adf.eval(x);
                let h = 1e-6;
                for d in 0..2 {
                    let mut xp = x;
                    let mut xm = x;
                    xp[d] += h;
                    xm[d] -= h;
                    let fd = (adf.eval(xp).0 - adf.eval(xm).0) / (2.0 * h);
                    assert!((fd - g[d]).abs() < 1e-8, "mu {mu} x {x:?}: {fd} vs {}", g[d]);
                }
            }
        }
    }

    #[test]
    fn approaches_edge_distance_near_boundary() {
        let (psi, _) = AdfSpec::default().eval([1e-6, 0.5]);
        assert!((psi - 1e-6).abs() < 1e-11);
    }

    #[test]
    fn exponent_below_one_rejected() {
        assert!(AdfSpec::new(0.5, Rect::UNIT).is_err());
        assert!(AdfSpec::new(f64::NAN, Rect::UNIT).is_err());
    }
}
