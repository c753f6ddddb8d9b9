//! Source localization: least-squares misfit of the surrogate against point
//! measurements, minimized over the source box.

mod lbfgsb;
mod localize;
mod objective;

pub use lbfgsb::{minimize_box, BoxProblem, LbfgsbOptions, LbfgsbReport, Termination};
pub use localize::{localize, LocalizationResult, StartPolicy, StartRecord};
pub use objective::{objective, objective_and_gradient};

use crate::{Error, Point, Rect, Result};

/// Measurement locations and values.
#[derive(Debug, Clone, PartialEq)]
pub struct ObservationSet {
    points: Vec<Point>,
    values: Vec<f64>,
    noise_sigma: f64,
    /// Canonical summation order, independent of input order.
    order: Vec<usize>,
}

fn canonical_order(points: &[Point], values: &[f64]) -> Vec<usize> {
    let mut order: Vec<usize> = (0..points.len()).collect();
    order.sort_by(|&a, &b| {
        points[a][0]
            .total_cmp(&points[b][0])
            .then(points[a][1].total_cmp(&points[b][1]))
            .then(values[a].total_cmp(&values[b]))
    });
    order
}

impl ObservationSet {
    /// Validates that all points lie in the unit square and outside `p_box`.
    pub fn new(points: Vec<Point>, values: Vec<f64>, noise_sigma: f64, p_box: &Rect) -> Result<Self> {
        if points.len() != values.len() {
            return Err(Error::Shape(format!(
                "{} observation points but {} values",
                points.len(),
                values.len()
            )));
        }
        if points.is_empty() {
            return Err(Error::invalid("observation set is empty"));
        }
        for (j, (x, y)) in points.iter().zip(&values).enumerate() {
            if !Rect::UNIT.contains(*x) {
                return Err(Error::invalid(format!("observation {j} at {x:?} lies outside the domain")));
            }
            if p_box.contains(*x) {
                return Err(Error::invalid(format!(
                    "observation {j} at {x:?} lies inside the source box"
                )));
            }
            if !y.is_finite() {
                return Err(Error::invalid(format!("observation {j} has non-finite value {y}")));
            }
        }
        if !(noise_sigma >= 0.0 && noise_sigma.is_finite()) {
            return Err(Error::invalid(format!("noise sigma {noise_sigma} is invalid")));
        }
        let order = canonical_order(&points, &values);
        Ok(ObservationSet {
            points,
            values,
            noise_sigma,
            order,
        })
    }

    pub fn points(&self) -> &[Point] {
        &self.points
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn noise_sigma(&self) -> f64 {
        self.noise_sigma
    }

    /// `(point, value)` pairs in canonical order.
    pub(crate) fn canonical(&self) -> impl Iterator<Item = (Point, f64)> + '_ {
        self.order.iter().map(|&j| (self.points[j], self.values[j]))
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    /// Same points and sigma, new values.
    pub fn with_values(&self, values: Vec<f64>) -> Result<Self> {
        if values.len() != self.points.len() {
            return Err(Error::Shape("value count changed".into()));
        }
        let order = canonical_order(&self.points, &values);
        Ok(ObservationSet {
            points: self.points.clone(),
            values,
            noise_sigma: self.noise_sigma,
            order,
        })
    }
}
