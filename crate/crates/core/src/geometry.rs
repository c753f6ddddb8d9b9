use serde::{Deserialize, Serialize};

use crate::{Error, Result};

/// A point in the plane, in kilometers.
pub type Point = [f64; 2];

pub(crate) fn dist(a: Point, b: Point) -> f64 {
    (a[0] - b[0]).hypot(a[1] - b[1])
}

/// Axis-aligned closed rectangle `[lo[0], hi[0]] x [lo[1], hi[1]]` in km.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Rect {
    pub lo: Point,
    pub hi: Point,
}

impl Rect {
    /// The admissible source region `[0.35, 0.65]^2`.
    pub const SOURCES: Rect = Rect {
        lo: [0.35, 0.35],
        hi: [0.65, 0.65],
    };

    /// The spatial domain `[0, 1]^2`.
    pub const UNIT: Rect = Rect {
        lo: [0.0, 0.0],
        hi: [1.0, 1.0],
    };

    pub fn new(lo: Point, hi: Point) -> Result<Self> {
        if !(lo.iter().chain(&hi).all(|v| v.is_finite()) && lo[0] < hi[0] && lo[1] < hi[1]) {
            return Err(Error::invalid(format!("degenerate box {lo:?}..{hi:?}")));
        }
        Ok(Rect { lo, hi })
    }

    pub fn contains(&self, p: Point) -> bool {
        (0..2).all(|k| p[k] >= self.lo[k] && p[k] <= self.hi[k])
    }

    pub fn contains_strictly(&self, p: Point) -> bool {
        (0..2).all(|k| p[k] > self.lo[k] && p[k] < self.hi[k])
    }

    pub fn center(&self) -> Point {
        [
            0.5 * (self.lo[0] + self.hi[0]),
            0.5 * (self.lo[1] + self.hi[1]),
        ]
    }

    pub fn project(&self, p: Point) -> Point {
        [
            p[0].clamp(self.lo[0], self.hi[0]),
            p[1].clamp(self.lo[1], self.hi[1]),
        ]
    }

    /// `n x n` grid including both endpoints on each axis, row-major in y.
    pub fn grid(&self, n: usize) -> Vec<Point> {
        let axis = |k: usize, i: usize| {
            if n == 1 {
                0.5 * (self.lo[k] + self.hi[k])
            } else {
                self.lo[k] + (self.hi[k] - self.lo[k]) * i as f64 / (n - 1) as f64
            }
        };
        (0..n)
            .flat_map(|j| (0..n).map(move |i| (i, j)))
            .map(|(i, j)| [axis(0, i), axis(1, j)])
            .collect()
    }

    pub(crate) fn as_pairs(&self) -> [[f64; 2]; 2] {
        [[self.lo[0], self.hi[0]], [self.lo[1], self.hi[1]]]
    }

    pub(crate) fn from_pairs(pairs: [[f64; 2]; 2]) -> Result<Self> {
        Rect::new([pairs[0][0], pairs[1][0]], [pairs[0][1], pairs[1][1]])
    }
}

impl Default for Rect {
    fn default() -> Self {
        Rect::SOURCES
    }
}
