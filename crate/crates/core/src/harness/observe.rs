use rand::Rng;
use rand_distr::StandardNormal;

use crate::fem::NodalField;
use crate::inverse::ObservationSet;
use crate::rng::{self, Stream};
use crate::{Error, Point, Rect, Result};

/// `n` points evenly spaced on a circle, the first due east of `center`,
/// running counterclockwise.
///
/// The circle must stay inside the unit square and must not touch the
/// source box.
pub fn make_circle_observations(center: Point, radius: f64, n: usize, p_box: &Rect) -> Result<Vec<Point>> {
    if n == 0 {
        return Err(Error::invalid("need at least one observation point"));
    }
    if !(radius > 0.0 && radius.is_finite() && center.iter().all(|v| v.is_finite())) {
        return Err(Error::invalid(format!("bad circle: center {center:?}, radius {radius}")));
    }
    let u = Rect::UNIT;
    if (0..2).any(|k| center[k] - radius < u.lo[k] || center[k] + radius > u.hi[k]) {
        return Err(Error::invalid(format!(
            "circle of radius {radius} around {center:?} leaves the domain"
        )));
    }
    // the curve meets the closed box iff the nearest and farthest box points
    // straddle the radius
    let mut near = 0.0f64;
    let mut far = 0.0f64;
    for k in 0..2 {
        let d_near = (p_box.lo[k] - center[k]).max(0.0).max(center[k] - p_box.hi[k]);
        let d_far = (center[k] - p_box.lo[k]).abs().max((p_box.hi[k] - center[k]).abs());
        near += d_near * d_near;
        far += d_far * d_far;
    }
    if near.sqrt() <= radius && radius <= far.sqrt() {
        return Err(Error::invalid(format!(
            "circle of radius {radius} around {center:?} intersects the source box"
        )));
    }
    Ok((0..n)
        .map(|k| {
            let t = std::f64::consts::TAU * k as f64 / n as f64;
            [center[0] + radius * t.cos(), center[1] + radius * t.sin()]
        })
        .collect())
}

/// FEM values at `points` plus i.i.d. `N(0, sigma^2)` noise drawn from the
/// measurement stream of (`seed`, `job`). With `sigma = 0` no draw is made.
pub fn synthesize_measurements(
    field: &NodalField,
    points: &[Point],
    sigma: f64,
    seed: u64,
    job: u64,
    p_box: &Rect,
) -> Result<ObservationSet> {
    if !(sigma >= 0.0 && sigma.is_finite()) {
        return Err(Error::invalid(format!("noise sigma {sigma} is invalid")));
    }
    let mut rng = rng::substream(seed, Stream::Noise, job);
    let mut values = Vec::with_capacity(points.len());
    for &x in points {
        let mut y = field.value(x)?;
        if sigma > 0.0 {
            let z: f64 = rng.sample(StandardNormal);
            y += sigma * z;
        }
        values.push(y);
    }
    ObservationSet::new(points.to_vec(), values, sigma, p_box)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn quarter_points() {
        let pts = make_circle_observations([0.5, 0.5], 0.25, 4, &Rect::SOURCES).unwrap();
        let expect = [[0.75, 0.5], [0.5, 0.75], [0.25, 0.5], [0.5, 0.25]];
        for (p, e) in pts.iter().zip(expect) {
            assert!((p[0] - e[0]).abs() < 1e-15 && (p[1] - e[1]).abs() < 1e-15, "{p:?}");
        }
    }

    #[test]
    fn default_circle() {
        let pts = make_circle_observations([0.5, 0.5], 0.25, 100, &Rect::SOURCES).unwrap();
        assert_eq!(pts.len(), 100);
        assert_eq!(pts[0], [0.75, 0.5]);
        for p in &pts {
            assert!(((p[0] - 0.5).hypot(p[1] - 0.5) - 0.25).abs() < 1e-12);
            assert!(!Rect::SOURCES.contains(*p));
        }
    }

    #[test]
    fn diagonal_mirror_symmetry() {
        // with an east start the set is closed under x <-> y when 4 | n
        for n in [4, 8, 36, 100] {
            let pts = make_circle_observations([0.5, 0.5], 0.25, n, &Rect::SOURCES).unwrap();
            for p in &pts {
                let m = [p[1], p[0]];
                assert!(
                    pts.iter().any(|q| (q[0] - m[0]).abs() < 1e-12 && (q[1] - m[1]).abs() < 1e-12),
                    "n={n}: mirror of {p:?} missing"
                );
            }
        }
    }

    #[test]
    fn bad_circles_rejected() {
        let b = Rect::SOURCES;
        // crosses the box
        assert!(make_circle_observations([0.5, 0.5], 0.18, 10, &b).is_err());
        // leaves the domain
        assert!(make_circle_observations([0.5, 0.5], 0.55, 10, &b).is_err());
        // wholly inside the box
        assert!(make_circle_observations([0.5, 0.5], 0.1, 10, &b).is_err());
        // outside and beside the box
        assert!(make_circle_observations([0.15, 0.5], 0.1, 10, &b).is_ok());
        assert!(make_circle_observations([0.2, 0.5], 0.16, 10, &b).is_err());
        assert!(make_circle_observations([0.5, 0.5], 0.25, 0, &b).is_err());
    }
}
