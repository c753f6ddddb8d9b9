use crate::Point;

const A: f64 = 0.445_948_490_915_965;
const WA: f64 = 0.223_381_589_678_011;
const B: f64 = 0.091_576_213_509_771;
const WB: f64 = 0.109_951_743_655_322;

/// Six-point degree-4 Dunavant rule: barycentric point and weight, with
/// weights normalized to sum to one.
pub(crate) const DUNAVANT4: [([f64; 3], f64); 6] = [
    ([A, A, 1.0 - 2.0 * A], WA),
    ([A, 1.0 - 2.0 * A, A], WA),
    ([1.0 - 2.0 * A, A, A], WA),
    ([B, B, 1.0 - 2.0 * B], WB),
    ([B, 1.0 - 2.0 * B, B], WB),
    ([1.0 - 2.0 * B, B, B], WB),
];

pub(crate) fn map_point(corners: &[Point; 3], bary: [f64; 3]) -> Point {
    let mut x = [0.0; 2];
    for (c, w) in corners.iter().zip(bary) {
        x[0] += w * c[0];
        x[1] += w * c[1];
    }
    x
}
