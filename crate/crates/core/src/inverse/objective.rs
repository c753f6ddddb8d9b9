use super::ObservationSet;
use crate::surrogate::Surrogate;
use crate::{Error, Point, Result};

fn check(model: &Surrogate, p: Point) -> Result<()> {
    if !(p.iter().all(|v| v.is_finite()) && model.p_box.contains(p)) {
        return Err(Error::invalid(format!(
            "candidate source {p:?} lies outside the source box"
        )));
    }
    Ok(())
}

/// `J(p) = sum_j (y_j - u(x_j; p))^2` and `grad_p J`.
///
/// Terms are summed in a canonical order, so permuting the observations
/// leaves the result bit-identical.
pub fn objective_and_gradient(model: &Surrogate, obs: &ObservationSet, p: Point) -> Result<(f64, [f64; 2])> {
    check(model, p)?;
    let mut j = 0.0;
    let mut g = [0.0; 2];
    for (x, y) in obs.canonical() {
        let e = model.eval_unchecked(x, p);
        let r = y - e.value;
        j += r * r;
        g[0] -= 2.0 * r * e.grad_p[0];
        g[1] -= 2.0 * r * e.grad_p[1];
    }
    Ok((j, g))
}

pub fn objective(model: &Surrogate, obs: &ObservationSet, p: Point) -> Result<f64> {
    check(model, p)?;
    Ok(obs
        .canonical()
        .map(|(x, y)| {
            let r = y - model.value(x, p);
            r * r
        })
        .sum())
}
