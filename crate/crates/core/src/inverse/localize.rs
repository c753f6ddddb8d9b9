use std::str::FromStr;

use serde::Serialize;

use super::lbfgsb::{minimize_box, BoxProblem, LbfgsbOptions};
use super::objective::{objective, objective_and_gradient};
use super::ObservationSet;
use crate::surrogate::Surrogate;
use crate::{Error, Point, Result};

/// Distance of the outer starts from the faces of the source box, km.
const START_INSET: f64 = 1e-3;

/// Where the quasi-Newton iterations begin.
#[derive(Debug, Clone, PartialEq, Default)]
pub enum StartPolicy {
    /// 3x3 grid over the box, inset from its faces.
    #[default]
    Grid3,
    /// Box center only.
    Center,
    Custom(Vec<Point>),
}

impl FromStr for StartPolicy {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "grid3" => Ok(StartPolicy::Grid3),
            "center" => Ok(StartPolicy::Center),
            other => Err(Error::invalid(format!(
                "unknown start policy `{other}` (expected grid3 or center)"
            ))),
        }
    }
}

impl StartPolicy {
    pub fn points(&self, model: &Surrogate) -> Vec<Point> {
        let b = model.p_box;
        match self {
            StartPolicy::Grid3 => {
                let inner = crate::Rect {
                    lo: [b.lo[0] + START_INSET, b.lo[1] + START_INSET],
                    hi: [b.hi[0] - START_INSET, b.hi[1] - START_INSET],
                };
                inner.grid(3)
            }
            StartPolicy::Center => vec![b.center()],
            StartPolicy::Custom(points) => points.clone(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct StartRecord {
    pub start: Point,
    pub start_objective: f64,
    pub endpoint: Point,
    pub objective: f64,
    pub iterations: usize,
    pub converged: bool,
    pub termination: &'static str,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LocalizationResult {
    pub p_hat: Point,
    /// `J(p_hat)`, evaluated afresh at the returned point.
    pub objective_value: f64,
    pub iterations: usize,
    pub converged: bool,
    pub starts_tried: usize,
    pub starts: Vec<StartRecord>,
}

#[derive(Serialize)]
struct ResultJson<'a> {
    p_hat_km: Point,
    p_hat_m: Point,
    objective: f64,
    iterations: usize,
    converged: bool,
    starts_tried: usize,
    starts: &'a [StartRecord],
}

impl LocalizationResult {
    pub fn to_json(&self) -> Result<String> {
        let doc = ResultJson {
            p_hat_km: self.p_hat,
            p_hat_m: [self.p_hat[0] * 1e3, self.p_hat[1] * 1e3],
            objective: self.objective_value,
            iterations: self.iterations,
            converged: self.converged,
            starts_tried: self.starts_tried,
            starts: &self.starts,
        };
        Ok(serde_json::to_string_pretty(&doc)? + "\n")
    }
}

struct Misfit<'a> {
    model: &'a Surrogate,
    obs: &'a ObservationSet,
    lo: [f64; 2],
    hi: [f64; 2],
}

impl BoxProblem for Misfit<'_> {
    fn dimension(&self) -> usize {
        2
    }

    fn lower(&self) -> &[f64] {
        &self.lo
    }

    fn upper(&self) -> &[f64] {
        &self.hi
    }

    fn value_and_gradient(&mut self, x: &[f64]) -> Result<(f64, Vec<f64>)> {
        let (j, g) = objective_and_gradient(self.model, self.obs, [x[0], x[1]])?;
        Ok((j, g.to_vec()))
    }
}

/// Minimizes the misfit from every start and keeps the endpoint with the
/// smallest objective, ties broken by start order.
pub fn localize(model: &Surrogate, obs: &ObservationSet, starts: &StartPolicy) -> Result<LocalizationResult> {
    localize_with(model, obs, starts, &LbfgsbOptions::default())
}

pub(crate) fn localize_with(
    model: &Surrogate,
    obs: &ObservationSet,
    starts: &StartPolicy,
    opts: &LbfgsbOptions,
) -> Result<LocalizationResult> {
    if obs.is_empty() {
        return Err(Error::invalid("no observations to localize from"));
    }
    let points = starts.points(model);
    if points.is_empty() {
        return Err(Error::invalid("no start points"));
    }
    let mut problem = Misfit {
        model,
        obs,
        lo: model.p_box.lo,
        hi: model.p_box.hi,
    };

    let mut records = Vec::with_capacity(points.len());
    for &start in &points {
        if !start.iter().all(|v| v.is_finite()) {
            return Err(Error::invalid(format!("start point {start:?} is not finite")));
        }
        let start = model.p_box.project(start);
        let start_objective = objective(model, obs, start)?;
        let report = minimize_box(&mut problem, &start, opts)?;
        let endpoint = [report.x[0], report.x[1]];
        records.push(StartRecord {
            start,
            start_objective,
            endpoint,
            objective: report.f,
            iterations: report.iterations,
            converged: report.termination.converged(),
            termination: report.termination.as_str(),
        });
    }

    let best = records
        .iter()
        .enumerate()
        .min_by(|(i, a), (j, b)| a.objective.total_cmp(&b.objective).then(i.cmp(j)))
        .map(|(i, _)| i)
        .expect("at least one start");
    let chosen = &records[best];
    let p_hat = chosen.endpoint;
    let objective_value = objective(model, obs, p_hat)?;
    Ok(LocalizationResult {
        p_hat,
        objective_value,
        iterations: chosen.iterations,
        converged: chosen.converged,
        starts_tried: records.len(),
        starts: records,
    })
}
