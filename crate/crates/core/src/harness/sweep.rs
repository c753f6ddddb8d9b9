use std::path::Path;
use std::time::Instant;

use serde::{Deserialize, Serialize};

use super::observe::{make_circle_observations, synthesize_measurements};
use crate::fem::{ForwardModel, KAPPA, MESH_N, VELOCITY};
use crate::geometry::dist;
use crate::inverse::{localize, StartPolicy};
use crate::surrogate::Surrogate;
use crate::{Error, Point, Rect, Result};

fn default_center() -> Point {
    [0.5, 0.5]
}
fn default_radius() -> f64 {
    0.25
}
fn default_n_obs() -> usize {
    100
}
fn default_grid() -> usize {
    18
}
fn default_sigmas() -> Vec<f64> {
    vec![0.0, 0.00625, 0.0125, 0.025]
}
fn default_trials() -> usize {
    1
}
fn default_mesh() -> usize {
    MESH_N
}
fn default_kappa() -> f64 {
    KAPPA
}
fn default_velocity() -> [f64; 2] {
    VELOCITY
}
fn default_p_box() -> Rect {
    Rect::SOURCES
}
fn default_starts() -> String {
    "grid3".into()
}

/// Noise sweep over a grid of true sources.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepConfig {
    #[serde(default = "default_center")]
    pub center: Point,
    #[serde(default = "default_radius")]
    pub radius: f64,
    #[serde(default = "default_n_obs")]
    pub n_obs: usize,
    /// Sources per axis, uniform over `p_box` including its edges.
    #[serde(default = "default_grid")]
    pub grid_n: usize,
    #[serde(default = "default_sigmas")]
    pub sigmas: Vec<f64>,
    #[serde(default)]
    pub noise_seed: u64,
    #[serde(default = "default_trials")]
    pub trials: usize,
    #[serde(default = "default_mesh")]
    pub fem_resolution: usize,
    #[serde(default = "default_kappa")]
    pub kappa: f64,
    #[serde(default = "default_velocity")]
    pub velocity: [f64; 2],
    #[serde(default = "default_p_box")]
    pub p_box: Rect,
    /// `grid3` or `center`.
    #[serde(default = "default_starts")]
    pub starts: String,
}

impl Default for SweepConfig {
    fn default() -> Self {
        serde_json::from_str("{}").expect("defaults deserialize")
    }
}

impl SweepConfig {
    pub fn validate(&self) -> Result<()> {
        if self.grid_n == 0 || self.trials == 0 {
            return Err(Error::invalid("grid_n and trials must be positive"));
        }
        if self.sigmas.is_empty() || self.sigmas.iter().any(|s| !(*s >= 0.0 && s.is_finite())) {
            return Err(Error::invalid(format!("bad noise levels {:?}", self.sigmas)));
        }
        if !Rect::UNIT.contains_strictly(self.p_box.lo) || !Rect::UNIT.contains_strictly(self.p_box.hi) {
            return Err(Error::invalid("p_box must lie strictly inside the domain"));
        }
        self.start_policy()?;
        make_circle_observations(self.center, self.radius, self.n_obs, &self.p_box)?;
        Ok(())
    }

    pub fn start_policy(&self) -> Result<StartPolicy> {
        self.starts.parse()
    }

    pub fn sources(&self) -> Vec<Point> {
        self.p_box.grid(self.grid_n)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path)?;
        let cfg: SweepConfig = serde_json::from_str(&text).map_err(|e| Error::format(path, e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepRow {
    pub sigma: f64,
    pub noise_seed: u64,
    /// Noise sub-stream index of this row.
    pub job: u64,
    pub source_index: usize,
    pub trial: usize,
    pub px_km: f64,
    pub py_km: f64,
    pub phat_x_km: f64,
    pub phat_y_km: f64,
    pub error_m: f64,
    pub objective: f64,
    pub iterations: usize,
    pub converged: bool,
    pub status: String,
    pub runtime_ms: f64,
}

impl SweepRow {
    pub fn is_ok(&self) -> bool {
        self.status == "ok"
    }
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct SweepReport {
    /// Ordered by (sigma index, source index, trial).
    pub rows: Vec<SweepRow>,
    pub fem_solves: usize,
}

impl SweepReport {
    /// Rows CSV; `runtime_ms` is the last column.
    pub fn write_rows_csv(&self, path: impl AsRef<Path>) -> Result<()> {
        let mut w = csv::Writer::from_path(path)?;
        for r in &self.rows {
            w.serialize(r)?;
        }
        w.flush()?;
        Ok(())
    }
}

/// Noise sub-stream of one (source, sigma, trial) cell.
pub fn job_id(source_index: usize, sigma_index: usize, trial: usize, trials: usize) -> u64 {
    ((source_index as u64) << 32) | (sigma_index * trials + trial) as u64
}

pub fn run_sweep(model: &Surrogate, config: &SweepConfig) -> Result<SweepReport> {
    run_sweep_with_progress(model, config, |_, _| {})
}

/// Runs the sweep, calling `progress(done, total)` after every source.
pub fn run_sweep_with_progress(
    model: &Surrogate,
    config: &SweepConfig,
    mut progress: impl FnMut(usize, usize),
) -> Result<SweepReport> {
    config.validate()?;
    if model.p_box != config.p_box {
        return Err(Error::invalid(format!(
            "model was trained for source box {:?}, sweep uses {:?}",
            model.p_box, config.p_box
        )));
    }
    let starts = config.start_policy()?;
    let points = make_circle_observations(config.center, config.radius, config.n_obs, &config.p_box)?;
    let forward = ForwardModel::new(config.fem_resolution, config.kappa, config.velocity)?;
    let sources = config.sources();
    let n_sigma = config.sigmas.len();

    // cells[sigma][source * trials + trial]
    let mut cells: Vec<Vec<Option<SweepRow>>> = vec![vec![None; sources.len() * config.trials]; n_sigma];
    let mut fem_solves = 0;
    for (si, &p) in sources.iter().enumerate() {
        let field = forward.solve_source(p)?;
        fem_solves += 1;
        for (k, &sigma) in config.sigmas.iter().enumerate() {
            for t in 0..config.trials {
                let job = job_id(si, k, t, config.trials);
                let mut row = SweepRow {
                    sigma,
                    noise_seed: config.noise_seed,
                    job,
                    source_index: si,
                    trial: t,
                    px_km: p[0],
                    py_km: p[1],
                    phat_x_km: f64::NAN,
                    phat_y_km: f64::NAN,
                    error_m: f64::NAN,
                    objective: f64::NAN,
                    iterations: 0,
                    converged: false,
                    status: "ok".into(),
                    runtime_ms: 0.0,
                };
                let outcome = synthesize_measurements(&field, &points, sigma, config.noise_seed, job, &config.p_box)
                    .and_then(|obs| {
                        let started = Instant::now();
                        let r = localize(model, &obs, &starts);
                        row.runtime_ms = started.elapsed().as_secs_f64() * 1e3;
                        r
                    });
                match outcome {
                    Ok(r) => {
                        debug_assert!(config.p_box.contains(r.p_hat));
                        row.phat_x_km = r.p_hat[0];
                        row.phat_y_km = r.p_hat[1];
                        row.error_m = dist(p, r.p_hat) * 1e3;
                        row.objective = r.objective_value;
                        row.iterations = r.iterations;
                        row.converged = r.converged;
                    }
                    Err(e) => row.status = format!("error: {e}"),
                }
                cells[k][si * config.trials + t] = Some(row);
            }
        }
        progress(si + 1, sources.len());
    }

    Ok(SweepReport {
        rows: cells.into_iter().flatten().map(|r| r.expect("every cell filled")).collect(),
        fem_solves,
    })
}
