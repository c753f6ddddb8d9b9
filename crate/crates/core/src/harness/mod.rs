//! Experiment layer: synthetic measurements, the noise sweep, statistics,
//! charts and the self-check suite.

mod observe;
mod plot;
mod stats;
mod sweep;
pub mod verify;

pub use observe::{make_circle_observations, synthesize_measurements};
pub use plot::{curve_svg, violin_svg};
pub use stats::{summarize_errors, write_summary_csv, ErrorSummary};
pub use sweep::{job_id, run_sweep, run_sweep_with_progress, SweepConfig, SweepReport, SweepRow};

use crate::fem::ForwardModel;
use crate::trainer::{label_dataset, sample_dataset, sample_test_set, TrainConfig, TrainingSample};
use crate::{Rect, Result};

/// Labeled training and test sets from one configuration.
#[derive(Debug, Clone)]
pub struct GeneratedData {
    pub train: Vec<TrainingSample>,
    pub test: Vec<TrainingSample>,
    pub fem_solves: usize,
}

/// Samples and labels both sets on an `mesh_n x mesh_n` grid of nodes.
pub fn generate_data(config: &TrainConfig, mesh_n: usize) -> Result<GeneratedData> {
    config.validate()?;
    let forward = ForwardModel::new(mesh_n, config.kappa, config.velocity)?;
    let train = label_dataset(&sample_dataset(config, &config.p_box, &Rect::UNIT), &forward)?;
    let test = label_dataset(&sample_test_set(config, &config.p_box, &Rect::UNIT), &forward)?;
    Ok(GeneratedData {
        train: train.samples,
        test: test.samples,
        fem_solves: train.fem_solves + test.fem_solves,
    })
}

/// Writes `report` as rows CSV, summary CSV and, when `svg_dir` is given, the
/// violin chart `errors.svg`.
pub fn write_sweep_outputs(
    report: &SweepReport,
    rows_path: &std::path::Path,
    summary_path: &std::path::Path,
    svg_dir: Option<&std::path::Path>,
) -> Result<Vec<ErrorSummary>> {
    report.write_rows_csv(rows_path)?;
    let summary = summarize_errors(report)?;
    write_summary_csv(summary_path, &summary)?;
    if let Some(dir) = svg_dir {
        std::fs::create_dir_all(dir)?;
        std::fs::write(dir.join("errors.svg"), violin_svg(report)?)?;
    }
    Ok(summary)
}
