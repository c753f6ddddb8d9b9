use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use gsl_pgnn::fem::{ForwardModel, KAPPA, MESH_N, VELOCITY};
use gsl_pgnn::harness::{self, verify, SweepConfig};
use gsl_pgnn::inverse::{localize, StartPolicy};
use gsl_pgnn::surrogate::{load_checkpoint, save_checkpoint};
use gsl_pgnn::trainer::{train_with_progress, TrainConfig, TrainStatus, TrainingCurve};
use gsl_pgnn::{io, Error, Point, Result};

#[derive(Parser)]
#[command(name = "gsl-pgnn", version, about = "Gas source localization with a physics-guided network surrogate")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Sample and FEM-label a training set (and optionally the test set).
    GenData {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: PathBuf,
        /// Also write the held-out test set here.
        #[arg(long)]
        test_out: Option<PathBuf>,
        #[arg(long, default_value_t = MESH_N)]
        mesh_n: usize,
        /// Overrides the seed in the config.
        #[arg(long)]
        seed: Option<u64>,
    },
    /// Fit the surrogate to a labeled data set.
    Train {
        #[arg(long)]
        data: PathBuf,
        #[arg(long)]
        test: PathBuf,
        #[arg(long)]
        config: PathBuf,
        /// Final checkpoint; the best-test-MSE one goes next to it as `<stem>.best.json`.
        #[arg(long)]
        out: PathBuf,
        #[arg(long)]
        curve: Option<PathBuf>,
        /// Print one line per this many epochs (0 = silent).
        #[arg(long, default_value_t = 10)]
        log_every: usize,
    },
    /// Localize a source from a measurement file.
    Solve {
        #[arg(long)]
        model: PathBuf,
        #[arg(long)]
        obs: PathBuf,
        #[arg(long, default_value = "grid3")]
        starts: String,
        #[arg(long)]
        out: PathBuf,
    },
    /// Noise sweep over a grid of sources.
    Sweep {
        #[arg(long)]
        model: PathBuf,
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out_rows: PathBuf,
        #[arg(long)]
        out_summary: PathBuf,
        #[arg(long)]
        svg: Option<PathBuf>,
        /// Training curve CSV to chart alongside the sweep (needs --svg).
        #[arg(long)]
        curve: Option<PathBuf>,
        /// Overrides `trials` in the config.
        #[arg(long)]
        trials: Option<usize>,
    },
    /// Solve the forward problem for one source and dump the nodal field.
    FemSolve {
        #[arg(long, value_parser = parse_point)]
        p: Point,
        #[arg(long)]
        out: PathBuf,
        #[arg(long, default_value_t = MESH_N)]
        mesh_n: usize,
    },
    /// Manufactured-solution and derivative self-checks.
    Verify,
}

fn parse_point(s: &str) -> std::result::Result<Point, String> {
    let parts: Vec<&str> = s.split(',').collect();
    match parts.as_slice() {
        [a, b] => {
            let x = a.trim().parse::<f64>().map_err(|e| e.to_string())?;
            let y = b.trim().parse::<f64>().map_err(|e| e.to_string())?;
            Ok([x, y])
        }
        _ => Err(format!("expected X,Y, got `{s}`")),
    }
}

fn best_path(out: &Path) -> PathBuf {
    let stem = out.file_stem().and_then(|s| s.to_str()).unwrap_or("model");
    out.with_file_name(format!("{stem}.best.json"))
}

fn run(cli: Cli) -> Result<bool> {
    match cli.command {
        Command::GenData {
            config,
            out,
            test_out,
            mesh_n,
            seed,
        } => {
            let mut cfg = TrainConfig::load(&config)?;
            if let Some(s) = seed {
                cfg.seed = s;
            }
            let data = harness::generate_data(&cfg, mesh_n)?;
            io::write_dataset(&out, &data.train)?;
            if let Some(t) = test_out {
                io::write_dataset(&t, &data.test)?;
            }
            eprintln!(
                "wrote {} training and {} test samples ({} FEM solves, n = {mesh_n})",
                data.train.len(),
                data.test.len(),
                data.fem_solves
            );
        }
        Command::Train {
            data,
            test,
            config,
            out,
            curve,
            log_every,
        } => {
            let cfg = TrainConfig::load(&config)?;
            let train_set = io::read_dataset(&data)?;
            let test_set = io::read_dataset(&test)?;
            let model = cfg.initial_model()?;
            let outcome = train_with_progress(model, &train_set, &test_set, &cfg, |r| {
                if log_every > 0 && r.epoch % log_every == 0 {
                    eprintln!(
                        "epoch {:5}  h1 {:.6e}  test mse {:.6e}",
                        r.epoch, r.train_h1_loss, r.test_mse
                    );
                }
            })?;
            save_checkpoint(&outcome.final_model, &out)?;
            save_checkpoint(&outcome.best_model, best_path(&out))?;
            if let Some(c) = curve {
                outcome.curve.write_csv(&c)?;
            }
            eprintln!(
                "best test mse {:.6e} at epoch {}",
                outcome.best_test_mse, outcome.best_epoch
            );
            if let TrainStatus::Diverged { epoch, reason } = outcome.status {
                return Err(Error::Numerical(format!(
                    "training diverged at epoch {epoch}: {reason} (last finite parameters saved)"
                )));
            }
        }
        Command::Solve { model, obs, starts, out } => {
            let model = load_checkpoint(&model)?;
            let policy: StartPolicy = starts.parse()?;
            let obs = io::read_observations(&obs, &model.p_box)?;
            let result = localize(&model, &obs, &policy)?;
            std::fs::write(&out, result.to_json()?)?;
            eprintln!(
                "p_hat = ({:.6}, {:.6}) km, J = {:.6e}, converged = {}",
                result.p_hat[0], result.p_hat[1], result.objective_value, result.converged
            );
        }
        Command::Sweep {
            model,
            config,
            out_rows,
            out_summary,
            svg,
            curve,
            trials,
        } => {
            let model = load_checkpoint(&model)?;
            let mut cfg = SweepConfig::load(&config)?;
            if let Some(t) = trials {
                cfg.trials = t;
                cfg.validate()?;
            }
            let report = harness::run_sweep_with_progress(&model, &cfg, |done, total| {
                if done % 18 == 0 || done == total {
                    eprintln!("{done}/{total} sources");
                }
            })?;
            let summary = harness::write_sweep_outputs(&report, &out_rows, &out_summary, svg.as_deref())?;
            if let (Some(dir), Some(c)) = (svg.as_deref(), curve) {
                let curve = TrainingCurve::read_csv(&c)?;
                std::fs::write(dir.join("training_curve.svg"), harness::curve_svg(&curve)?)?;
            }
            for s in &summary {
                eprintln!(
                    "sigma {:<8} mean {:8.3} m  median {:8.3} m  max {:8.3} m  failures {}",
                    s.sigma, s.mean, s.median, s.max, s.failures
                );
            }
        }
        Command::FemSolve { p, out, mesh_n } => {
            let forward = ForwardModel::new(mesh_n, KAPPA, VELOCITY)?;
            let field = forward.solve_source(p)?;
            field.write_csv(&out)?;
        }
        Command::Verify => {
            let checks = verify::run_verification()?;
            let mut all = true;
            for c in &checks {
                println!("{} {}: {}", if c.passed { "PASS" } else { "FAIL" }, c.name, c.detail);
                all &= c.passed;
            }
            return Ok(all);
        }
    }
    Ok(true)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
