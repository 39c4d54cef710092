//! The commands behind the CLI, callable as a library.
//!
//! A run directory holds:
//!
//! ```text
//! config.json          resolved configuration (after overrides)
//! dataset.csv          training set      (+ dataset.meta.json)
//! trajectory.csv       test trajectory   (+ trajectory.meta.json)
//! checkpoint.json      network after training
//! adam_state.json      optimizer state, for --resume
//! train_log.csv        epoch,loss
//! eval.csv             step,t,rel_err on the test trajectory
//! diagnostics.csv      per-case residuals of the structural checks
//! report.json          summary (deterministic)
//! timing.json          wall-clock seconds (not deterministic)
//! ```

use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::time::Instant;

use henonnet_core::datasets::{generate, test_trajectory, Dataset, TestTrajectory};
use henonnet_core::diagnostics::{
    certify_identity_at_zero, certify_separable_field, certify_symplectic, constructive_composition_error, max_error,
    rollout_error, CompositionTable, DiagnosticReport, RolloutPoint, Status,
};
use henonnet_core::layers::{Architecture, FlowMap, PhaseState};
use henonnet_core::oracles::{HarmonicOscillator, Pendulum};
use henonnet_core::sampling::seeded;
use henonnet_core::training::{check_compatible, mse_value, train as run_adam, AdamState};
use henonnet_core::HenonNet;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::config::ExperimentConfig;
use crate::error::{CliError, Result};
use crate::io::{self, Checkpoint};
use crate::{json, objective};

pub const CONFIG_FILE: &str = "config.json";
pub const DATASET_FILE: &str = "dataset.csv";
pub const TRAJECTORY_FILE: &str = "trajectory.csv";
pub const CHECKPOINT_FILE: &str = "checkpoint.json";
pub const ADAM_FILE: &str = "adam_state.json";
pub const LOG_FILE: &str = "train_log.csv";
pub const EVAL_FILE: &str = "eval.csv";
pub const DIAGNOSTICS_FILE: &str = "diagnostics.csv";
pub const REPORT_FILE: &str = "report.json";
pub const TIMING_FILE: &str = "timing.json";

/// Cases per structural check after training.
pub const DIAGNOSTIC_CASES: usize = 20;

/// SHA-256 of the configuration as written to `config.json`.
pub fn config_hash(cfg: &ExperimentConfig) -> String {
    hex::encode(Sha256::digest(json::to_string(cfg).as_bytes()))
}

pub fn make_trajectory(cfg: &ExperimentConfig) -> Result<TestTrajectory> {
    let t = &cfg.test_trajectory;
    Ok(test_trajectory(&cfg.data.system, &cfg.x0(), t.h, t.k, t.t0)?)
}

/// Writes the training set and the test trajectory into `out`.
pub fn gen_data(cfg: &ExperimentConfig, out: &Path) -> Result<(Dataset, TestTrajectory)> {
    cfg.validate()?;
    let dataset = generate(&cfg.data)?;
    let traj = make_trajectory(cfg)?;
    io::write_dataset(&out.join(DATASET_FILE), &dataset)?;
    io::write_trajectory(&out.join(TRAJECTORY_FILE), &traj)?;
    Ok((dataset, traj))
}

/// Reuses `out/dataset.csv` when its sidecar matches the config, otherwise
/// generates and writes a fresh one.
fn load_or_generate(cfg: &ExperimentConfig, out: &Path) -> Result<(Dataset, TestTrajectory)> {
    let path = out.join(DATASET_FILE);
    if path.exists() && io::sidecar_path(&path).exists() {
        let dataset = io::read_dataset(&path)?;
        let traj_path = out.join(TRAJECTORY_FILE);
        if dataset.spec == cfg.data && traj_path.exists() {
            let traj = io::read_trajectory(&traj_path)?;
            let t = &cfg.test_trajectory;
            if traj.x0.to_flat() == t.x0
                && traj.h == t.h
                && traj.k == t.k
                && traj.t0 == t.t0
                && traj.system == cfg.data.system
            {
                return Ok((dataset, traj));
            }
        }
    }
    gen_data(cfg, out)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DiagnosticSummary {
    pub name: String,
    pub status: String,
    pub max_residual: f64,
    pub threshold: f64,
}

impl From<&DiagnosticReport> for DiagnosticSummary {
    fn from(r: &DiagnosticReport) -> Self {
        DiagnosticSummary {
            name: r.name.clone(),
            status: r.status.label().to_string(),
            max_residual: r.max_residual,
            threshold: r.threshold,
        }
    }
}

/// Contents of `report.json`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainReport {
    pub experiment: String,
    pub variant: String,
    pub parameter_count: usize,
    pub config_hash: String,
    pub epochs_run: usize,
    pub total_steps: u64,
    pub initial_loss: Option<f64>,
    /// Loss at the final parameters (after the last update).
    pub final_loss: f64,
    pub max_rel_err: f64,
    /// Steps where the reference state was zero and the error is absolute.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub absolute_error_steps: Vec<usize>,
    pub diagnostics: Vec<DiagnosticSummary>,
    pub checkpoint: PathBuf,
}

#[derive(Debug, Clone)]
pub struct TrainOutcome {
    pub report: TrainReport,
    /// Loss before each update of this invocation.
    pub losses: Vec<f64>,
    pub wall_clock_seconds: f64,
    pub net: HenonNet,
    pub rollout: Vec<RolloutPoint>,
}

#[derive(Debug, Clone, Copy, Default)]
pub struct TrainOptions {
    pub epochs: Option<usize>,
    /// Continue from `checkpoint.json` and `adam_state.json` in the run directory.
    pub resume: bool,
}

/// Trains per `cfg` into `out` and writes every artifact listed in the module docs.
pub fn train(cfg: &ExperimentConfig, out: &Path, opts: TrainOptions) -> Result<TrainOutcome> {
    cfg.validate()?;
    let start = Instant::now();
    std::fs::create_dir_all(out).map_err(|e| CliError::io(out, e))?;
    let (dataset, traj) = load_or_generate(cfg, out)?;
    let arch = cfg.architecture();
    let (mut net, mut adam) = if opts.resume {
        let net = io::read_net(&out.join(CHECKPOINT_FILE))?;
        let adam: AdamState = json::read(&out.join(ADAM_FILE))?;
        if net.architecture() != arch {
            return Err(CliError::config("architecture", "checkpoint does not match the configuration"));
        }
        if adam.first_moment.len() != net.parameter_count() {
            return Err(CliError::parse(out.join(ADAM_FILE), 0, "optimizer state does not match the network"));
        }
        (net, adam)
    } else {
        let net = HenonNet::init(&arch, &mut seeded(cfg.seed))?;
        let adam = AdamState::new(net.parameter_count(), cfg.optimizer.learning_rate);
        (net, adam)
    };
    check_compatible(&net, &dataset)?;
    let epochs = opts.epochs.unwrap_or(cfg.optimizer.epochs);
    let first_epoch = adam.step_count;
    let losses = run_adam(&mut net, &mut adam, epochs, |n| objective::mse_loss(n, &dataset), |_, _| {})?;
    let final_loss = mse_value(&net, &dataset)?;
    if !final_loss.is_finite() {
        return Err(CliError::Numerical {
            epoch: adam.step_count as usize,
            loss: final_loss,
            param_norm: norm(&net.params_flat()),
        });
    }

    json::write(&out.join(CONFIG_FILE), cfg)?;
    io::write_net(&out.join(CHECKPOINT_FILE), &net)?;
    json::write(&out.join(ADAM_FILE), &adam)?;
    io::write_loss_log(&out.join(LOG_FILE), first_epoch, &losses, opts.resume)?;

    let rollout = rollout_error(&net, &traj)?;
    io::write_rollout(&out.join(EVAL_FILE), &rollout)?;
    let reports = structural_checks(std::slice::from_ref(&net), DIAGNOSTIC_CASES, cfg.seed)?;
    io::write_diagnostics(&out.join(DIAGNOSTICS_FILE), &reports)?;

    let initial_loss = if opts.resume {
        io::read_loss_log(&out.join(LOG_FILE))?.first().map(|r| r.1)
    } else {
        losses.first().copied()
    };
    let report = TrainReport {
        experiment: cfg.experiment.tag().into(),
        variant: net.variant().name().into(),
        parameter_count: net.parameter_count(),
        config_hash: config_hash(cfg),
        epochs_run: losses.len(),
        total_steps: adam.step_count,
        initial_loss,
        final_loss,
        max_rel_err: max_error(&rollout),
        absolute_error_steps: rollout.iter().filter(|p| p.absolute).map(|p| p.step).collect(),
        diagnostics: reports.iter().map(DiagnosticSummary::from).collect(),
        checkpoint: PathBuf::from(CHECKPOINT_FILE),
    };
    json::write(&out.join(REPORT_FILE), &report)?;
    let wall_clock_seconds = start.elapsed().as_secs_f64();
    json::write(&out.join(TIMING_FILE), &serde_json::json!({ "wall_clock_seconds": wall_clock_seconds }))?;
    Ok(TrainOutcome { report, losses, wall_clock_seconds, net, rollout })
}

fn norm(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

/// Rollout of a checkpoint (network or oracle adapter) along a stored trajectory.
pub fn eval(checkpoint: &Checkpoint, traj: &TestTrajectory) -> Result<Vec<RolloutPoint>> {
    let map = checkpoint.flow_map()?;
    if map.is_non_autonomous() && !traj.is_non_autonomous() {
        return Err(CliError::config("trajectory", "a NAT network needs a trajectory with a time column"));
    }
    if map.phase_dim() != traj.x0.dim() {
        return Err(CliError::config("trajectory", "dimension does not match the checkpoint"));
    }
    Ok(rollout_error(&map, traj)?)
}

/// Symplecticity, identity at zero step and field separability.
pub fn structural_checks<M: FlowMap>(maps: &[M], n_cases: usize, seed: u64) -> Result<Vec<DiagnosticReport>> {
    Ok(vec![
        certify_symplectic(maps, n_cases, seed)?,
        certify_identity_at_zero(maps, n_cases, seed)?,
        certify_separable_field(maps, n_cases, seed)?,
    ])
}

/// The composition-rate tables run by `diagnose --composition`.
pub fn composition_tables() -> Result<Vec<(&'static str, CompositionTable)>> {
    let harmonic = HarmonicOscillator { d: 1, omega: 1.0 };
    Ok(vec![
        ("harmonic", constructive_composition_error(&harmonic, 1.0, &PhaseState::scalar(0.0, 1.0), &[8, 16, 32, 64])?),
        (
            "pendulum",
            constructive_composition_error(&Pendulum, 0.5, &PhaseState::scalar(1.0, 0.0), &[16, 32, 64, 128])?,
        ),
    ])
}

/// `variant:layers:width:d`, e.g. `T:5:30:1`.
pub fn parse_fresh(spec: &str) -> Result<Architecture> {
    let parts: Vec<&str> = spec.split(':').collect();
    let bad = || CliError::config("--fresh", format!("expected variant:layers:width:d, got `{spec}`"));
    if parts.len() != 4 {
        return Err(bad());
    }
    let variant = henonnet_core::Variant::parse(parts[0])
        .ok_or_else(|| CliError::config("--fresh", format!("unknown variant `{}`", parts[0])))?;
    let num = |s: &str| s.parse::<usize>().ok().filter(|v| *v > 0).ok_or_else(bad);
    Ok(Architecture::new(variant, num(parts[3])?, num(parts[1])?, num(parts[2])?))
}

pub fn format_reports(reports: &[DiagnosticReport]) -> String {
    let mut s = String::new();
    for r in reports {
        let _ = writeln!(
            s,
            "{:<18} {:<15} max residual {:.3e}  threshold {:.0e}  ({} cases)",
            r.name,
            r.status.label(),
            r.max_residual,
            r.threshold,
            r.cases.len()
        );
    }
    s
}

pub fn format_composition(name: &str, table: &CompositionTable) -> String {
    let mut s = format!("composition {name}, h = {}\n{:>6} {:>12} {:>8}\n", table.h, "m", "error", "ratio");
    for row in &table.rows {
        let ratio = row.ratio.map(|r| format!("{r:.3}")).unwrap_or_else(|| "-".into());
        let _ = writeln!(s, "{:>6} {:>12.4e} {:>8}", row.m, row.error, ratio);
    }
    s
}

pub fn any_failed(reports: &[DiagnosticReport]) -> bool {
    reports.iter().any(|r| r.status == Status::Fail)
}

/// Summary of one run directory; missing artifacts are listed, not fatal.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct RunSummary {
    pub dir: PathBuf,
    pub report: Option<TrainReport>,
    pub final_logged_loss: Option<f64>,
    pub logged_epochs: Option<usize>,
    pub max_rel_err: Option<f64>,
    pub rollout: Option<Vec<(usize, Option<f64>, f64)>>,
    pub gaps: Vec<String>,
}

fn optional<T>(path: &Path, gaps: &mut Vec<String>, read: impl FnOnce(&Path) -> Result<T>) -> Result<Option<T>> {
    match read(path) {
        Ok(v) => Ok(Some(v)),
        Err(CliError::Missing(p)) => {
            gaps.push(format!("missing {}", p.display()));
            Ok(None)
        }
        Err(e) => Err(e),
    }
}

pub fn summarize(dir: &Path) -> Result<RunSummary> {
    if !dir.is_dir() {
        return Err(CliError::Missing(dir.to_path_buf()));
    }
    let mut gaps = Vec::new();
    let report: Option<TrainReport> = optional(&dir.join(REPORT_FILE), &mut gaps, json::read)?;
    let log = optional(&dir.join(LOG_FILE), &mut gaps, io::read_loss_log)?;
    let rollout = optional(&dir.join(EVAL_FILE), &mut gaps, io::read_rollout)?;
    let max_rel_err = rollout.as_ref().map(|r| {
        r.iter().map(|p| p.2).fold(0.0, |a: f64, b| if a.is_nan() || b.is_nan() { f64::NAN } else { a.max(b) })
    });
    Ok(RunSummary {
        dir: dir.to_path_buf(),
        final_logged_loss: log.as_ref().and_then(|l| l.last().map(|r| r.1)),
        logged_epochs: log.as_ref().map(Vec::len),
        report,
        max_rel_err,
        rollout,
        gaps,
    })
}

pub fn format_summary(s: &RunSummary) -> String {
    let mut out = format!("run {}\n", s.dir.display());
    let show = |v: Option<f64>| v.map(|x| format!("{x:.6e}")).unwrap_or_else(|| "n/a".into());
    if let Some(r) = &s.report {
        let _ = writeln!(
            out,
            "  experiment        {} ({} network, {} parameters)",
            r.experiment, r.variant, r.parameter_count
        );
        let _ = writeln!(out, "  config hash       {}", r.config_hash);
        let _ = writeln!(out, "  optimizer steps   {}", r.total_steps);
        let _ = writeln!(out, "  initial loss      {}", show(r.initial_loss));
        let _ = writeln!(out, "  final loss        {}", show(Some(r.final_loss)));
        for d in &r.diagnostics {
            let _ = writeln!(out, "  {:<17} {} ({:.3e} vs {:.0e})", d.name, d.status, d.max_residual, d.threshold);
        }
    }
    let _ =
        writeln!(out, "  logged epochs     {}", s.logged_epochs.map(|n| n.to_string()).unwrap_or_else(|| "n/a".into()));
    let _ = writeln!(out, "  last logged loss  {}", show(s.final_logged_loss));
    let _ = writeln!(out, "  max rel. error    {}", show(s.max_rel_err));
    for g in &s.gaps {
        let _ = writeln!(out, "  gap: {g}");
    }
    out
}

#[derive(Debug, Clone, PartialEq)]
pub struct Comparison {
    pub max_a: f64,
    pub max_b: f64,
    /// `max_a / max_b`.
    pub ratio: f64,
    /// `(step, err_a, err_b, err_a / err_b)` over the common steps.
    pub rows: Vec<(usize, f64, f64, f64)>,
}

/// Rollout error ratios between two run directories.
pub fn compare(a: &Path, b: &Path) -> Result<Comparison> {
    let ra = io::read_rollout(&a.join(EVAL_FILE))?;
    let rb = io::read_rollout(&b.join(EVAL_FILE))?;
    let rows: Vec<_> =
        ra.iter().zip(&rb).filter(|(x, y)| x.0 == y.0).map(|(x, y)| (x.0, x.2, y.2, x.2 / y.2)).collect();
    let max = |r: &[(usize, Option<f64>, f64)]| r.iter().map(|p| p.2).fold(0.0, f64::max);
    let (max_a, max_b) = (max(&ra), max(&rb));
    Ok(Comparison { max_a, max_b, ratio: max_a / max_b, rows })
}

pub fn write_comparison(path: &Path, c: &Comparison) -> Result<()> {
    let mut text = String::from("step,err_a,err_b,ratio\n");
    for (step, a, b, r) in &c.rows {
        let _ = writeln!(text, "{step},{},{},{}", json::format_f64(*a), json::format_f64(*b), json::format_f64(*r));
    }
    std::fs::write(path, text).map_err(|e| CliError::io(path, e))
}
