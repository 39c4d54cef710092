//! Experiment configuration files.

use std::path::{Path, PathBuf};

use henonnet_core::datasets::SampleSpec;
use henonnet_core::layers::{Architecture, PhaseState};
use henonnet_core::{Activation, Variant};
use serde::{Deserialize, Serialize};

use crate::error::{CliError, Result};

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Experiment {
    Pendulum,
    Linear,
    ForcedOscillator,
}

impl Experiment {
    pub fn tag(self) -> &'static str {
        match self {
            Experiment::Pendulum => "pendulum",
            Experiment::Linear => "linear",
            Experiment::ForcedOscillator => "forced_oscillator",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ArchitectureConfig {
    pub variant: Variant,
    pub layers: usize,
    pub width: usize,
    #[serde(default)]
    pub activation: Activation,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TrajectoryConfig {
    /// `[p₁…p_d, q₁…q_d]`.
    pub x0: Vec<f64>,
    pub h: f64,
    pub k: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub t0: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OptimizerConfig {
    pub learning_rate: f64,
    pub epochs: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub schema_version: u32,
    pub experiment: Experiment,
    pub architecture: ArchitectureConfig,
    pub data: SampleSpec,
    pub test_trajectory: TrajectoryConfig,
    pub optimizer: OptimizerConfig,
    /// Seed for parameter initialization.
    pub seed: u64,
    pub output_dir: PathBuf,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Scale {
    /// Epoch counts as published.
    Paper,
    /// Roughly a tenth of the epochs, for quick runs and CI.
    Desk,
}

/// Names accepted by [`ExperimentConfig::preset`].
pub const PRESETS: [&str; 4] = ["pendulum", "linear", "forced_oscillator_t", "forced_oscillator_nat"];

impl ExperimentConfig {
    pub fn preset(name: &str, scale: Scale) -> Option<Self> {
        let desk = scale == Scale::Desk;
        let (experiment, variant, layers, width, data, trajectory, epochs) = match name {
            "pendulum" | "linear" => {
                let (exp, data) = if name == "pendulum" {
                    (Experiment::Pendulum, SampleSpec::pendulum(0))
                } else {
                    (Experiment::Linear, SampleSpec::linear(0))
                };
                let traj = TrajectoryConfig { x0: vec![1.0, 0.0], h: 0.1, k: 100, t0: None };
                (exp, Variant::T, 5, 30, data, traj, if desk { 5000 } else { 50000 })
            }
            "forced_oscillator_t" | "forced_oscillator_nat" => {
                let variant = if name.ends_with("nat") { Variant::NAT } else { Variant::T };
                let traj = TrajectoryConfig { x0: vec![-0.2, -0.5], h: 0.2, k: 80, t0: Some(0.0) };
                let data = SampleSpec::forced_oscillator(0);
                (Experiment::ForcedOscillator, variant, 6, 20, data, traj, if desk { 8000 } else { 40000 })
            }
            _ => return None,
        };
        let suffix = if desk { "desk" } else { "paper" };
        Some(ExperimentConfig {
            schema_version: SCHEMA_VERSION,
            experiment,
            architecture: ArchitectureConfig { variant, layers, width, activation: Activation::Tanh },
            data,
            test_trajectory: trajectory,
            optimizer: OptimizerConfig { learning_rate: 1e-3, epochs },
            seed: 0,
            output_dir: PathBuf::from(format!("runs/{name}_{suffix}")),
        })
    }

    pub fn load(path: &Path) -> Result<Self> {
        let cfg: ExperimentConfig = crate::json::read(path)?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn architecture(&self) -> Architecture {
        let a = self.architecture;
        Architecture {
            variant: a.variant,
            d: self.data.d(),
            layers: a.layers,
            width: a.width,
            activation: a.activation,
        }
    }

    pub fn x0(&self) -> PhaseState {
        PhaseState::from_flat(&self.test_trajectory.x0).expect("validated")
    }

    /// `--seed` replaces both the data seed and the initialization seed.
    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self.data.seed = seed;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if self.schema_version != SCHEMA_VERSION {
            return Err(CliError::config(
                "schema_version",
                format!("expected {SCHEMA_VERSION}, found {}", self.schema_version),
            ));
        }
        validate_spec(&self.data, "data")?;
        if self.data.system.tag() != self.experiment.tag() {
            return Err(CliError::config(
                "data.system",
                format!("experiment `{}` needs system `{}`", self.experiment.tag(), self.experiment.tag()),
            ));
        }
        let a = &self.architecture;
        if a.layers == 0 {
            return Err(CliError::config("architecture.layers", "must be at least 1"));
        }
        if a.width == 0 {
            return Err(CliError::config("architecture.width", "must be at least 1"));
        }
        if a.variant.is_non_autonomous() && !self.data.system.is_non_autonomous() {
            return Err(CliError::config("architecture.variant", "NAT needs a time-dependent system"));
        }
        let lr = self.optimizer.learning_rate;
        if !(lr.is_finite() && lr > 0.0) {
            return Err(CliError::config("optimizer.learning_rate", "must be positive and finite"));
        }
        let traj = &self.test_trajectory;
        if traj.x0.len() != 2 * self.data.d() || !traj.x0.iter().all(|v| v.is_finite()) {
            return Err(CliError::config("test_trajectory.x0", format!("needs {} finite values", 2 * self.data.d())));
        }
        if !(traj.h.is_finite() && traj.h >= 0.0) {
            return Err(CliError::config("test_trajectory.h", "must be finite and non-negative"));
        }
        if traj.k == 0 {
            return Err(CliError::config("test_trajectory.k", "must be at least 1"));
        }
        match (traj.t0, self.data.system.is_non_autonomous()) {
            (Some(t), true) if t.is_finite() => {}
            (None, false) => {}
            (Some(_), true) => return Err(CliError::config("test_trajectory.t0", "must be finite")),
            (None, true) => return Err(CliError::config("test_trajectory.t0", "required for this system")),
            (Some(_), false) => {
                return Err(CliError::config("test_trajectory.t0", "only allowed for time-dependent systems"))
            }
        }
        Ok(())
    }
}

/// Field-level checks on a sampling spec; the core check runs last for
/// anything not covered here (for instance resonance).
pub fn validate_spec(spec: &SampleSpec, prefix: &str) -> Result<()> {
    let field = |name: &str| format!("{prefix}.{name}");
    let range_ok = |r: &[f64; 2]| r[0].is_finite() && r[1].is_finite() && r[0] <= r[1];
    if spec.n_samples == 0 {
        return Err(CliError::config(field("n_samples"), "must be at least 1"));
    }
    if spec.phase_box.is_empty() || spec.phase_box.len() % 2 != 0 {
        return Err(CliError::config(field("phase_box"), "needs an even, non-zero number of intervals"));
    }
    for (i, r) in spec.phase_box.iter().enumerate() {
        if !range_ok(r) {
            return Err(CliError::config(format!("{}[{i}]", field("phase_box")), "needs finite lo <= hi"));
        }
    }
    if !range_ok(&spec.h_range) || spec.h_range[0] < 0.0 {
        return Err(CliError::config(field("h_range"), "needs finite 0 <= lo <= hi"));
    }
    match (&spec.t_range, spec.system.is_non_autonomous()) {
        (Some(r), true) if range_ok(r) => {}
        (Some(_), true) => return Err(CliError::config(field("t_range"), "needs finite lo <= hi")),
        (None, true) => return Err(CliError::config(field("t_range"), "required for this system")),
        (Some(_), false) => return Err(CliError::config(field("t_range"), "only allowed for time-dependent systems")),
        (None, false) => {}
    }
    spec.validate().map_err(|e| CliError::config(field("system"), e.to_string()))?;
    spec.system.oracle().map_err(|e| CliError::config(field("system"), e.to_string()))?;
    Ok(())
}
