//! Seeded training sets and reference trajectories.
//!
//! Per sample the generator draws, in this order, every phase coordinate
//! (`p₁…p_d, q₁…q_d`, each uniform on its box interval), then `t` when the
//! system is non-autonomous, then `h`. All draws use [`crate::sampling`], so a
//! spec and its seed pin the dataset down to the bit.

use alloc::vec::Vec;
use serde::{Deserialize, Serialize};

use crate::layers::{FlowMap, PhaseState};
use crate::oracles::SystemSpec;
use crate::sampling::{seeded, uniform};
use crate::{Error, Result};

/// How to draw a dataset.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SampleSpec {
    pub n_samples: usize,
    /// `[lo, hi]` per phase coordinate, `p` block first.
    pub phase_box: Vec<[f64; 2]>,
    pub h_range: [f64; 2],
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub t_range: Option<[f64; 2]>,
    pub seed: u64,
    pub system: SystemSpec,
}

impl SampleSpec {
    /// N = 40, `[−√2, √2] × [−π/2, π/2]`, `h ∈ [0.2, 0.5]`.
    pub fn pendulum(seed: u64) -> Self {
        let sqrt2 = core::f64::consts::SQRT_2;
        let half_pi = core::f64::consts::FRAC_PI_2;
        SampleSpec {
            n_samples: 40,
            phase_box: alloc::vec![[-sqrt2, sqrt2], [-half_pi, half_pi]],
            h_range: [0.2, 0.5],
            t_range: None,
            seed,
            system: SystemSpec::pendulum(),
        }
    }

    /// Same sampling as the pendulum, labels from the linear coupled system.
    pub fn linear(seed: u64) -> Self {
        SampleSpec { system: SystemSpec::linear(), ..SampleSpec::pendulum(seed) }
    }

    /// N = 800, `[−3.5, 2] × [−4, 4]`, `t ∈ [0, 16]`, `h ∈ [0, 0.3]`.
    pub fn forced_oscillator(seed: u64) -> Self {
        SampleSpec {
            n_samples: 800,
            phase_box: alloc::vec![[-3.5, 2.0], [-4.0, 4.0]],
            h_range: [0.0, 0.3],
            t_range: Some([0.0, 16.0]),
            seed,
            system: SystemSpec::forced_oscillator(),
        }
    }

    pub fn d(&self) -> usize {
        self.phase_box.len() / 2
    }

    pub fn validate(&self) -> Result<()> {
        if self.n_samples == 0 {
            return Err(Error::invalid("n_samples must be at least 1"));
        }
        if self.phase_box.is_empty() || self.phase_box.len() % 2 != 0 {
            return Err(Error::invalid("phase_box needs one interval per p and q coordinate"));
        }
        let check = |name: &str, r: &[f64; 2]| {
            if !(r[0].is_finite() && r[1].is_finite()) || r[0] > r[1] {
                Err(Error::invalid(alloc::format!("{name}: need finite lo <= hi, got [{}, {}]", r[0], r[1])))
            } else {
                Ok(())
            }
        };
        for r in &self.phase_box {
            check("phase_box", r)?;
        }
        check("h_range", &self.h_range)?;
        match (&self.t_range, self.system.is_non_autonomous()) {
            (Some(r), true) => check("t_range", r)?,
            (None, false) => {}
            (None, true) => return Err(Error::invalid("t_range is required for a non-autonomous system")),
            (Some(_), false) => return Err(Error::invalid("t_range is only allowed for a non-autonomous system")),
        }
        let oracle = self.system.oracle()?;
        if oracle.phase_dim() != self.d() {
            return Err(Error::invalid("phase_box dimension does not match the system"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Sample {
    pub x: PhaseState,
    pub t: Option<f64>,
    pub h: f64,
    /// Flow of `x` over `h` (from time `t` when present).
    pub y: PhaseState,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    pub spec: SampleSpec,
    pub samples: Vec<Sample>,
}

impl Dataset {
    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn is_non_autonomous(&self) -> bool {
        self.samples.first().is_some_and(|s| s.t.is_some())
    }

    /// Checks the structural invariants (used after loading from disk).
    pub fn validate(&self) -> Result<()> {
        if self.samples.is_empty() {
            return Err(Error::invalid("dataset is empty"));
        }
        let d = self.samples[0].x.dim();
        let timed = self.samples[0].t.is_some();
        for (i, s) in self.samples.iter().enumerate() {
            if s.x.dim() != d || s.y.dim() != d || s.t.is_some() != timed {
                return Err(Error::invalid(alloc::format!("sample {i} has an inconsistent shape")));
            }
            if !(s.x.is_finite() && s.y.is_finite() && s.h.is_finite() && s.t.is_none_or(f64::is_finite)) {
                return Err(Error::invalid(alloc::format!("sample {i} is not finite")));
            }
        }
        Ok(())
    }
}

/// Draws `spec.n_samples` inputs and labels them with the spec's oracle.
pub fn generate(spec: &SampleSpec) -> Result<Dataset> {
    spec.validate()?;
    let oracle = spec.system.oracle()?;
    let d = spec.d();
    let mut rng = seeded(spec.seed);
    let mut samples = Vec::with_capacity(spec.n_samples);
    for _ in 0..spec.n_samples {
        let coords: Vec<f64> = spec.phase_box.iter().map(|r| uniform(&mut rng, r[0], r[1])).collect();
        let t = spec.t_range.map(|r| uniform(&mut rng, r[0], r[1]));
        let h = uniform(&mut rng, spec.h_range[0], spec.h_range[1]);
        let x = PhaseState { p: coords[..d].to_vec(), q: coords[d..].to_vec() };
        let y = oracle.advance(h, t.unwrap_or(0.0), &x)?;
        if !y.is_finite() {
            return Err(Error::invalid("oracle produced a non-finite label"));
        }
        samples.push(Sample { x, t, h, y });
    }
    Ok(Dataset { spec: spec.clone(), samples })
}

/// States of the reference solution at `t0 + i·h`, `i = 0..=k`.
#[derive(Debug, Clone, PartialEq)]
pub struct TestTrajectory {
    pub system: SystemSpec,
    pub x0: PhaseState,
    pub h: f64,
    pub k: usize,
    pub t0: Option<f64>,
    pub states: Vec<PhaseState>,
}

impl TestTrajectory {
    pub fn time(&self, i: usize) -> Option<f64> {
        self.t0.map(|t0| t0 + i as f64 * self.h)
    }

    pub fn is_non_autonomous(&self) -> bool {
        self.t0.is_some()
    }
}

/// Reference trajectory. Autonomous systems apply the oracle flow `i` times;
/// the forced oscillator evaluates its closed form at `t0 + i·h`.
pub fn test_trajectory(
    system: &SystemSpec,
    x0: &PhaseState,
    h: f64,
    k: usize,
    t0: Option<f64>,
) -> Result<TestTrajectory> {
    if k == 0 {
        return Err(Error::invalid("a trajectory needs k >= 1 steps"));
    }
    if !h.is_finite() {
        return Err(Error::invalid("step must be finite"));
    }
    let oracle = system.oracle()?;
    if x0.dim() != oracle.phase_dim() {
        return Err(Error::invalid("initial state dimension does not match the system"));
    }
    if t0.is_some() != system.is_non_autonomous() {
        return Err(Error::invalid(alloc::format!(
            "start time must be given exactly when the system is non-autonomous ({})",
            system.tag()
        )));
    }
    let mut states = Vec::with_capacity(k + 1);
    states.push(x0.clone());
    match (&oracle, t0) {
        (crate::oracles::Oracle::Forced(f), Some(t0)) => {
            for i in 1..=k {
                states.push(f.flow(t0, i as f64 * h, x0)?);
            }
        }
        _ => {
            for i in 1..=k {
                let next = oracle.advance(h, 0.0, &states[i - 1])?;
                states.push(next);
            }
        }
    }
    Ok(TestTrajectory { system: *system, x0: x0.clone(), h, k, t0, states })
}
