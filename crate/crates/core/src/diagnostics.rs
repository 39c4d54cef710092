//! Executable structural checks.
//!
//! * symplecticity of any [`FlowMap`] via finite-difference Jacobians,
//! * exact identity at zero step for the time-adaptive variants,
//! * separability of the induced vector field `∂ₕψ(0, ·)`,
//! * the O(1/m) rate of the explicit composition `g_{h/m}` that the
//!   approximation argument is built on,
//! * the best mean-squared error any separable field can achieve against a
//!   coupled linear field,
//! * per-step rollout errors against a reference trajectory.
//!
//! Reports are pure functions of `(maps, n_cases, seed)`.

use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

use crate::datasets::TestTrajectory;
use crate::layers::{induced_vector_field, jacobian_fd, Architecture, FlowMap, HenonNet, PhaseState, FD_STEP};
use crate::oracles::{stormer_verlet_6, LinearSystem, SeparableSystem};
use crate::sampling::{seeded, uniform, Rng};
use crate::{Error, Result};

pub const SYMPLECTIC_TOL: f64 = 1e-6;
pub const IDENTITY_TOL: f64 = 1e-12;
/// Tolerance on cross-derivatives of the induced field. The field itself is a
/// central difference with step [`FD_STEP`] (error O(step²) + O(ε/step)); its
/// cross-derivatives use [`CROSS_STEP`], adding O(ε/(step·CROSS_STEP)) ≈ 1e-8.
pub const SEPARABLE_TOL: f64 = 1e-4;
pub const CROSS_STEP: f64 = 1e-3;
/// Substeps of the order-6 reference used for composition rates.
pub const REFERENCE_SUBSTEPS: usize = 100;

/// Sampling box for diagnostic cases.
const STATE_BOX: f64 = 1.0;
const STEP_RANGE: [f64; 2] = [0.0, 0.5];
const TIME_RANGE: [f64; 2] = [0.0, 2.0];

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Status {
    Pass,
    Fail,
    NotApplicable,
}

impl Status {
    pub fn label(self) -> &'static str {
        match self {
            Status::Pass => "pass",
            Status::Fail => "FAIL",
            Status::NotApplicable => "not applicable",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CaseResult {
    pub case: usize,
    pub h: f64,
    pub t: f64,
    pub x: PhaseState,
    pub residual: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct DiagnosticReport {
    pub name: String,
    pub max_residual: f64,
    pub threshold: f64,
    pub status: Status,
    pub cases: Vec<CaseResult>,
}

impl DiagnosticReport {
    pub fn passed(&self) -> bool {
        self.status == Status::Pass
    }

    fn from_cases(name: &str, threshold: f64, cases: Vec<CaseResult>) -> Self {
        // NaN residuals count as failures.
        let max_residual =
            cases
                .iter()
                .map(|c| c.residual)
                .fold(0.0, |a: f64, b| if b.is_nan() || a.is_nan() { f64::NAN } else { a.max(b) });
        let status = if max_residual <= threshold { Status::Pass } else { Status::Fail };
        DiagnosticReport { name: name.into(), max_residual, threshold, status, cases }
    }

    fn not_applicable(name: &str, threshold: f64) -> Self {
        DiagnosticReport {
            name: name.into(),
            max_residual: 0.0,
            threshold,
            status: Status::NotApplicable,
            cases: Vec::new(),
        }
    }
}

struct Case {
    h: f64,
    t: f64,
    x: PhaseState,
}

fn draw_case(rng: &mut Rng, d: usize) -> Case {
    let coords: Vec<f64> = (0..2 * d).map(|_| uniform(rng, -STATE_BOX, STATE_BOX)).collect();
    let h = uniform(rng, STEP_RANGE[0], STEP_RANGE[1]);
    let t = uniform(rng, TIME_RANGE[0], TIME_RANGE[1]);
    Case { h, t, x: PhaseState::from_flat(&coords).expect("even length") }
}

fn run_cases<M: FlowMap>(
    maps: &[M],
    n_cases: usize,
    seed: u64,
    mut residual: impl FnMut(&M, &Case) -> Result<f64>,
) -> Result<Vec<CaseResult>> {
    if maps.is_empty() || n_cases == 0 {
        return Err(Error::invalid("diagnostics need at least one map and one case"));
    }
    let mut rng = seeded(seed);
    (0..n_cases)
        .map(|i| {
            let map = &maps[i % maps.len()];
            let case = draw_case(&mut rng, map.phase_dim());
            let r = residual(map, &case)?;
            Ok(CaseResult { case: i, h: case.h, t: case.t, x: case.x, residual: r })
        })
        .collect()
}

/// Networks with every parameter drawn from `U(±0.5)`, one per seed offset.
pub fn random_nets(arch: &Architecture, count: usize, seed: u64) -> Result<Vec<HenonNet>> {
    let mut rng = seeded(seed);
    (0..count).map(|_| HenonNet::random(arch, 0.5, &mut rng)).collect()
}

/// `max ‖DᵀJD − J‖∞` with `D` the central-difference Jacobian (step 1e−5).
/// Case `i` uses `maps[i % maps.len()]`.
pub fn certify_symplectic<M: FlowMap>(maps: &[M], n_cases: usize, seed: u64) -> Result<DiagnosticReport> {
    let cases = run_cases(maps, n_cases, seed, |map, c| {
        let h = if map.is_time_adaptive() { c.h } else { 0.0 };
        Ok(jacobian_fd(map, h, c.t, &c.x, FD_STEP)?.symplectic_residual())
    })?;
    Ok(DiagnosticReport::from_cases("symplectic", SYMPLECTIC_TOL, cases))
}

/// `max ‖ψ(0, t, x) − x‖∞`. Not applicable to maps without a step input.
pub fn certify_identity_at_zero<M: FlowMap>(maps: &[M], n_cases: usize, seed: u64) -> Result<DiagnosticReport> {
    if maps.iter().any(|m| !m.is_time_adaptive()) {
        return Ok(DiagnosticReport::not_applicable("identity_at_zero", IDENTITY_TOL));
    }
    let cases = run_cases(maps, n_cases, seed, |map, c| Ok(map.advance(0.0, c.t, &c.x)?.max_abs_diff(&c.x)))?;
    Ok(DiagnosticReport::from_cases("identity_at_zero", IDENTITY_TOL, cases))
}

/// Largest `|∂f⁽ᵖ⁾/∂p|` and `|∂f⁽q⁾/∂q|` entry of the induced field
/// `f = ∂ₕψ(0, ·)` at `x`.
pub fn field_cross_dependence(map: &impl FlowMap, t: f64, x: &PhaseState) -> Result<f64> {
    let d = x.dim();
    let base = x.to_flat();
    let mut worst: f64 = 0.0;
    for j in 0..2 * d {
        let mut plus = base.clone();
        let mut minus = base.clone();
        plus[j] += CROSS_STEP;
        minus[j] -= CROSS_STEP;
        let fp = induced_vector_field(map, t, &PhaseState::from_flat(&plus)?, FD_STEP)?;
        let fm = induced_vector_field(map, t, &PhaseState::from_flat(&minus)?, FD_STEP)?;
        // p-derivatives of the p-block, q-derivatives of the q-block
        let rows = if j < d { 0..d } else { d..2 * d };
        for i in rows {
            let v = (fp[i] - fm[i]) / (2.0 * CROSS_STEP);
            worst = if v.is_nan() { f64::NAN } else { worst.max(libm::fabs(v)) };
        }
    }
    Ok(worst)
}

pub fn certify_separable_field<M: FlowMap>(maps: &[M], n_cases: usize, seed: u64) -> Result<DiagnosticReport> {
    if maps.iter().any(|m| !m.is_time_adaptive()) {
        return Ok(DiagnosticReport::not_applicable("separable_field", SEPARABLE_TOL));
    }
    let cases = run_cases(maps, n_cases, seed, |map, c| field_cross_dependence(map, c.t, &c.x))?;
    Ok(DiagnosticReport::from_cases("separable_field", SEPARABLE_TOL, cases))
}

/// `g_τ(p, q) = (p − τ∇V(q), q + τ∇K(p − τ∇V(q)))`.
pub fn composition_step(sys: &impl SeparableSystem, tau: f64, x: &PhaseState) -> PhaseState {
    let d = x.dim();
    let mut g = vec![0.0; d];
    sys.grad_potential(&x.q, &mut g);
    let p: Vec<f64> = x.p.iter().zip(&g).map(|(p, g)| p - tau * g).collect();
    sys.grad_kinetic(&p, &mut g);
    let q = x.q.iter().zip(&g).map(|(q, g)| q + tau * g).collect();
    PhaseState { p, q }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CompositionRow {
    pub m: usize,
    pub error: f64,
    /// `error(m/2) / error(m)` when the previous row has `m/2`.
    pub ratio: Option<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CompositionTable {
    pub h: f64,
    pub rows: Vec<CompositionRow>,
}

impl CompositionTable {
    pub fn ratios(&self) -> Vec<f64> {
        self.rows.iter().filter_map(|r| r.ratio).collect()
    }

    /// Every doubling ratio in `[lo, hi]` (and at least one ratio exists).
    pub fn ratios_within(&self, lo: f64, hi: f64) -> bool {
        let r = self.ratios();
        !r.is_empty() && r.iter().all(|v| (lo..=hi).contains(v))
    }
}

/// Error of `m` applications of `g_{h/m}` against the order-6 reference flow.
pub fn constructive_composition_error(
    sys: &impl SeparableSystem,
    h: f64,
    x: &PhaseState,
    m_list: &[usize],
) -> Result<CompositionTable> {
    if m_list.is_empty() || m_list[0] == 0 || m_list.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::invalid("m_list must be ascending positive integers"));
    }
    let reference = stormer_verlet_6(sys, h, x, REFERENCE_SUBSTEPS)?;
    let mut rows: Vec<CompositionRow> = Vec::with_capacity(m_list.len());
    for &m in m_list {
        let tau = h / m as f64;
        let mut y = x.clone();
        for _ in 0..m {
            y = composition_step(sys, tau, &y);
        }
        let error = y.max_abs_diff(&reference);
        let ratio = rows.last().filter(|prev| prev.m * 2 == m).map(|prev| prev.error / error);
        rows.push(CompositionRow { m, error, ratio });
    }
    Ok(CompositionTable { h, rows })
}

/// Smallest mean-squared residual `(1/G) Σ ‖F(x) − (f₁(q), f₂(p))‖²` of a
/// separable field against the linear field `F = J⁻¹Ax` on a midpoint grid
/// with `grid_n` points per coordinate. The optimal `f₁(q)` is the mean of
/// the `p`-block over the `p` grid (and symmetrically for `f₂`).
pub fn separable_floor(sys: &LinearSystem, phase_box: &[[f64; 2]], grid_n: usize) -> Result<f64> {
    let d = sys.d();
    if phase_box.len() != 2 * d {
        return Err(Error::invalid("phase_box must have one interval per coordinate"));
    }
    if grid_n == 0 {
        return Err(Error::invalid("grid_n must be positive"));
    }
    let axis = |r: &[f64; 2]| -> Vec<f64> {
        (0..grid_n).map(|i| r[0] + (r[1] - r[0]) * (i as f64 + 0.5) / grid_n as f64).collect()
    };
    let axes: Vec<Vec<f64>> = phase_box.iter().map(axis).collect();
    let block_points = |offset: usize| -> Vec<Vec<f64>> {
        let count = grid_n.pow(d as u32);
        (0..count)
            .map(|mut idx| {
                (0..d)
                    .map(|k| {
                        let v = axes[offset + k][idx % grid_n];
                        idx /= grid_n;
                        v
                    })
                    .collect()
            })
            .collect()
    };
    let ps = block_points(0);
    let qs = block_points(d);
    let gen = sys.generator();
    let field = |p: &[f64], q: &[f64]| {
        let x: Vec<f64> = p.iter().chain(q).copied().collect();
        gen.matvec(&x)
    };
    // optimal separable parts
    let mut fit_p_block = vec![vec![0.0; d]; qs.len()];
    let mut fit_q_block = vec![vec![0.0; d]; ps.len()];
    for (ip, p) in ps.iter().enumerate() {
        for (iq, q) in qs.iter().enumerate() {
            let f = field(p, q);
            for k in 0..d {
                fit_p_block[iq][k] += f[k] / ps.len() as f64;
                fit_q_block[ip][k] += f[d + k] / qs.len() as f64;
            }
        }
    }
    let mut total = 0.0;
    for (ip, p) in ps.iter().enumerate() {
        for (iq, q) in qs.iter().enumerate() {
            let f = field(p, q);
            for k in 0..d {
                let rp = f[k] - fit_p_block[iq][k];
                let rq = f[d + k] - fit_q_block[ip][k];
                total += rp * rp + rq * rq;
            }
        }
    }
    Ok(total / (ps.len() * qs.len()) as f64)
}

#[derive(Debug, Clone, PartialEq)]
pub struct RolloutPoint {
    pub step: usize,
    pub t: Option<f64>,
    pub error: f64,
    /// True when the reference state is zero and `error` is absolute.
    pub absolute: bool,
    pub prediction: PhaseState,
}

/// Iterates `map` with the trajectory's step and compares each state with the
/// reference: `eᵢ = ‖ψᵢ − yᵢ‖₂ / ‖yᵢ‖₂` for `i = 1..=k`.
pub fn rollout_error(map: &impl FlowMap, traj: &TestTrajectory) -> Result<Vec<RolloutPoint>> {
    if map.is_non_autonomous() && !traj.is_non_autonomous() {
        return Err(Error::invalid("a time-dependent map needs a trajectory with a time axis"));
    }
    if map.phase_dim() != traj.x0.dim() {
        return Err(Error::invalid("trajectory dimension does not match the map"));
    }
    if traj.states.len() != traj.k + 1 {
        return Err(Error::invalid("trajectory must hold k + 1 states"));
    }
    let mut state = traj.x0.clone();
    let mut out = Vec::with_capacity(traj.k);
    for i in 1..=traj.k {
        let t_prev = traj.time(i - 1).unwrap_or(0.0);
        state = map.advance(traj.h, t_prev, &state)?;
        let reference = &traj.states[i];
        let dist = state.dist2(reference);
        let norm = reference.norm2();
        let (error, absolute) = if norm == 0.0 { (dist, true) } else { (dist / norm, false) };
        out.push(RolloutPoint { step: i, t: traj.time(i), error, absolute, prediction: state.clone() });
    }
    Ok(out)
}

/// Largest error of a rollout (NaN if any step is NaN).
pub fn max_error(points: &[RolloutPoint]) -> f64 {
    points.iter().map(|p| p.error).fold(0.0, |a: f64, b| if a.is_nan() || b.is_nan() { f64::NAN } else { a.max(b) })
}
