//! Ground-truth flows used to label data and to check the networks.
//!
//! * separable systems `H = K(p) + V(q)` integrated with Störmer–Verlet and its
//!   order-6 symmetric composition,
//! * linear systems `H = ½xᵀAx` through the matrix exponential,
//! * the forced harmonic oscillator through its closed-form solution.

use alloc::vec;
use alloc::vec::Vec;
use serde::{Deserialize, Serialize};

use crate::layers::{FlowMap, PhaseState};
use crate::linalg::{expm, Matrix};
use crate::{Error, Result};

/// `H(p, q) = K(p) + V(q)`.
pub trait SeparableSystem {
    fn dim(&self) -> usize;
    fn grad_kinetic(&self, p: &[f64], out: &mut [f64]);
    fn grad_potential(&self, q: &[f64], out: &mut [f64]);
    fn hamiltonian(&self, x: &PhaseState) -> f64;
}

/// `H = ½p² − cos q`.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Pendulum;

impl SeparableSystem for Pendulum {
    fn dim(&self) -> usize {
        1
    }
    fn grad_kinetic(&self, p: &[f64], out: &mut [f64]) {
        out[0] = p[0];
    }
    fn grad_potential(&self, q: &[f64], out: &mut [f64]) {
        out[0] = libm::sin(q[0]);
    }
    fn hamiltonian(&self, x: &PhaseState) -> f64 {
        0.5 * x.p[0] * x.p[0] - libm::cos(x.q[0])
    }
}

/// `H = ½|p|² + ½ω²|q|²` in any dimension.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HarmonicOscillator {
    pub d: usize,
    pub omega: f64,
}

impl HarmonicOscillator {
    /// Exact flow: rotation with angular frequency `ω` in each `(p_i, ω q_i)` plane.
    pub fn exact_flow(&self, h: f64, x: &PhaseState) -> PhaseState {
        let (c, s) = (libm::cos(self.omega * h), libm::sin(self.omega * h));
        let p = x.p.iter().zip(&x.q).map(|(p, q)| p * c - self.omega * q * s).collect();
        let q = x.p.iter().zip(&x.q).map(|(p, q)| q * c + p / self.omega * s).collect();
        PhaseState { p, q }
    }
}

impl SeparableSystem for HarmonicOscillator {
    fn dim(&self) -> usize {
        self.d
    }
    fn grad_kinetic(&self, p: &[f64], out: &mut [f64]) {
        out.copy_from_slice(p);
    }
    fn grad_potential(&self, q: &[f64], out: &mut [f64]) {
        for (o, q) in out.iter_mut().zip(q) {
            *o = self.omega * self.omega * q;
        }
    }
    fn hamiltonian(&self, x: &PhaseState) -> f64 {
        let w2 = self.omega * self.omega;
        x.p.iter().zip(&x.q).map(|(p, q)| 0.5 * p * p + 0.5 * w2 * q * q).sum()
    }
}

/// One leapfrog step on flat buffers.
fn leapfrog_in_place(sys: &impl SeparableSystem, h: f64, p: &mut [f64], q: &mut [f64], g: &mut [f64]) {
    sys.grad_potential(q, g);
    for (p, g) in p.iter_mut().zip(g.iter()) {
        *p -= 0.5 * h * g;
    }
    sys.grad_kinetic(p, g);
    for (q, g) in q.iter_mut().zip(g.iter()) {
        *q += h * g;
    }
    sys.grad_potential(q, g);
    for (p, g) in p.iter_mut().zip(g.iter()) {
        *p -= 0.5 * h * g;
    }
}

/// Order-2 Störmer–Verlet: half kick, drift, half kick.
pub fn stormer_verlet_step(sys: &impl SeparableSystem, h: f64, x: &PhaseState) -> PhaseState {
    let mut p = x.p.clone();
    let mut q = x.q.clone();
    let mut g = vec![0.0; p.len()];
    leapfrog_in_place(sys, h, &mut p, &mut q, &mut g);
    PhaseState { p, q }
}

/// Yoshida's seven-stage symmetric composition; composing leapfrog steps of
/// sizes `γᵢh` gives order 6.
pub const ORDER6_WEIGHTS: [f64; 7] = {
    const G1: f64 = 0.784_513_610_477_557_263_819_497_633_866_349_876;
    const G2: f64 = 0.235_573_213_359_358_133_684_793_182_978_534_602;
    const G3: f64 = -1.177_679_984_178_871_006_946_415_680_964_315_73;
    const G4: f64 = 1.0 - 2.0 * (G1 + G2 + G3);
    [G1, G2, G3, G4, G3, G2, G1]
};

/// `substeps` macro-steps of size `h/substeps`, each the order-6 composition.
pub fn stormer_verlet_6(sys: &impl SeparableSystem, h: f64, x: &PhaseState, substeps: usize) -> Result<PhaseState> {
    if substeps == 0 {
        return Err(Error::invalid("substeps must be at least 1"));
    }
    let tau = h / substeps as f64;
    let mut p = x.p.clone();
    let mut q = x.q.clone();
    let mut g = vec![0.0; p.len()];
    for _ in 0..substeps {
        for w in ORDER6_WEIGHTS {
            leapfrog_in_place(sys, w * tau, &mut p, &mut q, &mut g);
        }
    }
    Ok(PhaseState { p, q })
}

/// `H(x) = ½xᵀAx` with symmetric `A` of size 2d.
#[derive(Debug, Clone, PartialEq)]
pub struct LinearSystem {
    a: Matrix,
}

impl LinearSystem {
    pub fn new(a: Matrix) -> Result<Self> {
        if a.rows() != a.cols() || a.rows() % 2 != 0 || a.rows() == 0 {
            return Err(Error::invalid("A must be square of even size"));
        }
        if !a.is_symmetric(0.0) {
            return Err(Error::invalid("A must be symmetric"));
        }
        Ok(LinearSystem { a })
    }

    /// `H = ½p² + c·pq + ½q²`.
    pub fn with_coupling(c: f64) -> Self {
        LinearSystem { a: Matrix::from_rows(2, 2, vec![1.0, c, c, 1.0]) }
    }

    pub fn d(&self) -> usize {
        self.a.rows() / 2
    }

    pub fn a(&self) -> &Matrix {
        &self.a
    }

    /// `J⁻¹A`; with `J = [[0, I], [−I, 0]]`, `J⁻¹ = −J`.
    pub fn generator(&self) -> Matrix {
        Matrix::symplectic_j(self.d()).scale(-1.0).matmul(&self.a)
    }

    pub fn vector_field(&self, x: &[f64]) -> Vec<f64> {
        self.generator().matvec(x)
    }

    pub fn hamiltonian(&self, x: &PhaseState) -> f64 {
        let z = x.to_flat();
        0.5 * z.iter().zip(self.a.matvec(&z)).map(|(a, b)| a * b).sum::<f64>()
    }

    pub fn flow_matrix(&self, h: f64) -> Matrix {
        expm(&self.generator().scale(h))
    }

    pub fn flow(&self, h: f64, x: &PhaseState) -> PhaseState {
        PhaseState::from_flat(&self.flow_matrix(h).matvec(&x.to_flat())).expect("flow preserves dimension")
    }
}

/// `H(p, q, t) = ½p² + ½ω₀²q² − F₀ sin(ωt) q`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ForcedOscillator {
    pub omega0: f64,
    pub omega: f64,
    #[serde(rename = "F0")]
    pub f0: f64,
}

impl ForcedOscillator {
    pub fn new(omega0: f64, omega: f64, f0: f64) -> Result<Self> {
        let sys = ForcedOscillator { omega0, omega, f0 };
        sys.validate()?;
        Ok(sys)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.omega0.is_finite() && self.omega.is_finite() && self.f0.is_finite()) {
            return Err(Error::invalid("forced oscillator constants must be finite"));
        }
        if !(self.omega0 > 0.0) {
            return Err(Error::invalid("omega0 must be positive"));
        }
        if self.omega == self.omega0 {
            return Err(Error::invalid(alloc::format!(
                "resonant forcing omega = omega0 = {} has no closed-form solution",
                self.omega
            )));
        }
        Ok(())
    }

    fn amplitude(&self) -> f64 {
        self.f0 / (self.omega0 * self.omega0 - self.omega * self.omega)
    }

    /// Particular solution `(p, q)` at time `t`.
    fn particular(&self, t: f64) -> (f64, f64) {
        let c = self.amplitude();
        (self.omega * c * libm::cos(self.omega * t), c * libm::sin(self.omega * t))
    }

    /// Closed-form solution with `p(0) = p0`, `q(0) = q0`.
    pub fn solution(&self, t: f64, p0: f64, q0: f64) -> Result<PhaseState> {
        self.validate()?;
        let (w0, w) = (self.omega0, self.omega);
        let c = self.amplitude();
        let (c0, s0) = (libm::cos(w0 * t), libm::sin(w0 * t));
        let p = (p0 - w * c) * c0 - q0 * w0 * s0 + w * c * libm::cos(w * t);
        let q = q0 * c0 + (p0 / w0 - w * c / w0) * s0 + c * libm::sin(w * t);
        Ok(PhaseState::scalar(p, q))
    }

    /// Flow from time `t0` to `t0 + h` starting at `x`.
    pub fn flow(&self, t0: f64, h: f64, x: &PhaseState) -> Result<PhaseState> {
        self.validate()?;
        if x.dim() != 1 {
            return Err(Error::invalid("the forced oscillator has one degree of freedom"));
        }
        let w0 = self.omega0;
        let (pp0, qp0) = self.particular(t0);
        let (ph, qh) = (x.p[0] - pp0, x.q[0] - qp0);
        let (c, s) = (libm::cos(w0 * h), libm::sin(w0 * h));
        let (pp1, qp1) = self.particular(t0 + h);
        Ok(PhaseState::scalar(ph * c - qh * w0 * s + pp1, qh * c + ph / w0 * s + qp1))
    }

    pub fn hamiltonian(&self, t: f64, x: &PhaseState) -> f64 {
        let (p, q) = (x.p[0], x.q[0]);
        0.5 * p * p + 0.5 * self.omega0 * self.omega0 * q * q - self.f0 * libm::sin(self.omega * t) * q
    }
}

fn default_substeps() -> usize {
    10
}

fn default_coupling() -> f64 {
    0.4
}

fn one() -> f64 {
    1.0
}

fn two() -> f64 {
    2.0
}

/// Named reference system with parameter overrides, as written in configs.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "name", rename_all = "snake_case")]
pub enum SystemSpec {
    /// Labels from the order-6 composition with `substeps` steps of `h/substeps`.
    Pendulum {
        #[serde(default = "default_substeps")]
        substeps: usize,
    },
    /// `H = ½p² + c·pq + ½q²`, exact flow.
    Linear {
        #[serde(default = "default_coupling")]
        coupling: f64,
    },
    ForcedOscillator {
        #[serde(default = "one")]
        omega0: f64,
        #[serde(default = "two")]
        omega: f64,
        #[serde(default = "one", rename = "F0")]
        f0: f64,
    },
    /// `H = ½p² + ½ω²q²`, exact flow.
    Harmonic {
        #[serde(default = "one")]
        omega: f64,
    },
}

impl SystemSpec {
    pub fn pendulum() -> Self {
        SystemSpec::Pendulum { substeps: default_substeps() }
    }

    pub fn linear() -> Self {
        SystemSpec::Linear { coupling: default_coupling() }
    }

    pub fn forced_oscillator() -> Self {
        SystemSpec::ForcedOscillator { omega0: 1.0, omega: 2.0, f0: 1.0 }
    }

    pub fn tag(&self) -> &'static str {
        match self {
            SystemSpec::Pendulum { .. } => "pendulum",
            SystemSpec::Linear { .. } => "linear",
            SystemSpec::ForcedOscillator { .. } => "forced_oscillator",
            SystemSpec::Harmonic { .. } => "harmonic",
        }
    }

    pub fn is_non_autonomous(&self) -> bool {
        matches!(self, SystemSpec::ForcedOscillator { .. })
    }

    pub fn oracle(&self) -> Result<Oracle> {
        Ok(match *self {
            SystemSpec::Pendulum { substeps } => {
                if substeps == 0 {
                    return Err(Error::invalid("pendulum substeps must be at least 1"));
                }
                Oracle::Pendulum { substeps }
            }
            SystemSpec::Linear { coupling } => {
                if !coupling.is_finite() {
                    return Err(Error::invalid("coupling must be finite"));
                }
                Oracle::Linear(LinearSystem::with_coupling(coupling))
            }
            SystemSpec::ForcedOscillator { omega0, omega, f0 } => {
                Oracle::Forced(ForcedOscillator::new(omega0, omega, f0)?)
            }
            SystemSpec::Harmonic { omega } => {
                if !(omega > 0.0 && omega.is_finite()) {
                    return Err(Error::invalid("omega must be positive"));
                }
                Oracle::Harmonic(HarmonicOscillator { d: 1, omega })
            }
        })
    }
}

/// Ground-truth flow map of a [`SystemSpec`].
#[derive(Debug, Clone, PartialEq)]
pub enum Oracle {
    Pendulum { substeps: usize },
    Linear(LinearSystem),
    Forced(ForcedOscillator),
    Harmonic(HarmonicOscillator),
}

impl FlowMap for Oracle {
    fn phase_dim(&self) -> usize {
        match self {
            Oracle::Linear(l) => l.d(),
            Oracle::Harmonic(h) => h.d,
            _ => 1,
        }
    }

    fn is_non_autonomous(&self) -> bool {
        matches!(self, Oracle::Forced(_))
    }

    fn advance(&self, h: f64, t: f64, x: &PhaseState) -> Result<PhaseState> {
        if x.dim() != self.phase_dim() {
            return Err(Error::invalid("state dimension does not match the system"));
        }
        match self {
            Oracle::Pendulum { substeps } => stormer_verlet_6(&Pendulum, h, x, *substeps),
            Oracle::Linear(l) => Ok(l.flow(h, x)),
            Oracle::Forced(f) => f.flow(t, h, x),
            Oracle::Harmonic(o) => Ok(o.exact_flow(h, x)),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::layers::{jacobian_fd, FD_STEP};

    fn harmonic() -> HarmonicOscillator {
        HarmonicOscillator { d: 1, omega: 1.0 }
    }

    #[test]
    fn leapfrog_hand_values() {
        let y = stormer_verlet_step(&harmonic(), 0.1, &PhaseState::scalar(0.0, 1.0));
        // p½ = −0.05, q₁ = 0.995, p₁ = −0.05 − 0.05·0.995
        assert!((y.q[0] - 0.995).abs() < 1e-15);
        assert!((y.p[0] + 0.09975).abs() < 1e-15);
    }

    #[test]
    fn leapfrog_zero_step_and_reversibility() {
        let x = PhaseState::scalar(0.3, 1.2);
        assert_eq!(stormer_verlet_step(&Pendulum, 0.0, &x), x);
        let back = stormer_verlet_step(&Pendulum, -0.2, &stormer_verlet_step(&Pendulum, 0.2, &x));
        assert!(back.max_abs_diff(&x) <= 1e-12);
        assert_eq!(stormer_verlet_6(&Pendulum, 0.0, &x, 3).unwrap(), x);
        assert!(stormer_verlet_6(&Pendulum, 0.1, &x, 0).is_err());
    }

    #[test]
    fn order6_weights_are_palindromic_and_consistent() {
        let w = ORDER6_WEIGHTS;
        for i in 0..3 {
            assert_eq!(w[i], w[6 - i]);
        }
        assert!((w.iter().sum::<f64>() - 1.0).abs() < 1e-15);
        // third-order condition of a symmetric composition
        assert!(w.iter().map(|g| g * g * g).sum::<f64>().abs() < 1e-14);
    }

    fn global_error(order6: bool, h: f64) -> f64 {
        let sys = harmonic();
        let x0 = PhaseState::scalar(0.3, 0.8);
        let steps = libm::round(1.0 / h) as usize;
        let mut x = x0.clone();
        for _ in 0..steps {
            x = if order6 { stormer_verlet_6(&sys, h, &x, 1).unwrap() } else { stormer_verlet_step(&sys, h, &x) };
        }
        x.dist2(&sys.exact_flow(1.0, &x0))
    }

    #[test]
    fn measured_convergence_orders() {
        let hs = [0.2, 0.1, 0.05, 0.025];
        for (order6, min_order) in [(true, 5.5), (false, 1.9)] {
            let errs: Vec<f64> = hs.iter().map(|h| global_error(order6, *h)).collect();
            for w in errs.windows(2) {
                let order = libm::log2(w[0] / w[1]);
                assert!(order >= min_order, "order6={order6}: {errs:?}");
            }
        }
    }

    #[test]
    fn pendulum_energy_drift() {
        let x = PhaseState::scalar(1.0, 0.0);
        let y = stormer_verlet_6(&Pendulum, 0.1, &x, 10).unwrap();
        assert!((Pendulum.hamiltonian(&y) - Pendulum.hamiltonian(&x)).abs() <= 1e-10);
    }

    #[test]
    fn gradients_match_hamiltonian() {
        let x = PhaseState::scalar(0.7, -0.4);
        let step = 1e-6;
        let fd_p = (Pendulum.hamiltonian(&PhaseState::scalar(0.7 + step, -0.4))
            - Pendulum.hamiltonian(&PhaseState::scalar(0.7 - step, -0.4)))
            / (2.0 * step);
        let fd_q = (Pendulum.hamiltonian(&PhaseState::scalar(0.7, -0.4 + step))
            - Pendulum.hamiltonian(&PhaseState::scalar(0.7, -0.4 - step)))
            / (2.0 * step);
        let mut g = [0.0];
        Pendulum.grad_kinetic(&x.p, &mut g);
        assert!((g[0] - fd_p).abs() <= 1e-6);
        Pendulum.grad_potential(&x.q, &mut g);
        assert!((g[0] - fd_q).abs() <= 1e-6);
    }

    #[test]
    fn integrators_are_symplectic() {
        let x = PhaseState::scalar(0.9, -1.1);
        let oracle = Oracle::Pendulum { substeps: 10 };
        let jac = jacobian_fd(&oracle, 0.4, 0.0, &x, FD_STEP).unwrap();
        assert!(jac.symplectic_residual() <= 1e-6);
        let lin = Oracle::Linear(LinearSystem::with_coupling(0.4));
        assert!(jacobian_fd(&lin, 0.4, 0.0, &x, FD_STEP).unwrap().symplectic_residual() <= 1e-6);
        let forced = Oracle::Forced(ForcedOscillator::new(1.0, 2.0, 1.0).unwrap());
        assert!(jacobian_fd(&forced, 0.3, 2.0, &x, FD_STEP).unwrap().symplectic_residual() <= 1e-6);
    }

    /// Plain Taylor series of exp(M), no scaling.
    fn series_exp(m: &Matrix, terms: usize) -> Matrix {
        let mut sum = Matrix::identity(m.rows());
        let mut term = Matrix::identity(m.rows());
        for k in 1..terms {
            term = term.matmul(m).scale(1.0 / k as f64);
            sum = sum.add(&term);
        }
        sum
    }

    #[test]
    fn linear_flow_identity_rotation() {
        let sys = LinearSystem::with_coupling(0.0);
        let x = PhaseState::scalar(1.0, 0.0);
        assert_eq!(sys.flow(0.0, &x), x);
        let h = core::f64::consts::FRAC_PI_2;
        let y = sys.flow(h, &x);
        // ṗ = −q, q̇ = p: (1, 0) rotates to (0, 1) after a quarter period.
        assert!(y.max_abs_diff(&PhaseState::scalar(0.0, 1.0)) < 1e-14);
        let series = series_exp(&sys.generator().scale(h), 40);
        assert!(sys.flow_matrix(h).max_abs_diff(&series) < 1e-14);
    }

    #[test]
    fn linear_flow_matches_closed_form() {
        // M = J⁻¹A = [[−c, −1], [1, c]], M² = −(1 − c²)I.
        let c = 0.4;
        let sys = LinearSystem::with_coupling(c);
        let w = libm::sqrt(1.0 - c * c);
        for h in [0.1, 0.5, 3.0, 10.0] {
            let m = sys.generator();
            let expected = Matrix::identity(2).scale(libm::cos(w * h)).add(&m.scale(libm::sin(w * h) / w));
            assert!(sys.flow_matrix(h).max_abs_diff(&expected) < 1e-13, "h={h}");
            assert!(sys.flow_matrix(h).symplectic_residual() < 1e-10);
        }
        let x = PhaseState::scalar(0.3, -0.8);
        let e0 = sys.hamiltonian(&x);
        assert!((sys.hamiltonian(&sys.flow(2.0, &x)) - e0).abs() < 1e-14);
    }

    #[test]
    fn linear_system_validation() {
        assert!(LinearSystem::new(Matrix::from_rows(2, 2, vec![1.0, 0.4, 0.3, 1.0])).is_err());
        assert!(LinearSystem::new(Matrix::identity(3)).is_err());
        assert!(LinearSystem::new(Matrix::identity(4)).is_ok());
    }

    #[test]
    fn forced_solution_trivial_cases() {
        let sys = ForcedOscillator::new(1.3, 2.0, 1.0).unwrap();
        assert!(sys.solution(0.0, -0.2, -0.5).unwrap().max_abs_diff(&PhaseState::scalar(-0.2, -0.5)) < 1e-15);
        let free = ForcedOscillator::new(1.3, 2.0, 0.0).unwrap();
        let t = 0.9;
        let (p0, q0, w0) = (0.4, -0.6, 1.3);
        let expected = PhaseState::scalar(
            p0 * libm::cos(w0 * t) - q0 * w0 * libm::sin(w0 * t),
            q0 * libm::cos(w0 * t) + p0 / w0 * libm::sin(w0 * t),
        );
        assert!(free.solution(t, p0, q0).unwrap().max_abs_diff(&expected) < 1e-15);
    }

    #[test]
    fn resonance_is_rejected() {
        assert!(matches!(ForcedOscillator::new(1.0, 1.0, 1.0), Err(Error::InvalidArgument(_))));
        let spec = SystemSpec::ForcedOscillator { omega0: 2.0, omega: 2.0, f0: 1.0 };
        assert!(spec.oracle().is_err());
    }

    /// Classical RK4 on ṗ = −ω₀²q + F₀ sin ωt, q̇ = p.
    fn rk4(sys: &ForcedOscillator, t_end: f64, p0: f64, q0: f64, steps: usize) -> (f64, f64) {
        let f = |t: f64, p: f64, q: f64| (-sys.omega0 * sys.omega0 * q + sys.f0 * libm::sin(sys.omega * t), p);
        let dt = t_end / steps as f64;
        let (mut p, mut q, mut t) = (p0, q0, 0.0);
        for _ in 0..steps {
            let k1 = f(t, p, q);
            let k2 = f(t + dt / 2.0, p + dt / 2.0 * k1.0, q + dt / 2.0 * k1.1);
            let k3 = f(t + dt / 2.0, p + dt / 2.0 * k2.0, q + dt / 2.0 * k2.1);
            let k4 = f(t + dt, p + dt * k3.0, q + dt * k3.1);
            p += dt / 6.0 * (k1.0 + 2.0 * k2.0 + 2.0 * k3.0 + k4.0);
            q += dt / 6.0 * (k1.1 + 2.0 * k2.1 + 2.0 * k3.1 + k4.1);
            t += dt;
        }
        (p, q)
    }

    #[test]
    fn forced_solution_matches_numerical_integration() {
        let sys = ForcedOscillator::new(1.0, 2.0, 1.0).unwrap();
        let (p, q) = rk4(&sys, 0.7, -0.2, -0.5, 7000);
        let y = sys.solution(0.7, -0.2, -0.5).unwrap();
        assert!((y.p[0] - p).abs() <= 1e-8 && (y.q[0] - q).abs() <= 1e-8);
    }

    #[test]
    fn forced_solution_satisfies_ode() {
        let sys = ForcedOscillator::new(1.0, 2.0, 1.0).unwrap();
        let step = 1e-5;
        for t in [0.3, 2.0, 7.5, 15.9] {
            let y = sys.solution(t, -0.2, -0.5).unwrap();
            let yp = sys.solution(t + step, -0.2, -0.5).unwrap();
            let ym = sys.solution(t - step, -0.2, -0.5).unwrap();
            let pdot = (yp.p[0] - ym.p[0]) / (2.0 * step);
            let qdot = (yp.q[0] - ym.q[0]) / (2.0 * step);
            assert!((pdot + y.q[0] - libm::sin(2.0 * t)).abs() <= 1e-5);
            assert!((qdot - y.p[0]).abs() <= 1e-5);
        }
    }

    #[test]
    fn forced_flow_is_consistent_with_solution() {
        let sys = ForcedOscillator::new(1.0, 2.0, 1.0).unwrap();
        let x0 = PhaseState::scalar(-0.2, -0.5);
        assert!(sys.flow(0.0, 3.1, &x0).unwrap().max_abs_diff(&sys.solution(3.1, -0.2, -0.5).unwrap()) < 1e-14);
        // two half steps = one step, starting mid-trajectory
        let mid = sys.solution(1.0, -0.2, -0.5).unwrap();
        let a = sys.flow(1.0, 0.8, &mid).unwrap();
        let b = sys.flow(1.4, 0.4, &sys.flow(1.0, 0.4, &mid).unwrap()).unwrap();
        assert!(a.max_abs_diff(&b) < 1e-14);
        assert!(a.max_abs_diff(&sys.solution(1.8, -0.2, -0.5).unwrap()) < 1e-14);
    }
}
