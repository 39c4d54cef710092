//! Hénon-map networks.
//!
//! A network is a composition of layers; each layer applies one Hénon-like map
//! four times with the same potential `V` and shifts. The four variants differ
//! only in the single map:
//!
//! | variant   | map                                                          |
//! |-----------|--------------------------------------------------------------|
//! | `Original`| `(p, q) ↦ (∇V(p) − q, p + η)`                                |
//! | `NaiveT`  | `(p, q) ↦ (h∇V(p) − q, p + η)`                               |
//! | `T`       | `(p, q) ↦ (h∇V(p) − q + η_p, p + η_q)`                       |
//! | `NAT`     | `(t, p, q) ↦ (t + h/(4m), h∇ₚV(t, p) − q + η_p, p + η_q)`   |
//!
//! Every map is symplectic in `(p, q)` for any parameters, and for the
//! time-adaptive variants the layer is exactly the identity at `h = 0`.
//! `m` in the NAT time increment is the number of layers in the network, so
//! the whole network advances time by exactly `h`.

use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;
use rand_core::RngCore;
use serde::{Deserialize, Serialize};

use crate::linalg::Matrix;
use crate::potential::{Activation, ParamGradient, PotentialNet};
use crate::sampling::uniform;
use crate::{Error, Result};

/// A point `(p, q)` of phase space.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PhaseState {
    pub p: Vec<f64>,
    pub q: Vec<f64>,
}

impl PhaseState {
    pub fn new(p: Vec<f64>, q: Vec<f64>) -> Result<Self> {
        if p.is_empty() || p.len() != q.len() {
            return Err(Error::invalid("p and q must have the same nonzero length"));
        }
        Ok(PhaseState { p, q })
    }

    /// One-degree-of-freedom state.
    pub fn scalar(p: f64, q: f64) -> Self {
        PhaseState { p: vec![p], q: vec![q] }
    }

    /// Splits `[p..., q...]` in half.
    pub fn from_flat(x: &[f64]) -> Result<Self> {
        if x.is_empty() || x.len() % 2 != 0 {
            return Err(Error::invalid("flat phase state must have even nonzero length"));
        }
        let d = x.len() / 2;
        Ok(PhaseState { p: x[..d].to_vec(), q: x[d..].to_vec() })
    }

    pub fn dim(&self) -> usize {
        self.p.len()
    }

    pub fn to_flat(&self) -> Vec<f64> {
        self.p.iter().chain(&self.q).copied().collect()
    }

    pub fn is_finite(&self) -> bool {
        self.p.iter().chain(&self.q).all(|v| v.is_finite())
    }

    pub fn norm2(&self) -> f64 {
        libm::sqrt(self.p.iter().chain(&self.q).map(|v| v * v).sum())
    }

    pub fn max_abs_diff(&self, other: &PhaseState) -> f64 {
        self.p
            .iter()
            .chain(&self.q)
            .zip(other.p.iter().chain(&other.q))
            .map(|(a, b)| libm::fabs(a - b))
            .fold(0.0, f64::max)
    }

    pub fn dist2(&self, other: &PhaseState) -> f64 {
        libm::sqrt(
            self.p.iter().chain(&self.q).zip(other.p.iter().chain(&other.q)).map(|(a, b)| (a - b) * (a - b)).sum(),
        )
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Variant {
    Original,
    NaiveT,
    T,
    NAT,
}

impl Variant {
    pub const ALL: [Variant; 4] = [Variant::Original, Variant::NaiveT, Variant::T, Variant::NAT];

    /// Whether the map takes a step size `h`.
    pub fn is_time_adaptive(self) -> bool {
        !matches!(self, Variant::Original)
    }

    pub fn is_non_autonomous(self) -> bool {
        matches!(self, Variant::NAT)
    }

    pub fn has_eta_p(self) -> bool {
        matches!(self, Variant::T | Variant::NAT)
    }

    pub fn potential_input_dim(self, d: usize) -> usize {
        if self.is_non_autonomous() {
            d + 1
        } else {
            d
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Variant::Original => "Original",
            Variant::NaiveT => "NaiveT",
            Variant::T => "T",
            Variant::NAT => "NAT",
        }
    }

    pub fn parse(s: &str) -> Option<Variant> {
        Variant::ALL.into_iter().find(|v| v.name().eq_ignore_ascii_case(s))
    }
}

/// Potential and shifts shared by the four maps of one layer.
///
/// `eta_p` exists only for `T` and `NAT`; `Original` keeps its single shift in
/// `eta_q`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HenonLayer {
    #[serde(flatten)]
    pub potential: PotentialNet,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub eta_p: Option<Vec<f64>>,
    pub eta_q: Vec<f64>,
}

impl HenonLayer {
    pub fn parameter_count(&self) -> usize {
        self.potential.parameter_count() + self.eta_p.as_ref().map_or(0, Vec::len) + self.eta_q.len()
    }

    fn validate(&self, variant: Variant, d: usize) -> Result<()> {
        if self.potential.input_dim() != variant.potential_input_dim(d) {
            return Err(Error::invalid(alloc::format!(
                "{} layer needs a potential with {} inputs, found {}",
                variant.name(),
                variant.potential_input_dim(d),
                self.potential.input_dim()
            )));
        }
        if self.eta_q.len() != d {
            return Err(Error::invalid("eta_q length must equal d"));
        }
        match (&self.eta_p, variant.has_eta_p()) {
            (Some(e), true) if e.len() == d => {}
            (None, false) => {}
            (Some(_), true) => return Err(Error::invalid("eta_p length must equal d")),
            (None, true) => return Err(Error::invalid(alloc::format!("{} layer needs eta_p", variant.name()))),
            (Some(_), false) => return Err(Error::invalid(alloc::format!("{} layer has no eta_p", variant.name()))),
        }
        if !self.eta_q.iter().chain(self.eta_p.iter().flatten()).all(|v| v.is_finite()) {
            return Err(Error::invalid("shifts must be finite"));
        }
        Ok(())
    }
}

/// Shape of a network: what [`HenonNet::init`] builds.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Architecture {
    pub variant: Variant,
    pub d: usize,
    pub layers: usize,
    pub width: usize,
    #[serde(default)]
    pub activation: Activation,
}

impl Architecture {
    pub fn new(variant: Variant, d: usize, layers: usize, width: usize) -> Self {
        Architecture { variant, d, layers, width, activation: Activation::Tanh }
    }

    pub fn parameter_count(&self) -> usize {
        let n = self.variant.potential_input_dim(self.d);
        let shifts = if self.variant.has_eta_p() { 2 * self.d } else { self.d };
        self.layers * (self.width * n + 2 * self.width + shifts)
    }
}

/// A composition of Hénon layers of one variant.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "NetRepr")]
pub struct HenonNet {
    variant: Variant,
    d: usize,
    layers: Vec<HenonLayer>,
}

#[derive(Deserialize)]
struct NetRepr {
    variant: Variant,
    d: usize,
    layers: Vec<HenonLayer>,
}

impl TryFrom<NetRepr> for HenonNet {
    type Error = String;
    fn try_from(r: NetRepr) -> core::result::Result<Self, String> {
        HenonNet::from_layers(r.variant, r.d, r.layers).map_err(|e| alloc::format!("{e}"))
    }
}

/// Gradient of one layer's parameters.
#[derive(Debug, Clone, PartialEq)]
pub struct LayerGradient {
    pub potential: ParamGradient,
    pub eta_p: Option<Vec<f64>>,
    pub eta_q: Vec<f64>,
}

/// Gradients of a scalar `cotangentᵀ·forward(...)`.
#[derive(Debug, Clone, PartialEq)]
pub struct NetGradient {
    pub layers: Vec<LayerGradient>,
    /// Cotangent with respect to the input `(p, q)`.
    pub input: Vec<f64>,
}

impl NetGradient {
    /// Flattens the parameter part in [`HenonNet::params_flat`] order.
    pub fn params_flat(&self) -> Vec<f64> {
        let mut out = Vec::new();
        for l in &self.layers {
            out.extend_from_slice(&l.potential.dk);
            out.extend_from_slice(&l.potential.db);
            out.extend_from_slice(&l.potential.da);
            if let Some(e) = &l.eta_p {
                out.extend_from_slice(e);
            }
            out.extend_from_slice(&l.eta_q);
        }
        out
    }
}

struct Scratch {
    input: Vec<f64>,
    grad: Vec<f64>,
    w_grad: Vec<f64>,
    dx: Vec<f64>,
}

impl Scratch {
    fn new(n: usize) -> Self {
        Scratch { input: vec![0.0; n], grad: vec![0.0; n], w_grad: vec![0.0; n], dx: vec![0.0; n] }
    }
}

/// Applies one map in place to `z = [p..., q...]`.
#[inline]
fn apply_map(layer: &HenonLayer, variant: Variant, h: f64, t: f64, z: &mut [f64], s: &mut Scratch) {
    let d = z.len() / 2;
    let (p, q) = z.split_at_mut(d);
    let offset = if variant.is_non_autonomous() {
        s.input[0] = t;
        1
    } else {
        0
    };
    s.input[offset..].copy_from_slice(p);
    layer.potential.grad_x_into(&s.input, &mut s.grad);
    let coef = if variant.is_time_adaptive() { h } else { 1.0 };
    for i in 0..d {
        let eta_p = layer.eta_p.as_ref().map_or(0.0, |e| e[i]);
        let new_p = coef * s.grad[offset + i] - q[i] + eta_p;
        q[i] = p[i] + layer.eta_q[i];
        p[i] = new_p;
    }
}

impl HenonNet {
    pub fn from_layers(variant: Variant, d: usize, layers: Vec<HenonLayer>) -> Result<Self> {
        if d == 0 {
            return Err(Error::invalid("phase dimension d must be positive"));
        }
        if layers.is_empty() {
            return Err(Error::invalid("a network needs at least one layer"));
        }
        for layer in &layers {
            layer.validate(variant, d)?;
        }
        Ok(HenonNet { variant, d, layers })
    }

    /// Fan-based initialization of every potential, zero shifts.
    pub fn init(arch: &Architecture, rng: &mut impl RngCore) -> Result<Self> {
        if arch.width == 0 {
            return Err(Error::invalid("width must be positive"));
        }
        let n = arch.variant.potential_input_dim(arch.d);
        let layers = (0..arch.layers)
            .map(|_| HenonLayer {
                potential: PotentialNet::init(n, arch.width, arch.activation, rng),
                eta_p: arch.variant.has_eta_p().then(|| vec![0.0; arch.d]),
                eta_q: vec![0.0; arch.d],
            })
            .collect();
        HenonNet::from_layers(arch.variant, arch.d, layers)
    }

    /// Every parameter (including `b` and shifts) drawn from `U(-amplitude, amplitude)`.
    /// Used by the diagnostics, which must hold for arbitrary parameters.
    pub fn random(arch: &Architecture, amplitude: f64, rng: &mut impl RngCore) -> Result<Self> {
        let mut net = HenonNet::init(arch, rng)?;
        let params: Vec<f64> = (0..net.parameter_count()).map(|_| uniform(rng, -amplitude, amplitude)).collect();
        net.set_params_flat(&params)?;
        Ok(net)
    }

    pub fn variant(&self) -> Variant {
        self.variant
    }

    pub fn d(&self) -> usize {
        self.d
    }

    pub fn layers(&self) -> &[HenonLayer] {
        &self.layers
    }

    pub fn num_layers(&self) -> usize {
        self.layers.len()
    }

    pub fn architecture(&self) -> Architecture {
        let first = &self.layers[0].potential;
        Architecture {
            variant: self.variant,
            d: self.d,
            layers: self.layers.len(),
            width: first.width(),
            activation: first.activation(),
        }
    }

    /// Total number of trainable scalars.
    pub fn parameter_count(&self) -> usize {
        self.layers.iter().map(HenonLayer::parameter_count).sum()
    }

    /// Parameters in a fixed order: per layer `K` (row-major), `b`, `a`,
    /// `eta_p` (if present), `eta_q`.
    pub fn params_flat(&self) -> Vec<f64> {
        let mut out = Vec::with_capacity(self.parameter_count());
        for l in &self.layers {
            out.extend(l.potential.params().copied());
            if let Some(e) = &l.eta_p {
                out.extend_from_slice(e);
            }
            out.extend_from_slice(&l.eta_q);
        }
        out
    }

    pub fn set_params_flat(&mut self, params: &[f64]) -> Result<()> {
        if params.len() != self.parameter_count() {
            return Err(Error::invalid(alloc::format!(
                "expected {} parameters, got {}",
                self.parameter_count(),
                params.len()
            )));
        }
        let mut it = params.iter();
        for l in &mut self.layers {
            for (dst, src) in
                l.potential.params_mut().chain(l.eta_p.iter_mut().flatten()).chain(l.eta_q.iter_mut()).zip(&mut it)
            {
                *dst = *src;
            }
        }
        Ok(())
    }

    /// Appends the layers of `other` after this network's layers.
    pub fn concat(&self, other: &HenonNet) -> Result<HenonNet> {
        if self.variant != other.variant || self.d != other.d {
            return Err(Error::invalid("can only concatenate networks of the same variant and dimension"));
        }
        let mut layers = self.layers.clone();
        layers.extend(other.layers.iter().cloned());
        HenonNet::from_layers(self.variant, self.d, layers)
    }

    fn check_call(&self, h: f64, t: Option<f64>, x: &PhaseState) -> Result<()> {
        check_call(self.variant, self.d, h, t, x)
    }

    /// Time increment per map, `h / (4m)`.
    fn time_step(&self, h: f64) -> f64 {
        h / (4 * self.layers.len()) as f64
    }

    /// Evaluates the network. Returns the new state and, for `NAT`, the
    /// advanced time `t + h`.
    pub fn forward(&self, h: f64, t: Option<f64>, x: &PhaseState) -> Result<(PhaseState, Option<f64>)> {
        self.check_call(h, t, x)?;
        let mut z = x.to_flat();
        let mut s = Scratch::new(self.variant.potential_input_dim(self.d));
        let dt = self.time_step(h);
        let mut time = t.unwrap_or(0.0);
        for layer in &self.layers {
            for _ in 0..4 {
                apply_map(layer, self.variant, h, time, &mut z, &mut s);
                time += dt;
            }
        }
        let t_out = t.map(|t0| if self.variant.is_non_autonomous() { t0 + h } else { t0 });
        Ok((PhaseState::from_flat(&z)?, t_out))
    }

    /// Forward pass on a flat state that also returns the sub-map inputs.
    fn forward_taped(&self, h: f64, t0: f64, x: &[f64], s: &mut Scratch) -> (Vec<f64>, Vec<f64>) {
        let two_d = x.len();
        let maps = 4 * self.layers.len();
        let mut tape = Vec::with_capacity(maps * two_d);
        let mut z = x.to_vec();
        let dt = self.time_step(h);
        let mut time = t0;
        for layer in &self.layers {
            for _ in 0..4 {
                tape.extend_from_slice(&z);
                apply_map(layer, self.variant, h, time, &mut z, s);
                time += dt;
            }
        }
        (z, tape)
    }

    /// Forward pass plus exact reverse-mode gradient of `cotangentᵀ·ψ` added
    /// into `grad` (flat layout of [`params_flat`](Self::params_flat)).
    /// Returns `(ψ(x), cotangent w.r.t. x)`.
    pub fn forward_backward_flat(
        &self,
        h: f64,
        t: Option<f64>,
        x: &PhaseState,
        cotangent_fn: impl FnOnce(&[f64]) -> Vec<f64>,
        grad: &mut [f64],
    ) -> Result<(Vec<f64>, Vec<f64>)> {
        self.check_call(h, t, x)?;
        if grad.len() != self.parameter_count() {
            return Err(Error::invalid("gradient buffer has the wrong length"));
        }
        let d = self.d;
        let n = self.variant.potential_input_dim(d);
        let offset = n - d;
        let mut s = Scratch::new(n);
        let t0 = t.unwrap_or(0.0);
        let (out, tape) = self.forward_taped(h, t0, &x.to_flat(), &mut s);
        let cot = cotangent_fn(&out);
        if cot.len() != 2 * d {
            return Err(Error::invalid("cotangent must have length 2d"));
        }
        let (mut gp, mut gq) = (cot[..d].to_vec(), cot[d..].to_vec());
        let dt = self.time_step(h);
        let coef = if self.variant.is_time_adaptive() { h } else { 1.0 };

        // Layer offsets in the flat gradient.
        let mut starts = Vec::with_capacity(self.layers.len());
        let mut acc = 0;
        for l in &self.layers {
            starts.push(acc);
            acc += l.parameter_count();
        }

        for (li, layer) in self.layers.iter().enumerate().rev() {
            let pc = layer.potential.parameter_count();
            let m = layer.potential.width();
            let block = &mut grad[starts[li]..starts[li] + layer.parameter_count()];
            let (pot, shifts) = block.split_at_mut(pc);
            let (dk, rest) = pot.split_at_mut(m * n);
            let (db, da) = rest.split_at_mut(m);
            let (deta_p, deta_q) = if layer.eta_p.is_some() { shifts.split_at_mut(d) } else { shifts.split_at_mut(0) };
            for sub in (0..4).rev() {
                let idx = li * 4 + sub;
                let input = &tape[idx * 2 * d..(idx + 1) * 2 * d];
                let time = t0 + idx as f64 * dt;
                // p' = coef ∇V(p) − q + η_p ; q' = p + η_q
                for i in 0..d {
                    deta_q[i] += gq[i];
                }
                if !deta_p.is_empty() {
                    for i in 0..d {
                        deta_p[i] += gp[i];
                    }
                }
                if offset == 1 {
                    s.input[0] = time;
                    s.w_grad[0] = 0.0;
                }
                s.input[offset..].copy_from_slice(&input[..d]);
                for i in 0..d {
                    s.w_grad[offset + i] = coef * gp[i];
                }
                s.dx.iter_mut().for_each(|v| *v = 0.0);
                layer.potential.vjp_accumulate(&s.input, 0.0, &s.w_grad, dk, db, da, &mut s.dx);
                for i in 0..d {
                    let new_gq = -gp[i];
                    gp[i] = gq[i] + s.dx[offset + i];
                    gq[i] = new_gq;
                }
            }
        }
        let input_cot = gp.into_iter().chain(gq).collect();
        Ok((out, input_cot))
    }

    /// Exact gradients of `cotangentᵀ·forward(h, t, x)`.
    pub fn backward(&self, h: f64, t: Option<f64>, x: &PhaseState, cotangent: &[f64]) -> Result<NetGradient> {
        let mut flat = vec![0.0; self.parameter_count()];
        let cot = cotangent.to_vec();
        let (_, input) = self.forward_backward_flat(h, t, x, move |_| cot, &mut flat)?;
        let mut it = flat.into_iter();
        let layers = self
            .layers
            .iter()
            .map(|l| {
                let n = l.potential.input_dim();
                let m = l.potential.width();
                let mut take = |k: usize| (&mut it).take(k).collect::<Vec<f64>>();
                let potential = ParamGradient { dk: take(n * m), db: take(m), da: take(m) };
                let eta_p = l.eta_p.as_ref().map(|e| take(e.len()));
                let eta_q = take(l.eta_q.len());
                LayerGradient { potential, eta_p, eta_q }
            })
            .collect();
        Ok(NetGradient { layers, input })
    }
}

fn check_call(variant: Variant, d: usize, h: f64, t: Option<f64>, x: &PhaseState) -> Result<()> {
    if x.p.len() != d || x.q.len() != d {
        return Err(Error::invalid(alloc::format!("state must have p and q of length {d}")));
    }
    if !h.is_finite() {
        return Err(Error::invalid("step size must be finite"));
    }
    match (variant.is_non_autonomous(), t) {
        (true, None) => Err(Error::invalid("NAT networks need a time coordinate")),
        (false, Some(_)) => Err(Error::invalid(alloc::format!("{} networks take no time coordinate", variant.name()))),
        (true, Some(t)) if !t.is_finite() => Err(Error::invalid("time must be finite")),
        _ => Ok(()),
    }
}

/// One Hénon-like map. `m_layers` is only used by `NAT` (time increment `h/(4m)`).
pub fn henon_map(
    layer: &HenonLayer,
    variant: Variant,
    h: f64,
    t: Option<f64>,
    x: &PhaseState,
    m_layers: usize,
) -> Result<(PhaseState, Option<f64>)> {
    apply_repeated(layer, variant, h, t, x, m_layers, 1)
}

/// Four-fold application of the same map.
pub fn henon_layer(
    layer: &HenonLayer,
    variant: Variant,
    h: f64,
    t: Option<f64>,
    x: &PhaseState,
    m_layers: usize,
) -> Result<(PhaseState, Option<f64>)> {
    apply_repeated(layer, variant, h, t, x, m_layers, 4)
}

fn apply_repeated(
    layer: &HenonLayer,
    variant: Variant,
    h: f64,
    t: Option<f64>,
    x: &PhaseState,
    m_layers: usize,
    times: usize,
) -> Result<(PhaseState, Option<f64>)> {
    let d = x.dim();
    check_call(variant, d, h, t, x)?;
    layer.validate(variant, d)?;
    if m_layers == 0 {
        return Err(Error::invalid("m_layers must be positive"));
    }
    let mut z = x.to_flat();
    let mut s = Scratch::new(variant.potential_input_dim(d));
    let dt = h / (4 * m_layers) as f64;
    let mut time = t.unwrap_or(0.0);
    for _ in 0..times {
        apply_map(layer, variant, h, time, &mut z, &mut s);
        time += dt;
    }
    let t_out = variant.is_non_autonomous().then_some(time);
    Ok((PhaseState::from_flat(&z)?, t_out))
}

/// Anything that advances a phase state by a step `h`: networks, ground-truth
/// flows and test fixtures. Diagnostics and rollouts are written against it.
pub trait FlowMap {
    fn phase_dim(&self) -> usize;

    /// False for maps without a step-size input.
    fn is_time_adaptive(&self) -> bool {
        true
    }

    /// True when the map reads the absolute time.
    fn is_non_autonomous(&self) -> bool {
        false
    }

    /// Advances `x` from time `t` by `h`. Autonomous maps ignore `t`.
    fn advance(&self, h: f64, t: f64, x: &PhaseState) -> Result<PhaseState>;
}

impl FlowMap for HenonNet {
    fn phase_dim(&self) -> usize {
        self.d
    }

    fn is_time_adaptive(&self) -> bool {
        self.variant.is_time_adaptive()
    }

    fn is_non_autonomous(&self) -> bool {
        self.variant.is_non_autonomous()
    }

    fn advance(&self, h: f64, t: f64, x: &PhaseState) -> Result<PhaseState> {
        let t = self.variant.is_non_autonomous().then_some(t);
        Ok(self.forward(h, t, x)?.0)
    }
}

impl<M: FlowMap + ?Sized> FlowMap for &M {
    fn phase_dim(&self) -> usize {
        (**self).phase_dim()
    }
    fn is_time_adaptive(&self) -> bool {
        (**self).is_time_adaptive()
    }
    fn is_non_autonomous(&self) -> bool {
        (**self).is_non_autonomous()
    }
    fn advance(&self, h: f64, t: f64, x: &PhaseState) -> Result<PhaseState> {
        (**self).advance(h, t, x)
    }
}

/// Default central-difference step for Jacobians and induced fields.
pub const FD_STEP: f64 = 1e-5;

/// Central-difference Jacobian of `x ↦ map.advance(h, t, x)` in `(p, q)`.
pub fn jacobian_fd(map: &impl FlowMap, h: f64, t: f64, x: &PhaseState, step: f64) -> Result<Matrix> {
    if !(step > 0.0) {
        return Err(Error::invalid("finite-difference step must be positive"));
    }
    let base = x.to_flat();
    let n = base.len();
    let mut jac = Matrix::zeros(n, n);
    for j in 0..n {
        let mut plus = base.clone();
        let mut minus = base.clone();
        plus[j] += step;
        minus[j] -= step;
        let fp = map.advance(h, t, &PhaseState::from_flat(&plus)?)?.to_flat();
        let fm = map.advance(h, t, &PhaseState::from_flat(&minus)?)?.to_flat();
        for i in 0..n {
            jac[(i, j)] = (fp[i] - fm[i]) / (2.0 * step);
        }
    }
    Ok(jac)
}

/// `∂ₕψ(0, x)` by a central difference in `h`.
pub fn induced_vector_field(map: &impl FlowMap, t: f64, x: &PhaseState, step: f64) -> Result<Vec<f64>> {
    if !map.is_time_adaptive() {
        return Err(Error::invalid("the induced vector field needs a map with a step-size input"));
    }
    if !(step > 0.0) {
        return Err(Error::invalid("finite-difference step must be positive"));
    }
    let fp = map.advance(step, t, x)?.to_flat();
    let fm = map.advance(-step, t, x)?.to_flat();
    Ok(fp.iter().zip(&fm).map(|(a, b)| (a - b) / (2.0 * step)).collect())
}
