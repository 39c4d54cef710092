//! One-hidden-layer scalar potentials `V(x) = aᵀσ(Kx + b)`.
//!
//! Besides evaluation, a potential provides its input gradient `∇ₓV` in closed
//! form (every Hénon map needs it in the forward pass) and a vector-Jacobian
//! product that differentiates `w·V(x) + wgᵀ∇ₓV(x)` with respect to the
//! parameters and to `x`. The latter involves `σ''` and is what makes training
//! through `∇ₓV` possible without a general autodiff graph.

use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;
use rand_core::RngCore;
use serde::{Deserialize, Serialize};

use crate::sampling::uniform;
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Activation {
    #[default]
    Tanh,
    Sigmoid,
}

impl Activation {
    /// `(σ(z), σ'(z), σ''(z))`.
    #[inline]
    pub fn eval(self, z: f64) -> (f64, f64, f64) {
        match self {
            Activation::Tanh => {
                let t = libm::tanh(z);
                let d1 = 1.0 - t * t;
                (t, d1, -2.0 * t * d1)
            }
            Activation::Sigmoid => {
                let s = 1.0 / (1.0 + libm::exp(-z));
                let d1 = s * (1.0 - s);
                (s, d1, d1 * (1.0 - 2.0 * s))
            }
        }
    }

    #[inline]
    fn first_derivative(self, z: f64) -> f64 {
        match self {
            Activation::Tanh => {
                let t = libm::tanh(z);
                1.0 - t * t
            }
            Activation::Sigmoid => {
                let s = 1.0 / (1.0 + libm::exp(-z));
                s * (1.0 - s)
            }
        }
    }
}

/// Scalar network with one hidden layer of `width` units.
///
/// `k` is stored row-major (`width` rows of `input_dim` entries).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "PotentialRepr", into = "PotentialRepr")]
pub struct PotentialNet {
    input_dim: usize,
    width: usize,
    activation: Activation,
    k: Vec<f64>,
    b: Vec<f64>,
    a: Vec<f64>,
}

/// Gradient with respect to the parameters of a [`PotentialNet`].
#[derive(Debug, Clone, PartialEq)]
pub struct ParamGradient {
    /// Row-major, same layout as the owning net's `K`.
    pub dk: Vec<f64>,
    pub db: Vec<f64>,
    pub da: Vec<f64>,
}

impl ParamGradient {
    pub fn zeros(input_dim: usize, width: usize) -> Self {
        ParamGradient { dk: vec![0.0; input_dim * width], db: vec![0.0; width], da: vec![0.0; width] }
    }

    pub fn is_finite(&self) -> bool {
        self.dk.iter().chain(&self.db).chain(&self.da).all(|v| v.is_finite())
    }
}

impl PotentialNet {
    /// Builds a net from explicit parameters. `k` is row-major `width × input_dim`.
    pub fn new(
        input_dim: usize,
        width: usize,
        activation: Activation,
        k: Vec<f64>,
        b: Vec<f64>,
        a: Vec<f64>,
    ) -> Result<Self> {
        if input_dim == 0 || width == 0 {
            return Err(Error::invalid("potential input_dim and width must be positive"));
        }
        if k.len() != input_dim * width || b.len() != width || a.len() != width {
            return Err(Error::invalid(alloc::format!(
                "potential parameter shapes: K has {} entries (want {}), b {} and a {} (want {})",
                k.len(),
                input_dim * width,
                b.len(),
                a.len(),
                width
            )));
        }
        if !k.iter().chain(&b).chain(&a).all(|v| v.is_finite()) {
            return Err(Error::invalid("potential parameters must be finite"));
        }
        Ok(PotentialNet { input_dim, width, activation, k, b, a })
    }

    pub fn zeros(input_dim: usize, width: usize, activation: Activation) -> Self {
        PotentialNet {
            input_dim,
            width,
            activation,
            k: vec![0.0; input_dim * width],
            b: vec![0.0; width],
            a: vec![0.0; width],
        }
    }

    /// Fan-based uniform initialization: `K ~ U(±√(6/(n+m)))`, `b = 0`,
    /// `a ~ U(±√(6/(m+1)))`. Draw order: `K` row-major, then `a`.
    pub fn init(input_dim: usize, width: usize, activation: Activation, rng: &mut impl RngCore) -> Self {
        let mut net = PotentialNet::zeros(input_dim, width, activation);
        let k_lim = libm::sqrt(6.0 / (input_dim + width) as f64);
        let a_lim = libm::sqrt(6.0 / (width + 1) as f64);
        for v in &mut net.k {
            *v = uniform(rng, -k_lim, k_lim);
        }
        for v in &mut net.a {
            *v = uniform(rng, -a_lim, a_lim);
        }
        net
    }

    pub fn input_dim(&self) -> usize {
        self.input_dim
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn activation(&self) -> Activation {
        self.activation
    }

    pub fn k(&self) -> &[f64] {
        &self.k
    }

    pub fn b(&self) -> &[f64] {
        &self.b
    }

    pub fn a(&self) -> &[f64] {
        &self.a
    }

    pub fn k_mut(&mut self) -> &mut [f64] {
        &mut self.k
    }

    pub fn b_mut(&mut self) -> &mut [f64] {
        &mut self.b
    }

    pub fn a_mut(&mut self) -> &mut [f64] {
        &mut self.a
    }

    /// `m·n + 2m`.
    pub fn parameter_count(&self) -> usize {
        self.width * self.input_dim + 2 * self.width
    }

    /// Parameters in the order `K` (row-major), `b`, `a`.
    pub fn params(&self) -> impl Iterator<Item = &f64> {
        self.k.iter().chain(&self.b).chain(&self.a)
    }

    pub fn params_mut(&mut self) -> impl Iterator<Item = &mut f64> {
        self.k.iter_mut().chain(self.b.iter_mut()).chain(self.a.iter_mut())
    }

    fn check_input(&self, x: &[f64]) -> Result<()> {
        if x.len() != self.input_dim {
            return Err(Error::invalid(alloc::format!(
                "potential expects input of length {}, got {}",
                self.input_dim,
                x.len()
            )));
        }
        Ok(())
    }

    #[inline]
    fn pre_activation(&self, j: usize, x: &[f64]) -> f64 {
        let row = &self.k[j * self.input_dim..(j + 1) * self.input_dim];
        row.iter().zip(x).fold(self.b[j], |acc, (k, x)| acc + k * x)
    }

    pub fn eval(&self, x: &[f64]) -> Result<f64> {
        self.check_input(x)?;
        Ok((0..self.width).map(|j| self.a[j] * self.activation.eval(self.pre_activation(j, x)).0).sum())
    }

    /// `∇ₓV(x) = Kᵀ(a ⊙ σ'(Kx + b))`.
    pub fn grad_x(&self, x: &[f64]) -> Result<Vec<f64>> {
        self.check_input(x)?;
        let mut out = vec![0.0; self.input_dim];
        self.grad_x_into(x, &mut out);
        Ok(out)
    }

    /// Unchecked gradient into a caller-provided buffer (overwritten).
    #[inline]
    pub(crate) fn grad_x_into(&self, x: &[f64], out: &mut [f64]) {
        debug_assert_eq!(x.len(), self.input_dim);
        out.iter_mut().for_each(|v| *v = 0.0);
        for j in 0..self.width {
            let c = self.a[j] * self.activation.first_derivative(self.pre_activation(j, x));
            let row = &self.k[j * self.input_dim..(j + 1) * self.input_dim];
            for (o, k) in out.iter_mut().zip(row) {
                *o += c * k;
            }
        }
    }

    /// Reverse-mode rule for `L = w_value·V(x) + w_gradᵀ∇ₓV(x)`.
    ///
    /// Returns `(∂L/∂θ, ∂L/∂x)`.
    pub fn vjp_params(&self, x: &[f64], w_value: f64, w_grad: &[f64]) -> Result<(ParamGradient, Vec<f64>)> {
        self.check_input(x)?;
        if w_grad.len() != self.input_dim {
            return Err(Error::invalid("w_grad length must equal the potential input dimension"));
        }
        let mut grad = ParamGradient::zeros(self.input_dim, self.width);
        let mut dx = vec![0.0; self.input_dim];
        self.vjp_accumulate(x, w_value, w_grad, &mut grad.dk, &mut grad.db, &mut grad.da, &mut dx);
        Ok((grad, dx))
    }

    /// Like [`vjp_params`](Self::vjp_params) but adds into existing buffers
    /// laid out as `K` (row-major), `b`, `a`.
    #[allow(clippy::too_many_arguments)]
    pub(crate) fn vjp_accumulate(
        &self,
        x: &[f64],
        w_value: f64,
        w_grad: &[f64],
        dk: &mut [f64],
        db: &mut [f64],
        da: &mut [f64],
        dx: &mut [f64],
    ) {
        let n = self.input_dim;
        for j in 0..self.width {
            let row = &self.k[j * n..(j + 1) * n];
            let z = self.pre_activation(j, x);
            let (s, s1, s2) = self.activation.eval(z);
            // u = (K w_grad)_j
            let u: f64 = row.iter().zip(w_grad).map(|(k, w)| k * w).sum();
            let aj = self.a[j];
            da[j] += w_value * s + s1 * u;
            let c = aj * (w_value * s1 + s2 * u);
            db[j] += c;
            let e = aj * s1;
            let dk_row = &mut dk[j * n..(j + 1) * n];
            for i in 0..n {
                dk_row[i] += c * x[i] + e * w_grad[i];
                dx[i] += row[i] * c;
            }
        }
    }
}

#[derive(Serialize, Deserialize)]
struct PotentialRepr {
    input_dim: usize,
    width: usize,
    activation: Activation,
    #[serde(rename = "K")]
    k: Vec<Vec<f64>>,
    b: Vec<f64>,
    a: Vec<f64>,
}

impl From<PotentialNet> for PotentialRepr {
    fn from(net: PotentialNet) -> Self {
        let k = net.k.chunks(net.input_dim).map(|r| r.to_vec()).collect();
        PotentialRepr { input_dim: net.input_dim, width: net.width, activation: net.activation, k, b: net.b, a: net.a }
    }
}

impl TryFrom<PotentialRepr> for PotentialNet {
    type Error = String;

    fn try_from(r: PotentialRepr) -> core::result::Result<Self, String> {
        if r.k.len() != r.width || r.k.iter().any(|row| row.len() != r.input_dim) {
            return Err(alloc::format!("K must be {} rows of {} entries", r.width, r.input_dim));
        }
        let k = r.k.into_iter().flatten().collect();
        PotentialNet::new(r.input_dim, r.width, r.activation, k, r.b, r.a).map_err(|e| alloc::format!("{e}"))
    }
}
