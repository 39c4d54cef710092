//! Full-batch MSE training with Adam.
//!
//! An epoch is one gradient step on the whole dataset. Per-sample terms are
//! reduced with a fixed pairwise tree, so any caller that computes the terms
//! in parallel and reduces them with [`reduce_terms`] gets bitwise the same
//! loss and gradient as the serial [`mse_loss`].

use alloc::vec;
use alloc::vec::Vec;
use serde::{Deserialize, Serialize};

use crate::datasets::{Dataset, Sample};
use crate::layers::HenonNet;
use crate::{Error, Result};

/// Fails unless the dataset can be fed to the network. Time-independent
/// variants accept time-stamped samples and ignore `t`; a NAT network needs
/// `t` on every sample.
pub fn check_compatible(net: &HenonNet, dataset: &Dataset) -> Result<()> {
    let Some(first) = dataset.samples.first() else {
        return Err(Error::invalid("dataset is empty"));
    };
    if first.x.dim() != net.d() {
        return Err(Error::invalid("dataset dimension does not match the network"));
    }
    if net.variant().is_non_autonomous() && !dataset.is_non_autonomous() {
        return Err(Error::invalid(alloc::format!(
            "{} network needs a dataset with a time column",
            net.variant().name()
        )));
    }
    Ok(())
}

/// `‖ψ(h, t, x) − y‖²` and its parameter gradient (not divided by N).
pub fn sample_term(net: &HenonNet, sample: &Sample) -> Result<(f64, Vec<f64>)> {
    let mut grad = vec![0.0; net.parameter_count()];
    let target = sample.y.to_flat();
    let mut loss = 0.0;
    net.forward_backward_flat(
        sample.h,
        if net.variant().is_non_autonomous() { sample.t } else { None },
        &sample.x,
        |out| {
            let r: Vec<f64> = out.iter().zip(&target).map(|(a, b)| a - b).collect();
            loss = r.iter().map(|v| v * v).sum();
            r.into_iter().map(|v| 2.0 * v).collect()
        },
        &mut grad,
    )?;
    Ok((loss, grad))
}

pub fn pairwise_sum(xs: &[f64]) -> f64 {
    match xs.len() {
        0 => 0.0,
        1 => xs[0],
        n => pairwise_sum(&xs[..n / 2]) + pairwise_sum(&xs[n / 2..]),
    }
}

fn pairwise_sum_vectors(vs: &[Vec<f64>]) -> Vec<f64> {
    match vs.len() {
        0 => Vec::new(),
        1 => vs[0].clone(),
        n => {
            let mut left = pairwise_sum_vectors(&vs[..n / 2]);
            let right = pairwise_sum_vectors(&vs[n / 2..]);
            for (l, r) in left.iter_mut().zip(right) {
                *l += r;
            }
            left
        }
    }
}

/// Mean of per-sample terms in sample order.
pub fn reduce_terms(terms: Vec<(f64, Vec<f64>)>) -> (f64, Vec<f64>) {
    let n = terms.len() as f64;
    let (losses, grads): (Vec<f64>, Vec<Vec<f64>>) = terms.into_iter().unzip();
    let loss = pairwise_sum(&losses) / n;
    let grad = pairwise_sum_vectors(&grads).into_iter().map(|g| g / n).collect();
    (loss, grad)
}

/// `L = (1/N) Σ ‖ψ(xᵢ) − yᵢ‖²` and its gradient in [`HenonNet::params_flat`] order.
pub fn mse_loss(net: &HenonNet, dataset: &Dataset) -> Result<(f64, Vec<f64>)> {
    check_compatible(net, dataset)?;
    let terms = dataset.samples.iter().map(|s| sample_term(net, s)).collect::<Result<Vec<_>>>()?;
    Ok(reduce_terms(terms))
}

/// Loss only.
pub fn mse_value(net: &HenonNet, dataset: &Dataset) -> Result<f64> {
    check_compatible(net, dataset)?;
    let losses = dataset
        .samples
        .iter()
        .map(|s| {
            let t = if net.variant().is_non_autonomous() { s.t } else { None };
            let (y, _) = net.forward(s.h, t, &s.x)?;
            Ok(y.to_flat().iter().zip(s.y.to_flat()).map(|(a, b)| (a - b) * (a - b)).sum())
        })
        .collect::<Result<Vec<f64>>>()?;
    Ok(pairwise_sum(&losses) / losses.len() as f64)
}

/// Bias-corrected Adam.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AdamState {
    pub step_count: u64,
    pub first_moment: Vec<f64>,
    pub second_moment: Vec<f64>,
    pub beta1: f64,
    pub beta2: f64,
    pub epsilon: f64,
    pub learning_rate: f64,
}

impl AdamState {
    /// `β₁ = 0.9`, `β₂ = 0.999`, `ε = 1e−8`.
    pub fn new(num_params: usize, learning_rate: f64) -> Self {
        AdamState {
            step_count: 0,
            first_moment: vec![0.0; num_params],
            second_moment: vec![0.0; num_params],
            beta1: 0.9,
            beta2: 0.999,
            epsilon: 1e-8,
            learning_rate,
        }
    }

    pub fn step(&mut self, params: &mut [f64], grads: &[f64]) -> Result<()> {
        if params.len() != self.first_moment.len() || grads.len() != params.len() {
            return Err(Error::invalid("Adam state, parameters and gradients must have the same length"));
        }
        self.step_count += 1;
        let t = self.step_count as f64;
        let c1 = 1.0 - libm::pow(self.beta1, t);
        let c2 = 1.0 - libm::pow(self.beta2, t);
        for i in 0..params.len() {
            let g = grads[i];
            let m = &mut self.first_moment[i];
            let v = &mut self.second_moment[i];
            *m = self.beta1 * *m + (1.0 - self.beta1) * g;
            *v = self.beta2 * *v + (1.0 - self.beta2) * g * g;
            let m_hat = *m / c1;
            let v_hat = *v / c2;
            params[i] -= self.learning_rate * m_hat / (libm::sqrt(v_hat) + self.epsilon);
        }
        Ok(())
    }
}

fn l2_norm(v: &[f64]) -> f64 {
    libm::sqrt(v.iter().map(|x| x * x).sum())
}

/// Runs `epochs` full-batch Adam steps. `objective` returns the loss and
/// gradient at the current parameters; `on_epoch(epoch, loss)` sees the loss
/// before each update, with `epoch` counted from the optimizer's step count so
/// resumed runs keep numbering. Returns the recorded losses.
pub fn train<F, C>(
    net: &mut HenonNet,
    adam: &mut AdamState,
    epochs: usize,
    mut objective: F,
    mut on_epoch: C,
) -> Result<Vec<f64>>
where
    F: FnMut(&HenonNet) -> Result<(f64, Vec<f64>)>,
    C: FnMut(u64, f64),
{
    let mut losses = Vec::with_capacity(epochs);
    let mut params = net.params_flat();
    for _ in 0..epochs {
        let epoch = adam.step_count;
        let (loss, grad) = objective(net)?;
        if !loss.is_finite() || !grad.iter().all(|g| g.is_finite()) {
            return Err(Error::NumericalAbort { epoch: epoch as usize, loss, param_norm: l2_norm(&params) });
        }
        on_epoch(epoch, loss);
        losses.push(loss);
        adam.step(&mut params, &grad)?;
        net.set_params_flat(&params)?;
    }
    Ok(losses)
}
