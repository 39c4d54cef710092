//! Symplectic flow-map networks built from Hénon-like maps.
//!
//! The crate is `no_std` (with `alloc`) and contains everything that is pure
//! computation: one-hidden-layer potentials with closed-form derivatives, the
//! four Hénon-map network variants with exact reverse-mode gradients,
//! ground-truth flows for the reference systems, seeded dataset generation,
//! MSE/Adam training and the structural diagnostics. File formats and the
//! command line live in the `henonnet` crate.

#![cfg_attr(not(test), no_std)]

extern crate alloc;

pub mod datasets;
pub mod diagnostics;
mod error;
pub mod layers;
pub mod linalg;
pub mod oracles;
pub mod potential;
pub mod sampling;
pub mod training;

pub use error::{Error, Result};
pub use layers::{FlowMap, HenonLayer, HenonNet, PhaseState, Variant};
pub use potential::{Activation, ParamGradient, PotentialNet};
