//! Files, experiments and the command line around `henonnet-core`.

pub mod config;
pub mod error;
pub mod experiment;
pub mod io;
pub mod json;
pub mod objective;

pub use error::{CliError, Result};
