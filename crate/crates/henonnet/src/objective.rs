//! Full-batch loss with per-sample terms computed on the rayon pool.
//!
//! Terms are collected in sample order and reduced with the core's fixed
//! pairwise tree, so the result is bitwise identical to the serial
//! [`henonnet_core::training::mse_loss`] for any thread count.

use henonnet_core::datasets::Dataset;
use henonnet_core::training::{check_compatible, reduce_terms, sample_term};
use henonnet_core::HenonNet;
use rayon::prelude::*;

pub fn mse_loss(net: &HenonNet, dataset: &Dataset) -> henonnet_core::Result<(f64, Vec<f64>)> {
    check_compatible(net, dataset)?;
    let terms = dataset.samples.par_iter().map(|s| sample_term(net, s)).collect::<henonnet_core::Result<Vec<_>>>()?;
    Ok(reduce_terms(terms))
}

#[cfg(test)]
mod tests {
    use super::*;
    use henonnet_core::datasets::{generate, SampleSpec};
    use henonnet_core::layers::{Architecture, Variant};
    use henonnet_core::sampling::seeded;

    #[test]
    fn matches_serial_loss_bitwise() {
        let ds = generate(&SampleSpec::pendulum(1)).unwrap();
        let net = HenonNet::init(&Architecture::new(Variant::T, 1, 3, 8), &mut seeded(2)).unwrap();
        let serial = henonnet_core::training::mse_loss(&net, &ds).unwrap();
        let pool = rayon::ThreadPoolBuilder::new().num_threads(4).build().unwrap();
        let parallel = pool.install(|| mse_loss(&net, &ds)).unwrap();
        assert_eq!(serial.0.to_bits(), parallel.0.to_bits());
        assert!(serial.1.iter().zip(&parallel.1).all(|(a, b)| a.to_bits() == b.to_bits()));
    }
}
