//! Separation benchmark: instantaneous MIMO capacity and a Gaussian
//! rate-distortion stand-in for the image codec.

use crate::channel::{sample_channel, ChannelParams, ChannelState, Seed};
use crate::numerics::{hermitian, logdet_hpd, matmul, ComplexMatrix};

/// `log₂ det(I_{N_t} + (P/σ²)·HᴴH)` in bits per channel use.
pub fn mimo_capacity(state: &ChannelState, params: &ChannelParams) -> f64 {
    let h = &state.h;
    let gram = matmul(&hermitian(h), h).expect("HᴴH is square");
    let m = ComplexMatrix::identity(h.cols())
        .add(&gram.scale(params.power_to_noise()))
        .expect("same shape");
    // I + ρ·HᴴH has every eigenvalue ≥ 1.
    logdet_hpd(&m)
        .expect("I + ρ·HᴴH is positive definite")
        .max(0.0)
}

#[derive(Debug, Clone, PartialEq)]
pub struct CapacityReport {
    pub per_realization: Vec<f64>,
    pub ergodic_mean: f64,
    pub ergodic_std: f64,
}

impl CapacityReport {
    pub fn from_samples(per_realization: Vec<f64>) -> Self {
        let n = per_realization.len() as f64;
        let mean = per_realization.iter().sum::<f64>() / n;
        let var = if per_realization.len() > 1 {
            per_realization
                .iter()
                .map(|c| (c - mean).powi(2))
                .sum::<f64>()
                / (n - 1.0)
        } else {
            0.0
        };
        Self {
            per_realization,
            ergodic_mean: mean,
            ergodic_std: var.sqrt(),
        }
    }
}

/// Monte Carlo capacity over `trials` channel draws. Trial `t` uses stream
/// `seed.stream + t`.
///
/// # Panics
///
/// Panics if `trials` is zero.
pub fn ergodic_capacity(params: &ChannelParams, trials: usize, seed: Seed) -> CapacityReport {
    assert!(trials >= 1, "at least one trial is required");
    let samples = (0..trials as u64)
        .map(|t| {
            let st = sample_channel(params, seed.with_stream(seed.stream.wrapping_add(t)));
            mimo_capacity(&st, params)
        })
        .collect();
    CapacityReport::from_samples(samples)
}

/// Gaussian distortion-rate function at `k·C/n` bits per real sample:
/// `σ²·2^(−2kC/n)`.
pub fn separation_distortion(
    capacity_bits_per_use: f64,
    k: usize,
    n: usize,
    src_variance: f64,
) -> f64 {
    let rate = k as f64 * capacity_bits_per_use / n as f64;
    src_variance * (-2.0 * rate).exp2()
}
