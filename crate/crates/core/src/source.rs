//! Gaussian source and linear pair-packing codec.
//!
//! Real samples are packed two at a time into complex latent symbols,
//! `z_j = (x_{2j-1} + i·x_{2j})/√2`, and the tail coordinates that do not fit
//! in `l` symbols are dropped. The decoder unpacks the channel estimates and
//! fills dropped coordinates with the prior mean. Because the receiver
//! estimates are already MMSE-shrunk, the end-to-end distortion has a
//! closed form, [`analytic_distortion`].

use crate::channel::Seed;
use crate::numerics::Complex;
use crate::receiver::EqualizedLatent;
use crate::stm::{normalization_factor, LatentVector, StmError};
use rand::Rng;
use rand_distr::StandardNormal;
use std::f64::consts::SQRT_2;
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SourceError {
    #[error("invalid source: {0}")]
    Invalid(String),
    #[error("expected {expected} samples, got {got}")]
    Length { expected: usize, got: usize },
    #[error(transparent)]
    Stm(#[from] StmError),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GaussianSource {
    pub n: usize,
    pub variance: f64,
}

impl GaussianSource {
    pub fn new(n: usize, variance: f64) -> Result<Self, SourceError> {
        if n == 0 || n % 2 != 0 {
            return Err(SourceError::Invalid(format!(
                "length must be positive and even, got {n}"
            )));
        }
        if !(variance > 0.0 && variance.is_finite()) {
            return Err(SourceError::Invalid(format!(
                "variance must be positive, got {variance}"
            )));
        }
        Ok(Self { n, variance })
    }

    pub fn unit(n: usize) -> Result<Self, SourceError> {
        Self::new(n, 1.0)
    }
}

/// i.i.d. N(0, variance) samples.
pub fn sample_source(src: &GaussianSource, seed: Seed) -> Vec<f64> {
    let mut rng = seed.rng();
    let s = src.variance.sqrt();
    (0..src.n)
        .map(|_| s * rng.sample::<f64, _>(StandardNormal))
        .collect()
}

/// Packs the first `2·l` of `n` real samples into `l` complex symbols.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct LinearCodec {
    pub n: usize,
    pub l: usize,
}

impl LinearCodec {
    pub fn new(n: usize, l: usize) -> Result<Self, SourceError> {
        if l == 0 || 2 * l > n {
            return Err(SourceError::Invalid(format!(
                "latent length {l} must satisfy 1 <= l and 2l <= n = {n}"
            )));
        }
        Ok(Self { n, l })
    }

    /// Coordinates that are not transmitted.
    pub fn dropped(&self) -> usize {
        self.n - 2 * self.l
    }
}

/// Latent vector plus the normalization factor the decoder must undo.
#[derive(Debug, Clone, PartialEq)]
pub struct EncodedSource {
    pub latent: LatentVector,
    pub norm: f64,
}

pub fn encode_source(codec: &LinearCodec, x: &[f64]) -> Result<EncodedSource, SourceError> {
    if x.len() != codec.n {
        return Err(SourceError::Length {
            expected: codec.n,
            got: x.len(),
        });
    }
    let raw: Vec<Complex> = x[..2 * codec.l]
        .chunks_exact(2)
        .map(|p| Complex::new(p[0], p[1]) / SQRT_2)
        .collect();
    let norm = normalization_factor(&raw)?;
    let latent = LatentVector::from_symbols(raw.into_iter().map(|z| z * norm).collect())?;
    Ok(EncodedSource { latent, norm })
}

pub fn decode_source(
    codec: &LinearCodec,
    z_hat: &EqualizedLatent,
    norm: f64,
) -> Result<Vec<f64>, SourceError> {
    if z_hat.len() != codec.l {
        return Err(SourceError::Length {
            expected: codec.l,
            got: z_hat.len(),
        });
    }
    let a = SQRT_2 / norm;
    let mut x = Vec::with_capacity(codec.n);
    for z in &z_hat.symbols {
        x.push(a * z.re);
        x.push(a * z.im);
    }
    x.resize(codec.n, 0.0);
    Ok(x)
}

/// Expected per-sample MSE: `[(n − 2l)·σ² + 2·Σ_j e_j·σ²] / n`.
pub fn analytic_distortion(codec: &LinearCodec, err_var: &[f64], variance: f64) -> f64 {
    let retained: f64 = err_var.iter().sum();
    (codec.dropped() as f64 * variance + 2.0 * retained * variance) / codec.n as f64
}

pub fn mse(x: &[f64], x_hat: &[f64]) -> f64 {
    assert_eq!(x.len(), x_hat.len());
    x.iter()
        .zip(x_hat)
        .map(|(a, b)| (a - b).powi(2))
        .sum::<f64>()
        / x.len() as f64
}

/// PSNR in dB; `+∞` when `mse == 0`.
pub fn psnr(mse: f64, max_val: f64) -> f64 {
    if mse == 0.0 {
        return f64::INFINITY;
    }
    10.0 * (max_val * max_val / mse).log10()
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DistortionReport {
    pub mse: f64,
    pub psnr_db: f64,
    pub analytic_mse: f64,
}

impl DistortionReport {
    pub fn new(mse: f64, analytic_mse: f64, max_val: f64) -> Self {
        Self {
            mse,
            psnr_db: psnr(mse, max_val),
            analytic_mse,
        }
    }
}
