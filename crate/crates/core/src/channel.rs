//! Block Rayleigh-fading MIMO channel.
//!
//! One [`ChannelState`] is drawn per frame and held fixed while the frame is
//! sent. The received frame is `Y = √P·H·S + N` with i.i.d. circularly
//! symmetric Gaussian noise of variance σ² per receive antenna.

use crate::numerics::{frobenius_norm_sq, matmul, Complex, ComplexMatrix};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use thiserror::Error;

/// Slack allowed on the frame energy budget `‖S‖²_F ≤ N_t·k`.
pub const FRAME_POWER_TOLERANCE: f64 = 1e-6;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ChannelError {
    #[error("invalid channel parameter: {0}")]
    InvalidParams(String),
    #[error("frame has {frame_rows} rows but the channel has {nt} transmit antennas")]
    Shape { frame_rows: usize, nt: usize },
    #[error("frame energy {measured} exceeds the budget N_t*k = {budget}")]
    FramePower { measured: f64, budget: f64 },
}

/// Seed of one trial: `master` selects the experiment, `stream` the trial.
///
/// The two words key a ChaCha8 generator (`master` as seed, `stream` as the
/// ChaCha stream id), so trials are independent of scheduling order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Seed {
    pub master: u64,
    pub stream: u64,
}

/// Domain-separation tags for the independent draws made inside one trial.
pub mod purpose {
    pub const CHANNEL: u64 = 0x4348_414e;
    pub const NOISE: u64 = 0x4e4f_4953;
    pub const SOURCE: u64 = 0x534f_5552;
}

/// SplitMix64 finalizer.
pub fn mix64(mut x: u64) -> u64 {
    x = x.wrapping_add(0x9e37_79b9_7f4a_7c15);
    x = (x ^ (x >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    x = (x ^ (x >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    x ^ (x >> 31)
}

impl Seed {
    pub fn new(master: u64, stream: u64) -> Self {
        Self { master, stream }
    }

    /// Derives an independent seed for another purpose; the stream is kept.
    pub fn derive(self, tag: u64) -> Self {
        Self {
            master: mix64(self.master ^ mix64(tag)),
            stream: self.stream,
        }
    }

    /// Same master, different trial.
    pub fn with_stream(self, stream: u64) -> Self {
        Self { stream, ..self }
    }

    pub fn rng(self) -> ChaCha8Rng {
        let mut rng = ChaCha8Rng::seed_from_u64(self.master);
        rng.set_stream(self.stream);
        rng
    }
}

/// Draws one sample of CN(0, variance).
pub fn complex_gaussian<R: Rng + ?Sized>(rng: &mut R, variance: f64) -> Complex {
    let s = (variance / 2.0).sqrt();
    let re: f64 = rng.sample(StandardNormal);
    let im: f64 = rng.sample(StandardNormal);
    Complex::new(s * re, s * im)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ChannelParams {
    pub nt: usize,
    pub nr: usize,
    /// Per-antenna symbol power P.
    pub power: f64,
    /// Complex noise variance σ² per receive antenna.
    pub noise_var: f64,
}

impl ChannelParams {
    pub fn new(nt: usize, nr: usize, power: f64, noise_var: f64) -> Result<Self, ChannelError> {
        let p = Self {
            nt,
            nr,
            power,
            noise_var,
        };
        p.validate()?;
        Ok(p)
    }

    /// Parameters at a given average SNR.
    pub fn at_snr_db(nt: usize, nr: usize, power: f64, snr_db: f64) -> Result<Self, ChannelError> {
        Self::new(nt, nr, power, noise_var_for_snr(snr_db, nt, power))
    }

    pub fn validate(&self) -> Result<(), ChannelError> {
        if self.nt == 0 || self.nr == 0 {
            return Err(ChannelError::InvalidParams(format!(
                "antenna counts must be positive (nt={}, nr={})",
                self.nt, self.nr
            )));
        }
        if !(self.power > 0.0 && self.power.is_finite()) {
            return Err(ChannelError::InvalidParams(format!(
                "power must be positive, got {}",
                self.power
            )));
        }
        if !(self.noise_var > 0.0 && self.noise_var.is_finite()) {
            return Err(ChannelError::InvalidParams(format!(
                "noise_var must be positive, got {}",
                self.noise_var
            )));
        }
        Ok(())
    }

    /// P/σ².
    pub fn power_to_noise(&self) -> f64 {
        self.power / self.noise_var
    }
}

/// One fading realization `H ∈ C^{N_r×N_t}`.
#[derive(Debug, Clone, PartialEq)]
pub struct ChannelState {
    pub h: ComplexMatrix,
}

impl ChannelState {
    pub fn new(h: ComplexMatrix) -> Self {
        Self { h }
    }

    pub fn nr(&self) -> usize {
        self.h.rows()
    }

    pub fn nt(&self) -> usize {
        self.h.cols()
    }

    /// `‖H‖²_F`.
    pub fn gain(&self) -> f64 {
        frobenius_norm_sq(&self.h)
    }
}

/// Draws `H` with i.i.d. CN(0, 1) entries.
pub fn sample_channel(params: &ChannelParams, seed: Seed) -> ChannelState {
    let mut rng = seed.rng();
    let data = (0..params.nr * params.nt)
        .map(|_| complex_gaussian(&mut rng, 1.0))
        .collect();
    ChannelState::new(ComplexMatrix::from_vec(params.nr, params.nt, data).expect("finite draws"))
}

fn faded(
    s: &ComplexMatrix,
    state: &ChannelState,
    params: &ChannelParams,
) -> Result<ComplexMatrix, ChannelError> {
    if s.rows() != params.nt || state.nt() != params.nt || state.nr() != params.nr {
        return Err(ChannelError::Shape {
            frame_rows: s.rows(),
            nt: state.nt(),
        });
    }
    let budget = (params.nt * s.cols()) as f64;
    let measured = frobenius_norm_sq(s);
    if measured > budget + FRAME_POWER_TOLERANCE {
        return Err(ChannelError::FramePower { measured, budget });
    }
    let hs = matmul(&state.h, s).map_err(|_| ChannelError::Shape {
        frame_rows: s.rows(),
        nt: state.nt(),
    })?;
    Ok(hs.scale(params.power.sqrt()))
}

/// `Y = √P·H·S + N`.
pub fn transmit(
    s: &ComplexMatrix,
    state: &ChannelState,
    params: &ChannelParams,
    seed: Seed,
) -> Result<ComplexMatrix, ChannelError> {
    let clean = faded(s, state, params)?;
    let mut rng = seed.rng();
    // Noise is drawn in row-major order of Y.
    Ok(clean.map(|z| z + complex_gaussian(&mut rng, params.noise_var)))
}

/// `Y = √P·H·S` with the noise switched off. For oracle tests.
pub fn transmit_noiseless(
    s: &ComplexMatrix,
    state: &ChannelState,
    params: &ChannelParams,
) -> Result<ComplexMatrix, ChannelError> {
    faded(s, state, params)
}

/// Average SNR `P/(N_t·σ²)` in dB.
pub fn snr_db(params: &ChannelParams) -> f64 {
    10.0 * (params.power / (params.nt as f64 * params.noise_var)).log10()
}

/// Inverse of [`snr_db`]: the σ² that yields `snr_db` for `nt` antennas at power `power`.
pub fn noise_var_for_snr(snr_db: f64, nt: usize, power: f64) -> f64 {
    power / (nt as f64 * 10f64.powf(snr_db / 10.0))
}
