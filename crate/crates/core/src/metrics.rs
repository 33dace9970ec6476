//! Signal-level figures of merit: post-processing SINR, outage probability
//! and empirical diversity order.

use crate::channel::{noise_var_for_snr, sample_channel, ChannelParams, ChannelState, Seed};
use crate::receiver::{MmseFilter, ReceiverError};
use crate::stm::StmScheme;
use thiserror::Error;

/// Smallest trial count accepted by [`outage_probability`].
pub const MIN_OUTAGE_TRIALS: usize = 1000;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum MetricsError {
    #[error("{0}")]
    Scheme(String),
    #[error("stream index {stream} out of range for {nt} transmit antennas")]
    StreamIndex { stream: usize, nt: usize },
    #[error("outage estimation needs at least {min} trials, got {got}")]
    TooFewTrials { got: usize, min: usize },
    #[error("outage probability at grid index {index} is {prob}; increase the trial count")]
    InsufficientTrials { index: usize, prob: f64 },
    #[error("invalid grid: {0}")]
    Grid(String),
    #[error(transparent)]
    Receiver(#[from] ReceiverError),
}

type Result<T> = std::result::Result<T, MetricsError>;

/// Linear SINR values collected for one scheme at one SNR.
#[derive(Debug, Clone, PartialEq)]
pub struct SinrSample {
    pub scheme: StmScheme,
    pub snr_db: f64,
    pub values: Vec<f64>,
}

/// SINR of every symbol after OSTBC decoupling: `P·g/σ²`, with `g` the
/// equivalent-channel gain (`‖H‖²_F` times the scheme constant).
pub fn sinr_diversity(
    state: &ChannelState,
    params: &ChannelParams,
    scheme: &StmScheme,
) -> Result<f64> {
    if !scheme.is_ostbc() {
        return Err(MetricsError::Scheme(
            "multiplexing has no decoupled statistic; use sinr_mmse_stream".into(),
        ));
    }
    let s = scheme.frame_scale();
    let g = scheme.orthogonality_constant() * s * s * state.gain();
    Ok(params.power_to_noise() * g)
}

/// Per-stream MMSE SINR for all streams: `1/[(I + (P/σ²)HᴴH)⁻¹]_ii − 1`.
pub fn sinr_mmse_streams(state: &ChannelState, params: &ChannelParams) -> Result<Vec<f64>> {
    let f = MmseFilter::new(state, params)?;
    Ok(f.err_var.iter().map(|e| (1.0 / e - 1.0).max(0.0)).collect())
}

pub fn sinr_mmse_stream(
    state: &ChannelState,
    params: &ChannelParams,
    stream: usize,
) -> Result<f64> {
    if stream >= state.nt() {
        return Err(MetricsError::StreamIndex {
            stream,
            nt: state.nt(),
        });
    }
    Ok(sinr_mmse_streams(state, params)?[stream])
}

/// SINR that decides outage for a frame: the decoupled SINR for OSTBC, the
/// worst stream for multiplexing.
pub fn frame_sinr(scheme: &StmScheme, state: &ChannelState, params: &ChannelParams) -> Result<f64> {
    if scheme.is_ostbc() {
        sinr_diversity(state, params, scheme)
    } else {
        Ok(sinr_mmse_streams(state, params)?
            .into_iter()
            .fold(f64::INFINITY, f64::min))
    }
}

/// Outage probability versus SNR.
#[derive(Debug, Clone, PartialEq)]
pub struct OutageCurve {
    pub snr_grid_db: Vec<f64>,
    pub prob: Vec<f64>,
    pub threshold_db: f64,
    pub trials: usize,
}

fn db_to_linear(db: f64) -> f64 {
    10f64.powf(db / 10.0)
}

/// Fraction of `trials` channel draws whose frame SINR falls below
/// `threshold_db`. Trial `t` draws its channel from stream `seed.stream + t`.
pub fn outage_probability(
    scheme: &StmScheme,
    params: &ChannelParams,
    threshold_db: f64,
    trials: usize,
    seed: Seed,
) -> Result<f64> {
    if trials < MIN_OUTAGE_TRIALS {
        return Err(MetricsError::TooFewTrials {
            got: trials,
            min: MIN_OUTAGE_TRIALS,
        });
    }
    let threshold = db_to_linear(threshold_db);
    let mut outages = 0usize;
    for t in 0..trials as u64 {
        let st = sample_channel(params, seed.with_stream(seed.stream.wrapping_add(t)));
        if frame_sinr(scheme, &st, params)? < threshold {
            outages += 1;
        }
    }
    Ok(outages as f64 / trials as f64)
}

/// Outage over an SNR grid with common random numbers: each trial's channel
/// is drawn once and evaluated at every grid point. Per point the result
/// equals [`outage_probability`] with the same seed.
#[allow(clippy::too_many_arguments)]
pub fn outage_curve(
    scheme: &StmScheme,
    nr: usize,
    power: f64,
    snr_grid_db: &[f64],
    threshold_db: f64,
    trials: usize,
    seed: Seed,
) -> Result<OutageCurve> {
    if trials < MIN_OUTAGE_TRIALS {
        return Err(MetricsError::TooFewTrials {
            got: trials,
            min: MIN_OUTAGE_TRIALS,
        });
    }
    let grid: Vec<ChannelParams> = snr_grid_db
        .iter()
        .map(|&snr| {
            ChannelParams::new(
                scheme.nt(),
                nr,
                power,
                noise_var_for_snr(snr, scheme.nt(), power),
            )
        })
        .collect::<std::result::Result<_, _>>()
        .map_err(|e| MetricsError::Grid(e.to_string()))?;
    let threshold = db_to_linear(threshold_db);
    let mut counts = vec![0usize; grid.len()];
    let Some(first) = grid.first() else {
        return Err(MetricsError::Grid("empty SNR grid".into()));
    };
    for t in 0..trials as u64 {
        let st = sample_channel(first, seed.with_stream(seed.stream.wrapping_add(t)));
        for (count, p) in counts.iter_mut().zip(&grid) {
            if frame_sinr(scheme, &st, p)? < threshold {
                *count += 1;
            }
        }
    }
    Ok(OutageCurve {
        snr_grid_db: snr_grid_db.to_vec(),
        prob: counts.iter().map(|&c| c as f64 / trials as f64).collect(),
        threshold_db,
        trials,
    })
}

/// Log-log slope `−Δlog₁₀ p / Δlog₁₀ SNR` between two grid points.
pub fn diversity_order_estimate(curve: &OutageCurve, lo_idx: usize, hi_idx: usize) -> Result<f64> {
    let n = curve.snr_grid_db.len();
    if curve.prob.len() != n {
        return Err(MetricsError::Grid(
            "grid and probability lengths differ".into(),
        ));
    }
    if lo_idx >= n || hi_idx >= n || lo_idx == hi_idx {
        return Err(MetricsError::Grid(format!(
            "indices {lo_idx}, {hi_idx} invalid for a grid of {n} points"
        )));
    }
    if curve.snr_grid_db.windows(2).any(|w| w[1] <= w[0]) {
        return Err(MetricsError::Grid(
            "SNR grid must be strictly increasing".into(),
        ));
    }
    for idx in [lo_idx, hi_idx] {
        let p = curve.prob[idx];
        if !(p > 0.0 && p < 1.0) {
            return Err(MetricsError::InsufficientTrials {
                index: idx,
                prob: p,
            });
        }
    }
    let dlogp = curve.prob[hi_idx].log10() - curve.prob[lo_idx].log10();
    let dlogsnr = (curve.snr_grid_db[hi_idx] - curve.snr_grid_db[lo_idx]) / 10.0;
    Ok(-dlogp / dlogsnr)
}
