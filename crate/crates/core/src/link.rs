//! One frame through the whole chain: source → codec → space-time mapping →
//! channel → receiver → decoder.

use crate::channel::{transmit, ChannelParams, ChannelState, Seed};
use crate::metrics::{frame_sinr, sinr_diversity, sinr_mmse_streams};
use crate::numerics::Complex;
use crate::receiver::{receive, PostEqualizer};
use crate::source::{
    analytic_distortion, decode_source, encode_source, mse, sample_source, GaussianSource,
    LinearCodec,
};
use crate::stm::{encode, latent_length, LatentVector, StmScheme};
use crate::Result;

/// Static description of a link.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LinkSetup {
    pub scheme: StmScheme,
    pub params: ChannelParams,
    pub source: GaussianSource,
    pub codec: LinearCodec,
    /// Latent length the frame can carry; at least `codec.l`.
    pub latent_len: usize,
    /// Channel uses per frame.
    pub channel_uses: usize,
}

impl LinkSetup {
    /// Sizes the codec for `k` channel uses: the codec uses
    /// `min(l, n/2)` symbols and any remaining latent slots carry zeros.
    pub fn new(
        scheme: StmScheme,
        params: ChannelParams,
        source: GaussianSource,
        k: usize,
    ) -> Result<Self> {
        let latent_len = latent_length(&scheme, k)?;
        let codec = LinearCodec::new(source.n, latent_len.min(source.n / 2))?;
        Ok(Self {
            scheme,
            params,
            source,
            codec,
            latent_len,
            channel_uses: k,
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FrameOutcome {
    pub mse: f64,
    pub analytic_mse: f64,
    /// Mean linear SINR over the frame's streams.
    pub mean_sinr: f64,
    /// SINR used for outage decisions (worst stream for multiplexing).
    pub frame_sinr: f64,
}

/// Runs one frame over a given channel realization.
pub fn run_frame(
    setup: &LinkSetup,
    state: &ChannelState,
    source_seed: Seed,
    noise_seed: Seed,
    hook: &dyn PostEqualizer,
) -> Result<FrameOutcome> {
    let x = sample_source(&setup.source, source_seed);
    let enc = encode_source(&setup.codec, &x)?;
    let mut symbols = enc.latent.symbols;
    symbols.resize(setup.latent_len, Complex::new(0.0, 0.0));
    let frame = encode(&setup.scheme, &LatentVector::from_symbols(symbols)?)?;
    let y = transmit(&frame.matrix, state, &setup.params, noise_seed)?;
    let est = receive(&setup.scheme, &y, state, &setup.params, setup.codec.l, hook)?;
    let x_hat = decode_source(&setup.codec, &est, enc.norm)?;

    let mean_sinr = if setup.scheme.is_ostbc() {
        sinr_diversity(state, &setup.params, &setup.scheme)?
    } else {
        let s = sinr_mmse_streams(state, &setup.params)?;
        s.iter().sum::<f64>() / s.len() as f64
    };
    Ok(FrameOutcome {
        mse: mse(&x, &x_hat),
        analytic_mse: analytic_distortion(
            &setup.codec,
            &est.per_symbol_err_var,
            setup.source.variance,
        ),
        mean_sinr,
        frame_sinr: frame_sinr(&setup.scheme, state, &setup.params)?,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channel::sample_channel;
    use crate::receiver::ZeroHook;
    use crate::stm::{ImageDims, Ratio};

    #[test]
    fn fig4_sizing_caps_codec_at_half_source() {
        let k = crate::stm::channel_uses(Ratio::new(5, 24).unwrap(), ImageDims::new(3, 32, 32))
            .unwrap();
        let p = ChannelParams::new(3, 1, 1.0, 0.1).unwrap();
        let src = GaussianSource::unit(3072).unwrap();
        let mux = LinkSetup::new(StmScheme::multiplexing(3).unwrap(), p, src, k).unwrap();
        assert_eq!(mux.latent_len, 1920);
        assert_eq!(mux.codec.l, 1536);
        let r12 = LinkSetup::new(StmScheme::ostbc3_rate12(), p, src, k).unwrap();
        assert_eq!(r12.codec.l, 320);
    }

    #[test]
    fn padded_latent_frame_runs() {
        let p = ChannelParams::new(3, 2, 1.0, 0.1).unwrap();
        let setup = LinkSetup::new(
            StmScheme::multiplexing(3).unwrap(),
            p,
            GaussianSource::unit(8).unwrap(),
            4,
        )
        .unwrap();
        assert_eq!((setup.latent_len, setup.codec.l), (12, 4));
        let st = sample_channel(&p, Seed::new(1, 1));
        let out = run_frame(&setup, &st, Seed::new(2, 1), Seed::new(3, 1), &ZeroHook).unwrap();
        assert!(out.mse.is_finite() && out.analytic_mse > 0.0);
        assert!(out.frame_sinr <= out.mean_sinr);
    }
}
