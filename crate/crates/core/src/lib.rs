//! Link-level simulation of analog source transmission over block
//! Rayleigh-fading MIMO channels.
//!
//! Two ways of using the transmit antennas are modelled:
//!
//! * **diversity**: the latent vector is mapped through an orthogonal
//!   space-time block code (Alamouti for two antennas, rate-1/2 and rate-3/4
//!   designs for three) and decoupled at the receiver with a matched filter
//!   followed by a scalar MMSE shrink;
//! * **multiplexing**: the latent vector is reshaped directly onto the
//!   antennas and recovered with a linear MMSE equalizer.
//!
//! A Gaussian source with a linear pair-packing codec stands in for a learned
//! encoder/decoder so that end-to-end distortion has closed-form oracles. A
//! capacity-based separation benchmark and SINR/outage metrics complete the
//! picture.

pub mod baseline;
pub mod channel;
pub mod link;
pub mod metrics;
pub mod numerics;
pub mod receiver;
pub mod source;
pub mod stm;
pub mod validation;

pub use channel::{ChannelParams, ChannelState, Seed};
pub use numerics::{Complex, ComplexMatrix};
pub use stm::{StmKind, StmScheme};

use thiserror::Error;

/// Any error raised by the library.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error(transparent)]
    Numerics(#[from] numerics::NumericsError),
    #[error(transparent)]
    Channel(#[from] channel::ChannelError),
    #[error(transparent)]
    Stm(#[from] stm::StmError),
    #[error(transparent)]
    Receiver(#[from] receiver::ReceiverError),
    #[error(transparent)]
    Source(#[from] source::SourceError),
    #[error(transparent)]
    Metrics(#[from] metrics::MetricsError),
}

pub type Result<T> = std::result::Result<T, Error>;
