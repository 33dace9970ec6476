//! Space-time mapping.
//!
//! A latent vector `z` is power-normalized and mapped onto the transmit
//! antennas either directly (spatial multiplexing) or through an orthogonal
//! space-time block code. Frames are laid out antennas × slots and are scaled
//! so that `‖S‖²_F = N_t·k` when every symbol has unit power; the `√P`
//! factor is applied by the channel.

use crate::numerics::{Complex, ComplexMatrix};
use std::fmt;
use std::str::FromStr;
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum StmError {
    #[error("scheme {scheme} requires {required} transmit antennas, got {nt}")]
    Antennas {
        scheme: &'static str,
        required: usize,
        nt: usize,
    },
    #[error("unknown scheme name {0:?} (expected mux, alamouti, ostbc3-r12 or ostbc3-r34)")]
    UnknownScheme(String),
    #[error("latent vector is empty")]
    EmptyLatent,
    #[error("latent vector is all zeros and cannot be normalized")]
    Degenerate,
    #[error("channel uses rho*C*H*W = {num}/{den} is not a positive integer")]
    FractionalChannelUses { num: u64, den: u64 },
    #[error("{k} channel uses is not divisible by the block length {block} of {scheme}")]
    Divisibility {
        scheme: &'static str,
        k: usize,
        block: usize,
    },
    #[error("invalid ratio {0:?}")]
    BadRatio(String),
}

/// The supported space-time mappings.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum StmKind {
    Multiplexing,
    Alamouti,
    Ostbc3Rate12,
    Ostbc3Rate34,
}

impl StmKind {
    pub const ALL: [StmKind; 4] = [
        StmKind::Multiplexing,
        StmKind::Alamouti,
        StmKind::Ostbc3Rate12,
        StmKind::Ostbc3Rate34,
    ];

    /// Name used in config files and CSV output.
    pub fn name(self) -> &'static str {
        match self {
            StmKind::Multiplexing => "mux",
            StmKind::Alamouti => "alamouti",
            StmKind::Ostbc3Rate12 => "ostbc3-r12",
            StmKind::Ostbc3Rate34 => "ostbc3-r34",
        }
    }

    pub fn is_ostbc(self) -> bool {
        self != StmKind::Multiplexing
    }

    /// Antenna count the design is defined for; `None` for multiplexing.
    pub fn required_nt(self) -> Option<usize> {
        match self {
            StmKind::Multiplexing => None,
            StmKind::Alamouti => Some(2),
            StmKind::Ostbc3Rate12 | StmKind::Ostbc3Rate34 => Some(3),
        }
    }
}

impl fmt::Display for StmKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for StmKind {
    type Err = StmError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        StmKind::ALL
            .into_iter()
            .find(|k| k.name() == s)
            .ok_or_else(|| StmError::UnknownScheme(s.to_string()))
    }
}

/// A space-time mapping bound to an antenna count.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct StmScheme {
    kind: StmKind,
    nt: usize,
}

impl StmScheme {
    pub fn new(kind: StmKind, nt: usize) -> Result<Self, StmError> {
        match kind.required_nt() {
            Some(required) if required != nt => Err(StmError::Antennas {
                scheme: kind.name(),
                required,
                nt,
            }),
            None if nt == 0 => Err(StmError::Antennas {
                scheme: kind.name(),
                required: 1,
                nt,
            }),
            _ => Ok(Self { kind, nt }),
        }
    }

    pub fn multiplexing(nt: usize) -> Result<Self, StmError> {
        Self::new(StmKind::Multiplexing, nt)
    }

    pub fn alamouti() -> Self {
        Self {
            kind: StmKind::Alamouti,
            nt: 2,
        }
    }

    pub fn ostbc3_rate12() -> Self {
        Self {
            kind: StmKind::Ostbc3Rate12,
            nt: 3,
        }
    }

    pub fn ostbc3_rate34() -> Self {
        Self {
            kind: StmKind::Ostbc3Rate34,
            nt: 3,
        }
    }

    pub fn kind(&self) -> StmKind {
        self.kind
    }

    pub fn nt(&self) -> usize {
        self.nt
    }

    pub fn name(&self) -> &'static str {
        self.kind.name()
    }

    pub fn is_ostbc(&self) -> bool {
        self.kind.is_ostbc()
    }

    /// Symbols carried per block (K).
    pub fn symbols_per_block(&self) -> usize {
        match self.kind {
            StmKind::Multiplexing => self.nt,
            StmKind::Alamouti => 2,
            StmKind::Ostbc3Rate12 => 4,
            StmKind::Ostbc3Rate34 => 3,
        }
    }

    /// Slots per block (N).
    pub fn slots_per_block(&self) -> usize {
        match self.kind {
            StmKind::Multiplexing => 1,
            StmKind::Alamouti => 2,
            StmKind::Ostbc3Rate12 => 8,
            StmKind::Ostbc3Rate34 => 4,
        }
    }

    /// Symbols per channel use, K/N.
    pub fn rate(&self) -> f64 {
        self.symbols_per_block() as f64 / self.slots_per_block() as f64
    }

    /// Constant c of the design identity `B·Bᴴ = c·(Σ|x_i|²)·I`.
    /// Not defined for multiplexing.
    pub fn orthogonality_constant(&self) -> f64 {
        match self.kind {
            StmKind::Ostbc3Rate12 => 2.0,
            _ => 1.0,
        }
    }

    /// Amplitude factor applied to every block so a frame of unit-power
    /// symbols spends exactly `N_t` energy per slot: `√(N / (c·K))`.
    pub fn frame_scale(&self) -> f64 {
        if !self.is_ostbc() {
            return 1.0;
        }
        (self.slots_per_block() as f64
            / (self.orthogonality_constant() * self.symbols_per_block() as f64))
            .sqrt()
    }

    /// Number of blocks needed for `l` latent symbols (after zero-padding).
    pub fn blocks_for(&self, l: usize) -> usize {
        l.div_ceil(self.symbols_per_block())
    }
}

impl fmt::Display for StmScheme {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}(nt={})", self.kind.name(), self.nt)
    }
}

/// Power-normalized latent vector.
#[derive(Debug, Clone, PartialEq)]
pub struct LatentVector {
    pub symbols: Vec<Complex>,
}

impl LatentVector {
    /// Wraps symbols without renormalizing them.
    pub fn from_symbols(symbols: Vec<Complex>) -> Result<Self, StmError> {
        if symbols.is_empty() {
            return Err(StmError::EmptyLatent);
        }
        Ok(Self { symbols })
    }

    pub fn len(&self) -> usize {
        self.symbols.len()
    }

    pub fn is_empty(&self) -> bool {
        self.symbols.is_empty()
    }

    pub fn energy(&self) -> f64 {
        self.symbols.iter().map(|z| z.norm_sqr()).sum()
    }
}

/// Factor `√(l/‖raw‖²)` that [`normalize_latent`] applies.
pub fn normalization_factor(raw: &[Complex]) -> Result<f64, StmError> {
    if raw.is_empty() {
        return Err(StmError::EmptyLatent);
    }
    let energy: f64 = raw.iter().map(|z| z.norm_sqr()).sum();
    if energy == 0.0 {
        return Err(StmError::Degenerate);
    }
    Ok((raw.len() as f64 / energy).sqrt())
}

/// Scales `raw` so that `‖z‖² = l`.
pub fn normalize_latent(raw: &[Complex]) -> Result<LatentVector, StmError> {
    let a = normalization_factor(raw)?;
    Ok(LatentVector {
        symbols: raw.iter().map(|&z| z * a).collect(),
    })
}

/// One block of a design, antennas × slots, before frame scaling.
///
/// `x` holds exactly `K` symbols.
pub fn block_matrix(scheme: &StmScheme, x: &[Complex]) -> ComplexMatrix {
    assert_eq!(x.len(), scheme.symbols_per_block());
    let slot_rows = design_rows(scheme.kind, x);
    let cols: Vec<Complex> = slot_rows.into_iter().flatten().collect();
    ComplexMatrix::from_columns(scheme.nt, scheme.slots_per_block(), &cols)
        .expect("design rows are finite")
}

/// Slot-rows of each design: row t holds what every antenna sends in slot t.
fn design_rows(kind: StmKind, x: &[Complex]) -> Vec<Vec<Complex>> {
    match kind {
        StmKind::Multiplexing => vec![x.to_vec()],
        StmKind::Alamouti => vec![vec![x[0], x[1]], vec![-x[1].conj(), x[0].conj()]],
        StmKind::Ostbc3Rate12 => {
            let (x1, x2, x3, x4) = (x[0], x[1], x[2], x[3]);
            let real_design = [[x1, x2, x3], [-x2, x1, -x4], [-x3, x4, x1], [-x4, -x3, x2]];
            real_design
                .iter()
                .map(|r| r.to_vec())
                .chain(
                    real_design
                        .iter()
                        .map(|r| r.iter().map(|z| z.conj()).collect()),
                )
                .collect()
        }
        StmKind::Ostbc3Rate34 => {
            let (x1, x2, x3) = (x[0], x[1], x[2]);
            let r = std::f64::consts::FRAC_1_SQRT_2;
            vec![
                vec![x1, x2, x3 * r],
                vec![-x2.conj(), x1.conj(), x3 * r],
                vec![
                    x3.conj() * r,
                    x3.conj() * r,
                    (-x1 - x1.conj() + x2 - x2.conj()) * 0.5,
                ],
                vec![
                    x3.conj() * r,
                    -x3.conj() * r,
                    (x2 + x2.conj() + x1 - x1.conj()) * 0.5,
                ],
            ]
        }
    }
}

/// A transmit frame plus what the receiver needs to undo the mapping.
#[derive(Debug, Clone, PartialEq)]
pub struct EncodedFrame {
    pub scheme: StmScheme,
    /// Antennas × slots, unit power budget per antenna-slot.
    pub matrix: ComplexMatrix,
    /// Latent length before zero-padding.
    pub latent_len: usize,
    /// Zeros appended at the tail to fill the last block.
    pub pad: usize,
}

/// Maps `z` onto a frame of `N·⌈l/K⌉` slots.
pub fn encode(scheme: &StmScheme, z: &LatentVector) -> Result<EncodedFrame, StmError> {
    encode_with(scheme, z, |x| block_matrix(scheme, x))
}

/// [`encode`] with a caller-supplied block builder, used to exercise the
/// validation suite against deliberately broken designs.
pub fn encode_with(
    scheme: &StmScheme,
    z: &LatentVector,
    block: impl Fn(&[Complex]) -> ComplexMatrix,
) -> Result<EncodedFrame, StmError> {
    if z.is_empty() {
        return Err(StmError::EmptyLatent);
    }
    let k_sym = scheme.symbols_per_block();
    let n_slots = scheme.slots_per_block();
    let blocks = scheme.blocks_for(z.len());
    let pad = blocks * k_sym - z.len();
    let mut padded = z.symbols.clone();
    padded.resize(blocks * k_sym, Complex::new(0.0, 0.0));

    let scale = scheme.frame_scale();
    let mut col_major = Vec::with_capacity(scheme.nt * n_slots * blocks);
    for x in padded.chunks(k_sym) {
        let b = block(x);
        col_major.extend(b.to_column_major().into_iter().map(|v| v * scale));
    }
    let matrix = ComplexMatrix::from_columns(scheme.nt, n_slots * blocks, &col_major)
        .expect("encoded symbols are finite");
    Ok(EncodedFrame {
        scheme: *scheme,
        matrix,
        latent_len: z.len(),
        pad,
    })
}

/// Positive rational number such as a bandwidth ratio.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Ratio {
    pub num: u64,
    pub den: u64,
}

impl Ratio {
    pub fn new(num: u64, den: u64) -> Result<Self, StmError> {
        if num == 0 || den == 0 {
            return Err(StmError::BadRatio(format!("{num}/{den}")));
        }
        Ok(Self { num, den })
    }

    pub fn value(&self) -> f64 {
        self.num as f64 / self.den as f64
    }
}

impl fmt::Display for Ratio {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.den == 1 {
            write!(f, "{}", self.num)
        } else {
            write!(f, "{}/{}", self.num, self.den)
        }
    }
}

impl FromStr for Ratio {
    type Err = StmError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let bad = || StmError::BadRatio(s.to_string());
        let (n, d) = match s.split_once('/') {
            Some((n, d)) => (n.trim(), d.trim()),
            None => (s.trim(), "1"),
        };
        Ratio::new(n.parse().map_err(|_| bad())?, d.parse().map_err(|_| bad())?)
    }
}

/// Source dimensions C×H×W.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ImageDims {
    pub channels: usize,
    pub height: usize,
    pub width: usize,
}

impl ImageDims {
    pub fn new(channels: usize, height: usize, width: usize) -> Self {
        Self {
            channels,
            height,
            width,
        }
    }

    pub fn pixels(&self) -> usize {
        self.channels * self.height * self.width
    }
}

/// Channel uses `k = ρ·C·H·W`.
pub fn channel_uses(rho: Ratio, dims: ImageDims) -> Result<usize, StmError> {
    let num = rho.num * dims.pixels() as u64;
    if num == 0 || num % rho.den != 0 {
        return Err(StmError::FractionalChannelUses { num, den: rho.den });
    }
    Ok((num / rho.den) as usize)
}

/// Latent length `l` that fills `k` channel uses under `scheme`.
pub fn latent_length(scheme: &StmScheme, k: usize) -> Result<usize, StmError> {
    let n = scheme.slots_per_block();
    if k == 0 || k % n != 0 {
        return Err(StmError::Divisibility {
            scheme: scheme.name(),
            k,
            block: n,
        });
    }
    Ok(k / n * scheme.symbols_per_block())
}
