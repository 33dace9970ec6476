//! Receiver processing with perfect CSI.
//!
//! The diversity path decouples OSTBC blocks with a matched filter on a
//! real-valued equivalent channel and then applies a scalar MMSE shrink. The
//! multiplexing path applies a linear MMSE equalizer per channel use, followed
//! by an optional post-equalizer hook.
//!
//! For Alamouti the closed-form combiner [`alamouti_decouple`] is kept as an
//! independent route to the same statistic.

use crate::channel::{ChannelParams, ChannelState};
use crate::numerics::{
    hermitian, inverse_hpd, matmul, matvec, real_stack_vec, solve_hpd, Complex, ComplexMatrix,
    NumericsError, RealMatrix,
};
use crate::stm::{block_matrix, StmKind, StmScheme};
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ReceiverError {
    #[error("{0}")]
    Scheme(String),
    #[error("received frame is {rows}x{cols}, expected {expected_rows} rows and a multiple of {block} columns")]
    Shape {
        rows: usize,
        cols: usize,
        expected_rows: usize,
        block: usize,
    },
    #[error(transparent)]
    Numerics(#[from] NumericsError),
}

type Result<T> = std::result::Result<T, ReceiverError>;

/// Symbol estimates with their per-symbol statistics.
#[derive(Debug, Clone, PartialEq)]
pub struct EqualizedLatent {
    pub symbols: Vec<Complex>,
    /// Effective real gain on each transmitted symbol.
    pub per_symbol_gain: Vec<f64>,
    /// Residual MSE per unit-power symbol.
    pub per_symbol_err_var: Vec<f64>,
}

impl EqualizedLatent {
    pub fn len(&self) -> usize {
        self.symbols.len()
    }

    pub fn is_empty(&self) -> bool {
        self.symbols.is_empty()
    }

    /// Drops trailing padding symbols.
    pub fn truncated(mut self, len: usize) -> Self {
        self.symbols.truncate(len);
        self.per_symbol_gain.truncate(len);
        self.per_symbol_err_var.truncate(len);
        self
    }
}

/// Real-valued equivalent channel of one OSTBC block.
///
/// With `x = [Re z; Im z]` for the K block symbols and `y` the received block
/// stacked slot by slot as `[Re y_t; Im y_t]`, the channel reads
/// `y = √P·A·x + n` and the design guarantees `Aᵀ·A = g·I`.
#[derive(Debug, Clone, PartialEq)]
pub struct EquivalentChannel {
    pub a: RealMatrix,
    pub gain: f64,
    /// `g / ‖H‖²_F` for this scheme (c times the squared frame scale).
    pub gain_per_channel_energy: f64,
}

/// Builds the equivalent channel by pushing each real basis vector through
/// the design and the channel.
pub fn equivalent_channel(scheme: &StmScheme, state: &ChannelState) -> Result<EquivalentChannel> {
    equivalent_channel_with(scheme, state, |x| block_matrix(scheme, x))
}

/// [`equivalent_channel`] with a caller-supplied block builder.
pub fn equivalent_channel_with(
    scheme: &StmScheme,
    state: &ChannelState,
    block: impl Fn(&[Complex]) -> ComplexMatrix,
) -> Result<EquivalentChannel> {
    if !scheme.is_ostbc() {
        return Err(ReceiverError::Scheme(
            "multiplexing has no orthogonal block structure".into(),
        ));
    }
    if state.nt() != scheme.nt() {
        return Err(ReceiverError::Scheme(format!(
            "{} needs {} transmit antennas, channel has {}",
            scheme.name(),
            scheme.nt(),
            state.nt()
        )));
    }
    let k = scheme.symbols_per_block();
    let slots = scheme.slots_per_block();
    let nr = state.nr();
    let scale = scheme.frame_scale();
    let mut a = RealMatrix::zeros(2 * nr * slots, 2 * k);
    for j in 0..2 * k {
        let mut x = vec![Complex::new(0.0, 0.0); k];
        if j < k {
            x[j] = Complex::new(1.0, 0.0);
        } else {
            x[j - k] = Complex::new(0.0, 1.0);
        }
        let b = block(&x).scale(scale);
        let hb = matmul(&state.h, &b)?;
        for t in 0..slots {
            for (r, v) in real_stack_vec(&hb.column(t)).into_iter().enumerate() {
                a.set(t * 2 * nr + r, j, v);
            }
        }
    }
    let per_energy = scheme.orthogonality_constant() * scale * scale;
    Ok(EquivalentChannel {
        a,
        gain: per_energy * state.gain(),
        gain_per_channel_energy: per_energy,
    })
}

/// Alamouti combining of one block.
///
/// `y1`, `y2` are the `N_r` received samples of the two slots. Returns
/// `(m̂₁, m̂₂)` with `m̂₁ = √P·h_Aᴴy₁ + √P·y₂ᴴh_B` and
/// `m̂₂ = √P·h_Bᴴy₁ − √P·y₂ᴴh_A`.
pub fn alamouti_decouple(
    y1: &[Complex],
    y2: &[Complex],
    state: &ChannelState,
    power: f64,
) -> Result<(Complex, Complex)> {
    if state.nt() != 2 {
        return Err(ReceiverError::Scheme(format!(
            "Alamouti combining needs 2 transmit antennas, channel has {}",
            state.nt()
        )));
    }
    let nr = state.nr();
    if y1.len() != nr || y2.len() != nr {
        return Err(ReceiverError::Shape {
            rows: y1.len().max(y2.len()),
            cols: 2,
            expected_rows: nr,
            block: 2,
        });
    }
    let ha = state.h.column(0);
    let hb = state.h.column(1);
    let dot = |u: &[Complex], v: &[Complex]| -> Complex {
        u.iter().zip(v).map(|(a, b)| a.conj() * b).sum()
    };
    let sp = power.sqrt();
    let m1 = sp * dot(&ha, y1) + sp * dot(y2, &hb);
    let m2 = sp * dot(&hb, y1) - sp * dot(y2, &ha);
    Ok((m1, m2))
}

/// Scalar MMSE on a decoupled statistic: `m̂ / (P·g + σ²)`.
pub fn ostbc_scalar_mmse(m: Complex, gain: f64, power: f64, noise_var: f64) -> Complex {
    m / (power * gain + noise_var)
}

fn check_frame(y: &ComplexMatrix, nr: usize, block: usize) -> Result<()> {
    if y.rows() != nr || y.cols() % block != 0 {
        return Err(ReceiverError::Shape {
            rows: y.rows(),
            cols: y.cols(),
            expected_rows: nr,
            block,
        });
    }
    Ok(())
}

/// Decodes a frame sent with an OSTBC scheme; returns `latent_len` symbols.
pub fn ostbc_decode(
    scheme: &StmScheme,
    y: &ComplexMatrix,
    state: &ChannelState,
    params: &ChannelParams,
    latent_len: usize,
) -> Result<EqualizedLatent> {
    let eq = equivalent_channel(scheme, state)?;
    ostbc_decode_with(scheme, &eq, y, params, latent_len)
}

/// Decoding against a precomputed equivalent channel.
pub fn ostbc_decode_with(
    scheme: &StmScheme,
    eq: &EquivalentChannel,
    y: &ComplexMatrix,
    params: &ChannelParams,
    latent_len: usize,
) -> Result<EqualizedLatent> {
    let slots = scheme.slots_per_block();
    let nr = eq.a.rows() / (2 * slots);
    check_frame(y, nr, slots)?;
    let k = scheme.symbols_per_block();
    let blocks = y.cols() / slots;
    if latent_len > blocks * k {
        return Err(ReceiverError::Shape {
            rows: y.rows(),
            cols: y.cols(),
            expected_rows: nr,
            block: slots,
        });
    }
    let sp = params.power.sqrt();
    let denom = params.power * eq.gain + params.noise_var;
    let mut symbols = Vec::with_capacity(blocks * k);
    for b in 0..blocks {
        let mut yv = Vec::with_capacity(2 * nr * slots);
        for t in 0..slots {
            yv.extend(real_stack_vec(&y.column(b * slots + t)));
        }
        let m = eq.a.transpose_mul_vec(&yv);
        symbols.extend((0..k).map(|i| Complex::new(m[i], m[k + i]) * sp / denom));
    }
    symbols.truncate(latent_len);
    let gain = params.power * eq.gain / denom;
    let err = params.noise_var / denom;
    Ok(EqualizedLatent {
        per_symbol_gain: vec![gain; symbols.len()],
        per_symbol_err_var: vec![err; symbols.len()],
        symbols,
    })
}

/// Linear MMSE filter for unit-power symbols, `W = (1/√P)·Hᴴ(HHᴴ + σ²/P·I)⁻¹`,
/// and its per-stream error variances `diag((I + P/σ²·HᴴH)⁻¹)`.
#[derive(Debug, Clone, PartialEq)]
pub struct MmseFilter {
    pub w: ComplexMatrix,
    pub err_var: Vec<f64>,
}

impl MmseFilter {
    pub fn new(state: &ChannelState, params: &ChannelParams) -> Result<Self> {
        let h = &state.h;
        let hh = hermitian(h);
        let nr = h.rows();
        let nt = h.cols();
        let reg = params.noise_var / params.power;
        // Invert whichever Gram matrix is smaller; the two forms are equal by
        // the push-through identity and the smaller one is better conditioned.
        let w = if nt < nr {
            let g = matmul(&hh, h)?.add(&ComplexMatrix::identity(nt).scale(reg))?;
            solve_hpd(&g, &hh)?
        } else {
            let m = matmul(h, &hh)?.add(&ComplexMatrix::identity(nr).scale(reg))?;
            // Hᴴ M⁻¹ = (M⁻¹H)ᴴ since M is Hermitian.
            hermitian(&solve_hpd(&m, h)?)
        }
        .scale(1.0 / params.power.sqrt());
        let e = inverse_hpd(
            &ComplexMatrix::identity(nt).add(&matmul(&hh, h)?.scale(params.power_to_noise()))?,
        )?;
        let err_var = (0..nt).map(|i| e.get(i, i).re).collect();
        Ok(Self { w, err_var })
    }
}

/// Multiplexing receiver: applies the MMSE filter to every column of `y`.
/// Output symbols are in transmit order (column-major), `N_t·k` of them.
pub fn mmse_equalize(
    y: &ComplexMatrix,
    state: &ChannelState,
    params: &ChannelParams,
) -> Result<EqualizedLatent> {
    let filter = MmseFilter::new(state, params)?;
    mmse_equalize_with(&filter, y, state.nr())
}

pub fn mmse_equalize_with(
    filter: &MmseFilter,
    y: &ComplexMatrix,
    nr: usize,
) -> Result<EqualizedLatent> {
    check_frame(y, nr, 1)?;
    let z = matmul(&filter.w, y)?;
    let k = y.cols();
    Ok(EqualizedLatent {
        symbols: z.to_column_major(),
        // For the MMSE filter W·√P·H = I − E, so stream i keeps gain 1 − E_ii.
        per_symbol_gain: (0..k)
            .flat_map(|_| filter.err_var.iter().map(|e| 1.0 - e))
            .collect(),
        per_symbol_err_var: (0..k)
            .flat_map(|_| filter.err_var.iter().copied())
            .collect(),
    })
}

/// Correction added to the MMSE estimate of one channel use.
pub trait PostEqualizer: Send + Sync {
    /// Returns `N_t` corrections for the received column `y` under channel `h`.
    fn correction(&self, y: &[Complex], h: &ComplexMatrix) -> Vec<Complex>;

    fn name(&self) -> &str;
}

/// Default hook: no correction.
#[derive(Debug, Clone, Copy, Default)]
pub struct ZeroHook;

impl PostEqualizer for ZeroHook {
    fn correction(&self, _y: &[Complex], h: &ComplexMatrix) -> Vec<Complex> {
        vec![Complex::new(0.0, 0.0); h.cols()]
    }

    fn name(&self) -> &str {
        "zero"
    }
}

/// Test hook adding the same constant to every symbol.
#[derive(Debug, Clone, Copy)]
pub struct ConstantHook(pub Complex);

impl PostEqualizer for ConstantHook {
    fn correction(&self, _y: &[Complex], h: &ComplexMatrix) -> Vec<Complex> {
        vec![self.0; h.cols()]
    }

    fn name(&self) -> &str {
        "constant"
    }
}

/// Test hook `y ↦ M·y + b`.
#[derive(Debug, Clone)]
pub struct AffineHook {
    pub m: ComplexMatrix,
    pub b: Vec<Complex>,
}

impl PostEqualizer for AffineHook {
    fn correction(&self, y: &[Complex], _h: &ComplexMatrix) -> Vec<Complex> {
        matvec(&self.m, y)
            .expect("affine hook shape matches the received column")
            .into_iter()
            .zip(&self.b)
            .map(|(a, b)| a + b)
            .collect()
    }

    fn name(&self) -> &str {
        "affine"
    }
}

/// `Ẑ[i] = Z_MMSE[i] + hook(Y[i], H)` for every channel use `i`.
///
/// `z_mmse` must be the full, untruncated output of [`mmse_equalize`]. The
/// per-symbol statistics are carried over unchanged.
pub fn post_equalize(
    hook: &dyn PostEqualizer,
    z_mmse: EqualizedLatent,
    y: &ComplexMatrix,
    state: &ChannelState,
) -> Result<EqualizedLatent> {
    let nt = state.nt();
    if z_mmse.len() != nt * y.cols() {
        return Err(ReceiverError::Shape {
            rows: y.rows(),
            cols: y.cols(),
            expected_rows: state.nr(),
            block: 1,
        });
    }
    let mut out = z_mmse;
    for i in 0..y.cols() {
        let corr = hook.correction(&y.column(i), &state.h);
        for (z, c) in out.symbols[i * nt..(i + 1) * nt].iter_mut().zip(corr) {
            *z += c;
        }
    }
    Ok(out)
}

/// Decodes a frame with the receiver matching `scheme`.
pub fn receive(
    scheme: &StmScheme,
    y: &ComplexMatrix,
    state: &ChannelState,
    params: &ChannelParams,
    latent_len: usize,
    hook: &dyn PostEqualizer,
) -> Result<EqualizedLatent> {
    match scheme.kind() {
        StmKind::Multiplexing => {
            let z = mmse_equalize(y, state, params)?;
            Ok(post_equalize(hook, z, y, state)?.truncated(latent_len))
        }
        _ => ostbc_decode(scheme, y, state, params, latent_len),
    }
}
