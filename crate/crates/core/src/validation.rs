//! Cross-module invariant checks run by `validate`.
//!
//! Each check returns a [`CheckResult`]; nothing here panics on a failed
//! invariant. The orthogonality check accepts a block builder so tests can
//! feed it a corrupted design and confirm that it trips.

use crate::baseline::ergodic_capacity;
use crate::channel::{
    complex_gaussian, noise_var_for_snr, purpose, sample_channel, transmit_noiseless,
    ChannelParams, Seed,
};
use crate::link::{run_frame, LinkSetup};
use crate::metrics::{diversity_order_estimate, outage_curve, sinr_mmse_streams};
use crate::numerics::{frobenius_norm_sq, Complex, ComplexMatrix};
use crate::receiver::{
    alamouti_decouple, equivalent_channel_with, mmse_equalize, ostbc_decode, ostbc_scalar_mmse,
    ZeroHook,
};
use crate::source::GaussianSource;
use crate::stm::{block_matrix, encode, normalize_latent, StmScheme};
use rand::Rng;
use std::fmt;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Level {
    Fast,
    Full,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CheckResult {
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
}

impl fmt::Display for CheckResult {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let tag = if self.passed { "PASS" } else { "FAIL" };
        write!(f, "[{tag}] {}: {}", self.name, self.detail)
    }
}

fn result(name: &'static str, passed: bool, detail: String) -> CheckResult {
    CheckResult {
        name,
        passed,
        detail,
    }
}

fn ostbc_schemes() -> [StmScheme; 3] {
    [
        StmScheme::alamouti(),
        StmScheme::ostbc3_rate12(),
        StmScheme::ostbc3_rate34(),
    ]
}

fn random_symbols<R: Rng>(rng: &mut R, n: usize) -> Vec<Complex> {
    (0..n).map(|_| complex_gaussian(rng, 1.0)).collect()
}

/// Equivalent-channel Gram matrix equals `g·I` (relative 1e-9) for every
/// OSTBC design over `trials` random channels.
pub fn check_orthogonality(
    trials: usize,
    seed: Seed,
    block: &dyn Fn(&StmScheme, &[Complex]) -> ComplexMatrix,
) -> CheckResult {
    let mut worst = 0.0f64;
    for scheme in ostbc_schemes() {
        for nr in 1..=4 {
            let p = ChannelParams::new(scheme.nt(), nr, 1.0, 1.0).expect("valid");
            for t in 0..trials as u64 {
                let st = sample_channel(&p, seed.with_stream(t + 1000 * nr as u64));
                let eq = match equivalent_channel_with(&scheme, &st, |x| block(&scheme, x)) {
                    Ok(eq) => eq,
                    Err(e) => return result("ostbc_orthogonality", false, e.to_string()),
                };
                let gram = eq.a.transpose().matmul(&eq.a).expect("conformable");
                for i in 0..gram.rows() {
                    for j in 0..gram.cols() {
                        let want = if i == j { eq.gain } else { 0.0 };
                        worst = worst
                            .max((gram.get(i, j) - want).abs() / eq.gain.max(f64::MIN_POSITIVE));
                    }
                }
            }
        }
    }
    result(
        "ostbc_orthogonality",
        worst <= 1e-9,
        format!("max relative Gram deviation {worst:.3e} (tol 1e-9)"),
    )
}

/// Noiseless OSTBC frames decode to `[P·g/(P·g+σ²)]·z`; the Alamouti closed
/// form agrees with the generic decoder.
pub fn check_shrinkage(trials: usize, seed: Seed) -> CheckResult {
    let mut rng = seed.derive(purpose::SOURCE).rng();
    let mut worst = 0.0f64;
    let mut worst_cross = 0.0f64;
    for scheme in ostbc_schemes() {
        for t in 0..trials as u64 {
            let nr = rng.random_range(1..=4);
            let power = rng.random_range(0.1..10.0);
            let noise_var = rng.random_range(0.01..5.0);
            let p = ChannelParams::new(scheme.nt(), nr, power, noise_var).expect("valid");
            let st = sample_channel(&p, seed.with_stream(t));
            let l = scheme.symbols_per_block() * rng.random_range(1..4);
            let z = normalize_latent(&random_symbols(&mut rng, l)).expect("non-degenerate");
            let frame = encode(&scheme, &z).expect("encodable");
            let y = transmit_noiseless(&frame.matrix, &st, &p).expect("valid frame");
            let est = ostbc_decode(&scheme, &y, &st, &p, l).expect("decodable");
            let s = scheme.frame_scale();
            let g = scheme.orthogonality_constant() * s * s * st.gain();
            let shrink = power * g / (power * g + noise_var);
            for (zh, zt) in est.symbols.iter().zip(&z.symbols) {
                let want = zt * shrink;
                worst = worst.max((zh - want).norm() / want.norm().max(1e-300));
            }
            if scheme == StmScheme::alamouti() {
                for b in 0..l / 2 {
                    let (m1, m2) =
                        alamouti_decouple(&y.column(2 * b), &y.column(2 * b + 1), &st, power)
                            .expect("nt = 2");
                    for (i, m) in [m1, m2].into_iter().enumerate() {
                        let direct = ostbc_scalar_mmse(m, st.gain(), power, noise_var);
                        let generic = est.symbols[2 * b + i];
                        worst_cross =
                            worst_cross.max((direct - generic).norm() / direct.norm().max(1e-300));
                    }
                }
            }
        }
    }
    result(
        "shrinkage_identity",
        worst <= 1e-9 && worst_cross <= 1e-9,
        format!("max relative error {worst:.3e}, Alamouti closed form vs generic {worst_cross:.3e} (tol 1e-9)"),
    )
}

/// Per-stream MMSE error variance equals `1/(1 + γ_i)`.
pub fn check_mmse_sinr_identity(trials: usize, seed: Seed) -> CheckResult {
    let mut worst = 0.0f64;
    for t in 0..trials as u64 {
        let nt = 1 + (t % 3) as usize;
        let nr = 1 + (t % 4) as usize;
        let p = ChannelParams::at_snr_db(nt, nr, 1.0, (t % 25) as f64 - 5.0).expect("valid");
        let st = sample_channel(&p, seed.with_stream(t));
        let y = ComplexMatrix::zeros(nr, 1);
        let eq = mmse_equalize(&y, &st, &p).expect("equalizable");
        let gammas = sinr_mmse_streams(&st, &p).expect("valid");
        for (e, g) in eq.per_symbol_err_var.iter().zip(&gammas) {
            worst = worst.max((e - 1.0 / (1.0 + g)).abs());
        }
    }
    result(
        "mmse_sinr_identity",
        worst <= 1e-9,
        format!("max |err_var - 1/(1+sinr)| = {worst:.3e} (tol 1e-9)"),
    )
}

/// Sample moments of the Rayleigh channel.
pub fn check_channel_moments(draws: usize, seed: Seed) -> CheckResult {
    let p = ChannelParams::new(2, 2, 1.0, 1.0).expect("valid");
    let mut mean = Complex::new(0.0, 0.0);
    let mut power = 0.0;
    let mut fro = 0.0;
    for t in 0..draws as u64 {
        let st = sample_channel(&p, seed.with_stream(t));
        mean += st.h.get(0, 0);
        power += st.h.get(0, 0).norm_sqr();
        fro += frobenius_norm_sq(&st.h);
    }
    let n = draws as f64;
    let (mean, power, fro) = (mean / n, power / n, fro / n);
    let ok = mean.norm() <= 0.02 && (power - 1.0).abs() <= 0.02 && (fro / 4.0 - 1.0).abs() <= 0.02;
    result(
        "channel_moments",
        ok,
        format!(
            "|mean h| = {:.4}, E|h|^2 = {power:.4}, E||H||_F^2 = {fro:.4} (target 4)",
            mean.norm()
        ),
    )
}

/// Monte Carlo end-to-end MSE agrees with the analytic distortion (2%) for
/// both paths at three SNR points.
pub fn check_distortion(frames: usize, seed: Seed) -> CheckResult {
    let mut worst = 0.0f64;
    let mut detail = Vec::new();
    for scheme in [
        StmScheme::alamouti(),
        StmScheme::multiplexing(2).expect("nt = 2"),
    ] {
        for snr in [0.0, 10.0, 20.0] {
            let p = ChannelParams::new(2, 2, 1.0, noise_var_for_snr(snr, 2, 1.0)).expect("valid");
            let setup = LinkSetup::new(scheme, p, GaussianSource::unit(32).expect("even"), 8)
                .expect("sizes");
            let (mut mc, mut an) = (0.0, 0.0);
            for t in 0..frames as u64 {
                let trial = seed.with_stream(t);
                let st = sample_channel(&p, trial.derive(purpose::CHANNEL));
                let out = run_frame(
                    &setup,
                    &st,
                    trial.derive(purpose::SOURCE),
                    trial.derive(purpose::NOISE),
                    &ZeroHook,
                )
                .expect("frame runs");
                mc += out.mse;
                an += out.analytic_mse;
            }
            let rel = (mc - an).abs() / an;
            worst = worst.max(rel);
            detail.push(format!("{}@{snr}dB {rel:.4}", scheme.name()));
        }
    }
    result(
        "distortion_oracle",
        worst <= 0.02,
        format!(
            "relative MC-vs-analytic gap: {} (tol 0.02)",
            detail.join(", ")
        ),
    )
}

/// CDF of a sum of two unit exponentials (`‖H‖²_F` for a 1×2 channel).
pub fn gamma2_cdf(x: f64) -> f64 {
    if x <= 0.0 {
        0.0
    } else {
        1.0 - (-x).exp() * (1.0 + x)
    }
}

/// Outage threshold used by the diversity checks.
pub const DIVERSITY_THRESHOLD_DB: f64 = 15.0;

/// Alamouti 1-receive-antenna outage: slope between 20 and 30 dB in
/// [1.6, 2.4] and agreement with the Gamma(2) CDF where the oracle
/// probability is at least 0.05.
pub fn check_diversity(trials: usize, seed: Seed) -> (CheckResult, CheckResult) {
    let grid = [0.0, 5.0, 10.0, 15.0, 20.0, 25.0, 30.0];
    let scheme = StmScheme::alamouti();
    let curve = match outage_curve(&scheme, 1, 1.0, &grid, DIVERSITY_THRESHOLD_DB, trials, seed) {
        Ok(c) => c,
        Err(e) => {
            let r = result("diversity_slope", false, e.to_string());
            return (
                r.clone(),
                CheckResult {
                    name: "outage_chi_square",
                    ..r
                },
            );
        }
    };
    let slope = diversity_order_estimate(&curve, 4, 6);
    let slope_check = match slope {
        Ok(d) => result(
            "diversity_slope",
            (1.6..=2.4).contains(&d),
            format!("estimated order {d:.3} between 20 and 30 dB (target [1.6, 2.4])"),
        ),
        Err(e) => result("diversity_slope", false, e.to_string()),
    };
    let threshold = 10f64.powf(DIVERSITY_THRESHOLD_DB / 10.0);
    let mut worst = 0.0f64;
    for (snr, p_mc) in grid.iter().zip(&curve.prob) {
        // γ = P·‖H‖²/σ² with σ² = P/(2·SNR)
        let snr_lin = 10f64.powf(snr / 10.0);
        let p_oracle = gamma2_cdf(threshold / (2.0 * snr_lin));
        if p_oracle >= 0.05 {
            worst = worst.max((p_mc - p_oracle).abs() / p_oracle);
        }
    }
    let chi = result(
        "outage_chi_square",
        worst <= 0.02,
        format!("max relative deviation from chi-square(4) CDF {worst:.4} (tol 0.02)"),
    );
    (slope_check, chi)
}

/// `∫₀^∞ log₂(1 + t)·e^{−t} dt` by composite Simpson on `[0, 60]`.
pub fn rayleigh_siso_capacity_quadrature(snr: f64) -> f64 {
    let n = 200_000;
    let b = 60.0;
    let h = b / n as f64;
    let f = |t: f64| (1.0 + snr * t).log2() * (-t).exp();
    let mut s = f(0.0) + f(b);
    for i in 1..n {
        let w = if i % 2 == 1 { 4.0 } else { 2.0 };
        s += w * f(i as f64 * h);
    }
    s * h / 3.0
}

pub fn check_ergodic_capacity(trials: usize, seed: Seed) -> CheckResult {
    let p = ChannelParams::new(1, 1, 1.0, 1.0).expect("valid");
    let mc = ergodic_capacity(&p, trials, seed).ergodic_mean;
    let oracle = rayleigh_siso_capacity_quadrature(1.0);
    let rel = (mc - oracle).abs() / oracle;
    result(
        "ergodic_capacity",
        rel <= 0.02,
        format!(
            "1x1 at 0 dB: Monte Carlo {mc:.5} vs quadrature {oracle:.5} (rel {rel:.4}, tol 0.02)"
        ),
    )
}

/// Runs the suite at the given level.
pub fn validate(level: Level, master_seed: u64) -> Vec<CheckResult> {
    let seed = Seed::new(master_seed, 0);
    let mut out = vec![
        check_orthogonality(250, seed.derive(1), &|s, x| block_matrix(s, x)),
        check_shrinkage(300, seed.derive(2)),
        check_mmse_sinr_identity(1000, seed.derive(3)),
        check_channel_moments(100_000, seed.derive(4)),
        check_distortion(100_000, seed.derive(5)),
    ];
    if level == Level::Full {
        let (slope, chi) = check_diversity(1_000_000, seed.derive(6));
        out.push(slope);
        out.push(chi);
        out.push(check_ergodic_capacity(100_000, seed.derive(7)));
    }
    out
}
