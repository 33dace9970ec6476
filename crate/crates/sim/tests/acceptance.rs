//! Acceptance suite. Prints one PASS/FAIL line per criterion and exits
//! nonzero if any criterion fails.

use mimo_jscc::baseline::mimo_capacity;
use mimo_jscc::channel::{
    complex_gaussian, mix64, noise_var_for_snr, purpose, sample_channel, transmit,
    transmit_noiseless, ChannelParams, Seed,
};
use mimo_jscc::link::{run_frame, LinkSetup};
use mimo_jscc::metrics::{
    diversity_order_estimate, outage_curve, sinr_diversity, sinr_mmse_streams,
};
use mimo_jscc::numerics::frobenius_norm_sq;
use mimo_jscc::receiver::{
    alamouti_decouple, equivalent_channel, mmse_equalize, ostbc_decode, ostbc_scalar_mmse, receive,
    MmseFilter, ZeroHook,
};
use mimo_jscc::source::GaussianSource;
use mimo_jscc::stm::{channel_uses, encode, latent_length, normalize_latent, ImageDims, Ratio};
use mimo_jscc::{Complex, ComplexMatrix, StmScheme};
use mimo_jscc_sim::config::SweepConfig;
use mimo_jscc_sim::csvio::{to_csv_string, write_csv};
use mimo_jscc_sim::sweep::run_sweep;
use nalgebra::DMatrix;
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::time::Instant;

type Outcome = (bool, String);

/// Uniform draw in `[lo, hi)` from a counter.
fn uniform(key: u64, lo: f64, hi: f64) -> f64 {
    lo + (hi - lo) * (mix64(key) >> 11) as f64 / (1u64 << 53) as f64
}

fn random_symbols(n: usize, seed: Seed) -> Vec<Complex> {
    let mut rng = seed.rng();
    (0..n).map(|_| complex_gaussian(&mut rng, 1.0)).collect()
}

fn ostbc() -> [StmScheme; 3] {
    [
        StmScheme::alamouti(),
        StmScheme::ostbc3_rate12(),
        StmScheme::ostbc3_rate34(),
    ]
}

fn c1_latent_lengths() -> Outcome {
    let rho = Ratio::new(1, 8).unwrap();
    let k = channel_uses(rho, ImageDims::new(3, 32, 32)).unwrap();
    let mux = latent_length(&StmScheme::multiplexing(3).unwrap(), k).unwrap();
    let r12 = latent_length(&StmScheme::ostbc3_rate12(), k).unwrap();
    let r34 = latent_length(&StmScheme::ostbc3_rate34(), k).unwrap();
    (
        (k, mux, r12, r34) == (384, 1152, 192, 288),
        format!("k = {k}, l(mux) = {mux}, l(rate-1/2) = {r12}, l(rate-3/4) = {r34}"),
    )
}

fn c2_alamouti_shrinkage() -> Outcome {
    let s = StmScheme::alamouti();
    let (mut worst, mut worst_closed) = (0.0f64, 0.0f64);
    for t in 0..1000u64 {
        let nr = 1 + (t % 4) as usize;
        let power = uniform(t, 0.1, 10.0);
        let noise_var = uniform(t ^ 0xabcdef, 0.01, 5.0);
        let p = ChannelParams::new(2, nr, power, noise_var).unwrap();
        let st = sample_channel(&p, Seed::new(201, t));
        let z = normalize_latent(&random_symbols(2, Seed::new(202, t))).unwrap();
        let y = transmit_noiseless(&encode(&s, &z).unwrap().matrix, &st, &p).unwrap();
        let est = ostbc_decode(&s, &y, &st, &p, 2).unwrap();
        let g = frobenius_norm_sq(&st.h);
        let shrink = power * g / (power * g + noise_var);
        let (m1, m2) = alamouti_decouple(&y.column(0), &y.column(1), &st, power).unwrap();
        for (i, m) in [m1, m2].into_iter().enumerate() {
            let want = z.symbols[i] * shrink;
            worst = worst.max((est.symbols[i] - want).norm() / want.norm());
            let closed = ostbc_scalar_mmse(m, g, power, noise_var);
            worst_closed = worst_closed.max((closed - want).norm() / want.norm());
        }
    }
    (
        worst <= 1e-9 && worst_closed <= 1e-9,
        format!("1000 cases, max rel error {worst:.2e} (generic), {worst_closed:.2e} (closed form), tol 1e-9"),
    )
}

fn c3_orthogonality() -> Outcome {
    let mut parts = Vec::new();
    let mut ok = true;
    for s in ostbc() {
        let mut worst = 0.0f64;
        for t in 0..1000u64 {
            let nr = 1 + (t % 4) as usize;
            let p = ChannelParams::new(s.nt(), nr, 1.0, 1.0).unwrap();
            let st = sample_channel(&p, Seed::new(301, t));
            let eq = equivalent_channel(&s, &st).unwrap();
            let gram = eq.a.transpose().matmul(&eq.a).unwrap();
            let g = s.orthogonality_constant() * s.frame_scale().powi(2) * st.gain();
            for i in 0..gram.rows() {
                for j in 0..gram.cols() {
                    let want = if i == j { g } else { 0.0 };
                    worst = worst.max((gram.get(i, j) - want).abs() / g);
                }
            }
            worst = worst.max((eq.gain - g).abs() / g);
        }
        ok &= worst <= 1e-9;
        parts.push(format!("{} {worst:.2e}", s.name()));
    }
    (
        ok,
        format!(
            "max rel |AᵀA − g·I| over 1000 H: {} (tol 1e-9)",
            parts.join(", ")
        ),
    )
}

fn to_na(m: &ComplexMatrix) -> DMatrix<Complex> {
    DMatrix::from_row_slice(m.rows(), m.cols(), m.as_slice())
}

/// Wiener filter for `y = √P·H·z + n` with unit-power `z`: `R_zy·R_yy⁻¹`.
fn wiener(h: &ComplexMatrix, p: &ChannelParams) -> DMatrix<Complex> {
    let h = to_na(h);
    let (nr, nt) = h.shape();
    let sp = Complex::from(p.power.sqrt());
    if nt < nr {
        // Push-through form, better conditioned for tall H.
        let r = h.adjoint() * &h * Complex::from(p.power)
            + DMatrix::identity(nt, nt) * Complex::from(p.noise_var);
        r.try_inverse().unwrap() * h.adjoint() * sp
    } else {
        let r = &h * h.adjoint() * Complex::from(p.power)
            + DMatrix::identity(nr, nr) * Complex::from(p.noise_var);
        h.adjoint() * r.try_inverse().unwrap() * sp
    }
}

fn c4_mmse() -> Outcome {
    let mut w_err = 0.0f64;
    let mut id_err = 0.0f64;
    for (nt, nr) in [(2, 1), (2, 2), (2, 4), (3, 1), (3, 3), (4, 2)] {
        for (i, snr) in [-5.0, 0.0, 9.0, 20.0, 30.0].into_iter().enumerate() {
            let p = ChannelParams::at_snr_db(nt, nr, 1.5, snr).unwrap();
            for t in 0..40u64 {
                let st = sample_channel(&p, Seed::new(401, t * 8 + i as u64));
                let f = MmseFilter::new(&st, &p).unwrap();
                let oracle = wiener(&st.h, &p);
                for r in 0..nt {
                    for c in 0..nr {
                        w_err = w_err.max((f.w.get(r, c) - oracle[(r, c)]).norm());
                    }
                }
                let gammas = sinr_mmse_streams(&st, &p).unwrap();
                let eq = mmse_equalize(&ComplexMatrix::zeros(nr, 1), &st, &p).unwrap();
                for (e, g) in eq.per_symbol_err_var.iter().zip(&gammas) {
                    id_err = id_err.max((e - 1.0 / (1.0 + g)).abs());
                }
            }
        }
    }
    // Empirical MSE over 1e5 symbols per channel.
    let mut worst_mse = 0.0f64;
    for (nt, nr) in [(2, 2), (3, 3), (2, 4)] {
        let s = StmScheme::multiplexing(nt).unwrap();
        let p = ChannelParams::at_snr_db(nt, nr, 1.0, 10.0).unwrap();
        let st = sample_channel(&p, Seed::new(402, nt as u64 * 10 + nr as u64));
        let per_frame = 1000 * nt;
        let frames = 100_000 / per_frame;
        let mut err = vec![0.0; nt];
        let mut predicted = vec![0.0; nt];
        for f in 0..frames as u64 {
            let z = normalize_latent(&random_symbols(per_frame, Seed::new(403, f))).unwrap();
            let y = transmit(&encode(&s, &z).unwrap().matrix, &st, &p, Seed::new(404, f)).unwrap();
            let est = receive(&s, &y, &st, &p, per_frame, &ZeroHook).unwrap();
            for (i, (zh, z0)) in est.symbols.iter().zip(&z.symbols).enumerate() {
                err[i % nt] += (zh - z0).norm_sqr();
            }
            predicted.copy_from_slice(&est.per_symbol_err_var[..nt]);
        }
        let count = (frames * per_frame / nt) as f64;
        for i in 0..nt {
            worst_mse = worst_mse.max((err[i] / count / predicted[i] - 1.0).abs());
        }
    }
    (
        w_err <= 1e-9 && id_err <= 1e-9 && worst_mse <= 0.03,
        format!(
            "Wiener max abs diff {w_err:.2e} (tol 1e-9), |err_var − 1/(1+γ)| {id_err:.2e} (tol 1e-9), \
             empirical/predicted MSE max rel gap {worst_mse:.4} over 1e5 symbols (tol 0.03)"
        ),
    )
}

fn c5_channel_statistics() -> Outcome {
    let mut ok = true;
    let mut parts = Vec::new();
    for (nt, nr) in [(2, 2), (3, 1), (2, 4)] {
        let p = ChannelParams::new(nt, nr, 1.0, 1.0).unwrap();
        let draws = 100_000u64;
        let (mut entry, mut frob) = (0.0, 0.0);
        for t in 0..draws {
            let st = sample_channel(&p, Seed::new(501, t));
            let g = st.gain();
            frob += g;
            entry += st.h.get(0, 0).norm_sqr();
        }
        let entry = entry / draws as f64;
        let frob = frob / draws as f64;
        let want = (nt * nr) as f64;
        ok &= (entry - 1.0).abs() <= 0.02 && (frob / want - 1.0).abs() <= 0.02;
        parts.push(format!(
            "{nt}x{nr}: E|h11|² = {entry:.4}, E‖H‖² = {frob:.4} (want {want})"
        ));
    }
    (ok, format!("{} over 1e5 draws (tol 2%)", parts.join("; ")))
}

fn gamma2_cdf(x: f64) -> f64 {
    1.0 - (-x).exp() * (1.0 + x)
}

fn c6_diversity() -> Outcome {
    let grid = [0.0, 5.0, 10.0, 15.0, 20.0, 25.0, 30.0];
    let threshold_db = 15.0;
    let curve = outage_curve(
        &StmScheme::alamouti(),
        1,
        1.0,
        &grid,
        threshold_db,
        1_000_000,
        Seed::new(601, 0),
    )
    .unwrap();
    let slope = diversity_order_estimate(&curve, 4, 6).unwrap();
    // γ = P·‖H‖²/σ² = 2·SNR·‖H‖² with ‖H‖² ~ Gamma(2, 1).
    let th = 10f64.powf(threshold_db / 10.0);
    let mut worst_rel = 0.0f64;
    let mut worst_abs = 0.0f64;
    for (i, &snr) in grid.iter().enumerate() {
        let oracle = gamma2_cdf(th / (2.0 * 10f64.powf(snr / 10.0)));
        worst_abs = worst_abs.max((curve.prob[i] - oracle).abs());
        if oracle >= 0.05 {
            worst_rel = worst_rel.max((curve.prob[i] / oracle - 1.0).abs());
        }
    }
    (
        (1.6..=2.4).contains(&slope) && worst_rel <= 0.02 && worst_abs <= 0.02,
        format!(
            "slope 20–30 dB = {slope:.3} (want [1.6, 2.4]); vs chi-square(4) CDF: max rel gap {worst_rel:.4} \
             where p ≥ 0.05, max abs gap {worst_abs:.2e} (tol 0.02); p = {:?}; 1e6 trials",
            curve.prob
        ),
    )
}

fn c7_low_snr_ordering() -> Outcome {
    let p = ChannelParams::at_snr_db(2, 1, 1.0, 9.0).unwrap();
    let draws = 100_000u64;
    let (mut div, mut mux) = (0.0, 0.0);
    for t in 0..draws {
        let st = sample_channel(&p, Seed::new(701, t));
        div += sinr_diversity(&st, &p, &StmScheme::alamouti()).unwrap();
        let s = sinr_mmse_streams(&st, &p).unwrap();
        mux += s.iter().sum::<f64>() / s.len() as f64;
    }
    let (div, mux) = (div / draws as f64, mux / draws as f64);
    (
        div > mux,
        format!("9 dB, 2x1: mean Alamouti SINR {div:.3} vs mean per-stream MMSE SINR {mux:.3} over 1e5 shared draws"),
    )
}

fn c8_distortion_oracle() -> Outcome {
    let mut ok = true;
    let mut parts = Vec::new();
    for scheme in [StmScheme::alamouti(), StmScheme::multiplexing(2).unwrap()] {
        for snr in [0.0, 10.0, 20.0] {
            let p = ChannelParams::new(2, 2, 1.0, noise_var_for_snr(snr, 2, 1.0)).unwrap();
            let setup = LinkSetup::new(scheme, p, GaussianSource::unit(32).unwrap(), 8).unwrap();
            let (mut mc, mut an) = (0.0, 0.0);
            for t in 0..100_000u64 {
                let s = Seed::new(801, t);
                let st = sample_channel(&p, s.derive(purpose::CHANNEL));
                let o = run_frame(
                    &setup,
                    &st,
                    s.derive(purpose::SOURCE),
                    s.derive(purpose::NOISE),
                    &ZeroHook,
                )
                .unwrap();
                mc += o.mse;
                an += o.analytic_mse;
            }
            let rel = (mc / an - 1.0).abs();
            ok &= rel <= 0.02;
            parts.push(format!("{}@{snr}dB {rel:.4}", scheme.name()));
        }
    }
    (
        ok,
        format!(
            "MC vs analytic rel gap over 1e5 frames: {} (tol 0.02)",
            parts.join(", ")
        ),
    )
}

/// `∫₀^∞ e^{−x}·log₂(1 + x) dx` by composite Simpson on [0, 60].
fn siso_ergodic_quadrature() -> f64 {
    let n = 600_000;
    let h = 60.0 / n as f64;
    let f = |x: f64| (-x).exp() * (1.0 + x).log2();
    let mut s = f(0.0) + f(60.0);
    for i in 1..n {
        s += if i % 2 == 1 { 4.0 } else { 2.0 } * f(i as f64 * h);
    }
    s * h / 3.0
}

fn c9_capacity() -> Outcome {
    let mut worst = 0.0f64;
    for snr in [-10.0, 0.0, 10.0, 20.0, 30.0] {
        let p = ChannelParams::at_snr_db(2, 2, 1.0, snr).unwrap();
        for t in 0..1000u64 {
            let st = sample_channel(&p, Seed::new(901, t));
            let h = to_na(&st.h);
            let g = h.adjoint() * h;
            let (a, d, b) = (g[(0, 0)].re, g[(1, 1)].re, g[(0, 1)].norm_sqr());
            let disc = ((a - d).powi(2) + 4.0 * b).sqrt();
            let (l1, l2) = ((a + d + disc) / 2.0, (a + d - disc) / 2.0);
            let rho = p.power_to_noise();
            let oracle = (1.0 + rho * l1).log2() + (1.0 + rho * l2).log2();
            worst = worst.max((mimo_capacity(&st, &p) - oracle).abs());
        }
    }
    let p = ChannelParams::at_snr_db(1, 1, 1.0, 0.0).unwrap();
    let trials = 200_000u64;
    let mc = (0..trials)
        .map(|t| mimo_capacity(&sample_channel(&p, Seed::new(902, t)), &p))
        .sum::<f64>()
        / trials as f64;
    let integral = siso_ergodic_quadrature();
    let rel = (mc / integral - 1.0).abs();
    let rel_quoted = (mc / 0.8591 - 1.0).abs();
    (
        worst <= 1e-9 && rel <= 0.02 && rel_quoted <= 0.02,
        format!(
            "2x2 eigenvalue oracle max abs diff {worst:.2e} (tol 1e-9); 1x1 ergodic @0 dB: MC {mc:.5} vs integral \
             {integral:.6} (rel {rel:.4}), vs 0.8591 (rel {rel_quoted:.4}), tol 0.02"
        ),
    )
}

fn c10_determinism() -> Outcome {
    let text = r#"
schemes = ["mux", "alamouti"]
nt = 2
nr_list = [1, 2, 4]
snr_db_grid = [0.0, 9.0, 17.0]
rho = ["1/8", "1/4"]
source_n = 64
trials = 64
master_seed = 1001
outage_threshold_db = 5.0
"#;
    let mut cfg = SweepConfig::from_toml_str(text).unwrap();
    let dir = tempfile::tempdir().unwrap();
    let mut bytes = Vec::new();
    for workers in [1, 8] {
        cfg.workers = Some(workers);
        let result = run_sweep(&cfg).unwrap();
        let path = dir.path().join(format!("w{workers}.csv"));
        write_csv(&result, &path).unwrap();
        assert_eq!(
            std::fs::read_to_string(&path).unwrap(),
            to_csv_string(&result)
        );
        bytes.push(std::fs::read(&path).unwrap());
    }
    let rows = bytes[0].iter().filter(|&&b| b == b'\n').count() - 1;
    (
        bytes[0] == bytes[1] && rows > 0,
        format!(
            "{rows} rows, {} bytes; 1 vs 8 workers byte-identical: {}",
            bytes[0].len(),
            bytes[0] == bytes[1]
        ),
    )
}

fn main() {
    let criteria: [(&str, fn() -> Outcome); 10] = [
        ("latent-length accounting", c1_latent_lengths),
        ("Alamouti shrinkage identity", c2_alamouti_shrinkage),
        ("OSTBC orthogonality", c3_orthogonality),
        ("MMSE correctness", c4_mmse),
        ("channel statistics", c5_channel_statistics),
        ("diversity order", c6_diversity),
        ("low-SNR ordering", c7_low_snr_ordering),
        ("end-to-end distortion oracle", c8_distortion_oracle),
        ("capacity", c9_capacity),
        ("determinism", c10_determinism),
    ];
    let mut failed = 0;
    for (i, (name, f)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let (passed, detail) = catch_unwind(AssertUnwindSafe(f)).unwrap_or_else(|e| {
            let msg = e
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| e.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_default();
            (false, format!("panicked: {msg}"))
        });
        if !passed {
            failed += 1;
        }
        println!(
            "[{}] criterion {}: {name}: {detail} ({:.1} s)",
            if passed { "PASS" } else { "FAIL" },
            i + 1,
            start.elapsed().as_secs_f64()
        );
    }
    println!(
        "acceptance: {} passed, {failed} failed",
        criteria.len() - failed
    );
    if failed > 0 {
        std::process::exit(1);
    }
}
