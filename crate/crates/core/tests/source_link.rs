use mimo_jscc::channel::{purpose, sample_channel, ChannelParams, Seed};
use mimo_jscc::link::{run_frame, LinkSetup};
use mimo_jscc::receiver::ZeroHook;
use mimo_jscc::source::*;
use mimo_jscc::StmScheme;
use proptest::prelude::*;

#[test]
fn source_moments() {
    let src = GaussianSource::new(100_000, 2.5).unwrap();
    let x = sample_source(&src, Seed::new(50, 0));
    let n = x.len() as f64;
    let mean = x.iter().sum::<f64>() / n;
    let var = x.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / n;
    assert!(mean.abs() < 0.02);
    assert!((var / 2.5 - 1.0).abs() < 0.02, "{var}");
}

proptest! {
    #[test]
    fn encoded_latent_has_unit_average_power(half in 1usize..64, l_frac in 0.05f64..1.0, seed in any::<u64>()) {
        let n = 2 * half;
        let l = ((half as f64 * l_frac).ceil() as usize).clamp(1, half);
        let codec = LinearCodec::new(n, l).unwrap();
        let x = sample_source(&GaussianSource::unit(n).unwrap(), Seed::new(seed, 0));
        let enc = encode_source(&codec, &x).unwrap();
        prop_assert_eq!(enc.latent.len(), l);
        prop_assert!((enc.latent.energy() - l as f64).abs() < 1e-9 * l as f64);
    }

    #[test]
    fn analytic_distortion_is_bounded(half in 1usize..64, errs in proptest::collection::vec(0.0f64..1.0, 1..64)) {
        let n = 2 * half.max(errs.len());
        let codec = LinearCodec::new(n, errs.len()).unwrap();
        let d = analytic_distortion(&codec, &errs, 1.0);
        prop_assert!((0.0..=1.0 + 1e-12).contains(&d));
    }
}

#[test]
fn distortion_falls_with_snr() {
    for scheme in [StmScheme::alamouti(), StmScheme::multiplexing(2).unwrap()] {
        let mut last = (f64::INFINITY, f64::INFINITY);
        for snr in [0.0, 5.0, 10.0, 20.0] {
            let p = ChannelParams::at_snr_db(2, 2, 1.0, snr).unwrap();
            let setup = LinkSetup::new(scheme, p, GaussianSource::unit(64).unwrap(), 16).unwrap();
            let (mut mc, mut an) = (0.0, 0.0);
            for t in 0..2000u64 {
                let s = Seed::new(51, t);
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
            assert!(mc < last.0 && an < last.1, "{scheme} @ {snr}");
            last = (mc, an);
        }
    }
}
