//! Deterministic parallel sweep runner.
//!
//! Trial `t` of every cell draws its randomness from `Seed::new(master, t)`
//! with purpose-specific derivations:
//!
//! * channel: keyed by `(nt, nr)` only, so every scheme, SNR point and
//!   bandwidth ratio sees the same channel realizations;
//! * source: keyed by `rho`, shared across schemes and SNR points;
//! * noise: keyed by `(scheme, nr, rho)`, shared across SNR points.
//!
//! Workers evaluate whole trials (all SNR points) and results are reduced
//! in ascending trial order on one thread, so the output does not depend
//! on the worker count.

use crate::config::SweepConfig;
use crate::{Result, SimError};
use mimo_jscc::baseline::{mimo_capacity, separation_distortion};
use mimo_jscc::channel::{mix64, noise_var_for_snr, purpose, sample_channel, ChannelParams, Seed};
use mimo_jscc::link::{run_frame, FrameOutcome, LinkSetup};
use mimo_jscc::receiver::ZeroHook;
use mimo_jscc::source::{psnr, GaussianSource};
use mimo_jscc::stm::{Ratio, StmScheme};
use rayon::prelude::*;

/// Scheme label of the separation (capacity + rate-distortion) baseline.
pub const BASELINE_SCHEME: &str = "separation-rd";

/// `rho` column value for rows that do not depend on a bandwidth ratio.
pub const NO_RHO: &str = "-";

/// Two-sided 95% normal quantile.
const Z95: f64 = 1.959_963_984_540_054;

#[derive(Debug, Clone, PartialEq)]
pub struct ResultRow {
    pub scheme: String,
    pub nt: usize,
    pub nr: usize,
    pub snr_db: f64,
    pub rho: String,
    pub metric: String,
    pub value: f64,
    pub ci95: f64,
    pub trials: usize,
    pub seed: u64,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct SweepResult {
    pub rows: Vec<ResultRow>,
}

impl SweepResult {
    /// Distinct metric names in first-appearance order.
    pub fn metrics(&self) -> Vec<String> {
        let mut out: Vec<String> = Vec::new();
        for r in &self.rows {
            if !out.contains(&r.metric) {
                out.push(r.metric.clone());
            }
        }
        out
    }
}

/// Sample mean and 95% normal-approximation half-width.
pub fn mean_ci(values: &[f64]) -> (f64, f64) {
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    if values.len() < 2 {
        return (mean, 0.0);
    }
    let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0);
    (mean, Z95 * (var / n).sqrt())
}

/// Mean and half-width of a Bernoulli proportion.
pub fn proportion_ci(hits: usize, trials: usize) -> (f64, f64) {
    let p = hits as f64 / trials as f64;
    (p, Z95 * (p * (1.0 - p) / trials as f64).sqrt())
}

pub fn to_db(x: f64) -> f64 {
    10.0 * x.log10()
}

/// Seeds of trial `t`.
pub fn channel_seed(master: u64, nt: usize, nr: usize, t: u64) -> Seed {
    Seed::new(master, t)
        .derive(purpose::CHANNEL)
        .derive(mix64(nt as u64) ^ nr as u64)
}

fn rho_key(rho: Ratio) -> u64 {
    mix64(rho.num) ^ rho.den
}

fn source_seed(master: u64, rho: Ratio, t: u64) -> Seed {
    Seed::new(master, t)
        .derive(purpose::SOURCE)
        .derive(rho_key(rho))
}

fn noise_seed(master: u64, scheme: &StmScheme, nr: usize, rho: Ratio, t: u64) -> Seed {
    let name_key = scheme.name().bytes().fold(0u64, |h, b| mix64(h ^ b as u64));
    Seed::new(master, t)
        .derive(purpose::NOISE)
        .derive(name_key ^ mix64(scheme.nt() as u64))
        .derive(mix64(nr as u64) ^ rho_key(rho))
}

fn pool(workers: usize) -> Result<rayon::ThreadPool> {
    rayon::ThreadPoolBuilder::new()
        .num_threads(workers)
        .build()
        .map_err(|e| SimError::Pool(e.to_string()))
}

/// Worker count: the config value, or all available cores.
pub fn effective_workers(config: &SweepConfig) -> usize {
    config
        .workers
        .unwrap_or_else(|| std::thread::available_parallelism().map_or(1, |n| n.get()))
}

/// Evaluates `f(t)` for every trial on `pool`, returning results in trial order.
pub fn par_trials<T, F>(pool: &rayon::ThreadPool, trials: usize, f: F) -> Result<Vec<T>>
where
    T: Send,
    F: Fn(u64) -> Result<T> + Sync,
{
    pool.install(|| (0..trials as u64).into_par_iter().map(&f).collect())
}

fn params_at(nt: usize, nr: usize, power: f64, snr_db: f64) -> Result<ChannelParams> {
    ChannelParams::new(nt, nr, power, noise_var_for_snr(snr_db, nt, power))
        .map_err(|e| SimError::Core(e.into()))
}

/// Runs every grid cell of `config`.
pub fn run_sweep(config: &SweepConfig) -> Result<SweepResult> {
    let pool = pool(effective_workers(config))?;
    let source = GaussianSource::new(config.source_n, config.source_variance)
        .map_err(|e| SimError::Core(e.into()))?;
    let master = config.master_seed;
    let t_count = config.trials;
    let mut rows = Vec::new();

    let mut push = |scheme: &str,
                    nr: usize,
                    snr_db: f64,
                    rho: Ratio,
                    metric: &str,
                    (value, ci95): (f64, f64)| {
        rows.push(ResultRow {
            scheme: scheme.to_string(),
            nt: config.nt,
            nr,
            snr_db,
            rho: rho.to_string(),
            metric: metric.to_string(),
            value,
            ci95,
            trials: t_count,
            seed: master,
        });
    };

    for scheme in &config.schemes {
        for &nr in &config.nr_list {
            for &rho in &config.rho {
                let k = config.channel_uses(rho);
                let setups = config
                    .snr_db_grid
                    .iter()
                    .map(|&snr| {
                        let p = params_at(config.nt, nr, config.power, snr)?;
                        LinkSetup::new(*scheme, p, source, k).map_err(SimError::from)
                    })
                    .collect::<Result<Vec<_>>>()?;
                let per_trial: Vec<Vec<FrameOutcome>> = par_trials(&pool, t_count, |t| {
                    let st =
                        sample_channel(&setups[0].params, channel_seed(master, config.nt, nr, t));
                    let src = source_seed(master, rho, t);
                    let noise = noise_seed(master, scheme, nr, rho, t);
                    setups
                        .iter()
                        .map(|s| run_frame(s, &st, src, noise, &ZeroHook).map_err(SimError::from))
                        .collect()
                })?;

                for (i, &snr) in config.snr_db_grid.iter().enumerate() {
                    let cell: Vec<&FrameOutcome> = per_trial.iter().map(|v| &v[i]).collect();
                    let mse: Vec<f64> = cell.iter().map(|o| o.mse).collect();
                    let psnr_db: Vec<f64> = mse.iter().map(|&m| psnr(m, config.max_val)).collect();
                    let sinr_db: Vec<f64> = cell.iter().map(|o| to_db(o.mean_sinr)).collect();
                    push(scheme.name(), nr, snr, rho, "mse", mean_ci(&mse));
                    push(scheme.name(), nr, snr, rho, "psnr_db", mean_ci(&psnr_db));
                    push(scheme.name(), nr, snr, rho, "sinr_db", mean_ci(&sinr_db));
                    if let Some(th) = config.outage_threshold_db {
                        let limit = 10f64.powf(th / 10.0);
                        let hits = cell.iter().filter(|o| o.frame_sinr < limit).count();
                        push(
                            scheme.name(),
                            nr,
                            snr,
                            rho,
                            "outage_prob",
                            proportion_ci(hits, t_count),
                        );
                    }
                }
            }
        }
    }

    if config.baseline {
        for &nr in &config.nr_list {
            let params = config
                .snr_db_grid
                .iter()
                .map(|&snr| params_at(config.nt, nr, config.power, snr))
                .collect::<Result<Vec<_>>>()?;
            let capacity: Vec<Vec<f64>> = par_trials(&pool, t_count, |t| {
                let st = sample_channel(&params[0], channel_seed(master, config.nt, nr, t));
                Ok(params.iter().map(|p| mimo_capacity(&st, p)).collect())
            })?;
            for &rho in &config.rho {
                let k = config.channel_uses(rho);
                for (i, &snr) in config.snr_db_grid.iter().enumerate() {
                    let c: Vec<f64> = capacity.iter().map(|v| v[i]).collect();
                    let d: Vec<f64> = c
                        .iter()
                        .map(|&c| {
                            separation_distortion(c, k, config.source_n, config.source_variance)
                        })
                        .collect();
                    let p: Vec<f64> = d.iter().map(|&d| psnr(d, config.max_val)).collect();
                    push(BASELINE_SCHEME, nr, snr, rho, "capacity_bpcu", mean_ci(&c));
                    push(BASELINE_SCHEME, nr, snr, rho, "mse", mean_ci(&d));
                    push(BASELINE_SCHEME, nr, snr, rho, "psnr_db", mean_ci(&p));
                }
            }
        }
    }

    Ok(SweepResult { rows })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ci_examples() {
        assert_eq!(mean_ci(&[3.0]), (3.0, 0.0));
        let (m, h) = mean_ci(&[1.0, 3.0]);
        assert_eq!(m, 2.0);
        assert!((h - Z95 * (2.0f64 / 2.0).sqrt()).abs() < 1e-15);
        assert_eq!(proportion_ci(0, 10), (0.0, 0.0));
        assert_eq!(proportion_ci(10, 10), (1.0, 0.0));
    }

    #[test]
    fn channel_seed_ignores_scheme_and_snr() {
        // Only (master, nt, nr, t) enter the channel seed.
        assert_eq!(channel_seed(1, 2, 2, 5), channel_seed(1, 2, 2, 5));
        assert_ne!(channel_seed(1, 2, 2, 5), channel_seed(1, 2, 4, 5));
        assert_ne!(channel_seed(1, 2, 2, 5), channel_seed(1, 2, 2, 6));
    }
}
