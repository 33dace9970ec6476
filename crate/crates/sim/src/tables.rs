//! Signal-level tables behind the `sinr`, `capacity` and `outage`
//! subcommands. Channels are shared across schemes and SNR points (same
//! seeds as [`crate::sweep`]), and rows use the sweep CSV schema with
//! `rho = "-"`.

use crate::sweep::{
    channel_seed, mean_ci, par_trials, proportion_ci, to_db, ResultRow, SweepResult,
    BASELINE_SCHEME, NO_RHO,
};
use crate::{Result, SimError};
use mimo_jscc::baseline::mimo_capacity;
use mimo_jscc::channel::{noise_var_for_snr, sample_channel, ChannelParams, ChannelState};
use mimo_jscc::metrics::{
    diversity_order_estimate, frame_sinr, sinr_diversity, sinr_mmse_streams, MetricsError,
    OutageCurve, MIN_OUTAGE_TRIALS,
};
use mimo_jscc::stm::StmScheme;

/// Axes shared by the signal-level tables.
#[derive(Debug, Clone, PartialEq)]
pub struct GridSpec {
    pub nt: usize,
    pub nr_list: Vec<usize>,
    pub snr_db_grid: Vec<f64>,
    pub trials: usize,
    pub seed: u64,
    pub power: f64,
    pub workers: usize,
}

impl GridSpec {
    fn check(&self) -> Result<()> {
        use crate::ConfigError as E;
        if self.nr_list.is_empty() || self.nr_list.contains(&0) {
            return Err(E::new("nr", "must be a nonempty list of positive integers").into());
        }
        if self.snr_db_grid.is_empty() || self.snr_db_grid.windows(2).any(|w| w[1] <= w[0]) {
            return Err(E::new("snr_db", "must be nonempty and strictly increasing").into());
        }
        if self.trials == 0 {
            return Err(E::new("trials", "must be at least 1").into());
        }
        if self.workers == 0 {
            return Err(E::new("workers", "must be at least 1").into());
        }
        if !(self.power > 0.0 && self.power.is_finite()) {
            return Err(E::new("power", "must be positive").into());
        }
        Ok(())
    }

    fn params(&self, nr: usize) -> Result<Vec<ChannelParams>> {
        self.snr_db_grid
            .iter()
            .map(|&snr| {
                ChannelParams::new(
                    self.nt,
                    nr,
                    self.power,
                    noise_var_for_snr(snr, self.nt, self.power),
                )
                .map_err(|e| SimError::Core(e.into()))
            })
            .collect()
    }

    fn pool(&self) -> Result<rayon::ThreadPool> {
        rayon::ThreadPoolBuilder::new()
            .num_threads(self.workers)
            .build()
            .map_err(|e| SimError::Pool(e.to_string()))
    }

    fn row(
        &self,
        scheme: &str,
        nr: usize,
        snr_db: f64,
        metric: &str,
        (value, ci95): (f64, f64),
    ) -> ResultRow {
        ResultRow {
            scheme: scheme.into(),
            nt: self.nt,
            nr,
            snr_db,
            rho: NO_RHO.into(),
            metric: metric.into(),
            value,
            ci95,
            trials: self.trials,
            seed: self.seed,
        }
    }
}

fn check_schemes(schemes: &[StmScheme], nt: usize) -> Result<()> {
    if schemes.is_empty() {
        return Err(crate::ConfigError::new("schemes", "at least one scheme is required").into());
    }
    if let Some(s) = schemes.iter().find(|s| s.nt() != nt) {
        return Err(crate::ConfigError::new("nt", format!("{s} does not match nt = {nt}")).into());
    }
    Ok(())
}

/// Mean linear SINR over the frame's symbols: the decoupled SINR for
/// OSTBC, the average per-stream MMSE SINR for multiplexing.
pub fn mean_sinr(scheme: &StmScheme, state: &ChannelState, params: &ChannelParams) -> Result<f64> {
    let v = if scheme.is_ostbc() {
        sinr_diversity(state, params, scheme)
    } else {
        sinr_mmse_streams(state, params).map(|s| s.iter().sum::<f64>() / s.len() as f64)
    };
    v.map_err(|e| SimError::Core(e.into()))
}

/// `sinr_db` rows: per-trial mean SINR in dB, averaged over trials.
pub fn sinr_table(schemes: &[StmScheme], grid: &GridSpec) -> Result<SweepResult> {
    grid.check()?;
    check_schemes(schemes, grid.nt)?;
    let pool = grid.pool()?;
    let mut rows = Vec::new();
    for &nr in &grid.nr_list {
        let params = grid.params(nr)?;
        // trial → scheme → snr
        let per_trial: Vec<Vec<Vec<f64>>> = par_trials(&pool, grid.trials, |t| {
            let st = sample_channel(&params[0], channel_seed(grid.seed, grid.nt, nr, t));
            schemes
                .iter()
                .map(|s| {
                    params
                        .iter()
                        .map(|p| mean_sinr(s, &st, p).map(to_db))
                        .collect()
                })
                .collect()
        })?;
        for (si, s) in schemes.iter().enumerate() {
            for (i, &snr) in grid.snr_db_grid.iter().enumerate() {
                let v: Vec<f64> = per_trial.iter().map(|t| t[si][i]).collect();
                rows.push(grid.row(s.name(), nr, snr, "sinr_db", mean_ci(&v)));
            }
        }
    }
    Ok(SweepResult { rows })
}

/// `capacity_bpcu` rows under the baseline scheme label.
pub fn capacity_table(grid: &GridSpec) -> Result<SweepResult> {
    grid.check()?;
    let pool = grid.pool()?;
    let mut rows = Vec::new();
    for &nr in &grid.nr_list {
        let params = grid.params(nr)?;
        let per_trial: Vec<Vec<f64>> = par_trials(&pool, grid.trials, |t| {
            let st = sample_channel(&params[0], channel_seed(grid.seed, grid.nt, nr, t));
            Ok(params.iter().map(|p| mimo_capacity(&st, p)).collect())
        })?;
        for (i, &snr) in grid.snr_db_grid.iter().enumerate() {
            let v: Vec<f64> = per_trial.iter().map(|t| t[i]).collect();
            rows.push(grid.row(BASELINE_SCHEME, nr, snr, "capacity_bpcu", mean_ci(&v)));
        }
    }
    Ok(SweepResult { rows })
}

/// Outage curve of one scheme. Frames whose SINR (worst stream for
/// multiplexing) falls below `threshold_db` are in outage.
pub fn outage_curve_par(
    scheme: &StmScheme,
    nr: usize,
    grid: &GridSpec,
    threshold_db: f64,
) -> Result<OutageCurve> {
    grid.check()?;
    check_schemes(std::slice::from_ref(scheme), grid.nt)?;
    if grid.trials < MIN_OUTAGE_TRIALS {
        return Err(SimError::Core(
            MetricsError::TooFewTrials {
                got: grid.trials,
                min: MIN_OUTAGE_TRIALS,
            }
            .into(),
        ));
    }
    let pool = grid.pool()?;
    let params = grid.params(nr)?;
    let limit = 10f64.powf(threshold_db / 10.0);
    let per_trial: Vec<Vec<bool>> = par_trials(&pool, grid.trials, |t| {
        let st = sample_channel(&params[0], channel_seed(grid.seed, grid.nt, nr, t));
        params
            .iter()
            .map(|p| {
                frame_sinr(scheme, &st, p)
                    .map(|g| g < limit)
                    .map_err(|e| SimError::Core(e.into()))
            })
            .collect()
    })?;
    let prob = (0..grid.snr_db_grid.len())
        .map(|i| per_trial.iter().filter(|t| t[i]).count() as f64 / grid.trials as f64)
        .collect();
    Ok(OutageCurve {
        snr_grid_db: grid.snr_db_grid.clone(),
        prob,
        threshold_db,
        trials: grid.trials,
    })
}

/// Half-width of the 95% interval of a slope estimate, by the delta method
/// on `log p` (binomial variance `(1 − p)/(p·T)` per point, correlation
/// between points ignored).
fn slope_ci(curve: &OutageCurve, lo: usize, hi: usize) -> f64 {
    let var = |p: f64| (1.0 - p) / (p * curve.trials as f64);
    let dlog = (curve.snr_grid_db[hi] - curve.snr_grid_db[lo]) / 10.0;
    let se =
        (var(curve.prob[lo]) + var(curve.prob[hi])).sqrt() / (std::f64::consts::LN_10 * dlog.abs());
    1.959_963_984_540_054 * se
}

/// `outage_prob` rows, plus one `diversity_order` row per (scheme, nr) when
/// `slope` names two grid indices. The slope row is reported at the upper
/// SNR point.
pub fn outage_table(
    schemes: &[StmScheme],
    grid: &GridSpec,
    threshold_db: f64,
    slope: Option<(usize, usize)>,
) -> Result<SweepResult> {
    check_schemes(schemes, grid.nt)?;
    let mut rows = Vec::new();
    for s in schemes {
        for &nr in &grid.nr_list {
            let curve = outage_curve_par(s, nr, grid, threshold_db)?;
            for (i, &snr) in curve.snr_grid_db.iter().enumerate() {
                let hits = (curve.prob[i] * grid.trials as f64).round() as usize;
                rows.push(grid.row(
                    s.name(),
                    nr,
                    snr,
                    "outage_prob",
                    proportion_ci(hits, grid.trials),
                ));
            }
            if let Some((lo, hi)) = slope {
                let d = diversity_order_estimate(&curve, lo, hi)
                    .map_err(|e| SimError::Core(e.into()))?;
                rows.push(grid.row(
                    s.name(),
                    nr,
                    curve.snr_grid_db[hi],
                    "diversity_order",
                    (d, slope_ci(&curve, lo, hi)),
                ));
            }
        }
    }
    Ok(SweepResult { rows })
}
