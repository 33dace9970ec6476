//! Sweep configuration.
//!
//! Configs are TOML files. Grammar (all keys top-level):
//!
//! ```toml
//! schemes = ["mux", "alamouti"]    # mux | alamouti | ostbc3-r12 | ostbc3-r34
//! nt = 2                           # transmit antennas
//! nr_list = [1, 2, 4]              # receive antennas, one sweep axis
//! snr_db_grid = [9.0, 13.0, 17.0]  # strictly increasing
//! rho = "1/8"                      # bandwidth ratio, or a list: ["1/8", "5/24"]
//! image_dims = [3, 32, 32]         # or: source_n = 3072
//! source_variance = 1.0            # optional, default 1
//! trials = 2000                    # frames per grid cell
//! master_seed = 1
//! power = 1.0                      # optional per-antenna power, default 1
//! max_val = 1.0                    # optional PSNR reference, default 1
//! outage_threshold_db = 5.0        # optional; adds outage_prob rows
//! baseline = true                  # optional; separation-rd rows, default true
//! workers = 4                      # optional; default = available cores
//!
//! [outputs]                        # optional
//! csv = "results/fig3.csv"
//! svg = "results/fig3.svg"
//! svg_metric = "psnr_db"           # default psnr_db
//! ```

use mimo_jscc::stm::{channel_uses, latent_length, ImageDims, Ratio, StmKind, StmScheme};
use serde::Deserialize;
use std::path::{Path, PathBuf};
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
#[error("config field `{field}`: {message}")]
pub struct ConfigError {
    pub field: String,
    pub message: String,
}

impl ConfigError {
    pub fn new(field: &str, message: impl Into<String>) -> Self {
        Self {
            field: field.to_string(),
            message: message.into(),
        }
    }
}

#[derive(Debug, Deserialize)]
#[serde(untagged)]
enum OneOrMany {
    One(String),
    Many(Vec<String>),
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawOutputs {
    csv: Option<PathBuf>,
    svg: Option<PathBuf>,
    svg_metric: Option<String>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawConfig {
    schemes: Vec<String>,
    nt: usize,
    nr_list: Vec<usize>,
    snr_db_grid: Vec<f64>,
    rho: OneOrMany,
    image_dims: Option<[usize; 3]>,
    source_n: Option<usize>,
    source_variance: Option<f64>,
    trials: usize,
    master_seed: u64,
    power: Option<f64>,
    max_val: Option<f64>,
    outage_threshold_db: Option<f64>,
    baseline: Option<bool>,
    workers: Option<usize>,
    #[serde(default)]
    outputs: RawOutputs,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct Outputs {
    pub csv: Option<PathBuf>,
    pub svg: Option<PathBuf>,
    pub svg_metric: String,
}

/// A validated sweep description.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepConfig {
    pub schemes: Vec<StmScheme>,
    pub nt: usize,
    pub nr_list: Vec<usize>,
    pub snr_db_grid: Vec<f64>,
    pub rho: Vec<Ratio>,
    /// Real source samples per frame.
    pub source_n: usize,
    pub source_variance: f64,
    pub trials: usize,
    pub master_seed: u64,
    pub power: f64,
    pub max_val: f64,
    pub outage_threshold_db: Option<f64>,
    pub baseline: bool,
    pub workers: Option<usize>,
    pub outputs: Outputs,
}

impl SweepConfig {
    pub fn from_toml_str(text: &str) -> Result<Self, ConfigError> {
        let raw: RawConfig =
            toml::from_str(text).map_err(|e| ConfigError::new("toml", e.to_string()))?;
        Self::from_raw(raw)
    }

    /// Reads and validates a config file.
    pub fn from_file(path: &Path) -> Result<Self, crate::SimError> {
        let text = std::fs::read_to_string(path).map_err(|e| crate::SimError::io(path, e))?;
        Ok(Self::from_toml_str(&text)?)
    }

    fn from_raw(raw: RawConfig) -> Result<Self, ConfigError> {
        if raw.schemes.is_empty() {
            return Err(ConfigError::new(
                "schemes",
                "at least one scheme is required",
            ));
        }
        let mut schemes = Vec::with_capacity(raw.schemes.len());
        for name in &raw.schemes {
            let kind: StmKind = name.parse().map_err(|e: mimo_jscc::stm::StmError| {
                ConfigError::new("schemes", e.to_string())
            })?;
            let s =
                StmScheme::new(kind, raw.nt).map_err(|e| ConfigError::new("nt", e.to_string()))?;
            if schemes.contains(&s) {
                return Err(ConfigError::new(
                    "schemes",
                    format!("{name:?} listed twice"),
                ));
            }
            schemes.push(s);
        }

        if raw.nr_list.is_empty() || raw.nr_list.contains(&0) {
            return Err(ConfigError::new(
                "nr_list",
                "must be a nonempty list of positive integers",
            ));
        }
        if raw.snr_db_grid.is_empty() {
            return Err(ConfigError::new("snr_db_grid", "must not be empty"));
        }
        if raw.snr_db_grid.iter().any(|v| !v.is_finite()) {
            return Err(ConfigError::new("snr_db_grid", "values must be finite"));
        }
        if raw.snr_db_grid.windows(2).any(|w| w[1] <= w[0]) {
            return Err(ConfigError::new(
                "snr_db_grid",
                "must be strictly increasing",
            ));
        }
        if raw.trials == 0 {
            return Err(ConfigError::new("trials", "must be at least 1"));
        }
        if raw.workers == Some(0) {
            return Err(ConfigError::new("workers", "must be at least 1"));
        }

        let source_n = match (raw.image_dims, raw.source_n) {
            (Some(_), Some(_)) => {
                return Err(ConfigError::new(
                    "source_n",
                    "give either image_dims or source_n, not both",
                ))
            }
            (None, None) => {
                return Err(ConfigError::new(
                    "image_dims",
                    "one of image_dims or source_n is required",
                ))
            }
            (Some([c, h, w]), None) => {
                let n = ImageDims::new(c, h, w).pixels();
                if n == 0 || n % 2 != 0 {
                    return Err(ConfigError::new(
                        "image_dims",
                        format!("C*H*W = {n} must be positive and even"),
                    ));
                }
                n
            }
            (None, Some(n)) => {
                if n == 0 || n % 2 != 0 {
                    return Err(ConfigError::new(
                        "source_n",
                        format!("{n} must be positive and even"),
                    ));
                }
                n
            }
        };
        let source_variance = positive("source_variance", raw.source_variance.unwrap_or(1.0))?;
        let power = positive("power", raw.power.unwrap_or(1.0))?;
        let max_val = positive("max_val", raw.max_val.unwrap_or(1.0))?;
        if let Some(t) = raw.outage_threshold_db {
            if t.is_nan() {
                return Err(ConfigError::new("outage_threshold_db", "must not be NaN"));
            }
        }

        let rho_strings = match raw.rho {
            OneOrMany::One(s) => vec![s],
            OneOrMany::Many(v) => v,
        };
        if rho_strings.is_empty() {
            return Err(ConfigError::new(
                "rho",
                "at least one bandwidth ratio is required",
            ));
        }
        let mut rho = Vec::with_capacity(rho_strings.len());
        for s in &rho_strings {
            let r: Ratio = s
                .parse()
                .map_err(|e: mimo_jscc::stm::StmError| ConfigError::new("rho", e.to_string()))?;
            // k = ρ·n must be an integer and fill whole blocks of every scheme.
            let k = channel_uses(r, ImageDims::new(1, 1, source_n))
                .map_err(|e| ConfigError::new("rho", e.to_string()))?;
            for s in &schemes {
                latent_length(s, k).map_err(|e| ConfigError::new("rho", e.to_string()))?;
            }
            rho.push(r);
        }

        Ok(Self {
            schemes,
            nt: raw.nt,
            nr_list: raw.nr_list,
            snr_db_grid: raw.snr_db_grid,
            rho,
            source_n,
            source_variance,
            trials: raw.trials,
            master_seed: raw.master_seed,
            power,
            max_val,
            outage_threshold_db: raw.outage_threshold_db,
            baseline: raw.baseline.unwrap_or(true),
            workers: raw.workers,
            outputs: Outputs {
                csv: raw.outputs.csv,
                svg: raw.outputs.svg,
                svg_metric: raw.outputs.svg_metric.unwrap_or_else(|| "psnr_db".into()),
            },
        })
    }

    /// Channel uses per frame for bandwidth ratio `rho`.
    pub fn channel_uses(&self, rho: Ratio) -> usize {
        channel_uses(rho, ImageDims::new(1, 1, self.source_n)).expect("validated")
    }
}

fn positive(field: &str, v: f64) -> Result<f64, ConfigError> {
    if v > 0.0 && v.is_finite() {
        Ok(v)
    } else {
        Err(ConfigError::new(
            field,
            format!("must be positive and finite, got {v}"),
        ))
    }
}
