use clap::{Args, Parser, Subcommand};
use mimo_jscc::stm::{StmKind, StmScheme};
use mimo_jscc::validation::{validate, Level};
use mimo_jscc_sim::config::{ConfigError, SweepConfig};
use mimo_jscc_sim::csvio::{read_csv, to_csv_string, write_csv};
use mimo_jscc_sim::plot::plot_svg;
use mimo_jscc_sim::sweep::{effective_workers, run_sweep, SweepResult};
use mimo_jscc_sim::tables::{capacity_table, outage_table, sinr_table, GridSpec};
use mimo_jscc_sim::{Result, SimError};
use std::path::PathBuf;
use std::process::ExitCode;

/// MIMO analog JSCC link-level simulator.
#[derive(Parser)]
#[command(name = "mimo-jscc", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a sweep described by a TOML config.
    Sweep {
        #[arg(long)]
        config: PathBuf,
        /// Overrides `master_seed`.
        #[arg(long)]
        seed: Option<u64>,
        /// Overrides `workers`.
        #[arg(long)]
        workers: Option<usize>,
        /// Overrides `outputs.csv`; without either, CSV goes to stdout.
        #[arg(long)]
        out_csv: Option<PathBuf>,
    },
    /// Plot one metric of a results CSV as SVG.
    Plot {
        #[arg(long)]
        csv: PathBuf,
        #[arg(long)]
        metric: String,
        #[arg(long)]
        out: PathBuf,
    },
    /// Run the invariant suite; exits 1 if any check fails.
    Validate {
        /// Adds the diversity-slope and ergodic-capacity oracles.
        #[arg(long)]
        full: bool,
        #[arg(long, default_value_t = 2024)]
        seed: u64,
    },
    /// Mean post-processing SINR versus SNR.
    Sinr {
        /// Comma-separated scheme names.
        #[arg(long, value_delimiter = ',', default_value = "mux,alamouti")]
        schemes: Vec<String>,
        #[command(flatten)]
        grid: GridArgs,
    },
    /// Ergodic MIMO capacity versus SNR.
    Capacity {
        #[command(flatten)]
        grid: GridArgs,
    },
    /// Outage probability versus SNR, with an optional diversity-order fit.
    Outage {
        #[arg(long, value_delimiter = ',', default_value = "alamouti")]
        schemes: Vec<String>,
        #[arg(long, default_value_t = 15.0)]
        threshold_db: f64,
        /// Two SNR grid values (dB) between which to fit the slope.
        #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
        slope: Option<Vec<f64>>,
        #[command(flatten)]
        grid: GridArgs,
    },
}

#[derive(Args)]
struct GridArgs {
    #[arg(long, default_value_t = 2)]
    nt: usize,
    /// Comma-separated receive-antenna counts.
    #[arg(long, value_delimiter = ',', default_value = "1")]
    nr: Vec<usize>,
    /// Comma-separated SNR grid in dB.
    #[arg(
        long,
        value_delimiter = ',',
        allow_hyphen_values = true,
        default_value = "0,5,10,15,20,25,30"
    )]
    snr_db: Vec<f64>,
    #[arg(long, default_value_t = 10_000)]
    trials: usize,
    #[arg(long, default_value_t = 1)]
    seed: u64,
    #[arg(long, default_value_t = 1.0)]
    power: f64,
    #[arg(long)]
    workers: Option<usize>,
    #[arg(long)]
    out_csv: Option<PathBuf>,
}

impl GridArgs {
    fn spec(&self) -> GridSpec {
        GridSpec {
            nt: self.nt,
            nr_list: self.nr.clone(),
            snr_db_grid: self.snr_db.clone(),
            trials: self.trials,
            seed: self.seed,
            power: self.power,
            workers: self
                .workers
                .unwrap_or_else(|| std::thread::available_parallelism().map_or(1, |n| n.get())),
        }
    }
}

fn parse_schemes(names: &[String], nt: usize) -> Result<Vec<StmScheme>> {
    names
        .iter()
        .map(|n| {
            let kind: StmKind = n.parse().map_err(|e: mimo_jscc::stm::StmError| {
                ConfigError::new("schemes", e.to_string())
            })?;
            StmScheme::new(kind, nt)
                .map_err(|e| SimError::from(ConfigError::new("nt", e.to_string())))
        })
        .collect()
}

fn emit(result: &SweepResult, out: Option<&PathBuf>) -> Result<()> {
    match out {
        Some(path) => {
            write_csv(result, path)?;
            eprintln!("wrote {} rows to {}", result.rows.len(), path.display());
            Ok(())
        }
        None => {
            print!("{}", to_csv_string(result));
            Ok(())
        }
    }
}

fn run(cli: Cli) -> Result<ExitCode> {
    match cli.command {
        Command::Sweep {
            config,
            seed,
            workers,
            out_csv,
        } => {
            let mut cfg = SweepConfig::from_file(&config)?;
            if let Some(s) = seed {
                cfg.master_seed = s;
            }
            if let Some(w) = workers {
                if w == 0 {
                    return Err(ConfigError::new("workers", "must be at least 1").into());
                }
                cfg.workers = Some(w);
            }
            if out_csv.is_some() {
                cfg.outputs.csv = out_csv;
            }
            eprintln!(
                "sweep: {} cells x {} trials on {} workers",
                cfg.schemes.len() * cfg.nr_list.len() * cfg.rho.len() * cfg.snr_db_grid.len(),
                cfg.trials,
                effective_workers(&cfg)
            );
            let result = run_sweep(&cfg)?;
            emit(&result, cfg.outputs.csv.as_ref())?;
            if let Some(svg) = &cfg.outputs.svg {
                plot_svg(&result, &cfg.outputs.svg_metric, svg)?;
                eprintln!("wrote {}", svg.display());
            }
        }
        Command::Plot { csv, metric, out } => {
            let result = read_csv(&csv)?;
            plot_svg(&result, &metric, &out)?;
            eprintln!("wrote {}", out.display());
        }
        Command::Validate { full, seed } => {
            let level = if full { Level::Full } else { Level::Fast };
            let results = validate(level, seed);
            for r in &results {
                println!("{r}");
            }
            if results.iter().any(|r| !r.passed) {
                return Ok(ExitCode::from(1));
            }
        }
        Command::Sinr { schemes, grid } => {
            let spec = grid.spec();
            let result = sinr_table(&parse_schemes(&schemes, spec.nt)?, &spec)?;
            emit(&result, grid.out_csv.as_ref())?;
        }
        Command::Capacity { grid } => {
            let result = capacity_table(&grid.spec())?;
            emit(&result, grid.out_csv.as_ref())?;
        }
        Command::Outage {
            schemes,
            threshold_db,
            slope,
            grid,
        } => {
            let spec = grid.spec();
            let slope = match slope {
                None => None,
                Some(v) if v.len() != 2 => {
                    return Err(ConfigError::new("slope", "expects exactly two SNR values").into())
                }
                Some(v) => {
                    let idx = |db: f64| {
                        spec.snr_db_grid
                            .iter()
                            .position(|&g| g == db)
                            .ok_or_else(|| {
                                SimError::from(ConfigError::new(
                                    "slope",
                                    format!("{db} dB is not on the SNR grid"),
                                ))
                            })
                    };
                    Some((idx(v[0])?, idx(v[1])?))
                }
            };
            let result = outage_table(
                &parse_schemes(&schemes, spec.nt)?,
                &spec,
                threshold_db,
                slope,
            )?;
            emit(&result, grid.out_csv.as_ref())?;
        }
    }
    Ok(ExitCode::SUCCESS)
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
