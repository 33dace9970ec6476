//! CSV output.
//!
//! Header: `scheme,nt,nr,snr_db,rho,metric,value,ci95,trials,seed`. Reals are
//! written like C's `%.9g` (9 significant digits, trailing zeros removed,
//! exponent form outside `1e-4 ≤ |x| < 1e9`); `inf`, `-inf` and `nan` for
//! non-finite values. Lines end in LF.

use crate::sweep::{ResultRow, SweepResult};
use crate::{Result, SimError};
use std::path::Path;

pub const HEADER: [&str; 10] = [
    "scheme", "nt", "nr", "snr_db", "rho", "metric", "value", "ci95", "trials", "seed",
];

const SIG_DIGITS: usize = 9;

/// `%.9g`-style formatting.
pub fn format_real(x: f64) -> String {
    if x.is_nan() {
        return "nan".into();
    }
    if x.is_infinite() {
        return if x > 0.0 { "inf".into() } else { "-inf".into() };
    }
    if x == 0.0 {
        return "0".into();
    }
    // Round to 9 significant digits first; the exponent of the rounded
    // value decides the notation.
    let sci = format!("{:.*e}", SIG_DIGITS - 1, x);
    let (mantissa, exp) = sci.split_once('e').expect("exponent form");
    let exp: i32 = exp.parse().expect("integer exponent");
    if (-4..SIG_DIGITS as i32).contains(&exp) {
        let decimals = (SIG_DIGITS as i32 - 1 - exp).max(0) as usize;
        trim_zeros(&format!("{:.*}", decimals, x)).to_string()
    } else {
        let sign = if exp < 0 { '-' } else { '+' };
        format!("{}e{}{:02}", trim_zeros(mantissa), sign, exp.abs())
    }
}

fn trim_zeros(s: &str) -> &str {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.')
    } else {
        s
    }
}

fn record(r: &ResultRow) -> [String; 10] {
    [
        r.scheme.clone(),
        r.nt.to_string(),
        r.nr.to_string(),
        format_real(r.snr_db),
        r.rho.clone(),
        r.metric.clone(),
        format_real(r.value),
        format_real(r.ci95),
        r.trials.to_string(),
        r.seed.to_string(),
    ]
}

fn writer<W: std::io::Write>(w: W) -> csv::Writer<W> {
    csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_writer(w)
}

/// Renders the result as CSV text.
pub fn to_csv_string(result: &SweepResult) -> String {
    let mut w = writer(Vec::new());
    w.write_record(HEADER).expect("in-memory write");
    for r in &result.rows {
        w.write_record(record(r)).expect("in-memory write");
    }
    String::from_utf8(w.into_inner().expect("in-memory flush")).expect("UTF-8 fields")
}

pub fn write_csv(result: &SweepResult, path: &Path) -> Result<()> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        std::fs::create_dir_all(dir).map_err(|e| SimError::io(dir, e))?;
    }
    std::fs::write(path, to_csv_string(result)).map_err(|e| SimError::io(path, e))
}

fn parse_real(s: &str) -> Option<f64> {
    match s {
        "inf" => Some(f64::INFINITY),
        "-inf" => Some(f64::NEG_INFINITY),
        "nan" => Some(f64::NAN),
        _ => s.parse().ok(),
    }
}

/// Parses CSV text produced by [`to_csv_string`]. `origin` names the source
/// in error messages.
pub fn parse_csv_str(text: &str, origin: &Path) -> Result<SweepResult> {
    let err = |message: String| SimError::Csv {
        path: origin.to_path_buf(),
        message,
    };
    let mut rd = csv::ReaderBuilder::new().from_reader(text.as_bytes());
    let header = rd.headers().map_err(|e| err(e.to_string()))?;
    if header.iter().ne(HEADER) {
        return Err(err(format!(
            "unexpected header {:?}",
            header.iter().collect::<Vec<_>>()
        )));
    }
    let mut rows = Vec::new();
    for (line, rec) in rd.records().enumerate() {
        let rec = rec.map_err(|e| err(e.to_string()))?;
        let bad = |col: &str| err(format!("row {}: bad {col} value", line + 1));
        let int = |i: usize, col: &str| rec[i].parse::<u64>().map_err(|_| bad(col));
        let real = |i: usize, col: &str| parse_real(&rec[i]).ok_or_else(|| bad(col));
        rows.push(ResultRow {
            scheme: rec[0].to_string(),
            nt: int(1, "nt")? as usize,
            nr: int(2, "nr")? as usize,
            snr_db: real(3, "snr_db")?,
            rho: rec[4].to_string(),
            metric: rec[5].to_string(),
            value: real(6, "value")?,
            ci95: real(7, "ci95")?,
            trials: int(8, "trials")? as usize,
            seed: int(9, "seed")?,
        });
    }
    Ok(SweepResult { rows })
}

pub fn read_csv(path: &Path) -> Result<SweepResult> {
    let text = std::fs::read_to_string(path).map_err(|e| SimError::io(path, e))?;
    parse_csv_str(&text, path)
}
