use mimo_jscc_sim::plot::render_svg;
use mimo_jscc_sim::sweep::{ResultRow, SweepResult};

fn row(scheme: &str, nr: usize, snr_db: f64, metric: &str, value: f64) -> ResultRow {
    ResultRow {
        scheme: scheme.into(),
        nt: 2,
        nr,
        snr_db,
        rho: "1/8".into(),
        metric: metric.into(),
        value,
        ci95: 0.0,
        trials: 1,
        seed: 0,
    }
}

fn polylines(svg: &str) -> Vec<Vec<(f64, f64)>> {
    svg.lines()
        .filter(|l| l.starts_with("<polyline"))
        .map(|l| {
            let pts = l
                .split("points=\"")
                .nth(1)
                .unwrap()
                .split('"')
                .next()
                .unwrap();
            pts.split_whitespace()
                .map(|p| {
                    let (x, y) = p.split_once(',').unwrap();
                    (x.parse().unwrap(), y.parse().unwrap())
                })
                .collect()
        })
        .collect()
}

#[test]
fn single_series_two_points() {
    let r = SweepResult {
        rows: vec![
            row("mux", 1, 0.0, "mse", 0.5),
            row("mux", 1, 10.0, "mse", 0.2),
        ],
    };
    let svg = render_svg(&r, "mse").unwrap();
    assert!(svg.starts_with("<svg xmlns=\"http://www.w3.org/2000/svg\""));
    assert!(!svg.contains("href"));
    let lines = polylines(&svg);
    assert_eq!(lines.len(), 1);
    assert_eq!(lines[0].len(), 2);
    assert!(svg.contains("SNR (dB)") && svg.contains(">mse<") && svg.contains("mux, Nr=1"));
}

#[test]
fn one_polyline_per_scheme_and_nr() {
    let mut rows = Vec::new();
    for scheme in ["mux", "alamouti"] {
        for nr in [1, 2, 4] {
            for snr in [9.0, 13.0, 17.0] {
                rows.push(row(scheme, nr, snr, "psnr_db", snr + nr as f64));
                rows.push(row(scheme, nr, snr, "mse", 1.0));
            }
        }
    }
    let svg = render_svg(&SweepResult { rows }, "psnr_db").unwrap();
    let lines = polylines(&svg);
    assert_eq!(lines.len(), 6);
    assert!(lines.iter().all(|l| l.len() == 3));
}

#[test]
fn monotone_data_gives_monotone_pixels() {
    let rows: Vec<ResultRow> = [3.0, 0.0, 9.0, 6.0]
        .iter()
        .map(|&snr| row("alamouti", 2, snr, "psnr_db", 5.0 + snr * snr))
        .collect();
    let svg = render_svg(&SweepResult { rows }, "psnr_db").unwrap();
    let pts = &polylines(&svg)[0];
    // Sorted by SNR; larger values are drawn higher, i.e. smaller y.
    assert!(
        pts.windows(2).all(|w| w[1].0 > w[0].0 && w[1].1 < w[0].1),
        "{pts:?}"
    );
}

#[test]
fn unknown_metric_lists_available() {
    let r = SweepResult {
        rows: vec![
            row("mux", 1, 0.0, "mse", 0.5),
            row("mux", 1, 0.0, "sinr_db", 3.0),
        ],
    };
    let msg = render_svg(&r, "bogus").unwrap_err().to_string();
    assert!(
        msg.contains("bogus") && msg.contains("mse") && msg.contains("sinr_db"),
        "{msg}"
    );
}

#[test]
fn empty_selection_is_an_error() {
    assert!(render_svg(&SweepResult::default(), "mse").is_err());
    let r = SweepResult {
        rows: vec![row("mux", 1, 0.0, "psnr_db", f64::INFINITY)],
    };
    assert!(render_svg(&r, "psnr_db").is_err());
}
