use std::fmt::Write as _;
use std::io::Write;
use std::path::{Path, PathBuf};

use super::fit::{point_statistics, FitError, ScalingFit, Statistic};
use super::sweep::ResultRow;
use super::HarnessError;

pub const CSV_HEADER: [&str; 11] = [
    "n",
    "ell",
    "protocol",
    "z",
    "x0",
    "seed",
    "trial",
    "tau",
    "censored",
    "activations",
    "wall_ms",
];

fn io_err(path: &Path, e: impl std::fmt::Display) -> HarnessError {
    HarnessError::Io(format!("{}: {e}", path.display()))
}

pub fn write_csv<W: Write>(rows: &[ResultRow], out: W) -> csv::Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(CSV_HEADER)?;
    for r in rows {
        w.write_record([
            r.n.to_string(),
            r.ell.to_string(),
            r.protocol.clone(),
            r.z.to_string(),
            r.x0.to_string(),
            r.seed.to_string(),
            r.trial.to_string(),
            r.tau.map(|t| t.to_string()).unwrap_or_default(),
            r.censored.to_string(),
            r.activations.to_string(),
            format!("{:.3}", r.wall_ms),
        ])?;
    }
    w.flush()?;
    Ok(())
}

pub fn fit_text(spec_hash: &str, rows: &[ResultRow], statistic: Statistic, fit: &Result<ScalingFit, FitError>) -> String {
    let mut s = String::new();
    let _ = writeln!(s, "spec_sha256: {spec_hash}");
    let _ = writeln!(s, "rows: {}", rows.len());
    let _ = writeln!(s, "statistic: {statistic}");
    let _ = writeln!(s, "points:");
    for p in point_statistics(rows, statistic) {
        let _ = writeln!(
            s,
            "  n={} x0={} trials={} censored={:.4} {statistic}={}",
            p.n, p.x0, p.trials, p.censored_fraction, p.value
        );
    }
    match fit {
        Ok(f) => {
            let _ = writeln!(s, "fit: ln({statistic}) = {:.6} + {:.6} ln(n)", f.intercept, f.slope);
            let _ = writeln!(s, "slope: {:.6}", f.slope);
            let _ = writeln!(s, "intercept: {:.6}", f.intercept);
            let _ = writeln!(s, "r_squared: {:.6}", f.r_squared);
            let res: Vec<String> = f.residuals.iter().map(|r| format!("{r:.6}")).collect();
            let _ = writeln!(s, "residuals: {}", res.join(" "));
            for w in &f.warnings {
                let _ = writeln!(s, "warning: {w}");
            }
        }
        Err(e) => {
            let _ = writeln!(s, "fit refused: {e}");
        }
    }
    s
}

/// Log-log scatter of per-point statistics with the fitted line.
pub fn plot_svg(rows: &[ResultRow], statistic: Statistic, fit: Option<&ScalingFit>) -> String {
    const W: f64 = 640.0;
    const H: f64 = 420.0;
    const M: f64 = 60.0;
    let pts: Vec<(f64, f64)> = point_statistics(rows, statistic)
        .iter()
        .filter(|p| p.value.is_finite() && p.value > 0.0)
        .map(|p| ((p.n as f64).log10(), p.value.log10()))
        .collect();
    let mut xs: Vec<f64> = pts.iter().map(|p| p.0).collect();
    let mut ys: Vec<f64> = pts.iter().map(|p| p.1).collect();
    if let Some(f) = fit {
        for p in &f.points {
            let n = p.n as f64;
            xs.push(n.log10());
            ys.push(f.predict(n).log10());
        }
    }
    let range = |v: &[f64]| {
        let lo = v.iter().copied().fold(f64::INFINITY, f64::min);
        let hi = v.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        if !lo.is_finite() {
            (0.0, 1.0)
        } else if hi - lo < 1e-9 {
            (lo - 0.5, hi + 0.5)
        } else {
            let pad = 0.05 * (hi - lo);
            (lo - pad, hi + pad)
        }
    };
    let (x0, x1) = range(&xs);
    let (y0, y1) = range(&ys);
    let sx = |x: f64| M + (x - x0) / (x1 - x0) * (W - 2.0 * M);
    let sy = |y: f64| H - M - (y - y0) / (y1 - y0) * (H - 2.0 * M);

    let mut s = String::new();
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{W}" height="{H}" viewBox="0 0 {W} {H}" font-family="sans-serif" font-size="12">"#
    );
    let _ = writeln!(s, r#"<rect width="{W}" height="{H}" fill="white"/>"#);
    let _ = writeln!(
        s,
        r#"<path d="M{M},{M} V{} H{}" fill="none" stroke="black"/>"#,
        H - M,
        W - M
    );
    for k in (x0.ceil() as i64)..=(x1.floor() as i64) {
        let x = sx(k as f64);
        let _ = writeln!(s, r#"<text x="{x:.1}" y="{:.1}" text-anchor="middle">1e{k}</text>"#, H - M + 18.0);
    }
    for k in (y0.ceil() as i64)..=(y1.floor() as i64) {
        let y = sy(k as f64);
        let _ = writeln!(s, r#"<text x="{:.1}" y="{y:.1}" text-anchor="end">1e{k}</text>"#, M - 6.0);
    }
    let _ = writeln!(s, r#"<text x="{}" y="{}" text-anchor="middle">n</text>"#, W / 2.0, H - 15.0);
    let _ = writeln!(
        s,
        r#"<text x="15" y="{}" transform="rotate(-90 15 {})" text-anchor="middle">{statistic} tau (rounds)</text>"#,
        H / 2.0,
        H / 2.0
    );
    if let Some(f) = fit {
        let (a, b) = (f.points.first().unwrap().n as f64, f.points.last().unwrap().n as f64);
        let _ = writeln!(
            s,
            r#"<line class="fit" x1="{:.2}" y1="{:.2}" x2="{:.2}" y2="{:.2}" stroke="crimson" stroke-width="2"/>"#,
            sx(a.log10()),
            sy(f.predict(a).log10()),
            sx(b.log10()),
            sy(f.predict(b).log10())
        );
        let _ = writeln!(
            s,
            r#"<text x="{}" y="{}" fill="crimson">slope {:.3}</text>"#,
            M + 10.0,
            M + 14.0,
            f.slope
        );
    }
    for (x, y) in pts {
        let _ = writeln!(
            s,
            r#"<circle class="point" cx="{:.2}" cy="{:.2}" r="4" fill="steelblue"/>"#,
            sx(x),
            sy(y)
        );
    }
    s.push_str("</svg>\n");
    s
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ReportFiles {
    pub csv: PathBuf,
    pub fit: PathBuf,
    pub plot: Option<PathBuf>,
}

/// Writes `results.csv`, `fit.txt` and optionally `plot.svg` into `out`.
pub fn emit_report(
    rows: &[ResultRow],
    fit: &Result<ScalingFit, FitError>,
    statistic: Statistic,
    spec_hash: &str,
    out: &Path,
    plot: bool,
) -> Result<ReportFiles, HarnessError> {
    if rows.is_empty() {
        return Err(HarnessError::Io("no rows to report".into()));
    }
    std::fs::create_dir_all(out).map_err(|e| io_err(out, e))?;
    let csv_path = out.join("results.csv");
    let file = std::fs::File::create(&csv_path).map_err(|e| io_err(&csv_path, e))?;
    write_csv(rows, std::io::BufWriter::new(file)).map_err(|e| io_err(&csv_path, e))?;

    let fit_path = out.join("fit.txt");
    std::fs::write(&fit_path, fit_text(spec_hash, rows, statistic, fit)).map_err(|e| io_err(&fit_path, e))?;

    let plot_path = if plot {
        let p = out.join("plot.svg");
        std::fs::write(&p, plot_svg(rows, statistic, fit.as_ref().ok())).map_err(|e| io_err(&p, e))?;
        Some(p)
    } else {
        None
    };
    Ok(ReportFiles {
        csv: csv_path,
        fit: fit_path,
        plot: plot_path,
    })
}
