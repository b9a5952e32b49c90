//! Output files of a sweep: `errors.csv`, `homog.csv`, `rates.csv`,
//! `decay.svg`, plus the non-reproducible `timings.csv` and the
//! `failures.csv` list.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use super::rates::{rms_by_epsilon, ErrorColumn, RateFit};
use super::sweep::{rates_of, RowFailure, RowTiming, SweepReport};
use crate::correctors::HomogenizedCoeffs;
use crate::error::{Error, Result};
use crate::expansion::ErrorRow;

pub const ERRORS_HEADER: [&str; 10] = [
    "eps",
    "seed",
    "err_L2_box",
    "err_H1_ext",
    "err_H1_D_2scale",
    "err_L2_ext_U1",
    "err_H1_ext_U1",
    "diag_F",
    "diag_G",
    "runtime_s",
];

fn csv_text(header: &[&str], records: impl IntoIterator<Item = Vec<String>>) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(header).map_err(std::io::Error::from)?;
    for r in records {
        w.write_record(&r).map_err(std::io::Error::from)?;
    }
    let bytes = w.into_inner().map_err(|e| Error::Io(e.into_error()))?;
    String::from_utf8(bytes).map_err(|e| Error::InvalidInput(e.to_string()))
}

pub fn errors_csv(rows: &[ErrorRow]) -> Result<String> {
    csv_text(
        &ERRORS_HEADER,
        rows.iter().map(|r| {
            let mut rec = vec![r.epsilon.to_string(), r.seed.to_string()];
            rec.extend(ErrorColumn::ALL.iter().map(|c| c.value(r).to_string()));
            rec.push(r.runtime_s.to_string());
            rec
        }),
    )
}

/// Reads rows back from `errors.csv`. The uncorrected exterior error is not
/// part of the file and comes back as NaN.
pub fn parse_errors_csv(text: &str) -> Result<Vec<ErrorRow>> {
    let mut reader = csv::Reader::from_reader(text.as_bytes());
    let header = reader.headers().map_err(std::io::Error::from)?.clone();
    if header.iter().ne(ERRORS_HEADER.iter().copied()) {
        return Err(Error::InvalidInput(format!(
            "unexpected errors.csv header: {:?}",
            header
        )));
    }
    let mut rows = Vec::new();
    for (line, rec) in reader.records().enumerate() {
        let rec = rec.map_err(std::io::Error::from)?;
        let bad =
            |field: &str| Error::InvalidInput(format!("errors.csv row {}: bad {field}", line + 1));
        let f = |i: usize| rec[i].parse::<f64>().map_err(|_| bad(ERRORS_HEADER[i]));
        rows.push(ErrorRow {
            epsilon: f(0)?,
            seed: rec[1].parse().map_err(|_| bad("seed"))?,
            err_l2_box: f(2)?,
            err_h1_ext: f(3)?,
            err_h1_d_two_scale: f(4)?,
            err_l2_ext_u1: f(5)?,
            err_h1_ext_u1: f(6)?,
            err_l2_ext_u0: f64::NAN,
            diag_f: f(7)?,
            diag_g: f(8)?,
            runtime_s: f(9)?,
        });
    }
    Ok(rows)
}

/// One line per realization and a final `mean` line with the ensemble
/// estimate.
pub fn homog_csv(hom: &HomogenizedCoeffs) -> Result<String> {
    let line = |seed: String, a: &[[f64; 2]; 2], n: f64| {
        vec![
            seed,
            a[0][0].to_string(),
            a[0][1].to_string(),
            a[1][0].to_string(),
            a[1][1].to_string(),
            n.to_string(),
        ]
    };
    let mut records: Vec<Vec<String>> = hom
        .realizations
        .iter()
        .map(|r| line(r.seed.to_string(), &r.a_energy, r.n_mean))
        .collect();
    records.push(line("mean".into(), &hom.a_hom, hom.n_hom));
    csv_text(&["seed", "a11", "a12", "a21", "a22", "nhom"], records)
}

/// Failed fits are written as NaN.
pub fn rates_csv(rates: &[(ErrorColumn, Option<RateFit>)]) -> Result<String> {
    csv_text(
        &["column", "exponent", "residual"],
        rates.iter().map(|(c, fit)| {
            let (e, r) = fit.map_or((f64::NAN, f64::NAN), |f| (f.exponent, f.residual));
            vec![c.name().to_string(), e.to_string(), r.to_string()]
        }),
    )
}

pub fn timings_csv(timings: &[RowTiming]) -> Result<String> {
    csv_text(
        &["eps", "seed", "runtime_s"],
        timings.iter().map(|t| {
            vec![
                t.epsilon.to_string(),
                t.seed.to_string(),
                t.runtime_s.to_string(),
            ]
        }),
    )
}

pub fn failures_csv(failures: &[RowFailure]) -> Result<String> {
    csv_text(
        &["eps", "seed", "reason"],
        failures
            .iter()
            .map(|f| vec![f.epsilon.to_string(), f.seed.to_string(), f.reason.clone()]),
    )
}

const COLORS: [&str; 7] = [
    "#1f77b4", "#ff7f0e", "#2ca02c", "#d62728", "#9467bd", "#8c564b", "#e377c2",
];

/// Log-log plot of the ensemble RMS of every error column against `ε`, with
/// the fitted model curves dashed.
pub fn decay_svg(rows: &[ErrorRow]) -> Result<String> {
    if rows.is_empty() {
        return Err(Error::EmptyReport);
    }
    let (w, h, pad) = (640.0, 440.0, 60.0);
    let series: Vec<(ErrorColumn, Vec<(f64, f64)>)> = ErrorColumn::ALL
        .iter()
        .map(|&c| {
            (
                c,
                rms_by_epsilon(rows, c)
                    .into_iter()
                    .filter(|p| p.1 > 0.0 && p.1.is_finite())
                    .collect(),
            )
        })
        .collect();
    let pts = series.iter().flat_map(|s| s.1.iter());
    let (mut x0, mut x1, mut y0, mut y1) = (f64::MAX, f64::MIN, f64::MAX, f64::MIN);
    for &(e, v) in pts {
        x0 = x0.min(e.log10());
        x1 = x1.max(e.log10());
        y0 = y0.min(v.log10());
        y1 = y1.max(v.log10());
    }
    if x0 > x1 {
        return Err(Error::EmptyReport);
    }
    let (x0, x1) = (x0 - 0.05, x1 + 0.05);
    let (y0, y1) = (y0.floor(), y1.ceil().max(y0.floor() + 1.0));
    let sx = |e: f64| pad + (e.log10() - x0) / (x1 - x0) * (w - 2.0 * pad);
    let sy = |v: f64| h - pad - (v.log10() - y0) / (y1 - y0) * (h - 2.0 * pad);

    let mut s = String::new();
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{w}" height="{h}" viewBox="0 0 {w} {h}" font-family="sans-serif" font-size="11">"#
    );
    let _ = writeln!(s, r#"<rect width="{w}" height="{h}" fill="white"/>"#);
    let _ = writeln!(
        s,
        r#"<rect x="{pad}" y="{pad}" width="{}" height="{}" fill="none" stroke="black"/>"#,
        w - 2.0 * pad,
        h - 2.0 * pad
    );
    for d in (y0 as i32)..=(y1 as i32) {
        let y = sy(10f64.powi(d));
        let _ = writeln!(
            s,
            r#"<text x="{}" y="{:.1}" text-anchor="end">1e{d}</text>"#,
            pad - 4.0,
            y + 4.0
        );
    }
    let mut eps: Vec<f64> = rows.iter().map(|r| r.epsilon).collect();
    eps.sort_by(|a, b| a.total_cmp(b));
    eps.dedup();
    for &e in &eps {
        let _ = writeln!(
            s,
            r#"<text x="{:.1}" y="{}" text-anchor="middle">{e}</text>"#,
            sx(e),
            h - pad + 16.0
        );
    }
    let _ = writeln!(
        s,
        r#"<text x="{}" y="{}" text-anchor="middle">epsilon</text>"#,
        w / 2.0,
        h - 12.0
    );

    let fits = rates_of(rows);
    for (k, ((column, pts), (_, fit))) in series.iter().zip(&fits).enumerate() {
        let color = COLORS[k % COLORS.len()];
        let label = match fit {
            Some(f) => format!("{} (exponent {:.3})", column.name(), f.exponent),
            None if pts.is_empty() => format!("{} (no positive values)", column.name()),
            None => column.name().to_string(),
        };
        let ly = pad + 14.0 + 14.0 * k as f64;
        let _ = writeln!(
            s,
            r#"<text x="{}" y="{ly}" fill="{color}">{label}</text>"#,
            pad + 8.0
        );
        if pts.is_empty() {
            continue;
        }
        let path: Vec<String> = pts
            .iter()
            .map(|&(e, v)| format!("{:.2},{:.2}", sx(e), sy(v)))
            .collect();
        let _ = writeln!(
            s,
            r#"<polyline fill="none" stroke="{color}" points="{}"/>"#,
            path.join(" ")
        );
        for &(e, v) in pts {
            let _ = writeln!(
                s,
                r#"<circle cx="{:.2}" cy="{:.2}" r="3" fill="{color}"/>"#,
                sx(e),
                sy(v)
            );
        }
        if let Some(fit) = fit {
            let model = column.model();
            let curve: Vec<String> = pts
                .iter()
                .map(|&(e, _)| {
                    let v = (fit.intercept + fit.exponent * model.predictor(e).ln()).exp();
                    format!("{:.2},{:.2}", sx(e), sy(v))
                })
                .collect();
            let _ = writeln!(
                s,
                r#"<polyline fill="none" stroke="{color}" stroke-dasharray="4 3" points="{}"/>"#,
                curve.join(" ")
            );
        }
    }
    s.push_str("</svg>\n");
    Ok(s)
}

/// Writes every output of `report` into `dir`.
pub fn write_report(dir: &Path, report: &SweepReport) -> Result<()> {
    fs::create_dir_all(dir)?;
    fs::write(dir.join("errors.csv"), errors_csv(&report.rows)?)?;
    fs::write(dir.join("homog.csv"), homog_csv(&report.homogenized)?)?;
    fs::write(dir.join("timings.csv"), timings_csv(&report.timings)?)?;
    fs::write(dir.join("failures.csv"), failures_csv(&report.failures)?)?;
    render_from_rows(dir, &report.rows)
}

/// Writes `rates.csv` and `decay.svg` for `rows`.
pub fn render_from_rows(dir: &Path, rows: &[ErrorRow]) -> Result<()> {
    if rows.is_empty() {
        return Err(Error::EmptyReport);
    }
    fs::create_dir_all(dir)?;
    fs::write(dir.join("rates.csv"), rates_csv(&rates_of(rows))?)?;
    fs::write(dir.join("decay.svg"), decay_svg(rows)?)?;
    Ok(())
}

/// Re-renders `rates.csv` and `decay.svg` from an existing `errors.csv`.
pub fn rerender(errors_path: &Path, out: &Path) -> Result<Vec<ErrorRow>> {
    let rows = parse_errors_csv(&fs::read_to_string(errors_path)?)?;
    render_from_rows(out, &rows)?;
    Ok(rows)
}
