//! Static SVG plots of the study CSVs: error vs N, error vs ε, time vs N.
//!
//! Output depends only on the CSV text, so the same input gives the same
//! bytes.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use crate::error::{Error, Result};
use crate::experiments::{Quantity, CONVERGENCE_HEADER, SWEEP_HEADER, TIMING_HEADER};

/// Which study table a CSV holds, recognized by its header line.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CsvKind {
    Convergence,
    Sweep,
    Timing,
}

impl CsvKind {
    pub fn detect(header: &str) -> Result<Self> {
        match header.trim() {
            h if h == CONVERGENCE_HEADER => Ok(CsvKind::Convergence),
            h if h == SWEEP_HEADER => Ok(CsvKind::Sweep),
            h if h == TIMING_HEADER => Ok(CsvKind::Timing),
            h => Err(Error::Validation(format!("unrecognized CSV header `{h}`"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PlotOptions {
    /// Convergence tables only.
    pub quantity: Quantity,
    /// Convergence tables only; defaults to the first object in the file.
    pub object: Option<String>,
    pub title: Option<String>,
}

impl Default for PlotOptions {
    fn default() -> Self {
        PlotOptions {
            quantity: Quantity::Shape,
            object: None,
            title: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Series {
    pub label: String,
    pub points: Vec<(f64, f64)>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Figure {
    pub title: String,
    pub x_label: String,
    pub y_label: String,
    pub series: Vec<Series>,
}

fn push_point(series: &mut Vec<Series>, label: &str, p: (f64, f64)) {
    match series.iter_mut().find(|s| s.label == label) {
        Some(s) => s.points.push(p),
        None => series.push(Series {
            label: label.to_string(),
            points: vec![p],
        }),
    }
}

fn number(s: &str, line: usize) -> Result<Option<f64>> {
    if s.is_empty() {
        return Ok(None);
    }
    s.parse::<f64>()
        .map(Some)
        .map_err(|e| Error::Validation(format!("CSV line {line}: `{s}`: {e}")))
}

/// Reads a study CSV into a figure: one series per model (convergence,
/// timing) or per object and N (sweep). Empty errors and non-positive values
/// are skipped since the error axis is logarithmic.
pub fn figure_from_csv(text: &str, opts: &PlotOptions) -> Result<Figure> {
    let mut reader = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(text.as_bytes());
    let header = reader
        .headers()
        .map_err(|e| Error::Validation(format!("CSV header: {e}")))?
        .iter()
        .collect::<Vec<_>>()
        .join(",");
    if header.is_empty() {
        return Err(Error::Validation("empty CSV".into()));
    }
    let kind = CsvKind::detect(&header)?;
    let mut records = Vec::new();
    for rec in reader.records() {
        let rec = rec.map_err(|e| Error::Validation(format!("CSV: {e}")))?;
        let line = rec.position().map_or(0, |p| p.line() as usize);
        records.push((line, rec));
    }
    let rows: Vec<(usize, Vec<&str>)> = records.iter().map(|(l, r)| (*l, r.iter().collect())).collect();
    if rows.is_empty() {
        return Err(Error::Validation("CSV has a header but no rows".into()));
    }
    let mut series = Vec::new();
    let mut fig = match kind {
        CsvKind::Convergence => {
            let q = opts.quantity.name();
            let object = match &opts.object {
                Some(o) => o.clone(),
                None => rows
                    .iter()
                    .find(|(_, c)| c[6] == q)
                    .map(|(_, c)| c[1].to_string())
                    .ok_or_else(|| Error::Validation(format!("no rows for quantity `{q}`")))?,
            };
            for (line, c) in &rows {
                if c[1] != object || c[6] != q {
                    continue;
                }
                let n = number(c[3], *line)?;
                let e = number(c[7], *line)?;
                if let (Some(n), Some(e)) = (n, e) {
                    push_point(&mut series, c[2], (n, e));
                }
            }
            Figure {
                title: opts.title.clone().unwrap_or(format!("{object}: {q} error")),
                x_label: "N".into(),
                y_label: "max error".into(),
                series,
            }
        }
        CsvKind::Sweep => {
            for (line, c) in &rows {
                let eps = number(c[3], *line)?;
                let e = number(c[4], *line)?;
                if let (Some(eps), Some(e)) = (eps, e) {
                    push_point(&mut series, &format!("{} N={}", c[0], c[1]), (eps, e));
                }
            }
            Figure {
                title: opts.title.clone().unwrap_or("shape error vs shape parameter".into()),
                x_label: "epsilon".into(),
                y_label: "max error".into(),
                series,
            }
        }
        CsvKind::Timing => {
            for (line, c) in &rows {
                let n = number(c[1], *line)?;
                let t = number(c[4], *line)?;
                if let (Some(n), Some(t)) = (n, t) {
                    push_point(&mut series, c[0], (n, t));
                }
            }
            Figure {
                title: opts.title.clone().unwrap_or("time per step".into()),
                x_label: "N".into(),
                y_label: "mean seconds".into(),
                series,
            }
        }
    };
    for s in &mut fig.series {
        s.points.retain(|p| p.0.is_finite() && p.1.is_finite() && p.1 > 0.0);
        s.points.sort_by(|a, b| a.0.total_cmp(&b.0));
    }
    fig.series.retain(|s| !s.points.is_empty());
    if fig.series.is_empty() {
        return Err(Error::Validation("CSV holds no plottable values".into()));
    }
    Ok(fig)
}

const WIDTH: f64 = 640.0;
const HEIGHT: f64 = 440.0;
const LEFT: f64 = 80.0;
const RIGHT: f64 = 170.0;
const TOP: f64 = 40.0;
const BOTTOM: f64 = 60.0;
const COLORS: [&str; 8] = [
    "#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd", "#8c564b", "#e377c2", "#7f7f7f",
];

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;").replace('"', "&quot;")
}

fn nice_step(span: f64) -> f64 {
    let raw = span / 5.0;
    let mag = 10f64.powf(raw.log10().floor());
    let r = raw / mag;
    let m = if r <= 1.0 {
        1.0
    } else if r <= 2.0 {
        2.0
    } else if r <= 5.0 {
        5.0
    } else {
        10.0
    };
    m * mag
}

fn tick_label(v: f64) -> String {
    let s = format!("{v:.6}");
    let s = s.trim_end_matches('0').trim_end_matches('.');
    if s == "-0" {
        "0".into()
    } else {
        s.into()
    }
}

/// Renders with a linear x axis and a logarithmic y axis. A series with a
/// single point (a PWL reference) is drawn as a dashed horizontal line.
pub fn render_svg(fig: &Figure) -> String {
    // Reference lines span the x range of the curves rather than set it.
    let curves = fig.series.iter().any(|s| s.points.len() > 1);
    let (mut x0, mut x1) = (f64::INFINITY, f64::NEG_INFINITY);
    let (mut y0, mut y1) = (f64::INFINITY, f64::NEG_INFINITY);
    for s in &fig.series {
        for &(x, y) in &s.points {
            if !curves || s.points.len() > 1 {
                x0 = x0.min(x);
                x1 = x1.max(x);
            }
            y0 = y0.min(y);
            y1 = y1.max(y);
        }
    }
    if x1 <= x0 {
        x0 -= 1.0;
        x1 += 1.0;
    }
    let d0 = y0.log10().floor() as i32;
    let mut d1 = y1.log10().ceil() as i32;
    if d1 <= d0 {
        d1 = d0 + 1;
    }
    let pw = WIDTH - LEFT - RIGHT;
    let ph = HEIGHT - TOP - BOTTOM;
    let sx = |x: f64| LEFT + (x - x0) / (x1 - x0) * pw;
    let sy = |y: f64| TOP + (d1 as f64 - y.log10()) / (d1 - d0) as f64 * ph;

    let mut out = String::new();
    let _ = writeln!(
        out,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}" font-family="sans-serif" font-size="12">"#
    );
    let _ = writeln!(out, r#"<rect width="{WIDTH}" height="{HEIGHT}" fill="white"/>"#);
    let _ = writeln!(
        out,
        r#"<text x="{:.2}" y="24" text-anchor="middle" font-size="14">{}</text>"#,
        LEFT + pw / 2.0,
        escape(&fig.title)
    );

    // y decades
    let stride = ((d1 - d0) as usize).div_ceil(8).max(1);
    for d in (d0..=d1).step_by(stride) {
        let y = sy(10f64.powi(d));
        let _ = writeln!(
            out,
            r##"<line x1="{LEFT:.2}" y1="{y:.2}" x2="{:.2}" y2="{y:.2}" stroke="#dddddd"/>"##,
            LEFT + pw
        );
        let _ = writeln!(
            out,
            r#"<text x="{:.2}" y="{:.2}" text-anchor="end">1e{d}</text>"#,
            LEFT - 6.0,
            y + 4.0
        );
    }
    let step = nice_step(x1 - x0);
    let mut t = (x0 / step).ceil() * step;
    while t <= x1 + 1e-9 * step {
        let x = sx(t);
        let _ = writeln!(
            out,
            r##"<line x1="{x:.2}" y1="{TOP:.2}" x2="{x:.2}" y2="{:.2}" stroke="#eeeeee"/>"##,
            TOP + ph
        );
        let _ = writeln!(
            out,
            r#"<text x="{x:.2}" y="{:.2}" text-anchor="middle">{}</text>"#,
            TOP + ph + 18.0,
            tick_label(t)
        );
        t += step;
    }
    let _ = writeln!(
        out,
        r#"<rect x="{LEFT:.2}" y="{TOP:.2}" width="{pw:.2}" height="{ph:.2}" fill="none" stroke="black"/>"#
    );
    let _ = writeln!(
        out,
        r#"<text x="{:.2}" y="{:.2}" text-anchor="middle">{}</text>"#,
        LEFT + pw / 2.0,
        HEIGHT - 16.0,
        escape(&fig.x_label)
    );
    let _ = writeln!(
        out,
        r#"<text x="18" y="{:.2}" text-anchor="middle" transform="rotate(-90 18 {:.2})">{}</text>"#,
        TOP + ph / 2.0,
        TOP + ph / 2.0,
        escape(&fig.y_label)
    );

    for (i, s) in fig.series.iter().enumerate() {
        let color = COLORS[i % COLORS.len()];
        let label = escape(&s.label);
        let pts: Vec<(f64, f64)> = if s.points.len() == 1 {
            let y = s.points[0].1;
            vec![(x0, y), (x1, y)]
        } else {
            s.points.clone()
        };
        let coords: Vec<String> = pts.iter().map(|&(x, y)| format!("{:.2},{:.2}", sx(x), sy(y))).collect();
        let dash = if s.points.len() == 1 { r#" stroke-dasharray="6 4""# } else { "" };
        let _ = writeln!(
            out,
            r#"<polyline data-series="{label}" points="{}" fill="none" stroke="{color}" stroke-width="1.5"{dash}/>"#,
            coords.join(" ")
        );
        if s.points.len() > 1 {
            for &(x, y) in &s.points {
                let _ = writeln!(
                    out,
                    r#"<circle cx="{:.2}" cy="{:.2}" r="2.5" fill="{color}"/>"#,
                    sx(x),
                    sy(y)
                );
            }
        }
        let ly = TOP + 10.0 + 18.0 * i as f64;
        let lx = LEFT + pw + 12.0;
        let _ = writeln!(
            out,
            r#"<line x1="{lx:.2}" y1="{ly:.2}" x2="{:.2}" y2="{ly:.2}" stroke="{color}" stroke-width="1.5"{dash}/>"#,
            lx + 20.0
        );
        let _ = writeln!(out, r#"<text x="{:.2}" y="{:.2}">{label}</text>"#, lx + 26.0, ly + 4.0);
    }
    out.push_str("</svg>\n");
    out
}

pub fn plot_csv(csv: &Path, svg: &Path, opts: &PlotOptions) -> Result<()> {
    let text = fs::read_to_string(csv).map_err(|e| Error::io(csv, e))?;
    let fig = figure_from_csv(&text, opts)?;
    if let Some(parent) = svg.parent() {
        if !parent.as_os_str().is_empty() {
            fs::create_dir_all(parent).map_err(|e| Error::io(parent, e))?;
        }
    }
    fs::write(svg, render_svg(&fig)).map_err(|e| Error::io(svg, e))
}

#[cfg(test)]
mod tests {
    use super::*;

    const CONV: &str = "dim,object,model,N,M,epsilon,quantity,max_error,cond_estimate,status
2,object1-2d,fourier,8,100,,shape,0.01,,ok
2,object1-2d,fourier,16,100,,shape,0.001,,ok
2,object1-2d,rbf,8,100,0.9,shape,0.02,10,ok
2,object1-2d,rbf,16,100,0.9,shape,,1e17,error: ill-conditioned
2,object1-2d,rbf,24,100,0.9,shape,0.0001,100,ok
2,object1-2d,pwl,100,100,,normal,0.02,,ok
2,object2-2d,fourier,8,100,,shape,0.5,,ok
";

    #[test]
    fn one_polyline_per_model() {
        let fig = figure_from_csv(CONV, &PlotOptions::default()).unwrap();
        let labels: Vec<&str> = fig.series.iter().map(|s| s.label.as_str()).collect();
        assert_eq!(labels, ["fourier", "rbf"]);
        assert_eq!(fig.series[1].points, vec![(8.0, 0.02), (24.0, 0.0001)]);
        let svg = render_svg(&fig);
        assert_eq!(svg.matches("<polyline").count(), 2);
    }

    #[test]
    fn quantity_filter_and_reference_line() {
        let opts = PlotOptions {
            quantity: Quantity::Normal,
            ..Default::default()
        };
        let svg = render_svg(&figure_from_csv(CONV, &opts).unwrap());
        assert_eq!(svg.matches("<polyline").count(), 1);
        assert!(svg.contains("stroke-dasharray"));
    }

    #[test]
    fn rejects_empty_and_unknown() {
        assert!(figure_from_csv("", &PlotOptions::default()).is_err());
        assert!(figure_from_csv("a,b\n1,2\n", &PlotOptions::default()).is_err());
        assert!(figure_from_csv(&format!("{SWEEP_HEADER}\n"), &PlotOptions::default()).is_err());
        assert!(figure_from_csv(&format!("{SWEEP_HEADER}\nx,1\n"), &PlotOptions::default()).is_err());
    }

    #[test]
    fn deterministic_output() {
        let text = format!("{SWEEP_HEADER}\nobject1-2d,24,100,0.5,1e-3,10\nobject1-2d,24,100,1,1e-2,5\n");
        let a = render_svg(&figure_from_csv(&text, &PlotOptions::default()).unwrap());
        let b = render_svg(&figure_from_csv(&text, &PlotOptions::default()).unwrap());
        assert_eq!(a, b);
        assert!(a.starts_with("<svg") && a.ends_with("</svg>\n"));
    }
}
