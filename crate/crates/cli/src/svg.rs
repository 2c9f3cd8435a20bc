//! Minimal SVG line plots drawn from CSV text, so a figure always shows
//! exactly the numbers in its sibling CSV file.

use std::fmt::Write as _;

use crate::error::{CliError, CliResult};

const WIDTH: f64 = 900.0;
const PANEL_HEIGHT: f64 = 280.0;
const LEFT: f64 = 80.0;
const RIGHT: f64 = 240.0;
const TOP: f64 = 50.0;
const GAP: f64 = 60.0;
const PALETTE: [&str; 10] = [
    "#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd", "#8c564b", "#e377c2", "#7f7f7f",
    "#bcbd22", "#17becf",
];

/// One stacked panel showing the columns whose header ends with `suffix`
/// (all non-x columns when `suffix` is empty).
#[derive(Debug, Clone)]
pub struct Panel {
    pub suffix: String,
    pub y_label: String,
}

#[derive(Debug, Clone)]
pub struct PlotSpec {
    pub title: String,
    pub x_label: String,
    pub x_log: bool,
    pub panels: Vec<Panel>,
    /// Text lines printed under the title.
    pub notes: Vec<String>,
    /// Vertical marker lines at these x values.
    pub markers: Vec<f64>,
    /// Producer line embedded as an XML comment.
    pub banner: String,
}

/// Parsed numeric table; empty or unparsable cells become `None`.
#[derive(Debug, Clone, PartialEq)]
pub struct Series {
    pub header: Vec<String>,
    pub columns: Vec<Vec<Option<f64>>>,
}

pub fn read_series(csv_text: &str) -> CliResult<Series> {
    let mut rdr = csv::ReaderBuilder::new()
        .comment(Some(b'#'))
        .from_reader(csv_text.as_bytes());
    let header: Vec<String> = rdr
        .headers()
        .map_err(|e| CliError::input(format!("plot CSV header: {e}")))?
        .iter()
        .map(str::to_string)
        .collect();
    let mut columns = vec![Vec::new(); header.len()];
    for rec in rdr.records() {
        let rec = rec.map_err(|e| CliError::input(format!("plot CSV: {e}")))?;
        for (i, col) in columns.iter_mut().enumerate() {
            col.push(
                rec.get(i)
                    .and_then(|c| c.trim().parse::<f64>().ok())
                    .filter(|v| v.is_finite()),
            );
        }
    }
    Ok(Series { header, columns })
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;")
        .replace('<', "&lt;")
        .replace('>', "&gt;")
        .replace('"', "&quot;")
}

/// Round numbers covering `[lo, hi]`, about `target` of them.
fn nice_ticks(lo: f64, hi: f64, target: usize) -> Vec<f64> {
    if !(hi > lo) {
        return vec![lo];
    }
    let raw = (hi - lo) / target.max(1) as f64;
    let mag = 10f64.powf(raw.log10().floor());
    let step = [1.0, 2.0, 5.0, 10.0]
        .iter()
        .map(|m| m * mag)
        .find(|s| *s >= raw)
        .unwrap_or(10.0 * mag);
    let first = (lo / step).ceil() as i64;
    let last = (hi / step).floor() as i64;
    (first..=last).map(|k| k as f64 * step).collect()
}

fn fmt_tick(v: f64) -> String {
    if v == 0.0 {
        return "0".into();
    }
    let a = v.abs();
    if !(1e-3..1e5).contains(&a) {
        format!("{v:.0e}")
    } else {
        let s = format!("{v:.6}");
        s.trim_end_matches('0').trim_end_matches('.').to_string()
    }
}

struct Axis {
    lo: f64,
    hi: f64,
    log: bool,
}

impl Axis {
    fn new(values: impl Iterator<Item = f64>, log: bool) -> Self {
        let (mut lo, mut hi) = (f64::INFINITY, f64::NEG_INFINITY);
        for v in values.filter(|v| !log || *v > 0.0) {
            let v = if log { v.log10() } else { v };
            lo = lo.min(v);
            hi = hi.max(v);
        }
        if !lo.is_finite() {
            (lo, hi) = (0.0, 1.0);
        }
        if hi - lo < 1e-12 * lo.abs().max(1.0) {
            let pad = if lo == 0.0 { 1.0 } else { 0.1 * lo.abs() };
            (lo, hi) = (lo - pad, hi + pad);
        } else if !log {
            let pad = 0.05 * (hi - lo);
            (lo, hi) = (lo - pad, hi + pad);
        }
        Self { lo, hi, log }
    }

    fn frac(&self, v: f64) -> Option<f64> {
        let v = if self.log {
            if v <= 0.0 {
                return None;
            }
            v.log10()
        } else {
            v
        };
        Some((v - self.lo) / (self.hi - self.lo))
    }

    fn ticks(&self) -> Vec<f64> {
        if self.log {
            (self.lo.ceil() as i64..=self.hi.floor() as i64)
                .map(|k| 10f64.powi(k as i32))
                .collect()
        } else {
            nice_ticks(self.lo, self.hi, 6)
        }
    }
}

/// Render `csv_text` per `spec`. The first CSV column is the x axis.
pub fn plot_csv(csv_text: &str, spec: &PlotSpec) -> CliResult<String> {
    let data = read_series(csv_text)?;
    if data.header.len() < 2 || data.columns[0].is_empty() {
        return Err(CliError::input(
            "plot needs an x column, at least one series and one row",
        ));
    }
    let x = &data.columns[0];
    let x_axis = Axis::new(x.iter().flatten().copied(), spec.x_log);
    let note_h = 16.0 * spec.notes.len() as f64;
    let top = TOP + note_h;
    let plot_w = WIDTH - LEFT - RIGHT;
    let height = top + spec.panels.len() as f64 * (PANEL_HEIGHT + GAP) + 10.0;

    let mut out = String::new();
    let _ = writeln!(out, r#"<?xml version="1.0" encoding="UTF-8"?>"#);
    let _ = writeln!(
        out,
        "<!-- {} -->",
        escape(&spec.banner).replace("--", "- -")
    );
    let _ = writeln!(
        out,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{height}" viewBox="0 0 {WIDTH} {height}" font-family="sans-serif" font-size="12">"#
    );
    let _ = writeln!(out, r#"<rect width="100%" height="100%" fill="white"/>"#);
    let _ = writeln!(
        out,
        r#"<text x="{}" y="24" text-anchor="middle" font-size="16">{}</text>"#,
        WIDTH / 2.0,
        escape(&spec.title)
    );
    for (i, n) in spec.notes.iter().enumerate() {
        let _ = writeln!(
            out,
            r#"<text class="note" x="{LEFT}" y="{}">{}</text>"#,
            TOP - 8.0 + 16.0 * i as f64,
            escape(n)
        );
    }

    for (p, panel) in spec.panels.iter().enumerate() {
        let cols: Vec<usize> = (1..data.header.len())
            .filter(|&i| panel.suffix.is_empty() || data.header[i].ends_with(&panel.suffix))
            .collect();
        let y0 = top + p as f64 * (PANEL_HEIGHT + GAP);
        let y_axis = Axis::new(
            cols.iter()
                .flat_map(|&c| data.columns[c].iter().flatten().copied()),
            false,
        );
        let px = |v: f64| x_axis.frac(v).map(|f| LEFT + f * plot_w);
        let py = |v: f64| y_axis.frac(v).map(|f| y0 + (1.0 - f) * PANEL_HEIGHT);

        let _ = writeln!(out, r#"<g class="panel">"#);
        let _ = writeln!(
            out,
            r##"<rect x="{LEFT}" y="{y0}" width="{plot_w}" height="{PANEL_HEIGHT}" fill="none" stroke="#444"/>"##
        );
        for t in x_axis.ticks() {
            if let Some(xp) = px(t) {
                let _ = writeln!(
                    out,
                    r##"<line x1="{xp:.2}" y1="{y0}" x2="{xp:.2}" y2="{:.2}" stroke="#ddd"/><text x="{xp:.2}" y="{:.2}" text-anchor="middle">{}</text>"##,
                    y0 + PANEL_HEIGHT,
                    y0 + PANEL_HEIGHT + 16.0,
                    fmt_tick(t)
                );
            }
        }
        for t in y_axis.ticks() {
            if let Some(yp) = py(t) {
                let _ = writeln!(
                    out,
                    r##"<line x1="{LEFT}" y1="{yp:.2}" x2="{:.2}" y2="{yp:.2}" stroke="#ddd"/><text x="{:.2}" y="{:.2}" text-anchor="end">{}</text>"##,
                    LEFT + plot_w,
                    LEFT - 6.0,
                    yp + 4.0,
                    fmt_tick(t)
                );
            }
        }
        for &m in &spec.markers {
            if let Some(xp) = px(m) {
                let _ = writeln!(
                    out,
                    r##"<line class="marker" x1="{xp:.2}" y1="{y0}" x2="{xp:.2}" y2="{:.2}" stroke="#000" stroke-dasharray="4 3"/>"##,
                    y0 + PANEL_HEIGHT
                );
            }
        }
        let _ = writeln!(
            out,
            r#"<text x="{:.2}" y="{:.2}" text-anchor="middle">{}</text>"#,
            LEFT + plot_w / 2.0,
            y0 + PANEL_HEIGHT + 34.0,
            escape(&spec.x_label)
        );
        let _ = writeln!(
            out,
            r#"<text transform="translate({:.2},{:.2}) rotate(-90)" text-anchor="middle">{}</text>"#,
            LEFT - 55.0,
            y0 + PANEL_HEIGHT / 2.0,
            escape(&panel.y_label)
        );
        for (k, &c) in cols.iter().enumerate() {
            let color = PALETTE[k % PALETTE.len()];
            let mut d = String::new();
            let mut pen_down = false;
            for (xv, yv) in x.iter().zip(&data.columns[c]) {
                match (xv.and_then(px), yv.and_then(py)) {
                    (Some(a), Some(b)) => {
                        let _ = write!(d, "{}{a:.2},{b:.2} ", if pen_down { "L" } else { "M" });
                        pen_down = true;
                    }
                    _ => pen_down = false,
                }
            }
            let _ = writeln!(
                out,
                r#"<path data-column="{}" d="{}" fill="none" stroke="{color}" stroke-width="1.5"/>"#,
                escape(&data.header[c]),
                d.trim_end()
            );
            let ly = y0 + 14.0 + 16.0 * k as f64;
            let lx = LEFT + plot_w + 12.0;
            let _ = writeln!(
                out,
                r#"<line x1="{lx}" y1="{:.2}" x2="{}" y2="{:.2}" stroke="{color}" stroke-width="2"/><text x="{}" y="{ly:.2}">{}</text>"#,
                ly - 4.0,
                lx + 20.0,
                ly - 4.0,
                lx + 26.0,
                escape(&data.header[c])
            );
        }
        let _ = writeln!(out, "</g>");
    }
    let _ = writeln!(out, "</svg>");
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn spec(x_log: bool) -> PlotSpec {
        PlotSpec {
            title: "t <&>".into(),
            x_label: "x".into(),
            x_log,
            panels: vec![Panel {
                suffix: String::new(),
                y_label: "y".into(),
            }],
            notes: vec!["note & more".into()],
            markers: vec![1.0],
            banner: "tool --x".into(),
        }
    }

    #[test]
    fn gaps_split_the_path() {
        let svg = plot_csv("x,a\n1,1\n2,\n3,3\n4,4\n", &spec(false)).unwrap();
        let path = svg
            .lines()
            .find(|l| l.contains("data-column=\"a\""))
            .unwrap();
        assert_eq!(path.matches('M').count(), 2);
        assert_eq!(path.matches('L').count(), 1);
    }

    #[test]
    fn output_is_well_formed_xml() {
        let svg = plot_csv("# c\nx,a <b>\n0.1,1\n10,2\n", &spec(true)).unwrap();
        let doc = roxmltree::Document::parse(&svg).unwrap();
        assert_eq!(doc.root_element().tag_name().name(), "svg");
    }

    #[test]
    fn ticks_are_round() {
        assert_eq!(
            nice_ticks(0.0, 10.0, 5),
            vec![0.0, 2.0, 4.0, 6.0, 8.0, 10.0]
        );
        assert_eq!(fmt_tick(0.001), "0.001");
        assert_eq!(fmt_tick(1e-4), "1e-4");
    }

    #[test]
    fn rejects_degenerate_tables() {
        assert!(plot_csv("x\n1\n", &spec(false)).is_err());
        assert!(plot_csv("x,a\n", &spec(false)).is_err());
    }
}
