//! Figure datasets and their CSV / SVG renderings.

use super::AppError;
use std::fmt::Write as _;

#[derive(Clone, Debug, PartialEq)]
pub struct FigureDataset {
    /// 1–5.
    pub figure: u8,
    pub title: String,
    pub columns: Vec<String>,
    pub rows: Vec<Vec<f64>>,
    /// Digest of the configuration that produced the rows.
    pub config_digest: String,
    /// Free-form provenance and caveats.
    pub notes: Vec<String>,
    /// Columns drawn against column 0 in the SVG.
    pub plot_columns: Vec<usize>,
    pub y_label: String,
}

impl FigureDataset {
    pub fn file_stem(&self) -> String {
        format!("fig{}", self.figure)
    }

    pub fn column(&self, name: &str) -> Option<Vec<f64>> {
        let i = self.columns.iter().position(|c| c == name)?;
        Some(self.rows.iter().map(|r| r[i]).collect())
    }

    pub fn to_csv(&self) -> String {
        let mut out = self.columns.join(",");
        out.push('\n');
        for row in &self.rows {
            let cells: Vec<String> = row.iter().map(|&x| format_g(x)).collect();
            out.push_str(&cells.join(","));
            out.push('\n');
        }
        out
    }

    /// `key = value` sidecar with the digest and notes.
    pub fn metadata_text(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "figure = {}", self.figure);
        let _ = writeln!(s, "title = {}", self.title);
        let _ = writeln!(s, "config-digest = {}", self.config_digest);
        let _ = writeln!(s, "rows = {}", self.rows.len());
        for n in &self.notes {
            let _ = writeln!(s, "note = {n}");
        }
        s
    }
}

/// Twelve significant digits, C `%.12g` style.
pub fn format_g(x: f64) -> String {
    const DIGITS: i32 = 12;
    if x == 0.0 {
        return "0".into();
    }
    if !x.is_finite() {
        return if x.is_nan() {
            "nan".into()
        } else if x > 0.0 {
            "inf".into()
        } else {
            "-inf".into()
        };
    }
    let sci = format!("{:.*e}", (DIGITS - 1) as usize, x);
    let (mant, exp) = sci.split_once('e').expect("exponent");
    let exp: i32 = exp.parse().expect("exponent digits");
    if exp < -4 || exp >= DIGITS {
        let mant = trim_zeros(mant);
        let sign = if exp < 0 { '-' } else { '+' };
        format!("{mant}e{sign}{:02}", exp.abs())
    } else {
        let decimals = (DIGITS - 1 - exp).max(0) as usize;
        trim_zeros(&format!("{:.*}", decimals, x)).to_string()
    }
}

fn trim_zeros(s: &str) -> &str {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.')
    } else {
        s
    }
}

const WIDTH: f64 = 640.0;
const HEIGHT: f64 = 420.0;
const MARGIN_L: f64 = 70.0;
const MARGIN_R: f64 = 20.0;
const MARGIN_T: f64 = 36.0;
const MARGIN_B: f64 = 50.0;
const COLORS: [&str; 6] = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#17becf"];
const DASHES: [&str; 6] = ["", "6,4", "2,3", "8,3,2,3", "", "4,4"];

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

fn ticks(lo: f64, hi: f64) -> Vec<f64> {
    let span = (hi - lo).max(f64::MIN_POSITIVE);
    let raw = span / 5.0;
    let mag = 10f64.powf(raw.log10().floor());
    let step = [1.0, 2.0, 5.0, 10.0].iter().map(|m| m * mag).find(|s| *s >= raw).unwrap_or(10.0 * mag);
    let first = (lo / step).ceil() as i64;
    let last = (hi / step).floor() as i64;
    (first..=last).map(|k| k as f64 * step).collect()
}

/// Line chart of the plotted columns of one or more datasets. All datasets
/// must share a configuration digest.
pub fn render_svg(datasets: &[&FigureDataset]) -> Result<String, AppError> {
    let first = datasets.first().ok_or_else(|| AppError::Render("nothing to plot".into()))?;
    if let Some(other) = datasets.iter().find(|d| d.config_digest != first.config_digest) {
        return Err(AppError::Render(format!(
            "refusing to mix configuration digests {} and {}",
            first.config_digest, other.config_digest
        )));
    }

    let mut series: Vec<(String, Vec<(f64, f64)>)> = Vec::new();
    for d in datasets {
        for &c in &d.plot_columns {
            let pts = d.rows.iter().map(|r| (r[0], r[c])).filter(|(x, y)| x.is_finite() && y.is_finite()).collect();
            series.push((d.columns[c].clone(), pts));
        }
    }
    let all = series.iter().flat_map(|(_, p)| p.iter());
    let (mut x0, mut x1, mut y0, mut y1) = (f64::INFINITY, f64::NEG_INFINITY, f64::INFINITY, f64::NEG_INFINITY);
    for &(x, y) in all {
        x0 = x0.min(x);
        x1 = x1.max(x);
        y0 = y0.min(y);
        y1 = y1.max(y);
    }
    if !x0.is_finite() {
        return Err(AppError::Render("no finite points".into()));
    }
    if x1 == x0 {
        x1 = x0 + 1.0;
    }
    let pad = 0.05 * (y1 - y0).max(1e-12 * y1.abs().max(1.0));
    y0 -= pad;
    y1 += pad;

    let pw = WIDTH - MARGIN_L - MARGIN_R;
    let ph = HEIGHT - MARGIN_T - MARGIN_B;
    let sx = |x: f64| MARGIN_L + (x - x0) / (x1 - x0) * pw;
    let sy = |y: f64| MARGIN_T + (y1 - y) / (y1 - y0) * ph;

    let mut s = String::new();
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}" font-family="sans-serif" font-size="12">"#
    );
    let _ = writeln!(s, r#"<rect width="100%" height="100%" fill="white"/>"#);
    let _ = writeln!(
        s,
        r#"<text x="{}" y="20" text-anchor="middle" font-size="14">{}</text>"#,
        WIDTH / 2.0,
        escape(&first.title)
    );
    let _ =
        writeln!(s, r#"<rect x="{MARGIN_L}" y="{MARGIN_T}" width="{pw}" height="{ph}" fill="none" stroke="black"/>"#);
    for t in ticks(x0, x1) {
        let x = sx(t);
        let _ = writeln!(
            s,
            r#"<line x1="{x:.2}" y1="{:.2}" x2="{x:.2}" y2="{:.2}" stroke="black"/>"#,
            MARGIN_T + ph,
            MARGIN_T + ph + 5.0
        );
        let _ = writeln!(
            s,
            r#"<text x="{x:.2}" y="{:.2}" text-anchor="middle">{}</text>"#,
            MARGIN_T + ph + 18.0,
            format_g_short(t)
        );
    }
    for t in ticks(y0, y1) {
        let y = sy(t);
        let _ =
            writeln!(s, r#"<line x1="{:.2}" y1="{y:.2}" x2="{MARGIN_L}" y2="{y:.2}" stroke="black"/>"#, MARGIN_L - 5.0);
        let _ = writeln!(
            s,
            r#"<text x="{:.2}" y="{:.2}" text-anchor="end">{}</text>"#,
            MARGIN_L - 8.0,
            y + 4.0,
            format_g_short(t)
        );
    }
    let _ = writeln!(
        s,
        r#"<text x="{:.2}" y="{:.2}" text-anchor="middle">{}</text>"#,
        MARGIN_L + pw / 2.0,
        HEIGHT - 10.0,
        escape(&first.columns[0])
    );
    let _ = writeln!(
        s,
        r#"<text transform="translate(16 {:.2}) rotate(-90)" text-anchor="middle">{}</text>"#,
        MARGIN_T + ph / 2.0,
        escape(&first.y_label)
    );
    for (k, (name, pts)) in series.iter().enumerate() {
        let color = COLORS[k % COLORS.len()];
        let dash = DASHES[k % DASHES.len()];
        let path: Vec<String> = pts.iter().map(|&(x, y)| format!("{:.2},{:.2}", sx(x), sy(y))).collect();
        let dash_attr = if dash.is_empty() { String::new() } else { format!(r#" stroke-dasharray="{dash}""#) };
        let _ = writeln!(
            s,
            r#"<polyline fill="none" stroke="{color}" stroke-width="1.5"{dash_attr} points="{}"/>"#,
            path.join(" ")
        );
        let ly = MARGIN_T + 14.0 + 16.0 * k as f64;
        let lx = MARGIN_L + pw - 150.0;
        let _ = writeln!(
            s,
            r#"<line x1="{lx:.2}" y1="{:.2}" x2="{:.2}" y2="{:.2}" stroke="{color}" stroke-width="1.5"{dash_attr}/>"#,
            ly - 4.0,
            lx + 24.0,
            ly - 4.0
        );
        let _ = writeln!(s, r#"<text x="{:.2}" y="{ly:.2}">{}</text>"#, lx + 30.0, escape(name));
    }
    s.push_str("</svg>\n");
    Ok(s)
}

fn format_g_short(x: f64) -> String {
    let v = format!("{:.6}", x);
    trim_zeros(&v).to_string()
}
