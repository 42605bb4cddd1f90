//! Minimal static SVG line plots.

use std::fmt::Write as _;
use std::path::Path;

use crate::error::CliError;

const W: f64 = 640.0;
const H: f64 = 420.0;
const LEFT: f64 = 78.0;
const RIGHT: f64 = 20.0;
const TOP: f64 = 36.0;
const BOTTOM: f64 = 52.0;
const COLORS: [&str; 6] = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#17becf"];

#[derive(Clone, Debug)]
pub struct Series {
    pub name: String,
    pub points: Vec<(f64, f64)>,
    pub markers: bool,
}

impl Series {
    pub fn line(name: &str, x: &[f64], y: &[f64]) -> Self {
        Series {
            name: name.into(),
            points: x.iter().copied().zip(y.iter().copied()).collect(),
            markers: false,
        }
    }

    pub fn with_markers(mut self) -> Self {
        self.markers = true;
        self
    }
}

#[derive(Clone, Debug)]
pub struct Plot {
    title: String,
    x_label: String,
    y_label: String,
    log: bool,
    series: Vec<Series>,
    slope: Option<f64>,
}

struct Axis {
    lo: f64,
    hi: f64,
    log: bool,
}

impl Axis {
    fn fit(values: impl Iterator<Item = f64>, log: bool) -> Self {
        let (mut lo, mut hi) = (f64::INFINITY, f64::NEG_INFINITY);
        for v in values {
            let v = if log { v.log10() } else { v };
            lo = lo.min(v);
            hi = hi.max(v);
        }
        if log {
            lo = lo.floor();
            hi = hi.ceil().max(lo + 1.0);
        } else if hi - lo < 1e-300 {
            lo -= 1.0;
            hi += 1.0;
        } else {
            let pad = 0.05 * (hi - lo);
            lo -= pad;
            hi += pad;
        }
        Axis { lo, hi, log }
    }

    fn frac(&self, v: f64) -> f64 {
        let v = if self.log { v.log10() } else { v };
        (v - self.lo) / (self.hi - self.lo)
    }

    fn ticks(&self) -> Vec<(f64, String)> {
        if self.log {
            let first = self.lo as i32;
            let last = self.hi as i32;
            let step = ((last - first) / 6).max(1);
            return (first..=last)
                .step_by(step as usize)
                .map(|e| ((e as f64 - self.lo) / (self.hi - self.lo), format!("1e{e}")))
                .collect();
        }
        let raw = (self.hi - self.lo) / 5.0;
        let mag = 10f64.powf(raw.log10().floor());
        let step = [1.0, 2.0, 5.0, 10.0]
            .iter()
            .map(|m| m * mag)
            .find(|s| *s >= raw)
            .unwrap_or(10.0 * mag);
        let mut out = Vec::new();
        let mut v = (self.lo / step).ceil() * step;
        while v <= self.hi + 1e-9 * step {
            let label = if v.abs() < 1e-12 * step { "0".to_string() } else { format!("{v:.3}") };
            out.push(((v - self.lo) / (self.hi - self.lo), trim(label)));
            v += step;
        }
        out
    }
}

fn trim(s: String) -> String {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.').to_string()
    } else {
        s
    }
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

impl Plot {
    pub fn new(title: &str, x_label: &str, y_label: &str) -> Self {
        Plot {
            title: title.into(),
            x_label: x_label.into(),
            y_label: y_label.into(),
            log: false,
            series: Vec::new(),
            slope: None,
        }
    }

    /// Logarithmic axes in both directions.
    pub fn log_log(mut self) -> Self {
        self.log = true;
        self
    }

    pub fn series(mut self, s: Series) -> Self {
        self.series.push(s);
        self
    }

    /// Reference triangle of slope `rate` below the first series.
    pub fn slope_triangle(mut self, rate: f64) -> Self {
        self.slope = Some(rate);
        self
    }

    /// Corners of the slope triangle in data coordinates.
    pub fn triangle(&self) -> Option<[(f64, f64); 3]> {
        let rate = self.slope?;
        let &(x0, y0) = self
            .series
            .first()?
            .points
            .iter()
            .min_by(|a, b| a.0.total_cmp(&b.0))?;
        let base = 0.5 * y0;
        Some([(x0, base), (2.0 * x0, base), (2.0 * x0, base * 2f64.powf(rate))])
    }

    pub fn render(&self) -> Result<String, CliError> {
        if self.series.is_empty() || self.series.iter().any(|s| s.points.is_empty()) {
            return Err(CliError::Numerical(format!("plot {:?} has no data", self.title)));
        }
        let mut all: Vec<(f64, f64)> = self.series.iter().flat_map(|s| s.points.clone()).collect();
        if let Some(t) = self.triangle() {
            all.extend(t);
        }
        if all.iter().any(|(x, y)| !x.is_finite() || !y.is_finite()) {
            return Err(CliError::Numerical(format!("plot {:?} has non-finite data", self.title)));
        }
        if self.log && all.iter().any(|(x, y)| *x <= 0.0 || *y <= 0.0) {
            return Err(CliError::Numerical(format!(
                "plot {:?} needs positive data on log axes",
                self.title
            )));
        }
        let ax = Axis::fit(all.iter().map(|p| p.0), self.log);
        let ay = Axis::fit(all.iter().map(|p| p.1), self.log);
        let (pw, ph) = (W - LEFT - RIGHT, H - TOP - BOTTOM);
        let px = |x: f64| LEFT + ax.frac(x) * pw;
        let py = |y: f64| TOP + (1.0 - ay.frac(y)) * ph;

        let mut s = String::new();
        let _ = writeln!(
            s,
            r#"<svg xmlns="http://www.w3.org/2000/svg" width="{W}" height="{H}" viewBox="0 0 {W} {H}" font-family="sans-serif" font-size="12">"#
        );
        let _ = writeln!(s, r#"<rect width="{W}" height="{H}" fill="white"/>"#);
        let _ = writeln!(
            s,
            r#"<text x="{:.1}" y="22" text-anchor="middle" font-size="14">{}</text>"#,
            W / 2.0,
            escape(&self.title)
        );
        let _ = writeln!(
            s,
            r#"<rect x="{LEFT}" y="{TOP}" width="{pw}" height="{ph}" fill="none" stroke="black"/>"#
        );
        for (f, label) in ax.ticks() {
            let x = LEFT + f * pw;
            let _ = writeln!(
                s,
                r##"<line x1="{x:.1}" y1="{:.1}" x2="{x:.1}" y2="{TOP}" stroke="#ddd"/><text x="{x:.1}" y="{:.1}" text-anchor="middle">{label}</text>"##,
                TOP + ph,
                TOP + ph + 16.0
            );
        }
        for (f, label) in ay.ticks() {
            let y = TOP + (1.0 - f) * ph;
            let _ = writeln!(
                s,
                r##"<line x1="{LEFT}" y1="{y:.1}" x2="{:.1}" y2="{y:.1}" stroke="#ddd"/><text x="{:.1}" y="{:.1}" text-anchor="end">{label}</text>"##,
                LEFT + pw,
                LEFT - 6.0,
                y + 4.0
            );
        }
        let _ = writeln!(
            s,
            r#"<text x="{:.1}" y="{:.1}" text-anchor="middle">{}</text>"#,
            LEFT + pw / 2.0,
            H - 12.0,
            escape(&self.x_label)
        );
        let _ = writeln!(
            s,
            r#"<text x="16" y="{:.1}" text-anchor="middle" transform="rotate(-90 16 {:.1})">{}</text>"#,
            TOP + ph / 2.0,
            TOP + ph / 2.0,
            escape(&self.y_label)
        );
        for (i, series) in self.series.iter().enumerate() {
            let color = COLORS[i % COLORS.len()];
            if series.points.len() > 1 {
                let pts: Vec<String> = series
                    .points
                    .iter()
                    .map(|&(x, y)| format!("{:.2},{:.2}", px(x), py(y)))
                    .collect();
                let _ = writeln!(
                    s,
                    r#"<polyline fill="none" stroke="{color}" stroke-width="1.5" points="{}"/>"#,
                    pts.join(" ")
                );
            }
            if series.markers || series.points.len() == 1 {
                for &(x, y) in &series.points {
                    let _ = writeln!(
                        s,
                        r#"<circle cx="{:.2}" cy="{:.2}" r="3" fill="{color}"/>"#,
                        px(x),
                        py(y)
                    );
                }
            }
            let ly = TOP + 16.0 + 16.0 * i as f64;
            let lx = LEFT + pw - 150.0;
            let _ = writeln!(
                s,
                r#"<line x1="{lx:.1}" y1="{ly:.1}" x2="{:.1}" y2="{ly:.1}" stroke="{color}" stroke-width="2"/><text x="{:.1}" y="{:.1}">{}</text>"#,
                lx + 20.0,
                lx + 26.0,
                ly + 4.0,
                escape(&series.name)
            );
        }
        if let (Some(t), Some(rate)) = (self.triangle(), self.slope) {
            let pts: Vec<String> = t.iter().map(|&(x, y)| format!("{:.2},{:.2}", px(x), py(y))).collect();
            let _ = writeln!(
                s,
                r#"<polygon fill="none" stroke="black" stroke-dasharray="4 3" points="{}"/>"#,
                pts.join(" ")
            );
            let _ = writeln!(
                s,
                r#"<text x="{:.1}" y="{:.1}">{rate:.2}</text>"#,
                px(t[1].0) + 4.0,
                0.5 * (py(t[1].1) + py(t[2].1))
            );
        }
        s.push_str("</svg>\n");
        Ok(s)
    }

    pub fn write(&self, path: &Path) -> Result<(), CliError> {
        let svg = self.render()?;
        std::fs::write(path, svg).map_err(|e| CliError::io(path, e))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn two_points_give_two_markers_and_one_segment() {
        let svg = Plot::new("t", "x", "y")
            .series(Series::line("a", &[0.0, 1.0], &[1.0, 2.0]).with_markers())
            .render()
            .unwrap();
        assert_eq!(svg.matches("<circle").count(), 2);
        assert_eq!(svg.matches("<polyline").count(), 1);
        let line = svg.lines().find(|l| l.starts_with("<polyline")).unwrap();
        let pts = line.split("points=\"").nth(1).unwrap().trim_end_matches("\"/>");
        assert_eq!(pts.split(' ').count(), 2);
    }

    #[test]
    fn empty_series_is_an_error() {
        assert!(Plot::new("t", "x", "y").render().is_err());
        let empty = Plot::new("t", "x", "y").series(Series::line("a", &[], &[]));
        assert!(empty.render().is_err());
    }

    #[test]
    fn slope_triangle_matches_rate() {
        let h = [0.5, 0.25, 0.125];
        let e: Vec<f64> = h.iter().map(|h| h * h).collect();
        let p = Plot::new("c", "h", "e")
            .log_log()
            .series(Series::line("e", &h, &e))
            .slope_triangle(2.0);
        let t = p.triangle().unwrap();
        let fitted = (t[2].1 / t[1].1).log2() / (t[1].0 / t[0].0).log2();
        assert!((fitted - 2.0).abs() < 1e-12);
        assert_eq!(t[0].0, 0.125);
        assert!(p.render().unwrap().contains("<polygon"));
    }

    #[test]
    fn log_axes_reject_nonpositive_data() {
        let p = Plot::new("c", "h", "e").log_log().series(Series::line("e", &[1.0, 0.5], &[0.0, 1.0]));
        assert!(p.render().is_err());
    }
}
