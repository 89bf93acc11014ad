//! CSV, JSON and SVG writers for command artifacts.

use nlproj::Point;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};

#[derive(Debug, thiserror::Error)]
pub enum OutputError {
    #[error("{path}: {source}")]
    Io { path: String, source: std::io::Error },
    #[error("csv: {0}")]
    Csv(#[from] csv::Error),
    #[error("json: {0}")]
    Json(#[from] serde_json::Error),
}

/// 17 significant digits, the round-trip precision of `f64`.
pub fn num(v: f64) -> String {
    if v.is_finite() {
        format!("{v:.16e}")
    } else if v.is_nan() {
        "nan".into()
    } else if v > 0.0 {
        "inf".into()
    } else {
        "-inf".into()
    }
}

pub fn nums(v: &[f64]) -> Vec<String> {
    v.iter().map(|x| num(*x)).collect()
}

/// Output directory, created on first use.
pub struct OutDir {
    root: PathBuf,
}

impl OutDir {
    pub fn new(root: &Path) -> Self {
        OutDir { root: root.to_path_buf() }
    }

    fn path(&self, name: &str) -> Result<PathBuf, OutputError> {
        std::fs::create_dir_all(&self.root)
            .map_err(|source| OutputError::Io { path: self.root.display().to_string(), source })?;
        Ok(self.root.join(name))
    }

    pub fn csv(&self, name: &str, header: &[String], rows: &[Vec<String>]) -> Result<PathBuf, OutputError> {
        let path = self.path(name)?;
        let mut w = csv::Writer::from_path(&path)?;
        w.write_record(header)?;
        for r in rows {
            w.write_record(r)?;
        }
        w.flush()
            .map_err(|source| OutputError::Io { path: path.display().to_string(), source })?;
        Ok(path)
    }

    pub fn text(&self, name: &str, text: &str) -> Result<PathBuf, OutputError> {
        let path = self.path(name)?;
        std::fs::write(&path, text).map_err(|source| OutputError::Io { path: path.display().to_string(), source })?;
        Ok(path)
    }
}

/// Header `prefix0, prefix1, ...`.
pub fn indexed(prefix: &str, n: usize) -> Vec<String> {
    (0..n).map(|i| format!("{prefix}{i}")).collect()
}

pub enum Layer {
    Scatter { points: Vec<(f64, f64)>, color: &'static str, radius: f64 },
    Polyline { points: Vec<(f64, f64)>, color: &'static str },
}

/// One panel of a plot in data coordinates.
pub struct Panel {
    pub title: String,
    pub x: (f64, f64),
    pub y: (f64, f64),
    pub layers: Vec<Layer>,
}

impl Panel {
    pub fn new(title: impl Into<String>, x: (f64, f64), y: (f64, f64)) -> Self {
        Panel { title: title.into(), x, y, layers: vec![] }
    }

    pub fn scatter(mut self, points: &[Point], color: &'static str, radius: f64) -> Self {
        self.layers.push(Layer::Scatter { points: points.iter().map(|p| (p[0], p[1])).collect(), color, radius });
        self
    }

    pub fn polyline(mut self, points: Vec<(f64, f64)>, color: &'static str) -> Self {
        self.layers.push(Layer::Polyline { points, color });
        self
    }
}

const PANEL_W: f64 = 480.0;
const PANEL_H: f64 = 400.0;
const MARGIN: f64 = 30.0;

/// Minimal SVG with panels side by side.
pub fn svg(panels: &[Panel]) -> String {
    let width = PANEL_W * panels.len() as f64;
    let mut s = String::new();
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{PANEL_H}" viewBox="0 0 {width} {PANEL_H}">"#
    );
    let _ = writeln!(s, r#"<rect width="100%" height="100%" fill="white"/>"#);
    for (k, p) in panels.iter().enumerate() {
        let ox = PANEL_W * k as f64;
        let sx = |x: f64| ox + MARGIN + (x - p.x.0) / (p.x.1 - p.x.0) * (PANEL_W - 2.0 * MARGIN);
        let sy = |y: f64| PANEL_H - MARGIN - (y - p.y.0) / (p.y.1 - p.y.0) * (PANEL_H - 2.0 * MARGIN);
        let _ = writeln!(
            s,
            r##"<rect x="{:.2}" y="{MARGIN}" width="{:.2}" height="{:.2}" fill="none" stroke="#999"/>"##,
            ox + MARGIN,
            PANEL_W - 2.0 * MARGIN,
            PANEL_H - 2.0 * MARGIN
        );
        let _ = writeln!(
            s,
            r#"<text x="{:.2}" y="20" font-family="sans-serif" font-size="13">{}</text>"#,
            ox + MARGIN,
            escape(&p.title)
        );
        for layer in &p.layers {
            match layer {
                Layer::Scatter { points, color, radius } => {
                    for &(x, y) in points {
                        let _ = writeln!(s, r#"<circle cx="{:.2}" cy="{:.2}" r="{radius}" fill="{color}"/>"#, sx(x), sy(y));
                    }
                }
                Layer::Polyline { points, color } => {
                    let mut d = String::new();
                    for (i, &(x, y)) in points.iter().enumerate() {
                        let _ = write!(d, "{}{:.2},{:.2}", if i == 0 { "M" } else { " L" }, sx(x), sy(y));
                    }
                    let _ = writeln!(s, r#"<path d="{d}" fill="none" stroke="{color}" stroke-width="1.5"/>"#);
                }
            }
        }
    }
    s.push_str("</svg>\n");
    s
}

fn escape(t: &str) -> String {
    t.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn number_format_round_trips() {
        for v in [0.1, 1.0 / 3.0, -2.5e-300, 123456789.123] {
            let s = num(v);
            assert_eq!(s.parse::<f64>().unwrap(), v);
        }
        assert_eq!(num(0.5), "5.0000000000000000e-1");
        assert_eq!(num(f64::INFINITY), "inf");
    }

    #[test]
    fn svg_is_well_formed() {
        let p = Panel::new("a<b", (0.0, 1.0), (0.0, 1.0)).polyline(vec![(0.0, 0.0), (1.0, 1.0)], "black");
        let s = svg(&[p]);
        assert!(s.starts_with("<svg") && s.ends_with("</svg>\n"));
        assert!(s.contains("a&lt;b"));
    }
}
