//! Self-contained SVG figures: spectrum scatter with reference circles,
//! integrated radial and angular densities, and width against `N` with the
//! fitted curve.

use std::fmt::Write as _;

use crate::classical::SymbolRange;
use crate::spectral::{SpectrumResult, WidthFit};
use crate::{Error, Result};

const SIZE: f64 = 480.0;
const MARGIN: f64 = 48.0;

pub enum Plot<'a> {
    /// Eigenvalues in the complex plane, dashed circles at `a₋`, `a₊` and a
    /// plain one at `⟨a⟩`.
    Scatter {
        spectrum: &'a SpectrumResult,
        mean: f64,
        range: SymbolRange,
    },
    /// `r ↦ h·#{r_j ≤ r}` and `θ ↦ h·#{θ_j ≤ θ}` side by side.
    Densities {
        spectrum: &'a SpectrumResult,
        mean: f64,
        range: SymbolRange,
    },
    Width {
        points: &'a [(usize, f64)],
        fit: Option<&'a WidthFit>,
    },
}

struct Frame {
    x0: f64,
    x1: f64,
    y0: f64,
    y1: f64,
    left: f64,
    width: f64,
}

impl Frame {
    fn new(x: (f64, f64), y: (f64, f64), left: f64, width: f64) -> Self {
        let pad = |(a, b): (f64, f64)| if b > a { (a, b) } else { (a - 0.5, b + 0.5) };
        let (x0, x1) = pad(x);
        let (y0, y1) = pad(y);
        Self { x0, x1, y0, y1, left, width }
    }

    fn px(&self, x: f64) -> f64 {
        self.left + MARGIN + (x - self.x0) / (self.x1 - self.x0) * (self.width - 2.0 * MARGIN)
    }

    fn py(&self, y: f64) -> f64 {
        SIZE - MARGIN - (y - self.y0) / (self.y1 - self.y0) * (SIZE - 2.0 * MARGIN)
    }

    fn axes(&self, out: &mut String, xlabel: &str, ylabel: &str) {
        let (l, r) = (self.left + MARGIN, self.left + self.width - MARGIN);
        let (t, b) = (MARGIN, SIZE - MARGIN);
        let _ = writeln!(
            out,
            r##"<rect class="frame" x="{l:.2}" y="{t:.2}" width="{:.2}" height="{:.2}" fill="none" stroke="#444"/>"##,
            r - l,
            b - t
        );
        for (v, x) in [(self.x0, l), (self.x1, r)] {
            let _ = writeln!(out, r#"<text x="{x:.2}" y="{:.2}" font-size="11" text-anchor="middle">{}</text>"#, b + 14.0, tick(v));
        }
        for (v, y) in [(self.y0, b), (self.y1, t)] {
            let _ = writeln!(out, r#"<text x="{:.2}" y="{:.2}" font-size="11" text-anchor="end">{}</text>"#, l - 4.0, y + 4.0, tick(v));
        }
        let _ = writeln!(
            out,
            r#"<text class="label" x="{:.2}" y="{:.2}" font-size="13" text-anchor="middle">{xlabel}</text>"#,
            (l + r) / 2.0,
            SIZE - 10.0
        );
        let _ = writeln!(
            out,
            r#"<text class="label" x="{:.2}" y="{:.2}" font-size="13" text-anchor="middle" transform="rotate(-90 {:.2} {:.2})">{ylabel}</text>"#,
            l - 30.0,
            (t + b) / 2.0,
            l - 30.0,
            (t + b) / 2.0
        );
    }

    fn polyline(&self, out: &mut String, class: &str, pts: &[(f64, f64)], style: &str) {
        let coords: Vec<String> = pts
            .iter()
            .map(|&(x, y)| format!("{:.2},{:.2}", self.px(x), self.py(y)))
            .collect();
        let _ = writeln!(
            out,
            r#"<polyline class="{class}" points="{}" fill="none" {style}/>"#,
            coords.join(" ")
        );
    }

    fn vbar(&self, out: &mut String, class: &str, x: f64, style: &str) {
        let _ = writeln!(
            out,
            r#"<line class="{class}" x1="{0:.2}" y1="{1:.2}" x2="{0:.2}" y2="{2:.2}" {style}/>"#,
            self.px(x),
            self.py(self.y0),
            self.py(self.y1)
        );
    }
}

fn tick(v: f64) -> String {
    if v.abs() >= 100.0 {
        format!("{v:.0}")
    } else {
        format!("{v:.3}")
    }
}

fn header(width: f64) -> String {
    format!(
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{width:.0}\" height=\"{SIZE:.0}\" viewBox=\"0 0 {width:.0} {SIZE:.0}\">\n<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n"
    )
}

/// Distinct reference radii, the plain `⟨a⟩` circle taking precedence.
fn reference_circles(mean: f64, range: SymbolRange) -> Vec<(f64, bool)> {
    let mut out: Vec<(f64, bool)> = vec![(mean, false)];
    for r in [range.a_minus, range.a_plus] {
        if out.iter().all(|&(x, _)| (x - r).abs() > 1e-9) {
            out.push((r, true));
        }
    }
    out
}

/// Corners of the integrated density `x ↦ h·#{v ≤ x}` on `[lo, hi]`, values
/// closer than `1e-9` merged into one jump.
pub fn step_points(values: &[f64], lo: f64, hi: f64) -> Vec<(f64, f64)> {
    let mut v = values.to_vec();
    v.sort_by(f64::total_cmp);
    let h = 1.0 / v.len().max(1) as f64;
    let mut pts = vec![(lo, 0.0)];
    let mut count = 0usize;
    let mut i = 0;
    while i < v.len() {
        let x = v[i];
        let mut j = i;
        while j < v.len() && v[j] - x <= 1e-9 {
            j += 1;
        }
        let before = count as f64 * h;
        count = j;
        pts.push((x, before));
        pts.push((x, count as f64 * h));
        i = j;
    }
    pts.push((hi, count as f64 * h));
    pts
}

fn scatter(s: &SpectrumResult, mean: f64, range: SymbolRange) -> String {
    let circles = reference_circles(mean, range);
    let rmax = circles
        .iter()
        .map(|c| c.0)
        .chain(s.moduli.iter().copied())
        .fold(0.0, f64::max)
        .max(1e-3)
        * 1.1;
    let f = Frame::new((-rmax, rmax), (-rmax, rmax), 0.0, SIZE);
    let mut out = header(SIZE);
    f.axes(&mut out, "Re λ", "Im λ");
    let unit = (f.px(1.0) - f.px(0.0)).abs();
    for (r, dashed) in circles {
        let dash = if dashed { r#" stroke-dasharray="6 4""# } else { "" };
        let _ = writeln!(
            out,
            r##"<circle class="ref" cx="{:.2}" cy="{:.2}" r="{:.2}" fill="none" stroke="#c33"{dash}/>"##,
            f.px(0.0),
            f.py(0.0),
            r * unit
        );
    }
    for z in &s.eigenvalues {
        let _ = writeln!(
            out,
            r##"<circle class="pt" cx="{:.2}" cy="{:.2}" r="1.6" fill="#136"/>"##,
            f.px(z.re),
            f.py(z.im)
        );
    }
    out.push_str("</svg>\n");
    out
}

fn densities(s: &SpectrumResult, mean: f64, range: SymbolRange) -> String {
    let lo = s.moduli.iter().copied().fold(range.a_minus, f64::min);
    let hi = s.moduli.iter().copied().fold(range.a_plus, f64::max);
    let pad = 0.05 * (hi - lo).max(0.05);
    let (lo, hi) = (lo - pad, hi + pad);
    let mut out = header(2.0 * SIZE);

    let radial = Frame::new((lo, hi), (0.0, 1.0), 0.0, SIZE);
    radial.axes(&mut out, "r", "integrated radial density");
    radial.polyline(&mut out, "radial", &step_points(&s.moduli, lo, hi), r##"stroke="#136" stroke-width="1.5""##);
    radial.vbar(&mut out, "mean", mean, r##"stroke="#c33" stroke-width="1.5""##);
    for r in [range.a_minus, range.a_plus] {
        radial.vbar(&mut out, "bound", r, r##"stroke="#c33" stroke-dasharray="6 4""##);
    }

    let angular = Frame::new((0.0, 1.0), (0.0, 1.0), SIZE, SIZE);
    angular.axes(&mut out, "θ / 2π", "integrated angular density");
    angular.polyline(&mut out, "uniform", &[(0.0, 0.0), (1.0, 1.0)], r##"stroke="#999" stroke-dasharray="3 3""##);
    angular.polyline(&mut out, "angular", &step_points(&s.angles, 0.0, 1.0), r##"stroke="#136" stroke-width="1.5""##);
    out.push_str("</svg>\n");
    out
}

fn width_plot(points: &[(usize, f64)], fit: Option<&WidthFit>) -> String {
    let ln = |n: usize| (n as f64).ln();
    let xs: Vec<f64> = points.iter().map(|p| ln(p.0)).collect();
    let x0 = xs.iter().copied().fold(f64::INFINITY, f64::min);
    let x1 = xs.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let mut ymax = points.iter().map(|p| p.1).fold(0.0, f64::max);
    let curve: Vec<(f64, f64)> = fit
        .map(|fit| {
            (0..=64)
                .map(|i| {
                    let x = x0 + (x1 - x0) * i as f64 / 64.0;
                    (x, fit.eval(x.exp()))
                })
                .collect()
        })
        .unwrap_or_default();
    for &(_, y) in &curve {
        ymax = ymax.max(y);
    }
    let f = Frame::new((x0, x1), (0.0, ymax * 1.1), 0.0, SIZE);
    let mut out = header(SIZE);
    f.axes(&mut out, "log N", "width W");
    let data: Vec<(f64, f64)> = points.iter().map(|p| (ln(p.0), p.1)).collect();
    f.polyline(&mut out, "data", &data, r##"stroke="#136" stroke-width="1.5""##);
    for &(x, y) in &data {
        let _ = writeln!(out, r##"<circle class="pt" cx="{:.2}" cy="{:.2}" r="3" fill="#136"/>"##, f.px(x), f.py(y));
    }
    if let Some(fit) = fit {
        f.polyline(&mut out, "fit", &curve, r##"stroke="#c33" stroke-dasharray="6 4""##);
        let _ = writeln!(
            out,
            r#"<text class="legend" x="{:.2}" y="{:.2}" font-size="12">A (log N)^-B: A = {:.4}, B = {:.4} ± {:.4}</text>"#,
            MARGIN + 8.0,
            MARGIN + 16.0,
            fit.a,
            fit.b,
            fit.b_stderr
        );
    }
    out.push_str("</svg>\n");
    out
}

pub fn emit_plots(plot: &Plot<'_>) -> Result<String> {
    let empty = || Error::arg("nothing to plot");
    match plot {
        Plot::Scatter { spectrum, mean, range } => {
            if spectrum.eigenvalues.is_empty() {
                return Err(empty());
            }
            Ok(scatter(spectrum, *mean, *range))
        }
        Plot::Densities { spectrum, mean, range } => {
            if spectrum.eigenvalues.is_empty() {
                return Err(empty());
            }
            Ok(densities(spectrum, *mean, *range))
        }
        Plot::Width { points, fit } => {
            if points.is_empty() {
                return Err(empty());
            }
            Ok(width_plot(points, *fit))
        }
    }
}
