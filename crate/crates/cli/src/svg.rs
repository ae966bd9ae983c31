//! Minimal SVG charts: line plots on linear or log axes and heat maps.
//!
//! Output depends only on the data, so identical inputs give identical bytes.

use std::fmt::Write;

const WIDTH: f64 = 720.0;
const HEIGHT: f64 = 460.0;
const LEFT: f64 = 80.0;
const RIGHT: f64 = 24.0;
const TOP: f64 = 40.0;
const BOTTOM: f64 = 56.0;

/// Colour cycle for curves.
pub const PALETTE: [&str; 8] = [
    "#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd", "#8c564b", "#e377c2", "#17becf",
];

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Scale {
    Linear,
    Log10,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Axis {
    pub label: String,
    pub scale: Scale,
    /// Data range; derived from the series when `None`.
    pub range: Option<(f64, f64)>,
}

impl Axis {
    pub fn linear(label: impl Into<String>) -> Self {
        Self {
            label: label.into(),
            scale: Scale::Linear,
            range: None,
        }
    }

    pub fn log(label: impl Into<String>) -> Self {
        Self {
            label: label.into(),
            scale: Scale::Log10,
            range: None,
        }
    }

    pub fn with_range(mut self, lo: f64, hi: f64) -> Self {
        self.range = Some((lo, hi));
        self
    }

    fn project(&self, v: f64) -> Option<f64> {
        match self.scale {
            Scale::Linear => v.is_finite().then_some(v),
            Scale::Log10 => (v > 0.0 && v.is_finite()).then(|| v.log10()),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Style {
    Line,
    Dashed,
    Points,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Series {
    pub label: String,
    pub points: Vec<(f64, f64)>,
    pub style: Style,
    pub color: String,
}

impl Series {
    pub fn new(label: impl Into<String>, points: Vec<(f64, f64)>, style: Style, color: &str) -> Self {
        Self {
            label: label.into(),
            points,
            style,
            color: color.to_string(),
        }
    }
}

/// Text placed at a data coordinate, with a small marker.
#[derive(Debug, Clone, PartialEq)]
pub struct Label {
    pub x: f64,
    pub y: f64,
    pub text: String,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Chart {
    pub title: String,
    pub x: Axis,
    pub y: Axis,
    pub series: Vec<Series>,
    pub labels: Vec<Label>,
    /// Shaded x intervals.
    pub spans: Vec<(f64, f64)>,
    pub legend: bool,
}

impl Chart {
    pub fn new(title: impl Into<String>, x: Axis, y: Axis) -> Self {
        Self {
            title: title.into(),
            x,
            y,
            series: Vec::new(),
            labels: Vec::new(),
            spans: Vec::new(),
            legend: true,
        }
    }

    pub fn push(&mut self, s: Series) -> &mut Self {
        self.series.push(s);
        self
    }

    fn bounds(&self, axis: &Axis, pick: impl Fn(&(f64, f64)) -> f64) -> (f64, f64) {
        if let Some((lo, hi)) = axis.range {
            let lo = axis.project(lo).unwrap_or(0.0);
            let hi = axis.project(hi).unwrap_or(1.0);
            return widen(lo, hi);
        }
        let mut lo = f64::INFINITY;
        let mut hi = f64::NEG_INFINITY;
        for v in self.series.iter().flat_map(|s| s.points.iter().map(&pick)) {
            if let Some(p) = axis.project(v) {
                lo = lo.min(p);
                hi = hi.max(p);
            }
        }
        if !lo.is_finite() {
            return (0.0, 1.0);
        }
        widen(lo, hi)
    }

    pub fn render(&self) -> String {
        let (x0, x1) = self.bounds(&self.x, |p| p.0);
        let (y0, y1) = self.bounds(&self.y, |p| p.1);
        let frame = Frame { x0, x1, y0, y1 };
        let mut out = header(&self.title);
        frame.axes(&mut out, &self.x, &self.y);
        for &(a, b) in &self.spans {
            if let (Some(a), Some(b)) = (self.x.project(a), self.x.project(b)) {
                let (pa, pb) = (frame.px(a), frame.px(b));
                let _ = writeln!(
                    out,
                    r##"<rect x="{}" y="{}" width="{}" height="{}" fill="#2ca02c" fill-opacity="0.15"/>"##,
                    f(pa.min(pb)),
                    f(TOP),
                    f((pb - pa).abs()),
                    f(HEIGHT - TOP - BOTTOM)
                );
            }
        }
        let _ = writeln!(out, r#"<g clip-path="url(#plot)">"#);
        for s in &self.series {
            let pts: Vec<(f64, f64)> = s
                .points
                .iter()
                .filter_map(|&(x, y)| Some((frame.px(self.x.project(x)?), frame.py(self.y.project(y)?))))
                .collect();
            match s.style {
                Style::Points => {
                    for (px, py) in pts {
                        let _ = writeln!(
                            out,
                            r#"<circle cx="{}" cy="{}" r="2.5" fill="{}"/>"#,
                            f(px),
                            f(py),
                            s.color
                        );
                    }
                }
                Style::Line | Style::Dashed => {
                    if pts.len() < 2 {
                        continue;
                    }
                    let dash = if s.style == Style::Dashed {
                        r#" stroke-dasharray="6 4""#
                    } else {
                        ""
                    };
                    let mut d = String::new();
                    for (i, (px, py)) in pts.iter().enumerate() {
                        let _ = write!(d, "{}{},{}", if i == 0 { "M" } else { " L" }, f(*px), f(*py));
                    }
                    let _ = writeln!(
                        out,
                        r#"<path d="{d}" fill="none" stroke="{}" stroke-width="1.5"{dash}/>"#,
                        s.color
                    );
                }
            }
        }
        let _ = writeln!(out, "</g>");
        for l in &self.labels {
            if let (Some(x), Some(y)) = (self.x.project(l.x), self.y.project(l.y)) {
                let (px, py) = (frame.px(x), frame.py(y));
                let _ = writeln!(
                    out,
                    r##"<circle cx="{}" cy="{}" r="3.5" fill="none" stroke="#000"/>"##,
                    f(px),
                    f(py)
                );
                let _ = writeln!(
                    out,
                    r#"<text x="{}" y="{}" font-size="12" text-anchor="middle">{}</text>"#,
                    f(px),
                    f(py - 8.0),
                    escape(&l.text)
                );
            }
        }
        if self.legend {
            legend(&mut out, &self.series);
        }
        out.push_str("</svg>\n");
        out
    }
}

/// Colour-coded grid, rows ascending in `y`, drawn with `y` on a log axis.
#[derive(Debug, Clone, PartialEq)]
pub struct HeatMap {
    pub title: String,
    pub x_label: String,
    pub y_label: String,
    /// Column centres, ascending.
    pub x: Vec<f64>,
    /// Row centres, ascending and positive.
    pub y: Vec<f64>,
    /// `values[row][col]`, non-negative.
    pub values: Vec<Vec<f64>>,
    /// Cells outlined as significant.
    pub mask: Option<Vec<Vec<bool>>>,
    /// Curves drawn over the map, typically the cone of influence.
    pub overlay: Vec<Series>,
    /// Decades of dynamic range shown by the colour scale.
    pub decades: f64,
}

/// Maximum number of columns drawn; wider maps are block-averaged.
pub const MAX_COLUMNS: usize = 240;

impl HeatMap {
    pub fn render(&self) -> String {
        let nc = self.x.len();
        let nr = self.y.len();
        let block = nc.div_ceil(MAX_COLUMNS).max(1);
        let cols = nc.div_ceil(block);
        let x0 = self.x.first().copied().unwrap_or(0.0);
        let x1 = self.x.last().copied().unwrap_or(1.0);
        let (x0, x1) = widen(x0, x1);
        let ly = |v: f64| v.max(f64::MIN_POSITIVE).log10();
        let half = if nr > 1 {
            0.5 * (ly(self.y[nr - 1]) - ly(self.y[0])) / (nr - 1) as f64
        } else {
            0.5
        };
        let (y0, y1) = if nr > 0 {
            (ly(self.y[0]) - half, ly(self.y[nr - 1]) + half)
        } else {
            (0.0, 1.0)
        };
        let frame = Frame { x0, x1, y0, y1 };

        // block averages over time
        let mut cells = vec![vec![0.0; cols]; nr];
        let mut marks = vec![vec![false; cols]; nr];
        for r in 0..nr {
            for c in 0..cols {
                let lo = c * block;
                let hi = (lo + block).min(nc);
                let slice = &self.values[r][lo..hi];
                cells[r][c] = slice.iter().sum::<f64>() / slice.len() as f64;
                if let Some(m) = &self.mask {
                    marks[r][c] = m[r][lo..hi].iter().filter(|&&b| b).count() * 2 > hi - lo;
                }
            }
        }
        let top = cells.iter().flatten().copied().fold(0.0, f64::max);
        let floor = top * 10f64.powf(-self.decades);

        let mut out = header(&self.title);
        let x_axis = Axis::linear(self.x_label.clone());
        let y_axis = Axis::log(self.y_label.clone());
        let cw = (WIDTH - LEFT - RIGHT) / cols as f64;
        let rh = (HEIGHT - TOP - BOTTOM) / nr.max(1) as f64;
        for (r, row) in cells.iter().enumerate() {
            let py = HEIGHT - BOTTOM - (r + 1) as f64 * rh;
            for (c, &v) in row.iter().enumerate() {
                let t = if top > 0.0 && v > floor {
                    (v / floor).log10() / self.decades
                } else {
                    0.0
                };
                let _ = writeln!(
                    out,
                    r#"<rect x="{}" y="{}" width="{}" height="{}" fill="{}"/>"#,
                    f(LEFT + c as f64 * cw),
                    f(py),
                    f(cw + 0.05),
                    f(rh + 0.05),
                    colormap(t)
                );
            }
        }
        if self.mask.is_some() {
            let mut d = String::new();
            for r in 0..nr {
                for c in 0..cols {
                    if !marks[r][c] {
                        continue;
                    }
                    let x = LEFT + c as f64 * cw;
                    let y = HEIGHT - BOTTOM - (r + 1) as f64 * rh;
                    if c == 0 || !marks[r][c - 1] {
                        let _ = write!(d, "M{},{} V{} ", f(x), f(y), f(y + rh));
                    }
                    if c + 1 == cols || !marks[r][c + 1] {
                        let _ = write!(d, "M{},{} V{} ", f(x + cw), f(y), f(y + rh));
                    }
                    if r == 0 || !marks[r - 1][c] {
                        let _ = write!(d, "M{},{} H{} ", f(x), f(y + rh), f(x + cw));
                    }
                    if r + 1 == nr || !marks[r + 1][c] {
                        let _ = write!(d, "M{},{} H{} ", f(x), f(y), f(x + cw));
                    }
                }
            }
            if !d.is_empty() {
                let _ = writeln!(
                    out,
                    r##"<path d="{}" fill="none" stroke="#000" stroke-width="1"/>"##,
                    d.trim_end()
                );
            }
        }
        let _ = writeln!(out, r#"<g clip-path="url(#plot)">"#);
        for s in &self.overlay {
            let mut d = String::new();
            for (x, y) in s.points.iter().filter(|p| p.1 > 0.0) {
                let cmd = if d.is_empty() { "M" } else { " L" };
                let _ = write!(d, "{cmd}{},{}", f(frame.px(*x)), f(frame.py(y.log10())));
            }
            if !d.is_empty() {
                let _ = writeln!(
                    out,
                    r#"<path d="{d}" fill="none" stroke="{}" stroke-width="2" stroke-dasharray="6 4"/>"#,
                    s.color
                );
            }
        }
        let _ = writeln!(out, "</g>");
        frame.axes(&mut out, &x_axis, &y_axis);
        out.push_str("</svg>\n");
        out
    }
}

struct Frame {
    x0: f64,
    x1: f64,
    y0: f64,
    y1: f64,
}

impl Frame {
    fn px(&self, v: f64) -> f64 {
        LEFT + (v - self.x0) / (self.x1 - self.x0) * (WIDTH - LEFT - RIGHT)
    }

    fn py(&self, v: f64) -> f64 {
        HEIGHT - BOTTOM - (v - self.y0) / (self.y1 - self.y0) * (HEIGHT - TOP - BOTTOM)
    }

    fn axes(&self, out: &mut String, x: &Axis, y: &Axis) {
        let (l, r, t, b) = (LEFT, WIDTH - RIGHT, TOP, HEIGHT - BOTTOM);
        let _ = writeln!(
            out,
            r##"<rect x="{}" y="{}" width="{}" height="{}" fill="none" stroke="#000"/>"##,
            f(l),
            f(t),
            f(r - l),
            f(b - t)
        );
        for v in ticks(self.x0, self.x1, x.scale) {
            let p = self.px(v);
            let _ = writeln!(
                out,
                r##"<line x1="{0}" y1="{1}" x2="{0}" y2="{2}" stroke="#000"/>"##,
                f(p),
                f(b),
                f(b + 5.0)
            );
            let _ = writeln!(
                out,
                r#"<text x="{}" y="{}" font-size="11" text-anchor="middle">{}</text>"#,
                f(p),
                f(b + 18.0),
                tick_text(v, x.scale)
            );
        }
        for v in ticks(self.y0, self.y1, y.scale) {
            let p = self.py(v);
            let _ = writeln!(
                out,
                r##"<line x1="{0}" y1="{1}" x2="{2}" y2="{1}" stroke="#000"/>"##,
                f(l - 5.0),
                f(p),
                f(l)
            );
            let _ = writeln!(
                out,
                r#"<text x="{}" y="{}" font-size="11" text-anchor="end">{}</text>"#,
                f(l - 8.0),
                f(p + 4.0),
                tick_text(v, y.scale)
            );
        }
        let _ = writeln!(
            out,
            r#"<text x="{}" y="{}" font-size="13" text-anchor="middle">{}</text>"#,
            f(0.5 * (l + r)),
            f(HEIGHT - 14.0),
            escape(&x.label)
        );
        let _ = writeln!(
            out,
            r#"<text x="18" y="{0}" font-size="13" text-anchor="middle" transform="rotate(-90 18 {0})">{1}</text>"#,
            f(0.5 * (t + b)),
            escape(&y.label)
        );
    }
}

fn header(title: &str) -> String {
    let mut out = String::new();
    let _ = writeln!(
        out,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{0}" height="{1}" viewBox="0 0 {0} {1}" font-family="sans-serif">"#,
        WIDTH, HEIGHT
    );
    let _ = writeln!(
        out,
        r#"<defs><clipPath id="plot"><rect x="{}" y="{}" width="{}" height="{}"/></clipPath></defs>"#,
        LEFT,
        TOP,
        WIDTH - LEFT - RIGHT,
        HEIGHT - TOP - BOTTOM
    );
    let _ = writeln!(out, r##"<rect width="100%" height="100%" fill="#fff"/>"##);
    let _ = writeln!(
        out,
        r#"<text x="{}" y="24" font-size="15" text-anchor="middle">{}</text>"#,
        f(0.5 * WIDTH),
        escape(title)
    );
    out
}

fn legend(out: &mut String, series: &[Series]) {
    let named: Vec<&Series> = series.iter().filter(|s| !s.label.is_empty()).collect();
    for (i, s) in named.iter().enumerate() {
        let y = TOP + 14.0 + 16.0 * i as f64;
        let x = WIDTH - RIGHT - 170.0;
        let dash = if s.style == Style::Dashed {
            r#" stroke-dasharray="6 4""#
        } else {
            ""
        };
        let _ = writeln!(
            out,
            r#"<line x1="{}" y1="{}" x2="{}" y2="{}" stroke="{}" stroke-width="2"{dash}/>"#,
            f(x),
            f(y - 4.0),
            f(x + 22.0),
            f(y - 4.0),
            s.color
        );
        let _ = writeln!(
            out,
            r#"<text x="{}" y="{}" font-size="11">{}</text>"#,
            f(x + 28.0),
            f(y),
            escape(&s.label)
        );
    }
}

fn widen(lo: f64, hi: f64) -> (f64, f64) {
    if hi > lo {
        (lo, hi)
    } else {
        (lo - 0.5, hi + 0.5)
    }
}

/// Tick positions in projected coordinates.
fn ticks(lo: f64, hi: f64, scale: Scale) -> Vec<f64> {
    match scale {
        Scale::Log10 if hi - lo >= 1.0 => {
            let step = ((hi - lo) / 8.0).ceil().max(1.0);
            let mut v = (lo / step).ceil() * step;
            let mut out = Vec::new();
            while v <= hi + 1e-9 {
                out.push(v);
                v += step;
            }
            out
        }
        _ => {
            let raw = (hi - lo) / 5.0;
            let mag = 10f64.powf(raw.log10().floor());
            let step = [1.0, 2.0, 5.0, 10.0]
                .iter()
                .map(|m| m * mag)
                .find(|s| *s >= raw)
                .unwrap_or(10.0 * mag);
            let mut out = Vec::new();
            let mut k = (lo / step).ceil();
            while k * step <= hi + 1e-9 * step {
                out.push(k * step);
                k += 1.0;
            }
            out
        }
    }
}

fn tick_text(v: f64, scale: Scale) -> String {
    let value = match scale {
        Scale::Linear => v,
        Scale::Log10 => 10f64.powf(v),
    };
    let a = value.abs();
    if value == 0.0 || (1e-3..1e5).contains(&a) {
        let s = format!("{:.4}", value);
        let s = s.trim_end_matches('0').trim_end_matches('.');
        if s == "-0" {
            "0".into()
        } else {
            s.to_string()
        }
    } else {
        format!("{:.0e}", value)
    }
}

/// Perceptually ordered ramp from dark blue to yellow, `t` in [0, 1].
fn colormap(t: f64) -> String {
    const STOPS: [(f64, f64, f64); 5] = [
        (68.0, 1.0, 84.0),
        (59.0, 82.0, 139.0),
        (33.0, 145.0, 140.0),
        (94.0, 201.0, 98.0),
        (253.0, 231.0, 37.0),
    ];
    let t = t.clamp(0.0, 1.0) * (STOPS.len() - 1) as f64;
    let i = (t.floor() as usize).min(STOPS.len() - 2);
    let u = t - i as f64;
    let lerp = |a: f64, b: f64| (a + (b - a) * u).round() as u8;
    let (a, b) = (STOPS[i], STOPS[i + 1]);
    format!("#{:02x}{:02x}{:02x}", lerp(a.0, b.0), lerp(a.1, b.1), lerp(a.2, b.2))
}

fn f(v: f64) -> String {
    format!("{:.2}", v)
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}
