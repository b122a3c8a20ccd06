//! Static SVG figures. No timestamps or random ids, so output is stable.

use std::fmt::Write;

const WIDTH: f64 = 640.0;
const HEIGHT: f64 = 400.0;
const MARGIN: f64 = 56.0;
const FLOOR: f64 = 1e-16;
const COLORS: [&str; 6] = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b"];

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;").replace('"', "&quot;")
}

struct Axes {
    x: (f64, f64),
    y: (f64, f64),
}

impl Axes {
    fn px(&self, x: f64) -> f64 {
        let span = (self.x.1 - self.x.0).max(f64::MIN_POSITIVE);
        MARGIN + (x - self.x.0) / span * (WIDTH - 2.0 * MARGIN)
    }

    fn py(&self, y: f64) -> f64 {
        let span = (self.y.1 - self.y.0).max(f64::MIN_POSITIVE);
        HEIGHT - MARGIN - (y - self.y.0) / span * (HEIGHT - 2.0 * MARGIN)
    }
}

fn header(out: &mut String, title: &str, xlabel: &str, ylabel: &str) {
    let _ = writeln!(
        out,
        r#"<?xml version="1.0" encoding="UTF-8"?>
<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}" font-family="sans-serif" font-size="12">
<rect width="100%" height="100%" fill="white"/>
<text x="{}" y="20" text-anchor="middle" font-size="14">{}</text>
<text x="{}" y="{}" text-anchor="middle">{}</text>
<text x="16" y="{}" text-anchor="middle" transform="rotate(-90 16 {})">{}</text>
<rect x="{MARGIN}" y="{MARGIN}" width="{}" height="{}" fill="none" stroke="black"/>"#,
        WIDTH / 2.0,
        escape(title),
        WIDTH / 2.0,
        HEIGHT - 12.0,
        escape(xlabel),
        HEIGHT / 2.0,
        HEIGHT / 2.0,
        escape(ylabel),
        WIDTH - 2.0 * MARGIN,
        HEIGHT - 2.0 * MARGIN,
    );
}

fn y_ticks(out: &mut String, axes: &Axes, ticks: &[(f64, String)]) {
    for (v, label) in ticks {
        let y = axes.py(*v);
        let _ = writeln!(
            out,
            r#"<line x1="{MARGIN}" y1="{y:.2}" x2="{:.2}" y2="{y:.2}" stroke="black"/><text x="{:.2}" y="{:.2}" text-anchor="end">{}</text>"#,
            MARGIN - 4.0,
            MARGIN - 6.0,
            y + 4.0,
            escape(label)
        );
    }
}

fn x_ticks(out: &mut String, axes: &Axes, ticks: &[(f64, String)]) {
    for (v, label) in ticks {
        let x = axes.px(*v);
        let base = HEIGHT - MARGIN;
        let _ = writeln!(
            out,
            r#"<line x1="{x:.2}" y1="{base}" x2="{x:.2}" y2="{:.2}" stroke="black"/><text x="{x:.2}" y="{:.2}" text-anchor="middle">{}</text>"#,
            base + 4.0,
            base + 18.0,
            escape(label)
        );
    }
}

/// Singular values against their 1-based index on a log axis, with the
/// threshold as a dashed line.
pub fn spectrum_svg(title: &str, sigma: &[f64], threshold: Option<f64>) -> String {
    let logs: Vec<f64> = sigma.iter().map(|s| s.max(FLOOR).log10()).collect();
    let mut lo = logs.iter().copied().fold(f64::INFINITY, f64::min);
    let mut hi = logs.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if let Some(t) = threshold {
        lo = lo.min(t.max(FLOOR).log10());
        hi = hi.max(t.max(FLOOR).log10());
    }
    if !lo.is_finite() {
        (lo, hi) = (-1.0, 1.0);
    }
    let (lo, hi) = (lo.floor(), hi.ceil().max(lo.floor() + 1.0));
    let axes = Axes {
        x: (0.0, sigma.len().max(1) as f64 + 1.0),
        y: (lo, hi),
    };
    let mut out = String::new();
    header(&mut out, title, "index", "singular value");
    let step = ((hi - lo) / 8.0).ceil().max(1.0) as i64;
    let ticks: Vec<(f64, String)> = (lo as i64..=hi as i64)
        .step_by(step as usize)
        .map(|e| (e as f64, format!("1e{e}")))
        .collect();
    y_ticks(&mut out, &axes, &ticks);
    let n = sigma.len();
    let xstep = (n / 6).max(1);
    let xt: Vec<(f64, String)> = (1..=n).step_by(xstep).map(|i| (i as f64, i.to_string())).collect();
    x_ticks(&mut out, &axes, &xt);
    if let Some(t) = threshold {
        let y = axes.py(t.max(FLOOR).log10());
        let _ = writeln!(
            out,
            r#"<line x1="{MARGIN}" y1="{y:.2}" x2="{:.2}" y2="{y:.2}" stroke="gray" stroke-dasharray="6 4"/>"#,
            WIDTH - MARGIN
        );
    }
    for (i, l) in logs.iter().enumerate() {
        let _ = writeln!(
            out,
            r#"<circle cx="{:.2}" cy="{:.2}" r="2.5" fill="{}"/>"#,
            axes.px((i + 1) as f64),
            axes.py(*l),
            COLORS[0]
        );
    }
    out.push_str("</svg>\n");
    out
}

/// One polyline per chain size: median count against disorder strength.
pub fn counts_svg(title: &str, series: &[(usize, Vec<(f64, usize)>)]) -> String {
    let xs = series.iter().flat_map(|(_, p)| p.iter().map(|q| q.0));
    let (mut xlo, mut xhi) = (f64::INFINITY, f64::NEG_INFINITY);
    for x in xs {
        xlo = xlo.min(x);
        xhi = xhi.max(x);
    }
    if !xlo.is_finite() {
        (xlo, xhi) = (0.0, 1.0);
    }
    if xhi <= xlo {
        xhi = xlo + 1.0;
    }
    let cmax = series.iter().flat_map(|(_, p)| p.iter().map(|q| q.1)).max().unwrap_or(1).max(1);
    let axes = Axes {
        x: (xlo, xhi),
        y: (0.0, cmax as f64 * 1.1),
    };
    let mut out = String::new();
    header(&mut out, title, "disorder strength w", "count below threshold");
    let ystep = (cmax / 8).max(1);
    let yt: Vec<(f64, String)> = (0..=cmax).step_by(ystep).map(|c| (c as f64, c.to_string())).collect();
    y_ticks(&mut out, &axes, &yt);
    let mut xt: Vec<(f64, String)> = Vec::new();
    for (_, pts) in series {
        for &(w, _) in pts {
            if !xt.iter().any(|(v, _)| *v == w) {
                xt.push((w, w.to_string()));
            }
        }
    }
    x_ticks(&mut out, &axes, &xt);
    for (s, (n, pts)) in series.iter().enumerate() {
        let color = COLORS[s % COLORS.len()];
        let path: Vec<String> = pts
            .iter()
            .map(|&(w, c)| format!("{:.2},{:.2}", axes.px(w), axes.py(c as f64)))
            .collect();
        let _ = writeln!(
            out,
            r#"<polyline points="{}" fill="none" stroke="{color}" stroke-width="1.5"/>"#,
            path.join(" ")
        );
        for &(w, c) in pts {
            let _ = writeln!(
                out,
                r#"<circle cx="{:.2}" cy="{:.2}" r="3" fill="{color}"/>"#,
                axes.px(w),
                axes.py(c as f64)
            );
        }
        let _ = writeln!(
            out,
            r#"<text x="{:.2}" y="{:.2}" fill="{color}">N = {n}</text>"#,
            WIDTH - MARGIN - 60.0,
            MARGIN + 16.0 * (s + 1) as f64
        );
    }
    out.push_str("</svg>\n");
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn parse(svg: &str) -> roxmltree::Document<'_> {
        roxmltree::Document::parse(svg).expect("well-formed SVG")
    }

    #[test]
    fn spectrum_is_well_formed() {
        let sigma = [0.0, 1e-12, 3e-3, 0.5, 2.0];
        let svg = spectrum_svg("spectrum <full> & more", &sigma, Some(1e-8));
        let doc = parse(&svg);
        assert_eq!(doc.root_element().tag_name().name(), "svg");
        let circles = doc.descendants().filter(|n| n.has_tag_name("circle")).count();
        assert_eq!(circles, sigma.len());
    }

    #[test]
    fn empty_spectrum_still_parses() {
        parse(&spectrum_svg("empty", &[], None));
    }

    #[test]
    fn counts_are_well_formed() {
        let series = vec![(6, vec![(1.0, 2), (8.0, 10)]), (8, vec![(1.0, 3), (8.0, 14)])];
        let svg = counts_svg("counts", &series);
        let doc = parse(&svg);
        let lines = doc.descendants().filter(|n| n.has_tag_name("polyline")).count();
        assert_eq!(lines, 2);
        parse(&counts_svg("none", &[]));
    }

    #[test]
    fn deterministic() {
        let s = [1e-3, 1e-1, 1.0];
        assert_eq!(spectrum_svg("a", &s, Some(0.01)), spectrum_svg("a", &s, Some(0.01)));
    }
}
