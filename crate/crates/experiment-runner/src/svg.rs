//! Minimal deterministic SVG building: string assembly only, no layout
//! engine, so identical inputs give byte-identical files.

use std::fmt::Write;

pub struct Svg {
    width: f64,
    height: f64,
    body: String,
}

impl Svg {
    pub fn new(width: f64, height: f64) -> Self {
        Self {
            width,
            height,
            body: String::new(),
        }
    }

    pub fn rect(&mut self, x: f64, y: f64, w: f64, h: f64, fill: &str, stroke: &str) {
        writeln!(
            self.body,
            r#"<rect x="{}" y="{}" width="{}" height="{}" fill="{fill}" stroke="{stroke}"/>"#,
            fmt(x),
            fmt(y),
            fmt(w),
            fmt(h)
        )
        .unwrap();
    }

    pub fn line(&mut self, x1: f64, y1: f64, x2: f64, y2: f64, stroke: &str, width: f64) {
        writeln!(
            self.body,
            r#"<line x1="{}" y1="{}" x2="{}" y2="{}" stroke="{stroke}" stroke-width="{}"/>"#,
            fmt(x1),
            fmt(y1),
            fmt(x2),
            fmt(y2),
            fmt(width)
        )
        .unwrap();
    }

    pub fn text(&mut self, x: f64, y: f64, size: f64, anchor: &str, content: &str) {
        writeln!(
            self.body,
            r#"<text x="{}" y="{}" font-size="{}" font-family="sans-serif" text-anchor="{anchor}">{}</text>"#,
            fmt(x),
            fmt(y),
            fmt(size),
            escape(content)
        )
        .unwrap();
    }

    pub fn polyline(&mut self, points: &[(f64, f64)], stroke: &str, width: f64, dash: Option<&str>) {
        let coords: Vec<String> = points
            .iter()
            .map(|(x, y)| format!("{},{}", fmt(*x), fmt(*y)))
            .collect();
        let dash_attr = match dash {
            Some(d) => format!(r#" stroke-dasharray="{d}""#),
            None => String::new(),
        };
        writeln!(
            self.body,
            r#"<polyline points="{}" fill="none" stroke="{stroke}" stroke-width="{}"{dash_attr}/>"#,
            coords.join(" "),
            fmt(width)
        )
        .unwrap();
    }

    pub fn finish(self) -> String {
        format!(
            "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{}\" height=\"{}\" viewBox=\"0 0 {} {}\">\n<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n{}</svg>\n",
            fmt(self.width),
            fmt(self.height),
            fmt(self.width),
            fmt(self.height),
            self.body
        )
    }
}

fn fmt(v: f64) -> String {
    // Two decimals are plenty for figure coordinates and keep files stable.
    format!("{:.2}", v)
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

/// Diverging blue-white-red scale over [min, max]; used by the heatmaps.
pub fn diverging_color(value: f64, min: f64, max: f64) -> String {
    if !value.is_finite() || max <= min {
        return "#dddddd".to_string();
    }
    let t = ((value - min) / (max - min)).clamp(0.0, 1.0);
    let (r, g, b) = if t < 0.5 {
        let u = t / 0.5;
        (
            (49.0 + (245.0 - 49.0) * u) as u8,
            (104.0 + (245.0 - 104.0) * u) as u8,
            (173.0 + (245.0 - 173.0) * u) as u8,
        )
    } else {
        let u = (t - 0.5) / 0.5;
        (
            (245.0 - (245.0 - 178.0) * u) as u8,
            (245.0 - (245.0 - 53.0) * u) as u8,
            (245.0 - (245.0 - 57.0) * u) as u8,
        )
    };
    format!("#{r:02x}{g:02x}{b:02x}")
}

/// Sequential white-to-red scale for magnitude heatmaps.
pub fn sequential_color(value: f64, min: f64, max: f64) -> String {
    if !value.is_finite() || max <= min {
        return "#dddddd".to_string();
    }
    let t = ((value - min) / (max - min)).clamp(0.0, 1.0);
    let r = 255.0 - (255.0 - 178.0) * t;
    let g = 245.0 - (245.0 - 53.0) * t;
    let b = 240.0 - (240.0 - 57.0) * t;
    format!("#{:02x}{:02x}{:02x}", r as u8, g as u8, b as u8)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn svg_output_is_deterministic() {
        let build = || {
            let mut svg = Svg::new(100.0, 50.0);
            svg.rect(1.0, 2.0, 30.0, 10.0, "#ff0000", "none");
            svg.text(5.0, 25.0, 10.0, "middle", "a < b & c");
            svg.polyline(&[(0.0, 0.0), (10.0, 20.0)], "#000", 1.0, Some("2,2"));
            svg.finish()
        };
        assert_eq!(build(), build());
        assert!(build().contains("a &lt; b &amp; c"));
    }

    #[test]
    fn color_scales_clamp() {
        assert_eq!(diverging_color(f64::NAN, 0.0, 1.0), "#dddddd");
        assert_eq!(sequential_color(0.0, 0.0, 0.0), "#dddddd");
        assert!(diverging_color(-5.0, 0.0, 1.0).starts_with('#'));
    }
}
