//! Deterministic SVG figures: forest, funnel, PRISMA flow, risk-of-bias.
//!
//! Layout is computed in abstract user units with fixed-width font metrics
//! assumed (no text measurement), every coordinate is written with three
//! decimals and every data number with the shared half-up formatting, so a
//! given input always produces byte-identical output.

mod forest;
mod funnel;
mod prisma;
mod rob;

pub use forest::{forest_layout, render_forest, ForestLayout, ForestRow};
pub use funnel::{funnel_layout, render_funnel, FunnelLayout};
pub use prisma::render_prisma;
pub use rob::render_rob;

use crate::effects::Measure;

/// Figure geometry and styling.
#[derive(Debug, Clone)]
pub struct FigureSpec {
    /// Overall width in user units (px).
    pub width: f64,
    /// Base height for fixed-aspect figures; row-driven figures (forest,
    /// risk-of-bias) grow as content requires.
    pub height: f64,
    pub margin: f64,
    pub font_size: f64,
    /// Risk-of-bias colors: (low, unclear, high).
    pub palette: Palette,
}

#[derive(Debug, Clone)]
pub struct Palette {
    pub low: String,
    pub unclear: String,
    pub high: String,
}

impl Default for FigureSpec {
    fn default() -> Self {
        Self {
            width: 860.0,
            height: 360.0,
            margin: 16.0,
            font_size: 11.0,
            palette: Palette {
                low: "#2ca02c".to_string(),
                unclear: "#e6c229".to_string(),
                high: "#d62728".to_string(),
            },
        }
    }
}

/// Axis scale: log for ratio measures, linear for differences.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AxisScale {
    Log,
    Linear,
}

pub fn scale_for(measure: Measure) -> AxisScale {
    if measure.is_log_scale() {
        AxisScale::Log
    } else {
        AxisScale::Linear
    }
}

/// `<review-slug>__<figure>.svg`
pub fn figure_filename(slug: &str, figure: &str) -> String {
    format!("{slug}__{figure}.svg")
}

// ---- shared SVG helpers ----

pub(crate) fn svg_open(out: &mut String, width: f64, height: f64) {
    out.push_str("<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n");
    out.push_str(&format!(
        "<svg xmlns=\"http://www.w3.org/2000/svg\" version=\"1.1\" width=\"{w}\" height=\"{h}\" \
         viewBox=\"0 0 {w} {h}\" font-family=\"monospace\">\n",
        w = crate::format::fmt_coord(width),
        h = crate::format::fmt_coord(height),
    ));
    out.push_str(&format!(
        "<rect x=\"0\" y=\"0\" width=\"{w}\" height=\"{h}\" fill=\"white\"/>\n",
        w = crate::format::fmt_coord(width),
        h = crate::format::fmt_coord(height),
    ));
}

pub(crate) fn svg_close(out: &mut String) {
    out.push_str("</svg>\n");
}

pub(crate) fn escape(text: &str) -> String {
    let mut out = String::with_capacity(text.len());
    for ch in text.chars() {
        match ch {
            '&' => out.push_str("&amp;"),
            '<' => out.push_str("&lt;"),
            '>' => out.push_str("&gt;"),
            '"' => out.push_str("&quot;"),
            _ => out.push(ch),
        }
    }
    out
}

pub(crate) fn text(out: &mut String, x: f64, y: f64, anchor: &str, size: f64, content: &str) {
    out.push_str(&format!(
        "<text x=\"{}\" y=\"{}\" text-anchor=\"{anchor}\" font-size=\"{}\">{}</text>\n",
        crate::format::fmt_coord(x),
        crate::format::fmt_coord(y),
        crate::format::fmt_coord(size),
        escape(content),
    ));
}

pub(crate) fn line(out: &mut String, x1: f64, y1: f64, x2: f64, y2: f64, style: &str) {
    out.push_str(&format!(
        "<line x1=\"{}\" y1=\"{}\" x2=\"{}\" y2=\"{}\" {style}/>\n",
        crate::format::fmt_coord(x1),
        crate::format::fmt_coord(y1),
        crate::format::fmt_coord(x2),
        crate::format::fmt_coord(y2),
    ));
}

/// Greedy wrap at a character budget (fixed-width font assumption). Words
/// are split on ASCII whitespace only, so non-breaking spaces keep tokens
/// such as `(n = 17)` on one line.
pub(crate) fn wrap_text(text: &str, max_chars: usize) -> Vec<String> {
    let mut lines = Vec::new();
    let mut current = String::new();
    for word in text.split_ascii_whitespace() {
        if current.is_empty() {
            current = word.to_string();
        } else if current.chars().count() + 1 + word.chars().count() <= max_chars {
            current.push(' ');
            current.push_str(word);
        } else {
            lines.push(std::mem::take(&mut current));
            current = word.to_string();
        }
    }
    if !current.is_empty() {
        lines.push(current);
    }
    if lines.is_empty() {
        lines.push(String::new());
    }
    lines
}
