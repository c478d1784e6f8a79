//! Funnel plot: effect (analysis scale) against standard error, se = 0 at
//! the top, open circles per study, vertical pooled line and the dashed
//! pseudo-CI wedge meeting it at se = 0. Imputed trim-and-fill studies are
//! drawn as filled markers.

use crate::bias::FunnelData;
use crate::format::{fmt_coord, fmt_fixed, fmt_pct_int};

use super::{line, svg_close, svg_open, text, FigureSpec};

const MARGIN_LEFT: f64 = 56.0;
const MARGIN_RIGHT: f64 = 20.0;
const MARGIN_TOP: f64 = 28.0;
const MARGIN_BOTTOM: f64 = 44.0;

/// Point geometry; x-coordinates are computed relative to the pooled center
/// so mirror-symmetric effects land at exactly mirrored pixels.
#[derive(Debug, Clone)]
pub struct FunnelLayout {
    pub width: f64,
    pub height: f64,
    /// Pixel x of the pooled line (the symmetry axis).
    pub center_x: f64,
    pub top_y: f64,
    pub bottom_y: f64,
    pub plot_left: f64,
    pub plot_right: f64,
    /// One (x, y) per input point, same order.
    pub points: Vec<(f64, f64)>,
    /// One (x, y) per imputed point, same order.
    pub imputed: Vec<(f64, f64)>,
    /// Pseudo-CI wedge x positions at the bottom edge: (left, right).
    pub wedge: (f64, f64),
    /// Value of the se axis at the bottom edge.
    pub se_axis_max: f64,
    /// Half-width of the effect axis around the pooled value.
    pub span: f64,
}

pub fn funnel_layout(data: &FunnelData, imputed: &[(f64, f64)], spec: &FigureSpec) -> FunnelLayout {
    let width = spec.width.min(520.0);
    let height = spec.height;
    let plot_left = MARGIN_LEFT;
    let plot_right = width - MARGIN_RIGHT;
    let plot_w = plot_right - plot_left;
    let top_y = MARGIN_TOP;
    let bottom_y = height - MARGIN_BOTTOM;
    let plot_h = bottom_y - top_y;

    let mut se_max = 0.0f64;
    let mut dev_max = 0.0f64;
    for (effect, se) in data
        .points
        .iter()
        .map(|p| (p.effect, p.se))
        .chain(imputed.iter().copied())
    {
        se_max = se_max.max(se);
        dev_max = dev_max.max((effect - data.pooled_line).abs());
    }
    if se_max == 0.0 {
        se_max = 1.0;
    }
    let se_axis_max = se_max * 1.06;
    let span = (dev_max.max(data.z * se_max) * 1.08).max(1e-6);

    let center_x = plot_left + plot_w / 2.0;
    let sx = plot_w / 2.0 / span;
    let sy = plot_h / se_axis_max;

    let place = |effect: f64, se: f64| -> (f64, f64) {
        (center_x + (effect - data.pooled_line) * sx, top_y + se * sy)
    };

    let points = data.points.iter().map(|p| place(p.effect, p.se)).collect();
    let imputed = imputed.iter().map(|&(e, s)| place(e, s)).collect();
    let (wedge_lo, wedge_hi) = data.boundaries(se_axis_max);
    let wedge = (
        place(wedge_lo, se_axis_max).0,
        place(wedge_hi, se_axis_max).0,
    );

    FunnelLayout {
        width,
        height,
        center_x,
        top_y,
        bottom_y,
        plot_left,
        plot_right,
        points,
        imputed,
        wedge,
        se_axis_max,
        span,
    }
}

/// Render the funnel plot; `imputed` points (if any) are drawn filled.
pub fn render_funnel(data: &FunnelData, imputed: &[(f64, f64)], spec: &FigureSpec) -> String {
    let layout = funnel_layout(data, imputed, spec);
    let fs = spec.font_size;
    let mut out = String::new();
    svg_open(&mut out, layout.width, layout.height);

    text(
        &mut out,
        layout.width / 2.0,
        16.0,
        "middle",
        fs + 1.0,
        "Funnel plot",
    );

    // Frame: y axis (se) and x axis (effect).
    line(
        &mut out,
        layout.plot_left,
        layout.top_y,
        layout.plot_left,
        layout.bottom_y,
        "stroke=\"black\" stroke-width=\"1\"",
    );
    line(
        &mut out,
        layout.plot_left,
        layout.bottom_y,
        layout.plot_right,
        layout.bottom_y,
        "stroke=\"black\" stroke-width=\"1\"",
    );

    // Pooled vertical line.
    line(
        &mut out,
        layout.center_x,
        layout.top_y,
        layout.center_x,
        layout.bottom_y,
        "stroke=\"black\" stroke-width=\"0.8\"",
    );

    // Pseudo-CI wedge (dashed), meeting the pooled line at se = 0.
    let dash = "stroke=\"black\" stroke-width=\"0.8\" stroke-dasharray=\"4 3\"";
    line(
        &mut out,
        layout.center_x,
        layout.top_y,
        layout.wedge.0,
        layout.bottom_y,
        dash,
    );
    line(
        &mut out,
        layout.center_x,
        layout.top_y,
        layout.wedge.1,
        layout.bottom_y,
        dash,
    );

    // Study points: open circles; imputed: filled.
    for &(x, y) in &layout.points {
        out.push_str(&format!(
            "<circle class=\"study-point\" cx=\"{}\" cy=\"{}\" r=\"3.5\" fill=\"white\" stroke=\"black\"/>\n",
            fmt_coord(x),
            fmt_coord(y),
        ));
    }
    for &(x, y) in &layout.imputed {
        out.push_str(&format!(
            "<circle class=\"imputed-point\" cx=\"{}\" cy=\"{}\" r=\"3.5\" fill=\"black\" stroke=\"black\"/>\n",
            fmt_coord(x),
            fmt_coord(y),
        ));
    }

    // y-axis labels (standard error, 0 at the top).
    text(
        &mut out,
        layout.plot_left - 6.0,
        layout.top_y + 4.0,
        "end",
        fs - 1.0,
        "0",
    );
    text(
        &mut out,
        layout.plot_left - 6.0,
        layout.bottom_y + 4.0,
        "end",
        fs - 1.0,
        &fmt_fixed(layout.se_axis_max, 2),
    );
    text(
        &mut out,
        20.0,
        (layout.top_y + layout.bottom_y) / 2.0,
        "middle",
        fs - 1.0,
        "SE",
    );

    // x-axis tick labels on the measure's natural scale.
    let natural = |v: f64| {
        if data.measure.is_log_scale() {
            v.exp()
        } else {
            v
        }
    };
    let ticks = [
        (layout.plot_left, data.pooled_line - layout.span),
        (layout.center_x, data.pooled_line),
        (layout.plot_right, data.pooled_line + layout.span),
    ];
    for (x, v) in ticks {
        text(
            &mut out,
            x,
            layout.bottom_y + 16.0,
            "middle",
            fs - 1.0,
            &fmt_fixed(natural(v), 2),
        );
    }
    text(
        &mut out,
        layout.width / 2.0,
        layout.bottom_y + 32.0,
        "middle",
        fs - 1.0,
        &format!(
            "{} ({}% pseudo-CI)",
            data.measure.label(),
            fmt_pct_int(data.ci_level * 100.0)
        ),
    );

    svg_close(&mut out);
    out
}
