//! Forest plot: one row per study (counts, weight, estimate text, square
//! sized by weight, CI whisker), a pooled diamond, null line, axis and the
//! heterogeneity / overall-effect text lines.

use crate::format::{fmt_coord, fmt_fixed, fmt_pct_int};
use crate::pooling::PooledResult;
use crate::review::Outcome;

use super::{escape, line, scale_for, svg_close, svg_open, text, AxisScale, FigureSpec};

/// Maximum square side (at 100% weight); area scales with weight.
const SQUARE_MAX_SIDE: f64 = 12.0;
const ROW_HEIGHT: f64 = 18.0;

/// Geometry of one study row.
#[derive(Debug, Clone)]
pub struct ForestRow {
    pub id: String,
    pub y: f64,
    /// (center x, center y, side) of the weight square, when estimable.
    pub square: Option<(f64, f64, f64)>,
    /// CI segment in plot coordinates with clipping flags.
    pub ci: Option<CiSegment>,
    pub weight_pct: f64,
    pub estimable: bool,
}

#[derive(Debug, Clone, Copy)]
pub struct CiSegment {
    pub x1: f64,
    pub x2: f64,
    pub clipped_low: bool,
    pub clipped_high: bool,
}

/// Precomputed geometry; the emitter only formats it.
#[derive(Debug, Clone)]
pub struct ForestLayout {
    pub width: f64,
    pub height: f64,
    pub plot_left: f64,
    pub plot_right: f64,
    pub null_x: f64,
    pub axis_y: f64,
    pub rows: Vec<ForestRow>,
    /// Diamond vertices (left, top, right, bottom), when pooled is estimable.
    pub diamond: Option<[(f64, f64); 4]>,
    pub scale: AxisScale,
    pub range: (f64, f64),
}

fn candidate_ranges(scale: AxisScale) -> &'static [(f64, f64)] {
    match scale {
        AxisScale::Log => &[
            (0.5, 2.0),
            (0.2, 5.0),
            (0.1, 10.0),
            (0.02, 50.0),
            (0.01, 100.0),
            (0.001, 1000.0),
        ],
        AxisScale::Linear => &[(-0.1, 0.1), (-0.25, 0.25), (-0.5, 0.5), (-1.0, 1.0)],
    }
}

fn pick_range(result: &PooledResult, scale: AxisScale) -> (f64, f64) {
    let mut lo = f64::INFINITY;
    let mut hi = f64::NEG_INFINITY;
    let mut consider = |estimate: &crate::effects::EffectEstimate| {
        if estimate.estimable {
            for v in [estimate.ci_low, estimate.point, estimate.ci_high] {
                if v.is_finite() && (scale == AxisScale::Linear || v > 0.0) {
                    lo = lo.min(v);
                    hi = hi.max(v);
                }
            }
        }
    };
    for row in &result.per_study {
        consider(&row.estimate);
    }
    consider(&result.pooled);
    let candidates = candidate_ranges(scale);
    for &(a, b) in candidates {
        if lo >= a && hi <= b {
            return (a, b);
        }
    }
    *candidates.last().unwrap()
}

/// Map a natural-scale value into plot x.
fn x_of(value: f64, range: (f64, f64), scale: AxisScale, left: f64, right: f64) -> f64 {
    let (a, b) = range;
    let t = match scale {
        AxisScale::Log => (value.ln() - a.ln()) / (b.ln() - a.ln()),
        AxisScale::Linear => (value - a) / (b - a),
    };
    left + t * (right - left)
}

pub fn forest_layout(result: &PooledResult, spec: &FigureSpec) -> ForestLayout {
    let scale = scale_for(result.settings.measure);
    let range = pick_range(result, scale);
    let plot_left = 545.0;
    let plot_right = spec.width - spec.margin - 4.0;
    // Title baseline at 18, column headers at 52, data rows from 70.
    let first_row_y = 34.0 + 2.0 * ROW_HEIGHT;

    let mut rows = Vec::new();
    for (i, study) in result.per_study.iter().enumerate() {
        let y = first_row_y + i as f64 * ROW_HEIGHT;
        let estimate = &study.estimate;
        let (square, ci) = if estimate.estimable {
            let side = SQUARE_MAX_SIDE * (study.weight_pct / 100.0).sqrt();
            let cx = x_of(
                estimate.point.clamp(range.0, range.1),
                range,
                scale,
                plot_left,
                plot_right,
            );
            let clipped_low = estimate.ci_low < range.0;
            let clipped_high = estimate.ci_high > range.1;
            let x1 = x_of(
                estimate.ci_low.max(range.0),
                range,
                scale,
                plot_left,
                plot_right,
            );
            let x2 = x_of(
                estimate.ci_high.min(range.1),
                range,
                scale,
                plot_left,
                plot_right,
            );
            (
                Some((cx, y - 4.0, side)),
                Some(CiSegment {
                    x1,
                    x2,
                    clipped_low,
                    clipped_high,
                }),
            )
        } else {
            (None, None)
        };
        rows.push(ForestRow {
            id: study.id.clone(),
            y,
            square,
            ci,
            weight_pct: study.weight_pct,
            estimable: estimate.estimable,
        });
    }

    let total_y = first_row_y + result.per_study.len() as f64 * ROW_HEIGHT + 6.0;
    let diamond = if result.pooled.estimable {
        let cy = total_y - 4.0;
        let xl = x_of(
            result.pooled.ci_low.clamp(range.0, range.1),
            range,
            scale,
            plot_left,
            plot_right,
        );
        let xr = x_of(
            result.pooled.ci_high.clamp(range.0, range.1),
            range,
            scale,
            plot_left,
            plot_right,
        );
        let xc = x_of(
            result.pooled.point.clamp(range.0, range.1),
            range,
            scale,
            plot_left,
            plot_right,
        );
        Some([(xl, cy), (xc, cy - 5.0), (xr, cy), (xc, cy + 5.0)])
    } else {
        None
    };

    let axis_y = total_y + 18.0;
    let null_x = x_of(
        result.settings.measure.null_point(),
        range,
        scale,
        plot_left,
        plot_right,
    );
    let height = axis_y + 58.0;

    ForestLayout {
        width: spec.width,
        height,
        plot_left,
        plot_right,
        null_x,
        axis_y,
        rows,
        diamond,
        scale,
        range,
    }
}

fn tick_label(v: f64) -> String {
    if v == v.trunc() {
        format!("{v:.0}")
    } else {
        let mut s = format!("{v:.3}");
        while s.ends_with('0') {
            s.pop();
        }
        s
    }
}

fn arrowhead(out: &mut String, x: f64, y: f64, direction: f64) {
    let tip = x + 6.0 * direction;
    out.push_str(&format!(
        "<polygon points=\"{},{} {},{} {},{}\" fill=\"black\"/>\n",
        fmt_coord(tip),
        fmt_coord(y),
        fmt_coord(x),
        fmt_coord(y - 3.0),
        fmt_coord(x),
        fmt_coord(y + 3.0),
    ));
}

/// Render the forest plot for a pooled analysis of an outcome.
pub fn render_forest(result: &PooledResult, outcome: &Outcome, spec: &FigureSpec) -> String {
    let layout = forest_layout(result, spec);
    let fs = spec.font_size;
    let measure = result.settings.measure.label();
    let ci_pct = fmt_pct_int(result.settings.ci_level * 100.0);

    let mut out = String::new();
    svg_open(&mut out, layout.width, layout.height);

    // Header.
    text(
        &mut out,
        spec.margin,
        18.0,
        "start",
        fs + 1.0,
        &outcome.name,
    );
    let header_y = 34.0 + ROW_HEIGHT;
    let (g1, g2) = (&outcome.group_labels.0, &outcome.group_labels.1);
    text(&mut out, spec.margin, header_y, "start", fs, "Study");
    text(&mut out, 300.0, header_y, "end", fs, &format!("{g1} n/N"));
    text(&mut out, 390.0, header_y, "end", fs, &format!("{g2} n/N"));
    text(&mut out, 455.0, header_y, "end", fs, "Weight");
    text(
        &mut out,
        535.0,
        header_y,
        "end",
        fs,
        &format!("{measure} [{ci_pct}% CI]"),
    );

    // Null line behind the data rows.
    line(
        &mut out,
        layout.null_x,
        header_y + 6.0,
        layout.null_x,
        layout.axis_y,
        "stroke=\"black\" stroke-width=\"0.8\"",
    );

    // Study rows.
    for (row, study) in layout.rows.iter().zip(&result.per_study) {
        let estimate = &study.estimate;
        text(&mut out, spec.margin, row.y, "start", fs, &row.id);
        if let Some(data) = outcome.row_for(&row.id) {
            let t = &data.table;
            text(
                &mut out,
                300.0,
                row.y,
                "end",
                fs,
                &format!("{}/{}", t.events1(), t.total1()),
            );
            text(
                &mut out,
                390.0,
                row.y,
                "end",
                fs,
                &format!("{}/{}", t.events2(), t.total2()),
            );
        }
        if row.estimable {
            text(
                &mut out,
                455.0,
                row.y,
                "end",
                fs,
                &format!("{}%", fmt_fixed(row.weight_pct, 2)),
            );
            text(
                &mut out,
                535.0,
                row.y,
                "end",
                fs,
                &format!(
                    "{} [{}, {}]",
                    fmt_fixed(estimate.point, 2),
                    fmt_fixed(estimate.ci_low, 2),
                    fmt_fixed(estimate.ci_high, 2)
                ),
            );
        } else {
            text(&mut out, 535.0, row.y, "end", fs, "Not estimable");
        }
        if let Some(ci) = row.ci {
            let cy = row.y - 4.0;
            line(
                &mut out,
                ci.x1,
                cy,
                ci.x2,
                cy,
                "stroke=\"black\" stroke-width=\"1\"",
            );
            if ci.clipped_low {
                arrowhead(&mut out, ci.x1, cy, -1.0);
            }
            if ci.clipped_high {
                arrowhead(&mut out, ci.x2, cy, 1.0);
            }
        }
        if let Some((cx, cy, side)) = row.square {
            out.push_str(&format!(
                "<rect class=\"study-square\" x=\"{}\" y=\"{}\" width=\"{}\" height=\"{}\" fill=\"#2166ac\"/>\n",
                fmt_coord(cx - side / 2.0),
                fmt_coord(cy - side / 2.0),
                fmt_coord(side),
                fmt_coord(side),
            ));
        }
    }

    // Total row.
    let total_y = layout.axis_y - 18.0;
    text(
        &mut out,
        spec.margin,
        total_y,
        "start",
        fs,
        &format!("Total ({ci_pct}% CI)"),
    );
    let (mut e1, mut t1, mut e2, mut t2) = (0u64, 0u64, 0u64, 0u64);
    for row in &outcome.rows {
        e1 += u64::from(row.table.events1());
        t1 += u64::from(row.table.total1());
        e2 += u64::from(row.table.events2());
        t2 += u64::from(row.table.total2());
    }
    text(&mut out, 300.0, total_y, "end", fs, &format!("{e1}/{t1}"));
    text(&mut out, 390.0, total_y, "end", fs, &format!("{e2}/{t2}"));
    if result.pooled.estimable {
        let weight_total: f64 = result.per_study.iter().map(|s| s.weight_pct).sum();
        text(
            &mut out,
            455.0,
            total_y,
            "end",
            fs,
            &format!("{}%", fmt_fixed(weight_total, 2)),
        );
        text(
            &mut out,
            535.0,
            total_y,
            "end",
            fs,
            &format!(
                "{} [{}, {}]",
                fmt_fixed(result.pooled.point, 2),
                fmt_fixed(result.pooled.ci_low, 2),
                fmt_fixed(result.pooled.ci_high, 2)
            ),
        );
    } else {
        text(&mut out, 535.0, total_y, "end", fs, "Not estimable");
    }
    if let Some(diamond) = layout.diamond {
        let points: Vec<String> = diamond
            .iter()
            .map(|(x, y)| format!("{},{}", fmt_coord(*x), fmt_coord(*y)))
            .collect();
        out.push_str(&format!(
            "<polygon class=\"pooled-diamond\" points=\"{}\" fill=\"black\"/>\n",
            points.join(" ")
        ));
    }

    // Axis with end ticks and the null tick.
    line(
        &mut out,
        layout.plot_left,
        layout.axis_y,
        layout.plot_right,
        layout.axis_y,
        "stroke=\"black\" stroke-width=\"1\"",
    );
    let null_value = result.settings.measure.null_point();
    for v in [layout.range.0, null_value, layout.range.1] {
        let x = x_of(
            v,
            layout.range,
            layout.scale,
            layout.plot_left,
            layout.plot_right,
        );
        line(
            &mut out,
            x,
            layout.axis_y,
            x,
            layout.axis_y + 4.0,
            "stroke=\"black\" stroke-width=\"1\"",
        );
        text(
            &mut out,
            x,
            layout.axis_y + 14.0,
            "middle",
            fs - 1.0,
            &tick_label(v),
        );
    }

    // Graph end labels.
    text(
        &mut out,
        layout.plot_left,
        layout.axis_y + 28.0,
        "start",
        fs - 1.0,
        &outcome.graph_labels.0,
    );
    let right_label = escape(&outcome.graph_labels.1);
    out.push_str(&format!(
        "<text x=\"{}\" y=\"{}\" text-anchor=\"end\" font-size=\"{}\">{}</text>\n",
        fmt_coord(layout.plot_right),
        fmt_coord(layout.axis_y + 28.0),
        fmt_coord(fs - 1.0),
        right_label,
    ));

    // Statistics lines.
    let het = &result.heterogeneity;
    let mut het_text = format!(
        "Heterogeneity: Chi\u{b2}={}, df={}, p={}, I\u{b2}={}%",
        fmt_fixed(het.q, 2),
        het.df,
        fmt_fixed(het.p_value, 2),
        fmt_pct_int(het.i_squared),
    );
    if het.tau_squared > 0.0 {
        het_text.push_str(&format!("; Tau\u{b2}={}", fmt_fixed(het.tau_squared, 2)));
    }
    text(
        &mut out,
        spec.margin,
        layout.axis_y + 28.0,
        "start",
        fs - 1.0,
        &het_text,
    );
    let overall = if result.pooled.estimable {
        format!(
            "Test for overall effect: Z={}, p={}",
            fmt_fixed(result.z, 2),
            fmt_fixed(result.p_overall, 2)
        )
    } else {
        "Test for overall effect: not estimable".to_string()
    };
    text(
        &mut out,
        spec.margin,
        layout.axis_y + 44.0,
        "start",
        fs - 1.0,
        &overall,
    );

    svg_close(&mut out);
    out
}
