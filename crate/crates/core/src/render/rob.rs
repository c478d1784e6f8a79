//! Risk-of-bias summary: a study x domain grid of colored circles with
//! +/?/- glyphs, rotated domain questions as column headers.

use crate::format::fmt_coord;
use crate::rob::{JudgmentLevel, RobMatrix};

use super::{escape, svg_close, svg_open, text, FigureSpec};

const CELL: f64 = 26.0;
const RADIUS: f64 = 9.0;
const LABEL_COL_W: f64 = 150.0;

/// Render the summary grid. An empty matrix produces a header-only figure.
pub fn render_rob(matrix: &RobMatrix, spec: &FigureSpec) -> String {
    let fs = spec.font_size;
    let char_w = fs * 0.62;
    let longest = matrix
        .domains
        .iter()
        .map(|d| d.question.chars().count())
        .max()
        .unwrap_or(0) as f64;
    // Space consumed by labels rotated 60 degrees from horizontal.
    let label_h = (longest * char_w) * (60f64.to_radians()).sin() + 18.0;
    let label_w = (longest * char_w) * (60f64.to_radians()).cos() + 24.0;
    let grid_top = 24.0 + label_h;
    let grid_left = LABEL_COL_W;
    let width = (grid_left + matrix.domains.len() as f64 * CELL + label_w).max(320.0);
    let height = grid_top + matrix.studies.len() as f64 * CELL + 60.0;

    let mut out = String::new();
    svg_open(&mut out, width, height);
    text(
        &mut out,
        12.0,
        16.0,
        "start",
        fs + 1.0,
        "Risk of bias summary",
    );

    // Rotated domain questions above their columns.
    for (j, domain) in matrix.domains.iter().enumerate() {
        let x = grid_left + (j as f64 + 0.5) * CELL;
        let y = grid_top - 8.0;
        out.push_str(&format!(
            "<text x=\"{x}\" y=\"{y}\" text-anchor=\"start\" font-size=\"{s}\" \
             transform=\"rotate(-60 {x} {y})\">{q}</text>\n",
            x = fmt_coord(x),
            y = fmt_coord(y),
            s = fmt_coord(fs - 1.0),
            q = escape(&domain.question),
        ));
    }

    for (i, study) in matrix.studies.iter().enumerate() {
        let cy = grid_top + (i as f64 + 0.5) * CELL;
        text(&mut out, grid_left - 8.0, cy + 4.0, "end", fs, study);
        for (j, cell) in matrix.cells[i].iter().enumerate() {
            let cx = grid_left + (j as f64 + 0.5) * CELL;
            // Cell frame.
            out.push_str(&format!(
                "<rect x=\"{}\" y=\"{}\" width=\"{}\" height=\"{}\" fill=\"white\" stroke=\"#999999\" stroke-width=\"0.5\"/>\n",
                fmt_coord(grid_left + j as f64 * CELL),
                fmt_coord(grid_top + i as f64 * CELL),
                fmt_coord(CELL),
                fmt_coord(CELL),
            ));
            if let Some(level) = cell {
                let color = match level {
                    JudgmentLevel::Low => &spec.palette.low,
                    JudgmentLevel::Unclear => &spec.palette.unclear,
                    JudgmentLevel::High => &spec.palette.high,
                };
                out.push_str(&format!(
                    "<circle class=\"rob-cell\" cx=\"{}\" cy=\"{}\" r=\"{}\" fill=\"{}\" stroke=\"black\" stroke-width=\"0.6\"/>\n",
                    fmt_coord(cx),
                    fmt_coord(cy),
                    fmt_coord(RADIUS),
                    color,
                ));
                text(&mut out, cx, cy + 4.0, "middle", fs, level.glyph());
            }
        }
    }

    // Legend.
    let legend_y = grid_top + matrix.studies.len() as f64 * CELL + 28.0;
    let entries = [
        (JudgmentLevel::Low, "Low risk", &spec.palette.low),
        (JudgmentLevel::Unclear, "Unclear", &spec.palette.unclear),
        (JudgmentLevel::High, "High risk", &spec.palette.high),
    ];
    for (i, (level, label, color)) in entries.into_iter().enumerate() {
        let x = 20.0 + i as f64 * 110.0;
        out.push_str(&format!(
            "<circle cx=\"{}\" cy=\"{}\" r=\"{}\" fill=\"{}\" stroke=\"black\" stroke-width=\"0.6\"/>\n",
            fmt_coord(x),
            fmt_coord(legend_y),
            fmt_coord(7.0),
            color,
        ));
        text(
            &mut out,
            x,
            legend_y + 3.5,
            "middle",
            fs - 1.0,
            level.glyph(),
        );
        text(&mut out, x + 12.0, legend_y + 3.5, "start", fs - 1.0, label);
    }

    svg_close(&mut out);
    out
}
