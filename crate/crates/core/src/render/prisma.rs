//! PRISMA flow diagram: the four-phase template (identification, screening,
//! eligibility, inclusion) as connected boxes.

use crate::format::fmt_coord;
use crate::prisma::FlowDiagram;

use super::{escape, svg_close, svg_open, wrap_text, FigureSpec};

const BOX_W: f64 = 220.0;
const LINE_H: f64 = 13.0;
const PAD: f64 = 8.0;
const GAP: f64 = 26.0;
const WRAP_CHARS: usize = 32;

struct SvgBox {
    cx: f64,
    top: f64,
    lines: Vec<String>,
}

impl SvgBox {
    fn height(&self) -> f64 {
        self.lines.len() as f64 * LINE_H + 2.0 * PAD
    }

    fn bottom(&self) -> f64 {
        self.top + self.height()
    }

    fn emit(&self, out: &mut String, font_size: f64) {
        let x = self.cx - BOX_W / 2.0;
        out.push_str(&format!(
            "<rect x=\"{}\" y=\"{}\" width=\"{}\" height=\"{}\" fill=\"white\" stroke=\"black\"/>\n",
            fmt_coord(x),
            fmt_coord(self.top),
            fmt_coord(BOX_W),
            fmt_coord(self.height()),
        ));
        for (i, line) in self.lines.iter().enumerate() {
            out.push_str(&format!(
                "<text x=\"{}\" y=\"{}\" text-anchor=\"middle\" font-size=\"{}\">{}</text>\n",
                fmt_coord(self.cx),
                fmt_coord(self.top + PAD + (i as f64 + 0.8) * LINE_H - 3.0),
                fmt_coord(font_size),
                escape(line),
            ));
        }
    }
}

fn arrow(out: &mut String, x1: f64, y1: f64, x2: f64, y2: f64) {
    out.push_str(&format!(
        "<line x1=\"{}\" y1=\"{}\" x2=\"{}\" y2=\"{}\" stroke=\"black\" stroke-width=\"1\" marker-end=\"url(#arrow)\"/>\n",
        fmt_coord(x1),
        fmt_coord(y1),
        fmt_coord(x2),
        fmt_coord(y2),
    ));
}

/// `(n = X)` as a single unbreakable token for wrapping.
fn count(n: u32) -> String {
    format!("(n\u{a0}=\u{a0}{n})")
}

/// Render the study-flow diagram. Call `FlowDiagram::validate` first; this
/// renderer draws whatever counts it is given.
pub fn render_prisma(flow: &FlowDiagram, spec: &FigureSpec) -> String {
    let fs = spec.font_size - 1.0;
    let left_cx = 150.0;
    let right_cx = 420.0;
    let width = 560.0;

    // Wrap, then restore the protected spaces inside count groups.
    let wrap = |text: &str| -> Vec<String> {
        wrap_text(text, WRAP_CHARS)
            .into_iter()
            .map(|line| line.replace('\u{a0}', " "))
            .collect()
    };

    let identified_db = SvgBox {
        cx: left_cx,
        top: 16.0,
        lines: wrap(&format!(
            "Records identified through database searching {}",
            count(flow.identified_db)
        )),
    };
    let identified_other = SvgBox {
        cx: right_cx,
        top: 16.0,
        lines: wrap(&format!(
            "Additional records identified through other sources {}",
            count(flow.identified_other)
        )),
    };

    let row1_bottom = identified_db.bottom().max(identified_other.bottom());
    let dedup = SvgBox {
        cx: left_cx,
        top: row1_bottom + GAP,
        lines: wrap(&format!(
            "Records after duplicates removed {}",
            count(flow.after_dedup)
        )),
    };
    let screened = SvgBox {
        cx: left_cx,
        top: dedup.bottom() + GAP,
        lines: wrap(&format!("Records screened {}", count(flow.screened))),
    };
    let excluded = SvgBox {
        cx: right_cx,
        top: screened.top,
        lines: wrap(&format!(
            "Records excluded {}",
            count(flow.excluded_screening)
        )),
    };
    let fulltext = SvgBox {
        cx: left_cx,
        top: screened.bottom() + GAP,
        lines: wrap(&format!(
            "Full-text articles assessed for eligibility {}",
            count(flow.fulltext_assessed)
        )),
    };
    let mut excl_lines = wrap(&format!(
        "Full-text articles excluded, with reasons {}",
        count(flow.fulltext_excluded_total())
    ));
    for reason in &flow.fulltext_excluded {
        excl_lines.extend(wrap(&format!("- {} {}", reason.reason, count(reason.n))));
    }
    let fulltext_excluded = SvgBox {
        cx: right_cx,
        top: fulltext.top,
        lines: excl_lines,
    };
    let qualitative = SvgBox {
        cx: left_cx,
        top: fulltext.bottom().max(fulltext_excluded.bottom()) + GAP,
        lines: wrap(&format!(
            "Studies included in qualitative synthesis {}",
            count(flow.qualitative_included)
        )),
    };
    let quantitative = SvgBox {
        cx: left_cx,
        top: qualitative.bottom() + GAP,
        lines: wrap(&format!(
            "Studies included in quantitative synthesis (meta-analysis) {}",
            count(flow.quantitative_included)
        )),
    };

    let height = quantitative.bottom() + 20.0;
    let mut out = String::new();
    svg_open(&mut out, width, height);
    out.push_str(
        "<defs><marker id=\"arrow\" viewBox=\"0 0 8 8\" refX=\"7\" refY=\"4\" markerWidth=\"7\" \
         markerHeight=\"7\" orient=\"auto\"><path d=\"M0,0 L8,4 L0,8 z\" fill=\"black\"/></marker></defs>\n",
    );

    for b in [
        &identified_db,
        &identified_other,
        &dedup,
        &screened,
        &excluded,
        &fulltext,
        &fulltext_excluded,
        &qualitative,
        &quantitative,
    ] {
        b.emit(&mut out, fs);
    }

    // Identification converges on the deduplicated pool.
    arrow(
        &mut out,
        left_cx,
        identified_db.bottom(),
        left_cx,
        dedup.top,
    );
    arrow(
        &mut out,
        right_cx,
        identified_other.bottom(),
        left_cx + BOX_W / 2.0 + 4.0,
        dedup.top + dedup.height() / 2.0,
    );
    arrow(&mut out, left_cx, dedup.bottom(), left_cx, screened.top);
    arrow(
        &mut out,
        left_cx + BOX_W / 2.0,
        screened.top + screened.height() / 2.0,
        right_cx - BOX_W / 2.0 - 2.0,
        excluded.top + excluded.height() / 2.0,
    );
    arrow(&mut out, left_cx, screened.bottom(), left_cx, fulltext.top);
    arrow(
        &mut out,
        left_cx + BOX_W / 2.0,
        fulltext.top + fulltext.height() / 2.0,
        right_cx - BOX_W / 2.0 - 2.0,
        fulltext.top + fulltext.height() / 2.0,
    );
    arrow(
        &mut out,
        left_cx,
        fulltext.bottom(),
        left_cx,
        qualitative.top,
    );
    arrow(
        &mut out,
        left_cx,
        qualitative.bottom(),
        left_cx,
        quantitative.top,
    );

    svg_close(&mut out);
    out
}
