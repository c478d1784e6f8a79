//! Plain-text output for `analyze` and `report`.

use std::fmt::Write;

use revmeta_core::format::{fmt_fixed, fmt_pct_int};
use revmeta_core::{Outcome, PooledResult, Review};

/// The per-study table, pooled line, heterogeneity line and overall test.
pub fn analysis_table(outcome: &Outcome, result: &PooledResult) -> String {
    let mut out = String::new();
    let s = &result.settings;
    let measure = s.measure.label();
    let ci_pct = fmt_pct_int(s.ci_level * 100.0);
    writeln!(out, "Outcome: {}", outcome.name).unwrap();
    writeln!(
        out,
        "Method: {}, Model: {}, Measure: {}, CI: {ci_pct}%",
        s.method.label(),
        s.model.label(),
        measure,
    )
    .unwrap();
    writeln!(out).unwrap();
    let (g1, g2) = (&outcome.group_labels.0, &outcome.group_labels.1);
    writeln!(
        out,
        "{:<24}{:>14}{:>14}{:>10}  {measure} [{ci_pct}% CI]",
        "Study",
        format!("{g1} n/N"),
        format!("{g2} n/N"),
        "Weight",
    )
    .unwrap();
    for study in &result.per_study {
        let counts = outcome.row_for(&study.id);
        let (c1, c2) = match counts {
            Some(row) => (
                format!("{}/{}", row.table.events1(), row.table.total1()),
                format!("{}/{}", row.table.events2(), row.table.total2()),
            ),
            None => ("-".to_string(), "-".to_string()),
        };
        let effect = if study.estimate.estimable {
            format!(
                "{} [{}, {}]",
                fmt_fixed(study.estimate.point, 2),
                fmt_fixed(study.estimate.ci_low, 2),
                fmt_fixed(study.estimate.ci_high, 2)
            )
        } else {
            "Not estimable".to_string()
        };
        writeln!(
            out,
            "{:<24}{:>14}{:>14}{:>9}%  {effect}",
            study.id,
            c1,
            c2,
            fmt_fixed(study.weight_pct, 2),
        )
        .unwrap();
    }
    writeln!(out).unwrap();
    if result.pooled.estimable {
        writeln!(
            out,
            "Total ({} studies): {measure} = {}, {ci_pct}% CI [{}, {}]",
            result.k,
            fmt_fixed(result.pooled.point, 2),
            fmt_fixed(result.pooled.ci_low, 2),
            fmt_fixed(result.pooled.ci_high, 2),
        )
        .unwrap();
    } else {
        writeln!(out, "Total: not estimable").unwrap();
    }
    let het = &result.heterogeneity;
    let mut line = format!(
        "Heterogeneity: Chi\u{b2}={}, df={}, p={}, I\u{b2}={}%",
        fmt_fixed(het.q, 2),
        het.df,
        fmt_fixed(het.p_value, 2),
        fmt_pct_int(het.i_squared),
    );
    if het.tau_squared > 0.0 {
        line.push_str(&format!("; Tau\u{b2}={}", fmt_fixed(het.tau_squared, 2)));
    }
    writeln!(out, "{line}").unwrap();
    if result.pooled.estimable {
        writeln!(
            out,
            "Test for overall effect: Z={}, p={}{}",
            fmt_fixed(result.z, 2),
            fmt_fixed(result.p_overall, 2),
            if result.overall_degenerate {
                " (degenerate: zero standard error)"
            } else {
                ""
            },
        )
        .unwrap();
    }
    out
}

/// Whole-review summary for `report`.
pub fn review_summary(review: &Review) -> String {
    let mut out = String::new();
    writeln!(out, "Review: {}", review.title).unwrap();
    writeln!(
        out,
        "Created: {}  Modified: {}",
        review.created, review.modified
    )
    .unwrap();
    writeln!(
        out,
        "Studies: {}  Included refs: {}  Pending refs: {}",
        review.studies.len(),
        review.included_refs.len(),
        review.pending_refs.len(),
    )
    .unwrap();
    for study in &review.studies {
        writeln!(
            out,
            "  - {} ({}, {:?})",
            study.id, study.year, study.data_source
        )
        .unwrap();
    }
    if !review.rob_domains.is_empty() {
        let active = review.rob_domains.iter().filter(|d| d.active).count();
        writeln!(
            out,
            "Risk-of-bias domains: {} ({} active)",
            review.rob_domains.len(),
            active
        )
        .unwrap();
    }
    if let Some(flow) = &review.flow {
        writeln!(
            out,
            "Flow: {} identified (+{} other) -> {} screened -> {} assessed -> {} qualitative -> {} quantitative",
            flow.identified_db,
            flow.identified_other,
            flow.screened,
            flow.fulltext_assessed,
            flow.qualitative_included,
            flow.quantitative_included,
        )
        .unwrap();
    }
    for comparison in &review.comparisons {
        writeln!(out, "Comparison: {}", comparison.name).unwrap();
        for outcome in &comparison.outcomes {
            writeln!(
                out,
                "  Outcome: {} ({} vs {}; {} rows; {} {} {})",
                outcome.name,
                outcome.group_labels.0,
                outcome.group_labels.1,
                outcome.rows.len(),
                outcome.settings.method.label(),
                outcome.settings.model.label(),
                outcome.settings.measure.label(),
            )
            .unwrap();
            match outcome.analyze() {
                Ok(result) if result.pooled.estimable => {
                    writeln!(
                        out,
                        "    Pooled {} = {}, {}% CI [{}, {}]; I\u{b2}={}%",
                        outcome.settings.measure.label(),
                        fmt_fixed(result.pooled.point, 2),
                        fmt_pct_int(outcome.settings.ci_level * 100.0),
                        fmt_fixed(result.pooled.ci_low, 2),
                        fmt_fixed(result.pooled.ci_high, 2),
                        fmt_pct_int(result.heterogeneity.i_squared),
                    )
                    .unwrap();
                }
                Ok(_) => writeln!(out, "    Pooled estimate: not estimable").unwrap(),
                Err(e) => writeln!(out, "    (no analysis: {e})").unwrap(),
            }
        }
    }
    out
}
