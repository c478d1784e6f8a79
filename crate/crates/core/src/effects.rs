//! Per-study effect sizes from a 2x2 table: OR, RR, RD and Peto OR.
//!
//! Cell layout for one study, group 1 first (experimental / first group
//! label), group 2 second (control / second label):
//!
//! ```text
//!            event   no event   total
//! group 1      a        b        n1
//! group 2      c        d        n2
//! ```
//!
//! Zero cells: when any single cell is zero, 0.5 is added to all four cells
//! before OR/RR computation. Tables with zero events in both arms, or all
//! events in both arms, carry no information about a ratio measure and are
//! flagged non-estimable for OR/RR. RD needs no correction.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::stats;

/// Effect measure for a dichotomous outcome.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Measure {
    OddsRatio,
    RiskRatio,
    RiskDifference,
}

impl Measure {
    /// OR and RR are analysed on the log scale; RD on the natural scale.
    pub fn is_log_scale(self) -> bool {
        !matches!(self, Measure::RiskDifference)
    }

    /// Null value on the natural scale (1 for ratios, 0 for differences).
    pub fn null_point(self) -> f64 {
        if self.is_log_scale() {
            1.0
        } else {
            0.0
        }
    }

    pub fn label(self) -> &'static str {
        match self {
            Measure::OddsRatio => "OR",
            Measure::RiskRatio => "RR",
            Measure::RiskDifference => "RD",
        }
    }
}

/// One study's dichotomous outcome counts for two groups.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "RawTable")]
pub struct TwoByTwoTable {
    events1: u32,
    total1: u32,
    events2: u32,
    total2: u32,
}

#[derive(Deserialize)]
struct RawTable {
    events1: u32,
    total1: u32,
    events2: u32,
    total2: u32,
}

impl TryFrom<RawTable> for TwoByTwoTable {
    type Error = Error;

    fn try_from(raw: RawTable) -> Result<Self> {
        TwoByTwoTable::new(raw.events1, raw.total1, raw.events2, raw.total2)
    }
}

impl TwoByTwoTable {
    pub fn new(events1: u32, total1: u32, events2: u32, total2: u32) -> Result<Self> {
        if total1 == 0 || total2 == 0 {
            return Err(Error::Validation(format!(
                "group totals must be at least 1 (got {total1} and {total2})"
            )));
        }
        if events1 > total1 || events2 > total2 {
            return Err(Error::Validation(format!(
                "events cannot exceed totals ({events1}/{total1}, {events2}/{total2})"
            )));
        }
        Ok(Self {
            events1,
            total1,
            events2,
            total2,
        })
    }

    pub fn events1(&self) -> u32 {
        self.events1
    }
    pub fn total1(&self) -> u32 {
        self.total1
    }
    pub fn events2(&self) -> u32 {
        self.events2
    }
    pub fn total2(&self) -> u32 {
        self.total2
    }

    pub fn a(&self) -> f64 {
        f64::from(self.events1)
    }
    pub fn b(&self) -> f64 {
        f64::from(self.total1 - self.events1)
    }
    pub fn c(&self) -> f64 {
        f64::from(self.events2)
    }
    pub fn d(&self) -> f64 {
        f64::from(self.total2 - self.events2)
    }
    pub fn n1(&self) -> f64 {
        f64::from(self.total1)
    }
    pub fn n2(&self) -> f64 {
        f64::from(self.total2)
    }
    pub fn n(&self) -> f64 {
        f64::from(self.total1) + f64::from(self.total2)
    }

    /// Zero events in both arms: no information about a ratio measure.
    pub fn is_double_zero(&self) -> bool {
        self.events1 == 0 && self.events2 == 0
    }

    /// All events in both arms: likewise uninformative for OR/RR.
    pub fn is_double_full(&self) -> bool {
        self.events1 == self.total1 && self.events2 == self.total2
    }

    /// Whether OR/RR can be estimated from this table at all.
    pub fn ratio_estimable(&self) -> bool {
        !self.is_double_zero() && !self.is_double_full()
    }

    /// The same table with group 1 and group 2 exchanged.
    pub fn swapped(&self) -> Self {
        Self {
            events1: self.events2,
            total1: self.total2,
            events2: self.events1,
            total2: self.total1,
        }
    }
}

/// Working cells after (possible) continuity correction. Fractional because
/// the correction adds 0.5.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Cells {
    pub a: f64,
    pub b: f64,
    pub c: f64,
    pub d: f64,
}

impl Cells {
    pub fn n1(&self) -> f64 {
        self.a + self.b
    }
    pub fn n2(&self) -> f64 {
        self.c + self.d
    }
    pub fn n(&self) -> f64 {
        self.a + self.b + self.c + self.d
    }
}

/// Apply the 0.5 zero-cell correction where needed.
///
/// Returns the working cells and whether a correction was applied. Double-zero
/// and double-full tables are returned unchanged; they are excluded from OR/RR
/// estimation rather than corrected.
pub fn continuity_correct(table: &TwoByTwoTable) -> (Cells, bool) {
    let raw = Cells {
        a: table.a(),
        b: table.b(),
        c: table.c(),
        d: table.d(),
    };
    let any_zero = raw.a == 0.0 || raw.b == 0.0 || raw.c == 0.0 || raw.d == 0.0;
    if any_zero && table.ratio_estimable() {
        (
            Cells {
                a: raw.a + 0.5,
                b: raw.b + 0.5,
                c: raw.c + 0.5,
                d: raw.d + 0.5,
            },
            true,
        )
    } else {
        (raw, false)
    }
}

/// A point estimate with its analysis-scale value, standard error and CI.
///
/// For OR/RR the analysis value is the log of the point; for RD the two
/// coincide. Non-estimable results carry NaN values and `estimable == false`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EffectEstimate {
    pub measure: Measure,
    /// Natural-scale point (e.g. the odds ratio itself).
    pub point: f64,
    /// Analysis-scale value (log of the point for OR/RR, the point for RD).
    pub analysis_value: f64,
    /// Standard error of `analysis_value`.
    pub se: f64,
    /// Confidence bounds on the natural scale.
    pub ci_low: f64,
    pub ci_high: f64,
    /// Whether the 0.5 zero-cell correction was applied.
    pub corrected: bool,
    pub estimable: bool,
}

impl EffectEstimate {
    pub fn non_estimable(measure: Measure) -> Self {
        Self {
            measure,
            point: f64::NAN,
            analysis_value: f64::NAN,
            se: f64::NAN,
            ci_low: f64::NAN,
            ci_high: f64::NAN,
            corrected: false,
            estimable: false,
        }
    }

    /// Build an estimate from its analysis-scale value and standard error,
    /// deriving the natural-scale point and CI. RD confidence bounds are
    /// clamped to [-1, 1].
    pub fn from_analysis(
        measure: Measure,
        analysis_value: f64,
        se: f64,
        ci_level: f64,
        corrected: bool,
    ) -> Self {
        let z = stats::z_for_ci(ci_level);
        let (lo, hi) = (analysis_value - z * se, analysis_value + z * se);
        let (point, ci_low, ci_high) = if measure.is_log_scale() {
            (analysis_value.exp(), lo.exp(), hi.exp())
        } else {
            (analysis_value, lo.max(-1.0), hi.min(1.0))
        };
        Self {
            measure,
            point,
            analysis_value,
            se,
            ci_low,
            ci_high,
            corrected,
            estimable: true,
        }
    }
}

/// Odds ratio with Woolf standard error on the log scale.
pub fn odds_ratio(table: &TwoByTwoTable, ci_level: f64) -> EffectEstimate {
    if !table.ratio_estimable() {
        return EffectEstimate::non_estimable(Measure::OddsRatio);
    }
    let (cells, corrected) = continuity_correct(table);
    let ln_or = ((cells.a * cells.d) / (cells.b * cells.c)).ln();
    let se = (1.0 / cells.a + 1.0 / cells.b + 1.0 / cells.c + 1.0 / cells.d).sqrt();
    EffectEstimate::from_analysis(Measure::OddsRatio, ln_or, se, ci_level, corrected)
}

/// Risk ratio with its log-scale standard error.
pub fn risk_ratio(table: &TwoByTwoTable, ci_level: f64) -> EffectEstimate {
    if !table.ratio_estimable() {
        return EffectEstimate::non_estimable(Measure::RiskRatio);
    }
    let (cells, corrected) = continuity_correct(table);
    let (n1, n2) = (cells.n1(), cells.n2());
    let ln_rr = ((cells.a / n1) / (cells.c / n2)).ln();
    let se = (1.0 / cells.a - 1.0 / n1 + 1.0 / cells.c - 1.0 / n2).sqrt();
    EffectEstimate::from_analysis(Measure::RiskRatio, ln_rr, se, ci_level, corrected)
}

/// Risk difference; always estimable, computed from the raw cells.
pub fn risk_difference(table: &TwoByTwoTable, ci_level: f64) -> EffectEstimate {
    let (p1, p2) = (table.a() / table.n1(), table.c() / table.n2());
    let rd = p1 - p2;
    let se = (p1 * (1.0 - p1) / table.n1() + p2 * (1.0 - p2) / table.n2()).sqrt();
    EffectEstimate::from_analysis(Measure::RiskDifference, rd, se, ci_level, false)
}

/// Dispatch on the configured measure.
pub fn estimate(measure: Measure, table: &TwoByTwoTable, ci_level: f64) -> EffectEstimate {
    match measure {
        Measure::OddsRatio => odds_ratio(table, ci_level),
        Measure::RiskRatio => risk_ratio(table, ci_level),
        Measure::RiskDifference => risk_difference(table, ci_level),
    }
}

/// Observed-minus-expected and hypergeometric variance for Peto's method.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PetoComponents {
    pub o_minus_e: f64,
    pub v: f64,
}

/// Peto components from the raw table (no continuity correction; the method
/// handles zero cells natively).
pub fn peto_components(table: &TwoByTwoTable) -> PetoComponents {
    let (n1, n2, n) = (table.n1(), table.n2(), table.n());
    let m1 = table.a() + table.c();
    let m2 = table.b() + table.d();
    let o_minus_e = table.a() - n1 * m1 / n;
    let v = if n > 1.0 {
        n1 * n2 * m1 * m2 / (n * n * (n - 1.0))
    } else {
        0.0
    };
    PetoComponents { o_minus_e, v }
}

/// Peto odds ratio: ln OR = (O-E)/V, se = 1/sqrt(V).
pub fn peto_odds_ratio(table: &TwoByTwoTable, ci_level: f64) -> EffectEstimate {
    let PetoComponents { o_minus_e, v } = peto_components(table);
    if v <= 0.0 {
        return EffectEstimate::non_estimable(Measure::OddsRatio);
    }
    EffectEstimate::from_analysis(
        Measure::OddsRatio,
        o_minus_e / v,
        1.0 / v.sqrt(),
        ci_level,
        false,
    )
}
