//! Combining per-study estimates into one pooled effect.
//!
//! Fixed-effect pooling by inverse variance, Mantel-Haenszel or Peto, and
//! DerSimonian-Laird random effects on top of either fixed method's Q.
//!
//! Summation runs in a value-canonical order (studies sorted by their data,
//! not their position or label), so pooled numbers are bit-identical under
//! permutation or relabelling of the input.

use serde::{Deserialize, Serialize};

use crate::effects::{
    self, continuity_correct, estimate, peto_components, peto_odds_ratio, EffectEstimate, Measure,
    TwoByTwoTable,
};
use crate::error::{Error, Result};
use crate::stats;

/// Fixed-effect pooling method.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    MantelHaenszel,
    InverseVariance,
    Peto,
}

impl Method {
    pub fn label(self) -> &'static str {
        match self {
            Method::MantelHaenszel => "Mantel-Haenszel",
            Method::InverseVariance => "Inverse Variance",
            Method::Peto => "Peto",
        }
    }
}

/// Analysis model: one shared true effect, or study-specific effects.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Model {
    Fixed,
    Random,
}

impl Model {
    pub fn label(self) -> &'static str {
        match self {
            Model::Fixed => "Fixed",
            Model::Random => "Random",
        }
    }
}

/// Which totals rows an analysis table displays.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Totals {
    None,
    TotalsOnly,
    #[default]
    TotalsAndSubtotals,
}

/// Analysis configuration attached to an outcome.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AnalysisSettings {
    pub method: Method,
    pub model: Model,
    pub measure: Measure,
    #[serde(default = "default_ci_level")]
    pub ci_level: f64,
    #[serde(default)]
    pub totals: Totals,
}

fn default_ci_level() -> f64 {
    0.95
}

impl Default for AnalysisSettings {
    fn default() -> Self {
        Self {
            method: Method::MantelHaenszel,
            model: Model::Fixed,
            measure: Measure::OddsRatio,
            ci_level: 0.95,
            totals: Totals::TotalsAndSubtotals,
        }
    }
}

impl AnalysisSettings {
    pub fn validate(&self) -> Result<()> {
        if !(self.ci_level > 0.0 && self.ci_level < 1.0) {
            return Err(Error::Validation(format!(
                "confidence level must be in (0,1), got {}",
                self.ci_level
            )));
        }
        if self.method == Method::Peto
            && (self.measure != Measure::OddsRatio || self.model != Model::Fixed)
        {
            return Err(Error::Validation(
                "Peto's method requires the odds ratio measure and the fixed-effect model"
                    .to_string(),
            ));
        }
        Ok(())
    }
}

/// A study identifier with its effect estimate (inverse-variance input).
#[derive(Debug, Clone, PartialEq)]
pub struct StudyEstimate {
    pub id: String,
    pub estimate: EffectEstimate,
}

/// A study identifier with its 2x2 table (count-based methods input).
#[derive(Debug, Clone, PartialEq)]
pub struct StudyTable {
    pub id: String,
    pub table: TwoByTwoTable,
}

/// Cochran's Q block with derived statistics.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Heterogeneity {
    /// Cochran's Q (the chi-square homogeneity statistic).
    pub q: f64,
    pub df: usize,
    /// Upper-tail chi-square probability of Q; 1.0 when df == 0.
    pub p_value: f64,
    /// Percentage in [0, 100]: max(0, (Q - df)/Q) * 100.
    pub i_squared: f64,
    /// Between-study variance; 0 under a fixed-effect model.
    pub tau_squared: f64,
}

/// Conventional p threshold below which reports flag heterogeneity.
pub const HETEROGENEITY_P_THRESHOLD: f64 = 0.1;

impl Heterogeneity {
    /// Whether reports should flag significant heterogeneity at the given
    /// threshold (conventionally [`HETEROGENEITY_P_THRESHOLD`]).
    pub fn flagged(&self, threshold: f64) -> bool {
        self.df > 0 && self.p_value < threshold
    }

    fn none() -> Self {
        Self {
            q: 0.0,
            df: 0,
            p_value: 1.0,
            i_squared: 0.0,
            tau_squared: 0.0,
        }
    }

    fn from_q(q: f64, contributing: usize) -> Self {
        if contributing <= 1 {
            return Self::none();
        }
        let df = contributing - 1;
        let i_squared = if q > 0.0 {
            (((q - df as f64) / q) * 100.0).max(0.0)
        } else {
            0.0
        };
        Self {
            q,
            df,
            p_value: stats::chi_square_sf(q, df as f64),
            i_squared,
            tau_squared: 0.0,
        }
    }
}

/// One display row of a pooled analysis.
#[derive(Debug, Clone, PartialEq)]
pub struct PooledStudy {
    pub id: String,
    pub estimate: EffectEstimate,
    /// Percentage of the total weight; 0 for studies excluded from the sums.
    pub weight_pct: f64,
}

/// A combined estimate with weights and heterogeneity for one analysis.
#[derive(Debug, Clone, PartialEq)]
pub struct PooledResult {
    pub settings: AnalysisSettings,
    pub per_study: Vec<PooledStudy>,
    pub pooled: EffectEstimate,
    pub heterogeneity: Heterogeneity,
    /// Overall-effect statistic of the pooled estimate (null at 0 on the
    /// analysis scale, i.e. 1 on the ratio scale).
    pub z: f64,
    pub p_overall: f64,
    /// Set when the overall test was degenerate (zero standard error).
    pub overall_degenerate: bool,
    /// Number of studies contributing to the pooled estimate.
    pub k: usize,
}

/// Result of the overall-effect z test.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OverallEffect {
    pub z: f64,
    pub p: f64,
    pub degenerate: bool,
}

/// z = estimate / se on the analysis scale; two-sided normal p.
pub fn overall_effect_test(pooled: &EffectEstimate) -> OverallEffect {
    if !pooled.estimable {
        return OverallEffect {
            z: f64::NAN,
            p: f64::NAN,
            degenerate: false,
        };
    }
    if pooled.se == 0.0 {
        let z = if pooled.analysis_value == 0.0 {
            0.0
        } else {
            f64::INFINITY.copysign(pooled.analysis_value)
        };
        return OverallEffect {
            z,
            p: 0.0,
            degenerate: true,
        };
    }
    let z = pooled.analysis_value / pooled.se;
    OverallEffect {
        z,
        p: stats::two_sided_p(z),
        degenerate: false,
    }
}

/// Whether an estimate can enter inverse-variance weighted sums.
fn usable(e: &EffectEstimate) -> bool {
    e.estimable && e.analysis_value.is_finite() && e.se.is_finite() && e.se > 0.0
}

/// Indices of `items` sorted by a float key tuple, making summation order
/// independent of input order.
fn canonical_order(keys: &[(f64, f64)]) -> Vec<usize> {
    let mut idx: Vec<usize> = (0..keys.len()).collect();
    idx.sort_by(|&i, &j| {
        keys[i]
            .0
            .total_cmp(&keys[j].0)
            .then_with(|| keys[i].1.total_cmp(&keys[j].1))
    });
    idx
}

fn canonical_table_order(tables: &[&TwoByTwoTable]) -> Vec<usize> {
    let mut idx: Vec<usize> = (0..tables.len()).collect();
    idx.sort_by_key(|&i| {
        let t = tables[i];
        (t.events1(), t.total1(), t.events2(), t.total2())
    });
    idx
}

fn finish(
    settings: AnalysisSettings,
    per_study: Vec<PooledStudy>,
    pooled: EffectEstimate,
    heterogeneity: Heterogeneity,
    k: usize,
) -> PooledResult {
    let overall = overall_effect_test(&pooled);
    PooledResult {
        settings,
        per_study,
        pooled,
        heterogeneity,
        z: overall.z,
        p_overall: overall.p,
        overall_degenerate: overall.degenerate,
        k,
    }
}

fn non_estimable_result(settings: AnalysisSettings, per_study: Vec<PooledStudy>) -> PooledResult {
    PooledResult {
        pooled: EffectEstimate::non_estimable(settings.measure),
        heterogeneity: Heterogeneity::none(),
        z: f64::NAN,
        p_overall: f64::NAN,
        overall_degenerate: false,
        k: 0,
        settings,
        per_study,
    }
}

/// Fixed-effect inverse-variance pooling: w = 1/se^2.
pub fn pool_iv_fixed(studies: &[StudyEstimate], ci_level: f64) -> PooledResult {
    let measure = studies
        .first()
        .map(|s| s.estimate.measure)
        .unwrap_or(Measure::OddsRatio);
    debug_assert!(studies.iter().all(|s| s.estimate.measure == measure));
    let settings = AnalysisSettings {
        method: Method::InverseVariance,
        model: Model::Fixed,
        measure,
        ci_level,
        ..AnalysisSettings::default()
    };

    let included: Vec<usize> = (0..studies.len())
        .filter(|&i| usable(&studies[i].estimate))
        .collect();
    if included.is_empty() {
        let rows = studies
            .iter()
            .map(|s| PooledStudy {
                id: s.id.clone(),
                estimate: s.estimate,
                weight_pct: 0.0,
            })
            .collect();
        return non_estimable_result(settings, rows);
    }

    let keys: Vec<(f64, f64)> = included
        .iter()
        .map(|&i| (studies[i].estimate.analysis_value, studies[i].estimate.se))
        .collect();
    let order = canonical_order(&keys);

    let weight_of = |i: usize| {
        let se = studies[i].estimate.se;
        1.0 / (se * se)
    };
    let mut sum_w = 0.0;
    let mut sum_wt = 0.0;
    for &o in &order {
        let i = included[o];
        let w = weight_of(i);
        sum_w += w;
        sum_wt += w * studies[i].estimate.analysis_value;
    }

    let pooled = if included.len() == 1 {
        // Single-study identity: the pooled estimate is that study's, exactly.
        let e = studies[included[0]].estimate;
        EffectEstimate::from_analysis(measure, e.analysis_value, e.se, ci_level, e.corrected)
    } else {
        EffectEstimate::from_analysis(
            measure,
            sum_wt / sum_w,
            (1.0 / sum_w).sqrt(),
            ci_level,
            false,
        )
    };

    let per_study = studies
        .iter()
        .enumerate()
        .map(|(i, s)| PooledStudy {
            id: s.id.clone(),
            estimate: s.estimate,
            weight_pct: if usable(&s.estimate) {
                weight_of(i) / sum_w * 100.0
            } else {
                0.0
            },
        })
        .collect();

    let het = heterogeneity(studies, pooled.analysis_value);
    finish(settings, per_study, pooled, het, included.len())
}

/// Fixed-effect Mantel-Haenszel pooling for OR, RR or RD.
///
/// Variances: Robins-Breslow-Greenland for ln OR, Greenland-Robins for
/// ln RR and RD. Zero-cell studies enter the sums with the same 0.5
/// correction used for their per-study estimates; double-zero/double-full
/// studies are excluded for the ratio measures.
pub fn pool_mh_fixed(tables: &[StudyTable], measure: Measure, ci_level: f64) -> PooledResult {
    let settings = AnalysisSettings {
        method: Method::MantelHaenszel,
        model: Model::Fixed,
        measure,
        ci_level,
        ..AnalysisSettings::default()
    };

    let estimates: Vec<EffectEstimate> = tables
        .iter()
        .map(|s| estimate(measure, &s.table, ci_level))
        .collect();

    let included: Vec<usize> = (0..tables.len())
        .filter(|&i| match measure {
            Measure::RiskDifference => true,
            _ => tables[i].table.ratio_estimable(),
        })
        .collect();
    if included.is_empty() {
        let rows = tables
            .iter()
            .zip(&estimates)
            .map(|(s, e)| PooledStudy {
                id: s.id.clone(),
                estimate: *e,
                weight_pct: 0.0,
            })
            .collect();
        return non_estimable_result(settings, rows);
    }

    let refs: Vec<&TwoByTwoTable> = included.iter().map(|&i| &tables[i].table).collect();
    let order = canonical_table_order(&refs);
    let ordered: Vec<usize> = order.iter().map(|&o| included[o]).collect();

    // MH per-study weight on the natural scale of each measure.
    let mh_weight = |t: &TwoByTwoTable| -> f64 {
        match measure {
            Measure::OddsRatio => {
                let (c, _) = continuity_correct(t);
                c.b * c.c / c.n()
            }
            Measure::RiskRatio => {
                let (c, _) = continuity_correct(t);
                c.c * c.n1() / c.n()
            }
            Measure::RiskDifference => t.n1() * t.n2() / t.n(),
        }
    };

    let (analysis_value, se) = match measure {
        Measure::OddsRatio => {
            let mut r_sum = 0.0;
            let mut s_sum = 0.0;
            let mut sum_pr = 0.0;
            let mut sum_ps_qr = 0.0;
            let mut sum_qs = 0.0;
            for &i in &ordered {
                let (c, _) = continuity_correct(&tables[i].table);
                let n = c.n();
                let r = c.a * c.d / n;
                let s = c.b * c.c / n;
                let p = (c.a + c.d) / n;
                let q = (c.b + c.c) / n;
                r_sum += r;
                s_sum += s;
                sum_pr += p * r;
                sum_ps_qr += p * s + q * r;
                sum_qs += q * s;
            }
            let var = sum_pr / (2.0 * r_sum * r_sum)
                + sum_ps_qr / (2.0 * r_sum * s_sum)
                + sum_qs / (2.0 * s_sum * s_sum);
            ((r_sum / s_sum).ln(), var.sqrt())
        }
        Measure::RiskRatio => {
            let mut r_sum = 0.0;
            let mut s_sum = 0.0;
            let mut num = 0.0;
            for &i in &ordered {
                let (c, _) = continuity_correct(&tables[i].table);
                let n = c.n();
                r_sum += c.a * c.n2() / n;
                s_sum += c.c * c.n1() / n;
                num += (c.n1() * c.n2() * (c.a + c.c) - c.a * c.c * n) / (n * n);
            }
            let var = num / (r_sum * s_sum);
            ((r_sum / s_sum).ln(), var.sqrt())
        }
        Measure::RiskDifference => {
            let mut w_sum = 0.0;
            let mut wrd_sum = 0.0;
            let mut num = 0.0;
            for &i in &ordered {
                let t = &tables[i].table;
                let w = t.n1() * t.n2() / t.n();
                w_sum += w;
                wrd_sum += w * (t.a() / t.n1() - t.c() / t.n2());
                num += (t.a() * t.b() * t.n2().powi(3) + t.c() * t.d() * t.n1().powi(3))
                    / (t.n1() * t.n2() * t.n() * t.n());
            }
            (wrd_sum / w_sum, (num / (w_sum * w_sum)).sqrt())
        }
    };

    let pooled = if included.len() == 1 {
        // Single-study identity, bit-exact.
        let e = estimates[included[0]];
        EffectEstimate::from_analysis(measure, e.analysis_value, e.se, ci_level, e.corrected)
    } else {
        EffectEstimate::from_analysis(measure, analysis_value, se, ci_level, false)
    };

    let mut weight_total = 0.0;
    for &i in &ordered {
        weight_total += mh_weight(&tables[i].table);
    }
    let per_study = tables
        .iter()
        .zip(&estimates)
        .enumerate()
        .map(|(i, (s, e))| PooledStudy {
            id: s.id.clone(),
            estimate: *e,
            weight_pct: if included.contains(&i) {
                mh_weight(&s.table) / weight_total * 100.0
            } else {
                0.0
            },
        })
        .collect();

    let for_q: Vec<StudyEstimate> = tables
        .iter()
        .zip(&estimates)
        .map(|(s, e)| StudyEstimate {
            id: s.id.clone(),
            estimate: *e,
        })
        .collect();
    let het = heterogeneity(&for_q, pooled.analysis_value);
    finish(settings, per_study, pooled, het, included.len())
}

/// Fixed-effect Peto pooling: ln OR = sum(O-E) / sum(V).
pub fn pool_peto_fixed(tables: &[StudyTable], ci_level: f64) -> PooledResult {
    let settings = AnalysisSettings {
        method: Method::Peto,
        model: Model::Fixed,
        measure: Measure::OddsRatio,
        ci_level,
        ..AnalysisSettings::default()
    };

    let comps: Vec<effects::PetoComponents> =
        tables.iter().map(|s| peto_components(&s.table)).collect();
    let estimates: Vec<EffectEstimate> = tables
        .iter()
        .map(|s| peto_odds_ratio(&s.table, ci_level))
        .collect();

    let included: Vec<usize> = (0..tables.len()).filter(|&i| comps[i].v > 0.0).collect();
    if included.is_empty() {
        let rows = tables
            .iter()
            .zip(&estimates)
            .map(|(s, e)| PooledStudy {
                id: s.id.clone(),
                estimate: *e,
                weight_pct: 0.0,
            })
            .collect();
        return non_estimable_result(settings, rows);
    }

    let refs: Vec<&TwoByTwoTable> = included.iter().map(|&i| &tables[i].table).collect();
    let order = canonical_table_order(&refs);
    let mut sum_oe = 0.0;
    let mut sum_v = 0.0;
    for &o in &order {
        let i = included[o];
        sum_oe += comps[i].o_minus_e;
        sum_v += comps[i].v;
    }

    let pooled = EffectEstimate::from_analysis(
        Measure::OddsRatio,
        sum_oe / sum_v,
        1.0 / sum_v.sqrt(),
        ci_level,
        false,
    );

    let per_study = tables
        .iter()
        .zip(&estimates)
        .enumerate()
        .map(|(i, (s, e))| PooledStudy {
            id: s.id.clone(),
            estimate: *e,
            weight_pct: if comps[i].v > 0.0 {
                comps[i].v / sum_v * 100.0
            } else {
                0.0
            },
        })
        .collect();

    let het = heterogeneity_peto(tables, pooled.analysis_value);
    finish(settings, per_study, pooled, het, included.len())
}

/// Cochran's Q about a fixed pooled value, with inverse-variance weights.
///
/// Studies that cannot enter the weighted sum (non-estimable, or zero
/// standard error) contribute nothing to Q and are not counted in df.
pub fn heterogeneity(studies: &[StudyEstimate], fixed_pooled: f64) -> Heterogeneity {
    let included: Vec<usize> = (0..studies.len())
        .filter(|&i| usable(&studies[i].estimate))
        .collect();
    if included.len() <= 1 || !fixed_pooled.is_finite() {
        return Heterogeneity::none();
    }
    let keys: Vec<(f64, f64)> = included
        .iter()
        .map(|&i| (studies[i].estimate.analysis_value, studies[i].estimate.se))
        .collect();
    let order = canonical_order(&keys);
    let mut q = 0.0;
    for &o in &order {
        let e = &studies[included[o]].estimate;
        let w = 1.0 / (e.se * e.se);
        q += w * (e.analysis_value - fixed_pooled).powi(2);
    }
    Heterogeneity::from_q(q, included.len())
}

/// Cochran's Q for Peto pooling: weights are the hypergeometric variances.
pub fn heterogeneity_peto(tables: &[StudyTable], fixed_pooled: f64) -> Heterogeneity {
    let comps: Vec<effects::PetoComponents> =
        tables.iter().map(|s| peto_components(&s.table)).collect();
    let included: Vec<usize> = (0..tables.len()).filter(|&i| comps[i].v > 0.0).collect();
    if included.len() <= 1 || !fixed_pooled.is_finite() {
        return Heterogeneity::none();
    }
    let refs: Vec<&TwoByTwoTable> = included.iter().map(|&i| &tables[i].table).collect();
    let order = canonical_table_order(&refs);
    let mut q = 0.0;
    for &o in &order {
        let c = &comps[included[o]];
        let theta = c.o_minus_e / c.v;
        q += c.v * (theta - fixed_pooled).powi(2);
    }
    Heterogeneity::from_q(q, included.len())
}

/// Where the Q feeding the DerSimonian-Laird tau^2 comes from.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum QSource {
    /// Q about the inverse-variance fixed pooled point.
    InverseVariance,
    /// Q about an externally supplied fixed pooled point on the analysis
    /// scale (e.g. the Mantel-Haenszel fixed estimate).
    FixedPoint(f64),
}

/// DerSimonian-Laird random-effects pooling.
///
/// tau^2 = max(0, (Q - df) / (sum w - sum w^2 / sum w)) with inverse-variance
/// weights; the random weights are 1/(se^2 + tau^2). A single study
/// degenerates to the fixed result.
pub fn pool_random_dl(studies: &[StudyEstimate], q_source: QSource, ci_level: f64) -> PooledResult {
    let measure = studies
        .first()
        .map(|s| s.estimate.measure)
        .unwrap_or(Measure::OddsRatio);
    debug_assert!(studies.iter().all(|s| s.estimate.measure == measure));
    let settings = AnalysisSettings {
        method: Method::InverseVariance,
        model: Model::Random,
        measure,
        ci_level,
        ..AnalysisSettings::default()
    };

    let included: Vec<usize> = (0..studies.len())
        .filter(|&i| usable(&studies[i].estimate))
        .collect();
    if included.is_empty() {
        let rows = studies
            .iter()
            .map(|s| PooledStudy {
                id: s.id.clone(),
                estimate: s.estimate,
                weight_pct: 0.0,
            })
            .collect();
        return non_estimable_result(settings, rows);
    }

    let keys: Vec<(f64, f64)> = included
        .iter()
        .map(|&i| (studies[i].estimate.analysis_value, studies[i].estimate.se))
        .collect();
    let order = canonical_order(&keys);

    // Fixed-effect sums for Q and the DL denominator.
    let mut sum_w = 0.0;
    let mut sum_wt = 0.0;
    let mut sum_w2 = 0.0;
    for &o in &order {
        let e = &studies[included[o]].estimate;
        let w = 1.0 / (e.se * e.se);
        sum_w += w;
        sum_wt += w * e.analysis_value;
        sum_w2 += w * w;
    }
    let theta_fixed = sum_wt / sum_w;

    let center = match q_source {
        QSource::InverseVariance => theta_fixed,
        QSource::FixedPoint(p) => p,
    };
    let het_fixed = heterogeneity(studies, center);

    let df = included.len().saturating_sub(1) as f64;
    let denom = sum_w - sum_w2 / sum_w;
    let tau_squared = if included.len() < 2 || denom <= 0.0 {
        0.0
    } else {
        ((het_fixed.q - df) / denom).max(0.0)
    };

    let w_star = |e: &EffectEstimate| 1.0 / (e.se * e.se + tau_squared);
    let mut sum_ws = 0.0;
    let mut sum_wst = 0.0;
    for &o in &order {
        let e = &studies[included[o]].estimate;
        sum_ws += w_star(e);
        sum_wst += w_star(e) * e.analysis_value;
    }

    let pooled = if included.len() == 1 {
        let e = studies[included[0]].estimate;
        EffectEstimate::from_analysis(measure, e.analysis_value, e.se, ci_level, e.corrected)
    } else {
        EffectEstimate::from_analysis(
            measure,
            sum_wst / sum_ws,
            (1.0 / sum_ws).sqrt(),
            ci_level,
            false,
        )
    };

    let per_study = studies
        .iter()
        .map(|s| PooledStudy {
            id: s.id.clone(),
            estimate: s.estimate,
            weight_pct: if usable(&s.estimate) {
                w_star(&s.estimate) / sum_ws * 100.0
            } else {
                0.0
            },
        })
        .collect();

    let het = Heterogeneity {
        tau_squared,
        ..het_fixed
    };
    finish(settings, per_study, pooled, het, included.len())
}
