//! Publication-bias diagnostics: funnel-plot data and trim-and-fill.

use crate::effects::{EffectEstimate, Measure};
use crate::error::{Error, Result};
use crate::pooling::{pool_iv_fixed, pool_random_dl, Model, PooledResult, QSource, StudyEstimate};
use crate::stats;

/// One funnel-plot point: analysis-scale effect against its standard error.
#[derive(Debug, Clone, PartialEq)]
pub struct FunnelPoint {
    pub id: String,
    pub effect: f64,
    pub se: f64,
}

/// Scatter data plus the pooled reference line and pseudo-CI parameters.
#[derive(Debug, Clone, PartialEq)]
pub struct FunnelData {
    pub points: Vec<FunnelPoint>,
    /// Pooled analysis-scale value; the funnel's vertical line.
    pub pooled_line: f64,
    /// Critical value defining the pseudo-CI wedge `pooled +- z * se`.
    pub z: f64,
    pub ci_level: f64,
    /// Measure of the underlying analysis (for axis labelling).
    pub measure: Measure,
}

impl FunnelData {
    /// Pseudo-CI boundaries at a given standard error. At `se = 0` both
    /// bounds equal the pooled line exactly.
    pub fn boundaries(&self, se: f64) -> (f64, f64) {
        (
            self.pooled_line - self.z * se,
            self.pooled_line + self.z * se,
        )
    }
}

/// Extract funnel data from a pooled analysis; one point per estimable study.
pub fn funnel_data(pooled: &PooledResult) -> FunnelData {
    let points = pooled
        .per_study
        .iter()
        .filter(|s| s.estimate.estimable && s.estimate.se.is_finite())
        .map(|s| FunnelPoint {
            id: s.id.clone(),
            effect: s.estimate.analysis_value,
            se: s.estimate.se,
        })
        .collect();
    FunnelData {
        points,
        pooled_line: pooled.pooled.analysis_value,
        z: stats::z_for_ci(pooled.settings.ci_level),
        ci_level: pooled.settings.ci_level,
        measure: pooled.settings.measure,
    }
}

/// Side of the funnel assumed to hold the surplus (unmatched) studies.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum TrimSide {
    /// Missing studies assumed on the left; extremes trimmed on the right.
    #[default]
    Right,
    Left,
}

#[derive(Debug, Clone, Copy)]
pub struct TrimFillOptions {
    pub side: TrimSide,
    /// Model for the final adjusted pooled result (iteration always centers
    /// with the fixed-effect estimate).
    pub model: Model,
    pub max_iterations: u32,
}

impl Default for TrimFillOptions {
    fn default() -> Self {
        Self {
            side: TrimSide::Right,
            model: Model::Fixed,
            max_iterations: 50,
        }
    }
}

/// Trim-and-fill output.
#[derive(Debug, Clone, PartialEq)]
pub struct TrimFillResult {
    pub imputed_count: usize,
    /// (analysis-scale effect, se) of each imputed mirror study.
    pub imputed_points: Vec<(f64, f64)>,
    /// Re-pooled estimate including the imputed studies.
    pub adjusted: PooledResult,
    pub iterations: u32,
    /// The center the mirrors were reflected about (trimmed fixed-effect
    /// estimate).
    pub center: f64,
}

/// Duval-Tweedie trim-and-fill with the L0 estimator.
///
/// Iterates: pool the untrimmed studies (fixed effect), rank all absolute
/// deviations from that center (midranks on ties), take the signed-rank sum
/// `T` of the suspected-asymmetric side, estimate the number of unmatched
/// studies as `L0 = (4T - n(n+1)) / (2n - 1)`, and trim `ceil(L0)` extremes;
/// repeat until the trim count stabilises. The trimmed extremes are then
/// mirrored about the final center and pooled together with the originals.
///
/// Fewer than three estimable studies: returns zero imputations unchanged.
pub fn trim_and_fill(estimates: &[StudyEstimate], ci_level: f64) -> Result<TrimFillResult> {
    trim_and_fill_with(estimates, ci_level, &TrimFillOptions::default())
}

pub fn trim_and_fill_with(
    estimates: &[StudyEstimate],
    ci_level: f64,
    opts: &TrimFillOptions,
) -> Result<TrimFillResult> {
    let flip = match opts.side {
        TrimSide::Right => 1.0,
        TrimSide::Left => -1.0,
    };

    let usable: Vec<&StudyEstimate> = estimates
        .iter()
        .filter(|s| {
            s.estimate.estimable && s.estimate.analysis_value.is_finite() && s.estimate.se > 0.0
        })
        .collect();
    let k = usable.len();

    let pool_adjusted = |all: &[StudyEstimate]| match opts.model {
        Model::Fixed => pool_iv_fixed(all, ci_level),
        Model::Random => pool_random_dl(all, QSource::InverseVariance, ci_level),
    };

    if k < 3 {
        let adjusted = pool_adjusted(estimates);
        let center = adjusted.pooled.analysis_value;
        return Ok(TrimFillResult {
            imputed_count: 0,
            imputed_points: Vec::new(),
            adjusted,
            iterations: 0,
            center,
        });
    }

    // Oriented values, sorted ascending so the trim side is the tail.
    let mut pts: Vec<(f64, f64)> = usable
        .iter()
        .map(|s| (flip * s.estimate.analysis_value, s.estimate.se))
        .collect();
    pts.sort_by(|x, y| x.0.total_cmp(&y.0).then_with(|| x.1.total_cmp(&y.1)));

    let iv_center = |subset: &[(f64, f64)]| -> f64 {
        let mut sw = 0.0;
        let mut swt = 0.0;
        for &(v, se) in subset {
            let w = 1.0 / (se * se);
            sw += w;
            swt += w * v;
        }
        swt / sw
    };

    let max_trim = (k - 1) / 2; // never trim a majority
    let mut trimmed = 0usize;
    let mut iterations = 0u32;
    let mut converged = false;
    let mut center = iv_center(&pts);
    while iterations < opts.max_iterations {
        iterations += 1;
        center = iv_center(&pts[..k - trimmed]);
        let deviations: Vec<f64> = pts.iter().map(|&(v, _)| v - center).collect();
        // Tolerance for rank ties and zero deviations: the estimated center
        // of an exactly mirror-symmetric set carries float noise, which must
        // not masquerade as asymmetry.
        let scale = deviations.iter().fold(0.0f64, |m, d| m.max(d.abs()));
        let tol = 1e-9 * scale;
        let ranks = midranks(&deviations, tol);
        let t: f64 = deviations
            .iter()
            .zip(&ranks)
            .filter(|(d, _)| **d > tol)
            .map(|(_, r)| *r)
            .sum();
        let l0 = (4.0 * t - (k * (k + 1)) as f64) / (2 * k - 1) as f64;
        let next = (l0.ceil().max(0.0) as usize).min(max_trim);
        if next == trimmed {
            converged = true;
            break;
        }
        trimmed = next;
    }
    if !converged {
        return Err(Error::NonConvergence {
            iterations,
            last_trimmed: trimmed,
        });
    }

    // Mirror the trimmed extremes about the final center (undoing the
    // orientation flip) and re-pool everything.
    let imputed_points: Vec<(f64, f64)> = pts[k - trimmed..]
        .iter()
        .map(|&(v, se)| (flip * (2.0 * center - v), se))
        .collect();

    let mut all: Vec<StudyEstimate> = estimates.to_vec();
    let measure = estimates
        .first()
        .map(|s| s.estimate.measure)
        .unwrap_or(crate::effects::Measure::OddsRatio);
    for (i, &(v, se)) in imputed_points.iter().enumerate() {
        all.push(StudyEstimate {
            id: format!("filled-{}", i + 1),
            estimate: EffectEstimate::from_analysis(measure, v, se, ci_level, false),
        });
    }
    let adjusted = pool_adjusted(&all);

    Ok(TrimFillResult {
        imputed_count: trimmed,
        imputed_points,
        adjusted,
        iterations,
        center: flip * center,
    })
}

/// Ranks of the absolute values, averaging runs tied within `tol`
/// (midranks), so a set that mirrors about the center splits its rank mass
/// evenly even when the center estimate carries float noise.
fn midranks(deviations: &[f64], tol: f64) -> Vec<f64> {
    let n = deviations.len();
    let mut idx: Vec<usize> = (0..n).collect();
    idx.sort_by(|&i, &j| deviations[i].abs().total_cmp(&deviations[j].abs()));
    let mut ranks = vec![0.0; n];
    let mut i = 0;
    while i < n {
        let mut j = i;
        while j + 1 < n && deviations[idx[j + 1]].abs() - deviations[idx[i]].abs() <= tol {
            j += 1;
        }
        let avg = (i + j) as f64 / 2.0 + 1.0;
        for &slot in &idx[i..=j] {
            ranks[slot] = avg;
        }
        i = j + 1;
    }
    ranks
}
