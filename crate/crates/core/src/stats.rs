//! Normal and chi-square routines used by the estimators.
//!
//! Quantiles come from the inverse CDF (no lookup tables) and the chi-square
//! upper tail from the regularized incomplete gamma function, so arbitrary
//! confidence levels are supported.

use statrs::distribution::{ContinuousCDF, Normal};

/// Standard normal CDF.
pub fn normal_cdf(x: f64) -> f64 {
    0.5 * statrs::function::erf::erfc(-x / std::f64::consts::SQRT_2)
}

/// Standard normal quantile, `p` in (0, 1).
pub fn normal_quantile(p: f64) -> f64 {
    assert!(
        p > 0.0 && p < 1.0,
        "quantile probability must be in (0,1), got {p}"
    );
    Normal::new(0.0, 1.0).unwrap().inverse_cdf(p)
}

/// Two-sided critical value for a confidence level, e.g. 0.95 -> 1.960.
pub fn z_for_ci(ci_level: f64) -> f64 {
    assert!(
        ci_level > 0.0 && ci_level < 1.0,
        "ci_level must be in (0,1), got {ci_level}"
    );
    normal_quantile((1.0 + ci_level) / 2.0)
}

/// Upper-tail probability of the chi-square distribution.
///
/// `df == 0` is the degenerate single-study case and reports 1.0.
pub fn chi_square_sf(x: f64, df: f64) -> f64 {
    if df <= 0.0 {
        return 1.0;
    }
    if x <= 0.0 {
        return 1.0;
    }
    statrs::function::gamma::gamma_ur(df / 2.0, x / 2.0)
}

/// Two-sided p-value for a standard normal statistic.
pub fn two_sided_p(z: f64) -> f64 {
    2.0 * (1.0 - normal_cdf(z.abs()))
}
