//! Fixed numeric formatting shared by reports and figure text.
//!
//! All user-facing numbers are rounded half-up (ties away from zero) so the
//! CLI report and the SVG figures print identical digits for the same value.

/// Round half-up (ties away from zero) at the given number of decimals.
pub fn round_half_up(x: f64, decimals: u32) -> f64 {
    let factor = 10f64.powi(decimals as i32);
    (x.abs() * factor + 0.5).floor() / factor * x.signum()
}

/// Format with a fixed number of decimals, half-up, normalising `-0`.
pub fn fmt_fixed(x: f64, decimals: u32) -> String {
    let r = round_half_up(x, decimals);
    let r = if r == 0.0 { 0.0 } else { r };
    format!("{r:.*}", decimals as usize)
}

/// Integer percentage, half-up: 0.4 -> "0", 34.56 -> "35".
pub fn fmt_pct_int(x: f64) -> String {
    fmt_fixed(x, 0)
}

/// SVG coordinate formatting: 3 decimals, `-0.000` normalised to `0.000`.
pub fn fmt_coord(x: f64) -> String {
    let s = format!("{x:.3}");
    if s == "-0.000" {
        "0.000".to_string()
    } else {
        s
    }
}
