//! Fixed float formatting for reports: 12 significant digits.

pub const SIGNIFICANT_DIGITS: usize = 12;

/// `x` rounded to 12 significant digits.
pub fn round12(x: f64) -> f64 {
    if !x.is_finite() || x == 0.0 {
        return x;
    }
    format!("{:.*e}", SIGNIFICANT_DIGITS - 1, x)
        .parse()
        .unwrap_or(x)
}

/// Shortest text for `round12(x)`; plain notation in `[1e-4, 1e12)`,
/// exponent notation otherwise.
pub fn fmt12(x: f64) -> String {
    let r = round12(x);
    if r == 0.0 {
        return "0".into();
    }
    if !r.is_finite() {
        return r.to_string();
    }
    let a = r.abs();
    if (1e-4..1e12).contains(&a) {
        r.to_string()
    } else {
        format!("{r:e}")
    }
}
