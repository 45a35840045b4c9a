//! Fixed-significance decimal formatting shared by the CSV and report writers.

/// Formats `x` in plain decimal notation with `digits` significant digits.
pub fn sig(x: f64, digits: usize) -> String {
    if !x.is_finite() {
        return format!("{x}");
    }
    if x == 0.0 {
        return format!("{:.*}", digits.saturating_sub(1), 0.0);
    }
    let magnitude = x.abs().log10().floor() as i64;
    let decimals = (digits as i64 - 1 - magnitude).clamp(0, 60) as usize;
    format!("{:.*}", decimals, x)
}

/// Like [`sig`] but strips trailing zeros, for human-readable output.
pub fn sig_trimmed(x: f64, digits: usize) -> String {
    let s = sig(x, digits);
    if s.contains('.') {
        let t = s.trim_end_matches('0').trim_end_matches('.');
        if t == "-0" {
            "0".to_string()
        } else {
            t.to_string()
        }
    } else {
        s
    }
}
