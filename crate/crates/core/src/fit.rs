//! Least-squares rate fitting and constant bands.

/// Slope and intercept of the least-squares line through (x_i, y_i).
pub fn least_squares_line(x: &[f64], y: &[f64]) -> (f64, f64) {
    assert_eq!(x.len(), y.len(), "x and y lengths differ");
    let n = x.len() as f64;
    if x.len() < 2 {
        return (f64::NAN, y.first().copied().unwrap_or(f64::NAN));
    }
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let sxx: f64 = x.iter().map(|a| (a - mx) * (a - mx)).sum();
    let s = sxy / sxx;
    (s, my - s * mx)
}

pub fn least_squares_slope(x: &[f64], y: &[f64]) -> f64 {
    least_squares_line(x, y).0
}

/// Slope of log(value) against log(n).
pub fn loglog_slope(ns: &[f64], values: &[f64]) -> f64 {
    let x: Vec<f64> = ns.iter().map(|v| v.ln()).collect();
    let y: Vec<f64> = values.iter().map(|v| v.ln()).collect();
    least_squares_slope(&x, &y)
}

/// Log–log slope over the top half of the range (at least two points).
pub fn top_half_slope(ns: &[f64], values: &[f64]) -> f64 {
    let start = (ns.len() / 2).min(ns.len().saturating_sub(2));
    loglog_slope(&ns[start..], &values[start..])
}

/// max/min of a positive sequence.
pub fn band(values: &[f64]) -> f64 {
    let mx = values.iter().cloned().fold(f64::MIN, f64::max);
    let mn = values.iter().cloned().fold(f64::MAX, f64::min);
    mx / mn
}
