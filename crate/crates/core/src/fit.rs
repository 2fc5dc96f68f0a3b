//! Least-squares slopes used by the trend and order estimates.

/// Slope of the least-squares line through `(x_i, y_i)`; `None` for fewer
/// than two points or constant `x`.
pub(crate) fn linear_slope(x: &[f64], y: &[f64]) -> Option<f64> {
    let k = x.len().min(y.len());
    if k < 2 {
        return None;
    }
    let kf = k as f64;
    let mx = x[..k].iter().sum::<f64>() / kf;
    let my = y[..k].iter().sum::<f64>() / kf;
    let sxx: f64 = x[..k].iter().map(|a| (a - mx).powi(2)).sum();
    let sxy: f64 = x[..k].iter().zip(&y[..k]).map(|(a, b)| (a - mx) * (b - my)).sum();
    (sxx > 0.0).then(|| sxy / sxx)
}

/// Slope of `log y` against `log x`, skipping pairs that are not positive.
pub(crate) fn log_log_slope(x: &[f64], y: &[f64]) -> Option<f64> {
    let (lx, ly): (Vec<f64>, Vec<f64>) =
        x.iter().zip(y).filter(|(a, b)| **a > 0.0 && **b > 0.0).map(|(a, b)| (a.ln(), b.ln())).unzip();
    linear_slope(&lx, &ly)
}
