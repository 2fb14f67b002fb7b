//! Least-squares line fitting for log-log exponent recovery.

/// Ordinary least squares y = slope*x + intercept with R^2.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LineFit {
    pub slope: f64,
    pub intercept: f64,
    pub r_squared: f64,
    pub points: usize,
}

pub fn least_squares(xs: &[f64], ys: &[f64]) -> Option<LineFit> {
    assert_eq!(xs.len(), ys.len());
    let n = xs.len();
    if n < 2 {
        return None;
    }
    let nf = n as f64;
    let mx = xs.iter().sum::<f64>() / nf;
    let my = ys.iter().sum::<f64>() / nf;
    let mut sxx = 0.0;
    let mut sxy = 0.0;
    let mut syy = 0.0;
    for i in 0..n {
        let dx = xs[i] - mx;
        let dy = ys[i] - my;
        sxx += dx * dx;
        sxy += dx * dy;
        syy += dy * dy;
    }
    if sxx == 0.0 {
        return None;
    }
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let r_squared = if syy == 0.0 { 1.0 } else { (sxy * sxy) / (sxx * syy) };
    Some(LineFit {
        slope,
        intercept,
        r_squared,
        points: n,
    })
}

/// Fit of log(y) against log(x).
pub fn log_log_fit(ns: &[f64], counts: &[f64]) -> Option<LineFit> {
    let xs: Vec<f64> = ns.iter().map(|&n| n.ln()).collect();
    let ys: Vec<f64> = counts.iter().map(|&c| c.max(1.0).ln()).collect();
    least_squares(&xs, &ys)
}
