use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub const MIN_FIT_POINTS: usize = 10;

/// Least-squares line through `(ln n, ln metric)`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct LogLogFit {
    pub slope: f64,
    pub intercept: f64,
    pub r_squared: f64,
    pub points: usize,
}

/// Fits `ln metric ≈ intercept + slope · ln n` over records with
/// `n_lo ≤ n ≤ n_hi`.
pub fn fit_loglog_slope(series: &[(u64, f64)], n_lo: u64, n_hi: u64) -> Result<LogLogFit> {
    let window: Vec<(u64, f64)> = series
        .iter()
        .copied()
        .filter(|&(n, _)| n >= n_lo && n <= n_hi)
        .collect();
    if window.len() < MIN_FIT_POINTS {
        return Err(Error::InsufficientData(format!(
            "{} records in [{n_lo}, {n_hi}], need at least {MIN_FIT_POINTS}",
            window.len()
        )));
    }
    if let Some(&(iteration, value)) = window.iter().find(|&&(_, v)| !(v > 0.0 && v.is_finite())) {
        return Err(Error::NonPositiveMetric { iteration, value });
    }
    let xs: Vec<f64> = window.iter().map(|&(n, _)| (n as f64).ln()).collect();
    let ys: Vec<f64> = window.iter().map(|&(_, v)| v.ln()).collect();
    let k = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / k;
    let my = ys.iter().sum::<f64>() / k;
    let (mut sxx, mut sxy, mut syy) = (0.0, 0.0, 0.0);
    for (x, y) in xs.iter().zip(&ys) {
        let (dx, dy) = (x - mx, y - my);
        sxx += dx * dx;
        sxy += dx * dy;
        syy += dy * dy;
    }
    if sxx == 0.0 {
        return Err(Error::InsufficientData("all records share one iteration index".into()));
    }
    let slope = sxy / sxx;
    let r_squared = if syy <= 1e-20 * k * (1.0 + my * my) { 1.0 } else { sxy * sxy / (sxx * syy) };
    Ok(LogLogFit {
        slope,
        intercept: my - slope * mx,
        r_squared,
        points: window.len(),
    })
}
