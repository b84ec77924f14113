//! Log-log regression for power-law exponents.

use serde::Serialize;

#[derive(Debug, Clone, Copy, Serialize)]
pub struct PowerFit {
    pub slope: f64,
    pub intercept: f64,
    /// max/min of `y / x^slope` over the fitted points.
    pub band_ratio: f64,
}

/// Least-squares fit of `log y = slope·log x + intercept`; skips non-positive entries.
pub fn loglog_fit(xs: &[f64], ys: &[f64]) -> Option<PowerFit> {
    let pts: Vec<(f64, f64)> = xs
        .iter()
        .zip(ys)
        .filter(|(x, y)| **x > 0.0 && **y > 0.0 && x.is_finite() && y.is_finite())
        .map(|(x, y)| (x.ln(), y.ln()))
        .collect();
    if pts.len() < 2 {
        return None;
    }
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    if sxx == 0.0 {
        return None;
    }
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let (lo, hi) = pts.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), p| {
        let r = p.1 - slope * p.0;
        (lo.min(r), hi.max(r))
    });
    Some(PowerFit { slope, intercept, band_ratio: (hi - lo).exp() })
}

/// Logarithmically spaced grid of `n ≥ 2` points from `a` to `b`.
pub fn log_grid(a: f64, b: f64, n: usize) -> Vec<f64> {
    let (la, lb) = (a.ln(), b.ln());
    (0..n).map(|i| (la + (lb - la) * i as f64 / (n - 1) as f64).exp()).collect()
}

/// Slope between two points in log-log coordinates.
pub fn local_slope(x0: f64, y0: f64, x1: f64, y1: f64) -> f64 {
    (y1.ln() - y0.ln()) / (x1.ln() - x0.ln())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn recovers_exact_power() {
        let xs = log_grid(1.0, 100.0, 20);
        let ys: Vec<f64> = xs.iter().map(|x| 3.0 * x.powf(-1.7)).collect();
        let f = loglog_fit(&xs, &ys).unwrap();
        assert!((f.slope + 1.7).abs() < 1e-12);
        assert!((f.intercept - 3f64.ln()).abs() < 1e-10);
        assert!((f.band_ratio - 1.0).abs() < 1e-10);
    }

    #[test]
    fn grid_endpoints() {
        let g = log_grid(1e-3, 1e3, 7);
        assert!((g[0] - 1e-3).abs() < 1e-15 && (g[6] - 1e3).abs() < 1e-9);
        assert!((g[3] - 1.0).abs() < 1e-12);
    }
}
