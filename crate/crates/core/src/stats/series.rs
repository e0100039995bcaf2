//! EWMA smoothing and Gaussian kernel density estimation.

use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum SeriesError {
    #[error("empty series")]
    Empty,
    #[error("alpha must lie in (0, 1], got {0}")]
    BadAlpha(f64),
    #[error("kernel density needs at least two distinct values")]
    ConstantSample,
}

/// Exponentially weighted moving average: `s_0 = x_0`,
/// `s_t = alpha*x_t + (1-alpha)*s_{t-1}`.
pub fn ewma(series: &[f64], alpha: f64) -> Result<Vec<f64>, SeriesError> {
    if series.is_empty() {
        return Err(SeriesError::Empty);
    }
    if !(alpha > 0.0 && alpha <= 1.0) {
        return Err(SeriesError::BadAlpha(alpha));
    }
    let mut out = Vec::with_capacity(series.len());
    let mut state = series[0];
    out.push(state);
    for &x in &series[1..] {
        state = alpha * x + (1.0 - alpha) * state;
        out.push(state);
    }
    Ok(out)
}

/// A Gaussian kernel density with a fixed bandwidth.
#[derive(Debug, Clone)]
pub struct Kde {
    points: Vec<f64>,
    pub bandwidth: f64,
}

fn quantile(sorted: &[f64], q: f64) -> f64 {
    let n = sorted.len();
    if n == 1 {
        return sorted[0];
    }
    let pos = q * (n - 1) as f64;
    let lo = pos.floor() as usize;
    let hi = pos.ceil() as usize;
    let frac = pos - lo as f64;
    sorted[lo] + frac * (sorted[hi] - sorted[lo])
}

impl Kde {
    /// Silverman's rule-of-thumb bandwidth:
    /// `0.9 * min(sd, IQR/1.34) * n^(-1/5)`, falling back to the standard
    /// deviation when the IQR collapses.
    pub fn silverman(values: &[f64]) -> Result<Self, SeriesError> {
        if values.len() < 2 {
            return Err(SeriesError::ConstantSample);
        }
        let n = values.len() as f64;
        let mean = values.iter().sum::<f64>() / n;
        let sd = (values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0)).sqrt();
        let mut sorted = values.to_vec();
        sorted.sort_by(|a, b| a.partial_cmp(b).unwrap());
        let iqr = quantile(&sorted, 0.75) - quantile(&sorted, 0.25);

        let spread = if iqr > 0.0 { sd.min(iqr / 1.34) } else { sd };
        if spread <= 0.0 {
            return Err(SeriesError::ConstantSample);
        }
        let bandwidth = 0.9 * spread * n.powf(-0.2);
        Ok(Kde { points: values.to_vec(), bandwidth })
    }

    pub fn with_bandwidth(values: &[f64], bandwidth: f64) -> Result<Self, SeriesError> {
        if values.is_empty() {
            return Err(SeriesError::Empty);
        }
        if bandwidth <= 0.0 {
            return Err(SeriesError::ConstantSample);
        }
        Ok(Kde { points: values.to_vec(), bandwidth })
    }

    pub fn evaluate(&self, x: f64) -> f64 {
        let h = self.bandwidth;
        let norm = 1.0 / ((2.0 * std::f64::consts::PI).sqrt() * h * self.points.len() as f64);
        self.points.iter().map(|&p| (-0.5 * ((x - p) / h).powi(2)).exp()).sum::<f64>() * norm
    }

    pub fn evaluate_grid(&self, grid: &[f64]) -> Vec<f64> {
        grid.iter().map(|&x| self.evaluate(x)).collect()
    }

    /// An evenly spaced grid spanning the data plus `pad` bandwidths.
    pub fn default_grid(&self, n_points: usize, pad: f64) -> Vec<f64> {
        let lo = self.points.iter().copied().fold(f64::INFINITY, f64::min) - pad * self.bandwidth;
        let hi =
            self.points.iter().copied().fold(f64::NEG_INFINITY, f64::max) + pad * self.bandwidth;
        let step = (hi - lo) / (n_points - 1) as f64;
        (0..n_points).map(|i| lo + step * i as f64).collect()
    }
}

/// Convenience wrapper: Silverman KDE evaluated over a default grid.
pub fn gaussian_kde(values: &[f64], n_grid: usize) -> Result<(Vec<f64>, Vec<f64>), SeriesError> {
    let kde = Kde::silverman(values)?;
    let grid = kde.default_grid(n_grid, 5.0);
    let density = kde.evaluate_grid(&grid);
    Ok((grid, density))
}
