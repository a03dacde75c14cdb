//! Sample statistics used by the Monte Carlo checks.

use serde::{Deserialize, Serialize};

/// Mean, variance and standard error of the mean of a sample.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MeanEstimate {
    pub mean: f64,
    pub var: f64,
    pub se: f64,
    pub n: usize,
}

pub fn mean_estimate(xs: &[f64]) -> MeanEstimate {
    let n = xs.len();
    if n == 0 {
        return MeanEstimate { mean: f64::NAN, var: f64::NAN, se: f64::NAN, n };
    }
    let mean = xs.iter().sum::<f64>() / n as f64;
    let var = if n > 1 {
        xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1) as f64
    } else {
        0.0
    };
    MeanEstimate { mean, var, se: (var / n as f64).sqrt(), n }
}

/// Estimate of E(XY) for mean-zero variables, with its standard error.
pub fn product_moment(x: &[f64], y: &[f64]) -> MeanEstimate {
    let prods: Vec<f64> = x.iter().zip(y).map(|(a, b)| a * b).collect();
    mean_estimate(&prods)
}

/// Sample covariance with standard error (delta-method via products of centered values).
pub fn covariance(x: &[f64], y: &[f64]) -> MeanEstimate {
    let mx = x.iter().sum::<f64>() / x.len() as f64;
    let my = y.iter().sum::<f64>() / y.len() as f64;
    let prods: Vec<f64> = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).collect();
    let mut est = mean_estimate(&prods);
    let n = x.len() as f64;
    if n > 1.0 {
        est.mean *= n / (n - 1.0);
    }
    est
}

pub fn correlation(x: &[f64], y: &[f64]) -> f64 {
    let cxy = covariance(x, y).mean;
    let cxx = covariance(x, x).mean;
    let cyy = covariance(y, y).mean;
    cxy / (cxx * cyy).sqrt()
}

/// Summary exported alongside ensembles.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EnsembleSummary {
    pub mean: Vec<f64>,
    pub var: Vec<f64>,
    pub cov: Vec<Vec<f64>>,
    pub se: Vec<f64>,
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn mean_and_variance_of_small_sample() {
        let est = mean_estimate(&[1.0, 2.0, 3.0, 4.0]);
        assert_eq!(est.mean, 2.5);
        assert!((est.var - 5.0 / 3.0).abs() < 1e-15);
        assert!((est.se - (5.0 / 12.0f64).sqrt()).abs() < 1e-15);
    }

    #[test]
    fn covariance_of_identical_columns_is_variance() {
        let x = [1.0, -2.0, 0.5, 3.0];
        assert!((covariance(&x, &x).mean - mean_estimate(&x).var).abs() < 1e-14);
        assert!((correlation(&x, &x) - 1.0).abs() < 1e-14);
    }
}
