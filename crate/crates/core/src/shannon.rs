//! Shannon sampling in the Paley–Wiener space of band [-1/2, 1/2].

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::quadrature;

/// sin(π(x−y)) / (π(x−y)), equal to 1 on the diagonal.
pub fn sinc_kernel(x: f64, y: f64) -> f64 {
    sinc(x - y)
}

pub fn sinc(u: f64) -> f64 {
    if u == 0.0 {
        return 1.0;
    }
    // exact zeros at the nonzero integers
    if u.fract() == 0.0 {
        return 0.0;
    }
    (PI * u).sin() / (PI * u)
}

/// f(x) = Σ_{n=-N}^{N} α_n sinc(x − n).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BandlimitedSignal {
    /// Index of `coeffs[0]`, i.e. `-N` for a symmetric window.
    pub first: i64,
    pub coeffs: Vec<f64>,
}

impl BandlimitedSignal {
    pub fn new(first: i64, coeffs: Vec<f64>) -> Self {
        BandlimitedSignal { first, coeffs }
    }

    /// Coefficients on the symmetric window `-n..=n`.
    pub fn symmetric(coeffs: Vec<f64>) -> Result<Self> {
        if coeffs.len() % 2 == 0 {
            return Err(Error::input("a symmetric window needs an odd number of coefficients"));
        }
        let n = (coeffs.len() / 2) as i64;
        Ok(BandlimitedSignal { first: -n, coeffs })
    }

    pub fn window(&self) -> std::ops::RangeInclusive<i64> {
        self.first..=self.first + self.coeffs.len() as i64 - 1
    }

    pub fn reconstruct(&self, x: f64) -> f64 {
        self.window().zip(&self.coeffs).map(|(n, a)| a * sinc(x - n as f64)).sum()
    }

    pub fn l2_norm_sq(&self) -> f64 {
        self.coeffs.iter().map(|a| a * a).sum()
    }
}

/// (T*f)_n = f(n) over the window.
pub fn sample<F: Fn(f64) -> f64>(f: F, window: std::ops::RangeInclusive<i64>) -> BandlimitedSignal {
    let first = *window.start();
    BandlimitedSignal { first, coeffs: window.map(|n| f(n as f64)).collect() }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct IsometryReport {
    pub l2_norm_sq: f64,
    /// αᵀ G α with G the Gram of the sinc translates at the window integers.
    pub pw_norm_sq: f64,
    pub diff: f64,
    /// ∫|f|² dx over [-L, L] plus an estimate of the part outside.
    pub quadrature_norm_sq: f64,
    pub quadrature_diff: f64,
    pub half_width: f64,
    pub tail_estimate: f64,
    pub warnings: Vec<String>,
}

/// Compares Σα_n² with the RKHS norm from the sinc Gram and with a wide-domain
/// quadrature of ∫|f|².
pub fn isometry_check(sig: &BandlimitedSignal, half_width: f64) -> Result<IsometryReport> {
    if sig.coeffs.is_empty() {
        return Err(Error::input("empty coefficient window"));
    }
    let l2 = sig.l2_norm_sq();
    let idx: Vec<f64> = sig.window().map(|n| n as f64).collect();
    let mut pw = 0.0;
    for (i, a) in sig.coeffs.iter().enumerate() {
        for (j, b) in sig.coeffs.iter().enumerate() {
            pw += a * b * sinc_kernel(idx[i], idx[j]);
        }
    }

    let lo = sig.first as f64;
    let hi = lo + sig.coeffs.len() as f64 - 1.0;
    let l = half_width.max(hi.abs().max(lo.abs()) + 8.0).ceil();
    let f2 = |x: f64| sig.reconstruct(x).powi(2);
    let n_panels = (2.0 * l) as usize;
    let breaks: Vec<f64> = (0..=n_panels).map(|k| -l + k as f64).collect();
    let core = quadrature::composite(&f2, &breaks);

    // Beyond the window f(x) = sin(πx)/π · g(x) with smooth g(x) = Σ α_n (−1)^n / (x − n);
    // sin² averages to 1/2, and ∫_L^∞ g² is integrated in y = 1/x.
    let g = |x: f64| -> f64 {
        sig.window()
            .zip(&sig.coeffs)
            .map(|(n, a)| (if n.rem_euclid(2) == 0 { *a } else { -*a }) / (x - n as f64))
            .sum()
    };
    let right = quadrature::gl32(&|y: f64| if y == 0.0 { 0.0 } else { g(1.0 / y).powi(2) / (y * y) }, 0.0, 1.0 / l);
    let left = quadrature::gl32(&|y: f64| if y == 0.0 { 0.0 } else { g(-1.0 / y).powi(2) / (y * y) }, 0.0, 1.0 / l);
    let tail = (left + right) / (2.0 * PI * PI);
    let total = core + tail;

    let mut warnings = Vec::new();
    if tail > 1e-3 * l2.max(f64::MIN_POSITIVE) {
        warnings.push(format!(
            "energy outside [-{l}, {l}] estimated at {tail:.3e}; widen the integration domain"
        ));
    }
    Ok(IsometryReport {
        l2_norm_sq: l2,
        pw_norm_sq: pw,
        diff: (pw - l2).abs(),
        quadrature_norm_sq: total,
        quadrature_diff: (total - l2).abs(),
        half_width: l,
        tail_estimate: tail,
        warnings,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sinc_values() {
        assert_eq!(sinc_kernel(0.3, 0.3), 1.0);
        assert_eq!(sinc_kernel(5.0, 2.0), 0.0);
        assert!((sinc_kernel(0.5, 0.0) - 2.0 / PI).abs() < 1e-16);
    }

    #[test]
    fn reconstruct_examples() {
        let mut c = vec![0.0; 11];
        c[8] = 1.0; // n = 3
        let sig = BandlimitedSignal::symmetric(c).unwrap();
        assert_eq!(sig.reconstruct(3.0), 1.0);
        assert_eq!(sig.reconstruct(5.0), 0.0);

        let two = BandlimitedSignal::new(0, vec![1.0, 1.0]);
        assert!((two.reconstruct(0.5) - 4.0 / PI).abs() < 1e-15);
    }

    #[test]
    fn sampling_examples() {
        let sig = BandlimitedSignal::new(-4, vec![0.5, -1.0, 2.0, 0.0, 3.0, 1.5, -0.25, 0.0, 1.0]);
        let back = sample(|x| sig.reconstruct(x), sig.window());
        assert_eq!(back, sig);

        let s = sample(|x| sinc(x - 0.5), -5..=5);
        for (n, v) in s.window().zip(&s.coeffs) {
            let sign = if n.rem_euclid(2) == 0 { 1.0 } else { -1.0 };
            // sinc(n − 1/2) = −(−1)^n · 2/((2n−1)π)
            let closed = -sign * 2.0 / ((2 * n - 1) as f64 * PI);
            assert!((v - closed).abs() < 1e-15, "n = {n}: {v} vs {closed}");
        }

        let zero = sample(|_| 0.0, -3..=3);
        assert!(zero.coeffs.iter().all(|v| *v == 0.0));
    }

    #[test]
    fn isometry_of_a_delta() {
        let sig = BandlimitedSignal::new(0, vec![1.0]);
        let r = isometry_check(&sig, 512.0).unwrap();
        assert_eq!(r.l2_norm_sq, 1.0);
        assert_eq!(r.pw_norm_sq, 1.0);
        assert!(r.quadrature_diff < 1e-4, "{r:?}");
    }
}
