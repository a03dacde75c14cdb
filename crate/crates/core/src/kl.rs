//! Karhunen–Loève sampling: X_A = Σ_k (∫_A φ_k dμ) Z_k for an orthonormal basis of
//! L²(Lebesgue on [lo, hi]).

use std::f64::consts::{PI, SQRT_2};

use nalgebra::DMatrix;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::field::PathEnsemble;
use crate::measure::{Measure, Region};
use crate::quadrature;
use crate::rng;
use crate::stats;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum BasisKind {
    Haar,
    FourierCosine,
}

/// First `n_terms` functions of a Haar or cosine basis on Lebesgue measure over
/// `[lo, hi]`, rescaled from the unit interval.
#[derive(Debug, Clone, PartialEq)]
pub struct OrthonormalBasis {
    pub kind: BasisKind,
    pub n_terms: usize,
    lo: f64,
    hi: f64,
}

impl OrthonormalBasis {
    pub fn new(kind: BasisKind, n_terms: usize, base: &Measure) -> Result<Self> {
        if n_terms == 0 {
            return Err(Error::input("basis needs at least one term"));
        }
        let (lo, hi) = match base {
            Measure::Lebesgue { lo, hi } if lo.is_finite() && hi.is_finite() => (*lo, *hi),
            _ => return Err(Error::input("orthonormal bases are provided for Lebesgue measure on a bounded interval")),
        };
        Ok(OrthonormalBasis { kind, n_terms, lo, hi })
    }

    pub fn unit(kind: BasisKind, n_terms: usize) -> Self {
        OrthonormalBasis { kind, n_terms, lo: 0.0, hi: 1.0 }
    }

    pub fn base(&self) -> Measure {
        Measure::Lebesgue { lo: self.lo, hi: self.hi }
    }

    fn len(&self) -> f64 {
        self.hi - self.lo
    }

    /// φ_k(x).
    pub fn eval(&self, k: usize, x: f64) -> f64 {
        if x < self.lo || x >= self.hi {
            return 0.0;
        }
        let u = (x - self.lo) / self.len();
        let s = 1.0 / self.len().sqrt();
        s * match self.kind {
            BasisKind::Haar => {
                let (j, m) = if k == 0 { (0, 0) } else { haar_index(k) };
                let scale = (1u64 << j) as f64;
                let v = u * scale - m as f64;
                if k == 0 {
                    1.0
                } else if !(0.0..1.0).contains(&v) {
                    0.0
                } else if v < 0.5 {
                    scale.sqrt()
                } else {
                    -scale.sqrt()
                }
            }
            BasisKind::FourierCosine => {
                if k == 0 {
                    1.0
                } else {
                    SQRT_2 * (k as f64 * PI * u).cos()
                }
            }
        }
    }

    /// ∫_a^b φ_k on the unit interval, a ≤ b within [0, 1].
    fn unit_integral(&self, k: usize, a: f64, b: f64) -> f64 {
        match self.kind {
            BasisKind::Haar => {
                if k == 0 {
                    return b - a;
                }
                let (j, m) = haar_index(k);
                let scale = (1u64 << j) as f64;
                let l = m as f64 / scale;
                let mid = (m as f64 + 0.5) / scale;
                let r = (m as f64 + 1.0) / scale;
                let overlap = |x: f64, y: f64| (b.min(y) - a.max(x)).max(0.0);
                scale.sqrt() * (overlap(l, mid) - overlap(mid, r))
            }
            BasisKind::FourierCosine => {
                if k == 0 {
                    return b - a;
                }
                let w = k as f64 * PI;
                SQRT_2 * ((w * b).sin() - (w * a).sin()) / w
            }
        }
    }

    /// ∫_A φ_k dx, exact for both bases.
    pub fn region_integral(&self, k: usize, r: &Region) -> f64 {
        let Region::Intervals(ivs) = r else { return 0.0 };
        let l = self.len();
        ivs.iter()
            .map(|iv| {
                let a = ((iv.lo - self.lo) / l).clamp(0.0, 1.0);
                let b = ((iv.hi - self.lo) / l).clamp(0.0, 1.0);
                if b > a {
                    l.sqrt() * self.unit_integral(k, a, b)
                } else {
                    0.0
                }
            })
            .sum()
    }

    /// Coefficient matrix C[i][k] = ∫_{A_i} φ_k.
    pub fn coefficients(&self, regions: &[Region]) -> DMatrix<f64> {
        DMatrix::from_fn(regions.len(), self.n_terms, |i, k| self.region_integral(k, &regions[i]))
    }

    /// Gram [∫ φ_k φ_l] by composite Gauss–Legendre on a dyadic grid fine enough
    /// to resolve every Haar break and cosine oscillation.
    pub fn gram(&self) -> DMatrix<f64> {
        let panels = (2 * self.n_terms).next_power_of_two();
        let breaks: Vec<f64> = (0..=panels).map(|i| self.lo + self.len() * i as f64 / panels as f64).collect();
        let n = self.n_terms;
        let entries: Vec<f64> = (0..n * n)
            .into_par_iter()
            .map(|idx| {
                let (k, l) = (idx / n, idx % n);
                if l < k {
                    return 0.0;
                }
                quadrature::composite(&|x: f64| self.eval(k, x) * self.eval(l, x), &breaks)
            })
            .collect();
        let mut g = DMatrix::from_row_slice(n, n, &entries);
        for k in 0..n {
            for l in 0..k {
                g[(k, l)] = g[(l, k)];
            }
        }
        g
    }
}

/// Haar index k ≥ 1 → (level j, shift m) with k = 2^j + m.
fn haar_index(k: usize) -> (u32, u64) {
    let j = usize::BITS - 1 - k.leading_zeros();
    (j, (k - (1 << j)) as u64)
}

/// Deterministic truncated covariance Σ_k ∫_A φ_k ∫_B φ_k.
pub fn truncated_covariance(basis: &OrthonormalBasis, a: &Region, b: &Region) -> f64 {
    (0..basis.n_terms).map(|k| basis.region_integral(k, a) * basis.region_integral(k, b)).sum()
}

/// The i.i.d. N(0,1) system, row-major `n_paths × n_terms`.
pub fn standard_normals(n_terms: usize, n_paths: usize, seed: u64) -> Vec<f64> {
    let mut z = vec![0.0; n_terms * n_paths];
    z.par_chunks_mut(n_terms.max(1)).enumerate().for_each(|(p, row)| rng::fill_normals(seed, p as u64, row));
    z
}

#[derive(Debug, Clone)]
pub struct KlSample {
    pub ensemble: PathEnsemble,
    /// The driving Z_k, row-major `n_paths × n_terms`.
    pub z: Vec<f64>,
}

pub fn kl_sample(basis: &OrthonormalBasis, regions: &[Region], n_paths: usize, seed: u64) -> Result<KlSample> {
    if n_paths == 0 {
        return Err(Error::input("n_paths must be at least 1"));
    }
    let c = basis.coefficients(regions);
    let n = basis.n_terms;
    let z = standard_normals(n, n_paths, seed);
    let m = regions.len();
    let mut values = vec![0.0; n_paths * m];
    values.par_chunks_mut(m.max(1)).enumerate().for_each(|(p, row)| {
        let zp = &z[p * n..(p + 1) * n];
        for (i, out) in row.iter_mut().enumerate() {
            *out = (0..n).map(|k| c[(i, k)] * zp[k]).sum();
        }
    });
    let ensemble = PathEnsemble {
        labels: regions.iter().map(Region::label).collect(),
        n_paths,
        values,
        seed,
        warnings: Vec::new(),
    };
    Ok(KlSample { ensemble, z })
}

/// Largest |sample correlation| between distinct Z_k among the first `k_max` terms.
pub fn max_cross_correlation(z: &[f64], n_terms: usize, k_max: usize) -> f64 {
    let n_paths = z.len() / n_terms.max(1);
    let k_max = k_max.min(n_terms);
    let cols: Vec<Vec<f64>> = (0..k_max).map(|k| (0..n_paths).map(|p| z[p * n_terms + k]).collect()).collect();
    let mut worst = 0.0_f64;
    for a in 0..k_max {
        for b in a + 1..k_max {
            worst = worst.max(stats::correlation(&cols[a], &cols[b]).abs());
        }
    }
    worst
}

#[cfg(test)]
mod tests {
    use super::*;

    fn iv(a: f64, b: f64) -> Region {
        Region::interval(a, b)
    }

    #[test]
    fn bases_are_orthonormal() {
        for kind in [BasisKind::Haar, BasisKind::FourierCosine] {
            let b = OrthonormalBasis::unit(kind, 32);
            let g = b.gram();
            assert!((g - DMatrix::identity(32, 32)).abs().max() < 1e-8, "{kind:?}");
        }
        let b = OrthonormalBasis::new(BasisKind::Haar, 8, &Measure::lebesgue(-1.0, 3.0)).unwrap();
        assert!((b.gram() - DMatrix::identity(8, 8)).abs().max() < 1e-8);
    }

    #[test]
    fn region_integrals_match_quadrature() {
        let b = OrthonormalBasis::unit(BasisKind::FourierCosine, 9);
        let r = iv(0.13, 0.71);
        for k in 0..9 {
            let q = quadrature::composite(&|x: f64| b.eval(k, x), &[0.13, 0.3, 0.5, 0.71]);
            assert!((b.region_integral(k, &r) - q).abs() < 1e-12);
        }
    }

    #[test]
    fn truncated_covariance_examples() {
        let haar = OrthonormalBasis::unit(BasisKind::Haar, 256);
        let v = truncated_covariance(&haar, &iv(0.0, 0.5), &iv(0.25, 0.75));
        assert!((v - 0.25).abs() < 1e-2);
        assert!(truncated_covariance(&haar, &iv(0.0, 0.5), &iv(0.5, 1.0)).abs() < 1e-12);
        let full = truncated_covariance(&haar, &iv(0.0, 1.0), &iv(0.0, 1.0));
        assert!((full - 1.0).abs() < 1e-12);
    }

    #[test]
    fn parseval_partial_sums_increase() {
        let cos = OrthonormalBasis::unit(BasisKind::FourierCosine, 1024);
        let a = iv(0.1, 0.37);
        let mut prev = 0.0;
        for n in [64, 256, 1024] {
            let b = OrthonormalBasis::unit(BasisKind::FourierCosine, n);
            let s = truncated_covariance(&b, &a, &a);
            assert!(s >= prev && s <= 0.27 + 1e-12);
            prev = s;
        }
        assert!((truncated_covariance(&cos, &a, &a) - 0.27).abs() < 1e-3);
    }

    #[test]
    fn kl_sample_is_reproducible() {
        let b = OrthonormalBasis::unit(BasisKind::Haar, 16);
        let r = [iv(0.0, 0.5)];
        let s1 = kl_sample(&b, &r, 10, 7).unwrap();
        let s2 = kl_sample(&b, &r, 10, 7).unwrap();
        assert_eq!(s1.ensemble, s2.ensemble);
    }
}
