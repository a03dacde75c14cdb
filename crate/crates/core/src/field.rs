//! The Gaussian field X^(μ) indexed by regions: sampling, Itô–Wiener integrals of
//! simple functions, quadratic and cross variation, and moment identities.

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::io;
use crate::kernels::{gram, MeasureKernel};
use crate::measure::{Interval, Measure, Region};
use crate::quadrature;
use crate::rng;
use crate::stats::{self, EnsembleSummary, MeanEstimate};

/// Covariance factorization strategy.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "kebab-case")]
pub enum Factorization {
    /// Cholesky, falling back to clipped eigendecomposition when it fails.
    #[default]
    Cholesky,
    EigenClip,
}

#[derive(Debug, Clone)]
pub struct FieldSpec {
    pub measure: Measure,
    pub seed: u64,
    pub factorization: Factorization,
}

impl FieldSpec {
    pub fn new(measure: Measure, seed: u64) -> Self {
        FieldSpec { measure, seed, factorization: Factorization::Cholesky }
    }
}

/// Sampled values, one row per path and one column per index item.
#[derive(Debug, Clone, PartialEq)]
pub struct PathEnsemble {
    pub labels: Vec<String>,
    pub n_paths: usize,
    /// Row-major `n_paths × labels.len()`.
    pub values: Vec<f64>,
    pub seed: u64,
    pub warnings: Vec<String>,
}

impl PathEnsemble {
    pub fn n_items(&self) -> usize {
        self.labels.len()
    }

    pub fn row(&self, p: usize) -> &[f64] {
        let n = self.n_items();
        &self.values[p * n..(p + 1) * n]
    }

    pub fn column(&self, j: usize) -> Vec<f64> {
        let n = self.n_items();
        (0..self.n_paths).map(|p| self.values[p * n + j]).collect()
    }

    pub fn sample_cov(&self, i: usize, j: usize) -> MeanEstimate {
        stats::product_moment(&self.column(i), &self.column(j))
    }

    pub fn summary(&self) -> EnsembleSummary {
        let cols: Vec<Vec<f64>> = (0..self.n_items()).map(|j| self.column(j)).collect();
        let est: Vec<MeanEstimate> = cols.iter().map(|c| stats::mean_estimate(c)).collect();
        let cov = cols
            .iter()
            .map(|a| cols.iter().map(|b| stats::covariance(a, b).mean).collect())
            .collect();
        EnsembleSummary {
            mean: est.iter().map(|e| e.mean).collect(),
            var: est.iter().map(|e| e.var).collect(),
            cov,
            se: est.iter().map(|e| e.se).collect(),
        }
    }

    pub fn to_csv(&self) -> String {
        io::csv_table(&self.labels, (0..self.n_paths).map(|p| self.row(p).to_vec()))
    }
}

/// A square-root factor `L` of a covariance matrix, `C ≈ L Lᵀ`.
#[derive(Debug, Clone)]
pub struct CovFactor {
    pub l: DMatrix<f64>,
    pub method: Factorization,
    /// Sum of |negative eigenvalues| dropped by eigen-clipping.
    pub clipped_mass: f64,
    pub min_eigenvalue: Option<f64>,
}

/// Cholesky (when requested and successful) or eigendecomposition with negative
/// eigenvalues set to zero. Fails only if the clipped part is not negligible.
pub fn factorize(cov: &DMatrix<f64>, method: Factorization) -> Result<CovFactor> {
    if cov.iter().any(|v| !v.is_finite()) {
        return Err(Error::input("covariance has non-finite entries"));
    }
    let scale = cov.iter().fold(0.0_f64, |m, v| m.max(v.abs())).max(f64::MIN_POSITIVE);
    if method == Factorization::Cholesky {
        if let Some(ch) = cov.clone().cholesky() {
            let l = ch.l();
            // a vanishing pivot means the matrix is singular; clip instead
            let min_pivot = l.diagonal().iter().fold(f64::INFINITY, |m, v| m.min(v * v));
            if l.iter().all(|v| v.is_finite()) && min_pivot > 1e-12 * scale {
                return Ok(CovFactor { l, method, clipped_mass: 0.0, min_eigenvalue: None });
            }
        }
    }
    let eig = SymmetricEigen::new(cov.clone());
    let min = eig.eigenvalues.iter().copied().fold(f64::INFINITY, f64::min);
    if min < -1e-8 * scale {
        return Err(Error::numeric("covariance is not positive semidefinite; minimum eigenvalue", min));
    }
    let clipped_mass: f64 = eig.eigenvalues.iter().filter(|v| **v < 0.0).map(|v| -v).sum();
    let sqrt = DVector::from_iterator(eig.eigenvalues.len(), eig.eigenvalues.iter().map(|v| v.max(0.0).sqrt()));
    let l = &eig.eigenvectors * DMatrix::from_diagonal(&sqrt);
    Ok(CovFactor { l, method: Factorization::EigenClip, clipped_mass, min_eigenvalue: Some(min) })
}

/// Draws `n_paths` rows `L z` with per-path random streams.
pub fn sample_with_factor(factor: &CovFactor, labels: Vec<String>, n_paths: usize, seed: u64) -> PathEnsemble {
    let n = factor.l.nrows();
    let k = factor.l.ncols();
    let mut values = vec![0.0; n_paths * n];
    values.par_chunks_mut(n.max(1)).enumerate().for_each(|(p, row)| {
        let mut z = vec![0.0; k];
        rng::fill_normals(seed, p as u64, &mut z);
        for (i, out) in row.iter_mut().enumerate() {
            *out = (0..k).map(|j| factor.l[(i, j)] * z[j]).sum();
        }
    });
    let mut warnings = Vec::new();
    if factor.method == Factorization::EigenClip {
        warnings.push(format!(
            "eigen-clip factorization used; clipped eigenvalue mass {:.3e}",
            factor.clipped_mass
        ));
    }
    PathEnsemble { labels, n_paths, values, seed, warnings }
}

/// Mean-zero Gaussian rows with covariance `cov`.
pub fn sample_gaussian(
    cov: &DMatrix<f64>,
    labels: Vec<String>,
    n_paths: usize,
    seed: u64,
    method: Factorization,
) -> Result<PathEnsemble> {
    if n_paths == 0 {
        return Err(Error::input("n_paths must be at least 1"));
    }
    let factor = factorize(cov, method)?;
    Ok(sample_with_factor(&factor, labels, n_paths, seed))
}

/// Samples (X_{A_1}, …, X_{A_n}) with covariance [μ(A_i ∩ A_j)].
pub fn sample_field(spec: &FieldSpec, items: &[Region], n_paths: usize) -> Result<PathEnsemble> {
    let g = gram(&MeasureKernel { measure: spec.measure.clone() }, items)?;
    sample_gaussian(&g.entries, g.labels, n_paths, spec.seed, spec.factorization)
}

/// Σ α_i χ_{A_i} over pairwise disjoint regions.
#[derive(Debug, Clone, PartialEq)]
pub struct SimpleFunction {
    pub coeffs: Vec<f64>,
    pub regions: Vec<Region>,
}

impl SimpleFunction {
    pub fn new(coeffs: Vec<f64>, regions: Vec<Region>) -> Result<Self> {
        if coeffs.len() != regions.len() {
            return Err(Error::input("one coefficient per region is required"));
        }
        for i in 0..regions.len() {
            for j in i + 1..regions.len() {
                if !regions[i].is_disjoint(&regions[j]) {
                    return Err(Error::input(format!("regions {i} and {j} of a simple function overlap")));
                }
            }
        }
        Ok(SimpleFunction { coeffs, regions })
    }

    pub fn indicator(r: Region) -> Self {
        SimpleFunction { coeffs: vec![1.0], regions: vec![r] }
    }

    pub fn scaled(&self, a: f64) -> Self {
        SimpleFunction { coeffs: self.coeffs.iter().map(|c| c * a).collect(), regions: self.regions.clone() }
    }

    /// ⟨φ, ψ⟩_{L²(μ)} = Σ α_i β_j μ(A_i ∩ B_j).
    pub fn inner(&self, other: &SimpleFunction, m: &Measure) -> Result<f64> {
        let mut s = 0.0;
        for (a, ra) in self.coeffs.iter().zip(&self.regions) {
            for (b, rb) in other.coeffs.iter().zip(&other.regions) {
                s += a * b * m.intersection_measure(ra, rb)?;
            }
        }
        Ok(s)
    }

    /// ‖φ‖² = Σ α_i² μ(A_i).
    pub fn l2_norm_sq(&self, m: &Measure) -> Result<f64> {
        self.coeffs
            .iter()
            .zip(&self.regions)
            .map(|(a, r)| m.measure_of(r).map(|v| a * a * v))
            .sum()
    }

    /// Value of φ on a region contained in (at most) one of its regions.
    fn value_on(&self, atom: &Region) -> f64 {
        self.coeffs
            .iter()
            .zip(&self.regions)
            .filter(|(_, r)| !r.intersect(atom).is_empty())
            .map(|(a, _)| *a)
            .sum()
    }
}

/// X_φ = Σ α_i X_{A_i} per path. Ensemble columns must be φ's regions in order.
pub fn ito_integral(phi: &SimpleFunction, ensemble: &PathEnsemble) -> Result<Vec<f64>> {
    let expected: Vec<String> = phi.regions.iter().map(Region::label).collect();
    if expected != ensemble.labels {
        return Err(Error::input(format!(
            "ensemble columns {:?} do not match the regions {:?}",
            ensemble.labels, expected
        )));
    }
    Ok((0..ensemble.n_paths)
        .map(|p| ensemble.row(p).iter().zip(&phi.coeffs).map(|(x, a)| a * x).sum())
        .collect())
}

/// Coarsest family of disjoint regions refining every given region.
pub fn common_refinement(regions: &[&Region]) -> Result<Vec<Region>> {
    let all_points = regions.iter().all(|r| matches!(r, Region::Points(_)));
    let all_intervals = regions.iter().all(|r| matches!(r, Region::Intervals(_)));
    if all_points {
        let mut pts: Vec<f64> = regions
            .iter()
            .flat_map(|r| match r {
                Region::Points(p) => p.clone(),
                Region::Intervals(_) => unreachable!(),
            })
            .collect();
        pts.sort_by(f64::total_cmp);
        pts.dedup();
        return Ok(pts.into_iter().map(|x| Region::points(vec![x])).collect());
    }
    if !all_intervals {
        return Err(Error::input("cannot refine interval regions together with point regions"));
    }
    let mut ends: Vec<f64> = regions
        .iter()
        .flat_map(|r| match r {
            Region::Intervals(v) => v.iter().flat_map(|i| [i.lo, i.hi]).collect::<Vec<_>>(),
            Region::Points(_) => unreachable!(),
        })
        .collect();
    ends.sort_by(f64::total_cmp);
    ends.dedup();
    Ok(ends
        .windows(2)
        .map(|w| Interval::new(w[0], w[1]))
        .filter(|iv| {
            regions.iter().any(|r| match r {
                Region::Intervals(v) => v.iter().any(|i| i.lo <= iv.lo && iv.hi <= i.hi),
                Region::Points(_) => false,
            })
        })
        .map(|iv| Region::Intervals(vec![iv]))
        .collect())
}

/// Joint samples of X_{φ_1}, …, X_{φ_k}: one vector per function, one entry per path.
///
/// The field is drawn on the common refinement of all regions, where its values are
/// independent N(0, μ(cell)), and then summed.
pub fn sample_integrals(m: &Measure, fns: &[&SimpleFunction], n_paths: usize, seed: u64) -> Result<Vec<Vec<f64>>> {
    if n_paths == 0 {
        return Err(Error::input("n_paths must be at least 1"));
    }
    let regions: Vec<&Region> = fns.iter().flat_map(|f| f.regions.iter()).collect();
    let atoms = common_refinement(&regions)?;
    let sd: Vec<f64> = atoms.iter().map(|a| m.measure_of(a).map(f64::sqrt)).collect::<Result<_>>()?;
    let weights: Vec<Vec<f64>> = fns
        .iter()
        .map(|f| atoms.iter().zip(&sd).map(|(a, s)| f.value_on(a) * s).collect())
        .collect();
    let rows: Vec<Vec<f64>> = (0..n_paths)
        .into_par_iter()
        .map(|p| {
            let mut z = vec![0.0; atoms.len()];
            rng::fill_normals(seed, p as u64, &mut z);
            weights.iter().map(|w| w.iter().zip(&z).map(|(a, b)| a * b).sum()).collect()
        })
        .collect();
    Ok((0..fns.len()).map(|k| rows.iter().map(|r| r[k]).collect()).collect())
}

/// Σ_i X_{A_i}² per path, for columns on the cells of a partition.
pub fn quadratic_variation(ensemble: &PathEnsemble) -> Vec<f64> {
    (0..ensemble.n_paths).map(|p| ensemble.row(p).iter().map(|x| x * x).sum()).collect()
}

/// Monte Carlo view of the per-cell quadratic variation identities
/// E|μ(A) − X_A²|² = 2μ(A)² and E X_A⁴ = 3μ(A)².
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct QvCellReport {
    pub mass: f64,
    pub mse: MeanEstimate,
    pub mse_ratio: f64,
    pub fourth: MeanEstimate,
    pub fourth_ratio: f64,
}

pub fn qv_cell_check(spec: &FieldSpec, cell: &Region, n_paths: usize) -> Result<QvCellReport> {
    let ens = sample_field(spec, std::slice::from_ref(cell), n_paths)?;
    let mass = spec.measure.measure_of(cell)?;
    let x = ens.column(0);
    let mse = stats::mean_estimate(&x.iter().map(|v| (mass - v * v).powi(2)).collect::<Vec<_>>());
    let fourth = stats::mean_estimate(&x.iter().map(|v| v.powi(4)).collect::<Vec<_>>());
    Ok(QvCellReport {
        mass,
        mse_ratio: mse.mean / (2.0 * mass * mass),
        mse,
        fourth_ratio: fourth.mean / (3.0 * mass * mass),
        fourth,
    })
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct QvPartitionReport {
    pub parent_mass: f64,
    pub mesh: f64,
    pub qv_mean: MeanEstimate,
    /// Monte Carlo E|μ(B) − QV|².
    pub mse: MeanEstimate,
    /// Σ 2μ(A_i)².
    pub predicted_mse: f64,
}

pub fn qv_partition_check(spec: &FieldSpec, partition: &crate::measure::Partition, n_paths: usize) -> Result<QvPartitionReport> {
    let cells = partition.cell_regions();
    let masses: Vec<f64> = cells.iter().map(|c| spec.measure.measure_of(c)).collect::<Result<_>>()?;
    let parent_mass: f64 = masses.iter().sum();
    // cells are disjoint, so the field values are independent N(0, μ(A_i))
    let qv: Vec<f64> = (0..n_paths)
        .into_par_iter()
        .map(|p| {
            let mut z = vec![0.0; masses.len()];
            rng::fill_normals(spec.seed, p as u64, &mut z);
            z.iter().zip(&masses).map(|(z, m)| z * z * m).sum()
        })
        .collect();
    let mse = stats::mean_estimate(&qv.iter().map(|q| (parent_mass - q).powi(2)).collect::<Vec<_>>());
    Ok(QvPartitionReport {
        parent_mass,
        mesh: masses.iter().copied().fold(0.0, f64::max),
        qv_mean: stats::mean_estimate(&qv),
        mse,
        predicted_mse: masses.iter().map(|m| 2.0 * m * m).sum(),
    })
}

/// Joint law of the two fields in a cross-variation experiment.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Coupling {
    /// Independent driving noise for X^(μ) and X^(ν).
    Independent,
    /// X^(μ)_A = ∫_A √(dμ/dλ) dW and X^(ν)_A = ∫_A √(dν/dλ) dW for one white noise W.
    CommonNoise,
}

/// Density of a measure with respect to the reference measure λ.
pub type RelDensity<'a> = Option<&'a (dyn Fn(f64) -> f64 + Sync)>;

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CrossVariationReport {
    pub coupling: Coupling,
    pub per_path: Vec<f64>,
    pub mean: MeanEstimate,
    /// Expected value of the cross variation under the coupling.
    pub expected: f64,
    /// ∫_B √((dμ/dλ)(dν/dλ)) dλ.
    pub sqrt_density_limit: f64,
    /// max over paths of |⟨X,Y⟩ − ½(⟨X⟩ + ⟨Y⟩ − ⟨X−Y⟩)|.
    pub polarization_max_err: f64,
}

/// Σ_i X^(μ)_{A_i} X^(ν)_{A_i} per path.
pub fn cross_variation_sum(x: &PathEnsemble, y: &PathEnsemble) -> Result<Vec<f64>> {
    if x.n_items() != y.n_items() || x.n_paths != y.n_paths {
        return Err(Error::input("cross variation needs ensembles of equal shape"));
    }
    Ok((0..x.n_paths).map(|p| x.row(p).iter().zip(y.row(p)).map(|(a, b)| a * b).sum()).collect())
}

/// Largest per-path violation of the polarization identity on the computed sums.
pub fn polarization_error(x: &PathEnsemble, y: &PathEnsemble) -> Result<f64> {
    let xy = cross_variation_sum(x, y)?;
    let xx = quadratic_variation(x);
    let yy = quadratic_variation(y);
    let dd: Vec<f64> = (0..x.n_paths)
        .map(|p| x.row(p).iter().zip(y.row(p)).map(|(a, b)| (a - b).powi(2)).sum())
        .collect();
    Ok((0..x.n_paths)
        .map(|p| {
            let scale = xx[p].max(yy[p]).max(1.0);
            (xy[p] - 0.5 * (xx[p] + yy[p] - dd[p])).abs() / scale
        })
        .fold(0.0, f64::max))
}

/// Samples both fields on the cells of `partition` under `coupling` and reports the
/// cross variation together with its mesh-limit prediction. Densities are with
/// respect to Lebesgue measure on the partition's parent interval.
pub fn cross_variation(
    partition: &crate::measure::Partition,
    dmu: RelDensity<'_>,
    dnu: RelDensity<'_>,
    coupling: Coupling,
    n_paths: usize,
    seed: u64,
) -> Result<CrossVariationReport> {
    let (dmu, dnu) = match (dmu, dnu) {
        (Some(a), Some(b)) => (a, b),
        _ => return Err(Error::input("cross variation needs the densities of both measures w.r.t. λ")),
    };
    if n_paths == 0 {
        return Err(Error::input("n_paths must be at least 1"));
    }
    let tol = 1e-12;
    let cells = partition.cells();
    let mut var_mu = Vec::with_capacity(cells.len());
    let mut var_nu = Vec::with_capacity(cells.len());
    let mut cov = Vec::with_capacity(cells.len());
    for c in cells {
        var_mu.push(quadrature::adaptive(&|x| dmu(x), c.lo, c.hi, tol)?.value);
        var_nu.push(quadrature::adaptive(&|x| dnu(x), c.lo, c.hi, tol)?.value);
        cov.push(quadrature::adaptive(&|x| (dmu(x) * dnu(x)).max(0.0).sqrt(), c.lo, c.hi, tol)?.value);
    }
    let limit: f64 = cov.iter().sum();
    let n = cells.len();
    let labels: Vec<String> = partition.cell_regions().iter().map(Region::label).collect();
    let seed_nu = rng::derive_seed(seed, 1);
    let mut xv = vec![0.0; n_paths * n];
    let mut yv = vec![0.0; n_paths * n];
    xv.par_chunks_mut(n)
        .zip(yv.par_chunks_mut(n))
        .enumerate()
        .for_each(|(p, (xr, yr))| {
            let mut z = vec![0.0; n];
            rng::fill_normals(seed, p as u64, &mut z);
            let mut w = vec![0.0; n];
            rng::fill_normals(seed_nu, p as u64, &mut w);
            for i in 0..n {
                let sx = var_mu[i].sqrt();
                xr[i] = sx * z[i];
                yr[i] = match coupling {
                    Coupling::Independent => var_nu[i].sqrt() * w[i],
                    Coupling::CommonNoise => {
                        // 2×2 Cholesky of [[a, c], [c, b]]
                        if sx > 0.0 {
                            let l21 = cov[i] / sx;
                            let l22 = (var_nu[i] - l21 * l21).max(0.0).sqrt();
                            l21 * z[i] + l22 * w[i]
                        } else {
                            var_nu[i].sqrt() * z[i]
                        }
                    }
                };
            }
        });
    let x = PathEnsemble { labels: labels.clone(), n_paths, values: xv, seed, warnings: vec![] };
    let y = PathEnsemble { labels, n_paths, values: yv, seed: seed_nu, warnings: vec![] };
    let per_path = cross_variation_sum(&x, &y)?;
    Ok(CrossVariationReport {
        coupling,
        mean: stats::mean_estimate(&per_path),
        expected: match coupling {
            Coupling::Independent => 0.0,
            Coupling::CommonNoise => limit,
        },
        sqrt_density_limit: limit,
        polarization_max_err: polarization_error(&x, &y)?,
        per_path,
    })
}

/// Polynomial Σ c · x^e in several variables.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Polynomial {
    pub n_vars: usize,
    pub terms: Vec<(f64, Vec<u32>)>,
}

/// Variance guard for Monte Carlo polynomial moments.
pub const MAX_POLY_DEGREE: u32 = 8;

impl Polynomial {
    pub fn new(n_vars: usize, terms: Vec<(f64, Vec<u32>)>) -> Result<Self> {
        if terms.iter().any(|(_, e)| e.len() != n_vars) {
            return Err(Error::input("every monomial needs one exponent per variable"));
        }
        let p = Polynomial { n_vars, terms };
        if p.degree() > MAX_POLY_DEGREE {
            return Err(Error::input(format!(
                "polynomial degree {} exceeds the limit {MAX_POLY_DEGREE}",
                p.degree()
            )));
        }
        Ok(p)
    }

    /// x^k in one variable.
    pub fn monomial(k: u32) -> Result<Self> {
        Polynomial::new(1, vec![(1.0, vec![k])])
    }

    pub fn degree(&self) -> u32 {
        self.terms.iter().map(|(_, e)| e.iter().sum()).max().unwrap_or(0)
    }

    pub fn eval(&self, x: &[f64]) -> f64 {
        self.terms
            .iter()
            .map(|(c, e)| c * e.iter().zip(x).map(|(k, v)| v.powi(*k as i32)).product::<f64>())
            .sum()
    }

    pub fn partial(&self, i: usize) -> Polynomial {
        let terms = self
            .terms
            .iter()
            .filter(|(_, e)| e[i] > 0)
            .map(|(c, e)| {
                let mut e2 = e.clone();
                e2[i] -= 1;
                (c * e[i] as f64, e2)
            })
            .collect();
        Polynomial { n_vars: self.n_vars, terms }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct MomentCheck {
    pub lhs: f64,
    pub lhs_se: f64,
    pub rhs: f64,
    pub rhs_se: f64,
    /// Standard error of the paired difference lhs − rhs.
    pub combined_se: f64,
    pub n_se: f64,
    pub pass: bool,
}

/// Monte Carlo check of E(F X_ψ) = Σ_i E(∂_i p(X_φ)) ⟨φ_i, ψ⟩ for F = p(X_{φ_1}, …, X_{φ_n}).
pub fn gaussian_ibp_check(
    m: &Measure,
    p: &Polynomial,
    phis: &[SimpleFunction],
    psi: &SimpleFunction,
    n_paths: usize,
    seed: u64,
) -> Result<MomentCheck> {
    if phis.len() != p.n_vars {
        return Err(Error::input("one simple function per polynomial variable is required"));
    }
    if p.degree() > MAX_POLY_DEGREE {
        return Err(Error::input("polynomial degree exceeds the variance guard"));
    }
    let inner: Vec<f64> = phis.iter().map(|f| f.inner(psi, m)).collect::<Result<_>>()?;
    let grads: Vec<Polynomial> = (0..p.n_vars).map(|i| p.partial(i)).collect();
    let mut fns: Vec<&SimpleFunction> = phis.iter().collect();
    fns.push(psi);
    let samples = sample_integrals(m, &fns, n_paths, seed)?;
    let k = phis.len();
    let mut lhs = Vec::with_capacity(n_paths);
    let mut rhs = Vec::with_capacity(n_paths);
    let mut x = vec![0.0; k];
    for path in 0..n_paths {
        for (i, xi) in x.iter_mut().enumerate() {
            *xi = samples[i][path];
        }
        lhs.push(p.eval(&x) * samples[k][path]);
        rhs.push(grads.iter().zip(&inner).map(|(g, c)| g.eval(&x) * c).sum());
    }
    Ok(finish_check(&lhs, &rhs, None, 4.0))
}

fn finish_check(lhs: &[f64], rhs: &[f64], exact_rhs: Option<f64>, n_se: f64) -> MomentCheck {
    let l = stats::mean_estimate(lhs);
    let (rhs_mean, rhs_se, diff_se) = match exact_rhs {
        Some(v) => (v, 0.0, l.se),
        None => {
            let r = stats::mean_estimate(rhs);
            let d: Vec<f64> = lhs.iter().zip(rhs).map(|(a, b)| a - b).collect();
            (r.mean, r.se, stats::mean_estimate(&d).se)
        }
    };
    MomentCheck {
        lhs: l.mean,
        lhs_se: l.se,
        rhs: rhs_mean,
        rhs_se,
        combined_se: diff_se,
        n_se,
        pass: (l.mean - rhs_mean).abs() <= n_se * diff_se + 1e-12,
    }
}

/// (2n+1)!! = (2n+1)(2n−1)⋯3·1.
pub fn double_factorial_odd(n: u32) -> f64 {
    (0..=n).map(|k| (2 * k + 1) as f64).product()
}

/// Largest n accepted by the moment checks.
pub const MAX_MOMENT_N: u32 = 3;

/// E(X_φ^{2n+1} X_ψ) against ⟨φ,ψ⟩ ‖φ‖^{2n} (2n+1)!! (within 5 SE).
pub fn moment_identity_check(
    m: &Measure,
    n: u32,
    phi: &SimpleFunction,
    psi: &SimpleFunction,
    n_paths: usize,
    seed: u64,
) -> Result<MomentCheck> {
    if n > MAX_MOMENT_N {
        return Err(Error::input(format!("moment order n = {n} exceeds the variance guard {MAX_MOMENT_N}")));
    }
    let rhs = phi.inner(psi, m)? * phi.l2_norm_sq(m)?.powi(n as i32) * double_factorial_odd(n);
    let s = sample_integrals(m, &[phi, psi], n_paths, seed)?;
    let lhs: Vec<f64> = s[0].iter().zip(&s[1]).map(|(x, y)| x.powi(2 * n as i32 + 1) * y).collect();
    Ok(finish_check(&lhs, &[], Some(rhs), 5.0))
}

/// E(X_φ^{2n} X_ψ) against 0 (within 4 SE).
pub fn even_moment_check(
    m: &Measure,
    n: u32,
    phi: &SimpleFunction,
    psi: &SimpleFunction,
    n_paths: usize,
    seed: u64,
) -> Result<MomentCheck> {
    if n > MAX_MOMENT_N {
        return Err(Error::input(format!("moment order n = {n} exceeds the variance guard {MAX_MOMENT_N}")));
    }
    let s = sample_integrals(m, &[phi, psi], n_paths, seed)?;
    let lhs: Vec<f64> = s[0].iter().zip(&s[1]).map(|(x, y)| x.powi(2 * n as i32) * y).collect();
    Ok(finish_check(&lhs, &[], Some(0.0), 4.0))
}

/// Radon–Nikodym density dμ_f/dμ = Δf of μ_f(A) = ⟨χ_A, f⟩_E on a finite state
/// space, with the largest discrepancy over the supplied subsets and all singletons.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RadonNikodymReport {
    pub density: Vec<f64>,
    pub max_discrepancy: f64,
}

pub fn radon_nikodym_check(
    g: &crate::laplacian::WeightedGraph,
    f: &[f64],
    subsets: &[Vec<usize>],
) -> Result<RadonNikodymReport> {
    let density = g.laplacian_apply(f)?;
    let singletons: Vec<Vec<usize>> = (0..g.n()).map(|x| vec![x]).collect();
    let mut worst = 0.0_f64;
    for a in singletons.iter().chain(subsets) {
        let direct = g.energy_inner(&g.indicator(a)?, f)?;
        let via_density: f64 = a.iter().map(|&x| density[x] * g.mu()[x]).sum();
        worst = worst.max((direct - via_density).abs());
    }
    Ok(RadonNikodymReport { density, max_discrepancy: worst })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn leb() -> Measure {
        Measure::unit_lebesgue()
    }

    #[test]
    fn unit_variance_marginal() {
        let spec = FieldSpec::new(leb(), 11);
        let n = 40_000;
        let e = sample_field(&spec, &[Region::interval(0.0, 1.0)], n).unwrap();
        let v = stats::mean_estimate(&e.column(0)).var;
        assert!((v - 1.0).abs() < 4.0 / (n as f64).sqrt(), "{v}");
    }

    #[test]
    fn disjoint_regions_are_uncorrelated() {
        let spec = FieldSpec::new(leb(), 12);
        let e = sample_field(&spec, &[Region::interval(0.0, 0.5), Region::interval(0.5, 1.0)], 40_000).unwrap();
        let c = e.sample_cov(0, 1);
        assert!(c.mean.abs() < 4.0 * c.se, "{c:?}");
    }

    #[test]
    fn same_seed_same_ensemble() {
        let spec = FieldSpec::new(leb(), 99);
        let items = [Region::interval(0.0, 0.5), Region::interval(0.25, 0.75)];
        let a = sample_field(&spec, &items, 1000).unwrap();
        let b = sample_field(&spec, &items, 1000).unwrap();
        assert_eq!(a.values, b.values);
        let c = sample_field(&FieldSpec::new(leb(), 100), &items, 1000).unwrap();
        assert_ne!(a.values, c.values);
    }

    #[test]
    fn nested_duplicates_fall_back_to_eigen_clip() {
        let spec = FieldSpec::new(leb(), 1);
        let a = Region::interval(0.0, 0.5);
        let e = sample_field(&spec, &[a.clone(), a], 10).unwrap();
        assert_eq!(e.warnings.len(), 1);
        for p in 0..10 {
            let r = e.row(p);
            assert!((r[0] - r[1]).abs() < 1e-12);
        }
    }

    #[test]
    fn factorize_rejects_indefinite() {
        let c = DMatrix::from_row_slice(2, 2, &[1.0, 2.0, 2.0, 1.0]);
        assert!(matches!(factorize(&c, Factorization::Cholesky), Err(Error::Numeric { .. })));
    }

    #[test]
    fn ito_integral_examples() {
        let spec = FieldSpec::new(leb(), 3);
        let a = Region::interval(0.0, 0.5);
        let e = sample_field(&spec, std::slice::from_ref(&a), 100).unwrap();
        let x = ito_integral(&SimpleFunction::indicator(a.clone()), &e).unwrap();
        assert_eq!(x, e.column(0));
        let zero = ito_integral(&SimpleFunction::new(vec![0.0], vec![a]).unwrap(), &e).unwrap();
        assert!(zero.iter().all(|v| *v == 0.0));
        let wrong = SimpleFunction::indicator(Region::interval(0.0, 0.25));
        assert!(ito_integral(&wrong, &e).is_err());
    }

    #[test]
    fn ito_isometry_on_two_halves() {
        let m = leb();
        let phi = SimpleFunction::new(vec![1.0, 1.0], vec![Region::interval(0.0, 0.5), Region::interval(0.5, 1.0)]).unwrap();
        let spec = FieldSpec::new(m.clone(), 5);
        let e = sample_field(&spec, &phi.regions, 100_000).unwrap();
        let x = ito_integral(&phi, &e).unwrap();
        let sq: Vec<f64> = x.iter().map(|v| v * v).collect();
        let est = stats::mean_estimate(&sq);
        let target = phi.l2_norm_sq(&m).unwrap();
        assert_eq!(target, 1.0);
        assert!((est.mean - target).abs() < 4.0 * est.se, "{est:?}");
    }

    #[test]
    fn overlapping_simple_function_rejected() {
        let r = SimpleFunction::new(vec![1.0, 1.0], vec![Region::interval(0.0, 0.5), Region::interval(0.4, 1.0)]);
        assert!(r.is_err());
    }

    #[test]
    fn refinement_of_overlapping_regions() {
        let a = Region::interval(0.0, 0.5);
        let b = Region::interval(0.25, 0.75);
        let atoms = common_refinement(&[&a, &b]).unwrap();
        assert_eq!(atoms, vec![Region::interval(0.0, 0.25), Region::interval(0.25, 0.5), Region::interval(0.5, 0.75)]);
    }

    #[test]
    fn qv_single_cell_constants() {
        let spec = FieldSpec::new(leb(), 21);
        let r = qv_cell_check(&spec, &Region::interval(0.0, 1.0), 100_000).unwrap();
        assert!((0.9..1.1).contains(&r.mse_ratio), "{r:?}");
        assert!((0.9..1.1).contains(&r.fourth_ratio), "{r:?}");
    }

    #[test]
    fn polarization_is_algebraic() {
        let part = crate::measure::Partition::uniform(0.0, 1.0, 16).unwrap();
        let one = |_: f64| 1.0;
        let r = cross_variation(&part, Some(&one), Some(&one), Coupling::Independent, 500, 8).unwrap();
        assert!(r.polarization_max_err < 1e-12);
        assert!(r.mean.mean.abs() < 4.0 * r.mean.se);
        assert!(cross_variation(&part, None, Some(&one), Coupling::Independent, 10, 8).is_err());
    }

    #[test]
    fn polynomial_calculus() {
        let p = Polynomial::new(2, vec![(2.0, vec![2, 1]), (1.0, vec![0, 3])]).unwrap();
        assert_eq!(p.degree(), 3);
        assert_eq!(p.eval(&[2.0, 3.0]), 2.0 * 4.0 * 3.0 + 27.0);
        let d0 = p.partial(0);
        assert_eq!(d0.eval(&[2.0, 3.0]), 4.0 * 2.0 * 3.0);
        assert!(Polynomial::monomial(9).is_err());
    }

    #[test]
    fn double_factorials() {
        assert_eq!(double_factorial_odd(0), 1.0);
        assert_eq!(double_factorial_odd(1), 3.0);
        assert_eq!(double_factorial_odd(2), 15.0);
        assert_eq!(double_factorial_odd(3), 105.0);
    }

    #[test]
    fn moment_guard() {
        let phi = SimpleFunction::indicator(Region::interval(0.0, 1.0));
        assert!(moment_identity_check(&leb(), 4, &phi, &phi, 10, 1).is_err());
        let r = moment_identity_check(&leb(), 0, &phi, &phi, 10, 1).unwrap();
        assert_eq!(r.rhs, 1.0);
    }
}
