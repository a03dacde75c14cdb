//! Positive definite kernels on finite index families, Gram matrices, RKHS norms,
//! finite-sample membership bounds and densities against a base measure.

use std::fmt::Write as _;

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::measure::{Interval, Measure, Region};

/// Relative PD tolerance: min eigenvalue ≥ −PD_TOL · max|G|.
pub const PD_TOL: f64 = 1e-10;
/// Relative eigenvalue cutoff for the pseudo-inverse in [`membership_bound`].
pub const PINV_CLIP: f64 = 1e-12;
/// Default grid size for [`SignedMeasureElement`].
pub const DENSITY_GRID: usize = 4096;

/// A symmetric kernel on some index set.
pub trait Kernel {
    type Item;

    fn eval(&self, a: &Self::Item, b: &Self::Item) -> Result<f64>;

    fn label(&self, item: &Self::Item) -> String;
}

/// β_μ(A, B) = μ(A ∩ B) on regions.
#[derive(Debug, Clone)]
pub struct MeasureKernel {
    pub measure: Measure,
}

impl Kernel for MeasureKernel {
    type Item = Region;

    fn eval(&self, a: &Region, b: &Region) -> Result<f64> {
        self.measure.intersection_measure(a, b)
    }

    fn label(&self, item: &Region) -> String {
        item.label()
    }
}

/// Adapts a closure on points of the line.
pub struct PointKernel<F> {
    pub name: &'static str,
    pub f: F,
}

impl<F: Fn(f64, f64) -> f64> Kernel for PointKernel<F> {
    type Item = f64;

    fn eval(&self, a: &f64, b: &f64) -> Result<f64> {
        let v = (self.f)(*a, *b);
        if v.is_finite() {
            Ok(v)
        } else {
            Err(Error::numeric(format!("{} kernel is not finite at ({a}, {b})", self.name), v))
        }
    }

    fn label(&self, item: &f64) -> String {
        format!("{item}")
    }
}

/// Symmetric Gram matrix together with labels of its index items.
#[derive(Debug, Clone, PartialEq)]
pub struct GramMatrix {
    pub entries: DMatrix<f64>,
    pub labels: Vec<String>,
}

impl GramMatrix {
    pub fn new(entries: DMatrix<f64>, labels: Vec<String>) -> Result<Self> {
        if entries.nrows() != entries.ncols() || entries.nrows() != labels.len() {
            return Err(Error::input("Gram matrix must be square with one label per row"));
        }
        Ok(GramMatrix { entries, labels })
    }

    pub fn dim(&self) -> usize {
        self.entries.nrows()
    }

    pub fn max_abs(&self) -> f64 {
        self.entries.iter().fold(0.0_f64, |m, v| m.max(v.abs()))
    }

    /// CSV with a header row naming the index items.
    pub fn to_csv(&self) -> String {
        let mut out = String::new();
        out.push_str(&self.labels.iter().map(|l| csv_field(l)).collect::<Vec<_>>().join(","));
        out.push('\n');
        for i in 0..self.dim() {
            let row: Vec<String> = (0..self.dim()).map(|j| crate::io::fmt_f64(self.entries[(i, j)])).collect();
            let _ = writeln!(out, "{}", row.join(","));
        }
        out
    }
}

fn csv_field(s: &str) -> String {
    if s.contains([',', '"', '\n']) {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}

/// G[i][j] = k(items[i], items[j]); the upper triangle is evaluated and mirrored.
pub fn gram<K: Kernel>(k: &K, items: &[K::Item]) -> Result<GramMatrix> {
    if items.is_empty() {
        return Err(Error::input("gram needs at least one index item"));
    }
    let n = items.len();
    let mut g = DMatrix::zeros(n, n);
    for i in 0..n {
        for j in i..n {
            let v = k.eval(&items[i], &items[j]).map_err(|e| Error::KernelEval {
                i,
                j,
                reason: e.to_string(),
            })?;
            g[(i, j)] = v;
            g[(j, i)] = v;
        }
    }
    GramMatrix::new(g, items.iter().map(|x| k.label(x)).collect())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PdReport {
    pub is_pd: bool,
    pub min_eigenvalue: f64,
    pub scale: f64,
}

/// Positive semidefiniteness up to the relative tolerance `tol`.
pub fn check_pd(g: &GramMatrix, tol: f64) -> Result<PdReport> {
    if g.entries.iter().any(|v| !v.is_finite()) {
        return Err(Error::input("Gram matrix has non-finite entries"));
    }
    let scale = g.max_abs();
    let eig = SymmetricEigen::new(g.entries.clone());
    let min_eigenvalue = eig.eigenvalues.iter().copied().fold(f64::INFINITY, f64::min);
    Ok(PdReport {
        is_pd: min_eigenvalue >= -tol * scale,
        min_eigenvalue,
        scale,
    })
}

/// αᵀ G α = ‖Σ α_i k(x_i, ·)‖².
pub fn rkhs_norm_sq(g: &GramMatrix, coeffs: &[f64]) -> Result<f64> {
    if coeffs.len() != g.dim() {
        return Err(Error::input(format!(
            "coefficient vector has length {}, Gram matrix has dimension {}",
            coeffs.len(),
            g.dim()
        )));
    }
    let a = DVector::from_column_slice(coeffs);
    Ok((a.transpose() * &g.entries * &a)[(0, 0)])
}

/// Smallest C with |Σ α_i f(x_i)|² ≤ C αᵀGα for all α, i.e. valuesᵀ G⁺ values.
///
/// Eigenvalues below `PINV_CLIP · scale` are treated as zero. If `values` has a
/// component of relative size above `1e-8` along those null directions, no finite
/// C exists and [`Error::NotRepresentable`] carries the residual norm.
pub fn membership_bound(g: &GramMatrix, values: &[f64]) -> Result<f64> {
    if values.len() != g.dim() {
        return Err(Error::input("values and Gram matrix dimensions differ"));
    }
    let eig = SymmetricEigen::new(g.entries.clone());
    let scale = eig.eigenvalues.iter().fold(0.0_f64, |m, v| m.max(v.abs()));
    let y = DVector::from_column_slice(values);
    let mut bound = 0.0;
    let mut residual_sq = 0.0;
    for k in 0..g.dim() {
        let c = eig.eigenvectors.column(k).dot(&y);
        let lambda = eig.eigenvalues[k];
        if lambda > PINV_CLIP * scale {
            bound += c * c / lambda;
        } else {
            residual_sq += c * c;
        }
    }
    let residual = residual_sq.sqrt();
    if residual > 1e-8 * y.norm().max(1.0) {
        return Err(Error::NotRepresentable { residual });
    }
    Ok(bound)
}

/// The finitely additive set function A ↦ ∫_A φ dμ, with φ stored as cell values on
/// a grid over the base measure's domain (or per atom for atomic measures).
#[derive(Debug, Clone)]
pub struct SignedMeasureElement {
    base: Measure,
    cells: Vec<Region>,
    values: Vec<f64>,
    masses: Vec<f64>,
}

impl SignedMeasureElement {
    /// Samples φ at cell midpoints of a uniform `n_grid` grid (atoms for atomic bases).
    pub fn from_fn<F: Fn(f64) -> f64>(base: Measure, phi: F, n_grid: usize) -> Result<Self> {
        let (cells, points): (Vec<Region>, Vec<f64>) = match &base {
            Measure::Atomic { atoms } => atoms.iter().map(|a| (Region::points(vec![a.0]), a.0)).unzip(),
            _ => {
                if n_grid == 0 {
                    return Err(Error::input("density grid must have at least one cell"));
                }
                let (lo, hi) = base.domain();
                let h = (hi - lo) / n_grid as f64;
                (0..n_grid)
                    .map(|j| {
                        let a = lo + h * j as f64;
                        let b = if j + 1 == n_grid { hi } else { lo + h * (j + 1) as f64 };
                        (Region::Intervals(vec![Interval::new(a, b)]), 0.5 * (a + b))
                    })
                    .unzip()
            }
        };
        let values: Vec<f64> = points.iter().map(|x| phi(*x)).collect();
        if let Some(v) = values.iter().find(|v| !v.is_finite()) {
            return Err(Error::numeric("density is not finite on the grid", *v));
        }
        let masses = cells.iter().map(|c| base.measure_of(c)).collect::<Result<Vec<_>>>()?;
        Ok(SignedMeasureElement { base, cells, values, masses })
    }

    pub fn base(&self) -> &Measure {
        &self.base
    }

    /// m(r) = ∫_r φ dμ.
    pub fn eval(&self, r: &Region) -> Result<f64> {
        let hull = r.hull();
        let mut total = 0.0;
        for ((cell, v), mass) in self.cells.iter().zip(&self.values).zip(&self.masses) {
            if *v == 0.0 || *mass == 0.0 {
                continue;
            }
            if let (Some((a, b)), Some((c, d))) = (hull, cell.hull()) {
                if d < a || c > b {
                    continue;
                }
            }
            total += v * self.base.intersection_measure(cell, r)?;
        }
        Ok(total)
    }

    /// ∫ |φ|² dμ, the squared norm of m in the RKHS of β_μ.
    pub fn norm_sq(&self) -> f64 {
        self.values.iter().zip(&self.masses).map(|(v, m)| v * v * m).sum()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::shannon::sinc_kernel;

    fn sinc() -> PointKernel<fn(f64, f64) -> f64> {
        PointKernel { name: "sinc", f: sinc_kernel }
    }

    fn beta_two_regions() -> GramMatrix {
        let k = MeasureKernel { measure: Measure::unit_lebesgue() };
        gram(&k, &[Region::interval(0.0, 0.5), Region::interval(0.25, 0.75)]).unwrap()
    }

    #[test]
    fn gram_examples() {
        let g = beta_two_regions();
        assert_eq!(g.entries, DMatrix::from_row_slice(2, 2, &[0.5, 0.25, 0.25, 0.5]));

        let s = gram(&sinc(), &[0.0, 1.0, 2.0]).unwrap();
        assert!((s.entries.clone() - DMatrix::identity(3, 3)).abs().max() < 1e-15);

        let model = crate::fbm::HurstModel::new(0.5).unwrap();
        let fbm = PointKernel { name: "fbm", f: |s: f64, t: f64| model.covariance(s, t).unwrap() };
        let f = gram(&fbm, &[1.0, 2.0]).unwrap();
        assert_eq!(f.entries, DMatrix::from_row_slice(2, 2, &[1.0, 1.0, 1.0, 2.0]));
    }

    #[test]
    fn gram_reports_the_offending_pair() {
        let k = MeasureKernel { measure: Measure::unit_lebesgue() };
        let err = gram(&k, &[Region::interval(0.0, 0.5), Region::interval(0.5, 2.0)]).unwrap_err();
        assert!(matches!(err, Error::KernelEval { i: 0, j: 1, .. }), "{err:?}");
        assert!(gram(&k, &[]).is_err());
    }

    #[test]
    fn pd_examples() {
        let id = GramMatrix::new(DMatrix::identity(3, 3), vec!["a".into(), "b".into(), "c".into()]).unwrap();
        let r = check_pd(&id, PD_TOL).unwrap();
        assert!(r.is_pd);
        assert!((r.min_eigenvalue - 1.0).abs() < 1e-15);

        let bad = GramMatrix::new(DMatrix::from_row_slice(2, 2, &[1.0, 2.0, 2.0, 1.0]), vec!["a".into(), "b".into()]).unwrap();
        let r = check_pd(&bad, PD_TOL).unwrap();
        assert!(!r.is_pd);
        assert!((r.min_eigenvalue + 1.0).abs() < 1e-14);

        let nan = GramMatrix::new(DMatrix::from_row_slice(1, 1, &[f64::NAN]), vec!["a".into()]).unwrap();
        assert!(matches!(check_pd(&nan, PD_TOL), Err(Error::Input(_))));
    }

    #[test]
    fn norm_examples() {
        let id = GramMatrix::new(DMatrix::identity(2, 2), vec!["a".into(), "b".into()]).unwrap();
        assert_eq!(rkhs_norm_sq(&id, &[1.0, 1.0]).unwrap(), 2.0);
        assert_eq!(rkhs_norm_sq(&id, &[0.0, 0.0]).unwrap(), 0.0);
        assert!(rkhs_norm_sq(&id, &[1.0]).is_err());
        // oracle: 0.5 - 0.25 - 0.25 + 0.5
        let g = beta_two_regions();
        assert_eq!(rkhs_norm_sq(&g, &[1.0, -1.0]).unwrap(), 0.5);
    }

    #[test]
    fn membership_examples() {
        let g = beta_two_regions();
        let row: Vec<f64> = g.entries.row(1).iter().copied().collect();
        assert!((membership_bound(&g, &row).unwrap() - g.entries[(1, 1)]).abs() < 1e-12);
        assert_eq!(membership_bound(&g, &[0.0, 0.0]).unwrap(), 0.0);

        let s = gram(&sinc(), &[0.0, 1.0, 2.0]).unwrap();
        assert!((membership_bound(&s, &[1.0, 1.0, 0.0]).unwrap() - 2.0).abs() < 1e-12);
    }

    #[test]
    fn membership_rejects_values_outside_the_range() {
        // A listed twice: the Gram is singular and (1, 0) is not in its column space.
        let k = MeasureKernel { measure: Measure::unit_lebesgue() };
        let a = Region::interval(0.0, 0.5);
        let g = gram(&k, &[a.clone(), a]).unwrap();
        assert!(matches!(membership_bound(&g, &[1.0, 0.0]), Err(Error::NotRepresentable { .. })));
        assert!((membership_bound(&g, &[1.0, 1.0]).unwrap() - 2.0).abs() < 1e-12);
    }

    #[test]
    fn csv_export_has_header() {
        let csv = beta_two_regions().to_csv();
        let mut lines = csv.lines();
        assert_eq!(lines.next().unwrap(), "[0;0.5),[0.25;0.75)");
        assert_eq!(lines.count(), 2);
    }

    #[test]
    fn signed_measure_examples() {
        let leb = Measure::unit_lebesgue();
        let one = SignedMeasureElement::from_fn(leb.clone(), |_| 1.0, DENSITY_GRID).unwrap();
        assert!((one.eval(&Region::interval(0.0, 0.5)).unwrap() - 0.5).abs() < 1e-14);
        assert!((one.norm_sq() - 1.0).abs() < 1e-14);

        let id = SignedMeasureElement::from_fn(leb, |x| x, DENSITY_GRID).unwrap();
        assert!((id.eval(&Region::interval(0.0, 1.0)).unwrap() - 0.5).abs() < 1e-14);
        assert!((id.norm_sq() - 1.0 / 3.0).abs() < 1e-7);

        let indicator = |x: f64| if (0.0..=1.0).contains(&x) { 1.0 } else { 0.0 };
        let staircase = SignedMeasureElement::from_fn(Measure::cantor(), indicator, DENSITY_GRID).unwrap();
        assert!((staircase.eval(&Region::interval(0.0, 1.0)).unwrap() - 1.0).abs() < 1e-12);
        assert!((staircase.norm_sq() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn signed_measure_on_atoms() {
        let comb = Measure::dirac_comb(3);
        let e = SignedMeasureElement::from_fn(comb, |x| x, 0).unwrap();
        assert_eq!(e.eval(&Region::points(vec![1.0, 2.0])).unwrap(), 3.0);
        assert_eq!(e.norm_sq(), 28.0);
    }

    #[test]
    fn non_finite_density_is_a_numeric_error() {
        let r = SignedMeasureElement::from_fn(Measure::unit_lebesgue(), |x| 1.0 / (x - 0.5 / 4096.0), 4096);
        assert!(matches!(r, Err(Error::Numeric { .. })));
    }
}
