//! Fractional Brownian motion: closed-form and spectral covariance, the
//! moving-average factor kernel l_t, its Itô-grid discretization, the split into
//! backward and forward parts, and the generalized Paley–Wiener norm.

use std::f64::consts::PI;

use nalgebra::{Complex, DMatrix, DVector};
use serde::{Deserialize, Serialize};
use statrs::function::gamma::gamma;

use crate::error::{Error, Result};
use crate::field::{self, CovFactor, Factorization, PathEnsemble};
use crate::kernels::GramMatrix;
use crate::quadrature::{self, Integral};

/// Hurst parameter with its precomputed constants.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HurstModel {
    pub h: f64,
    /// 1/Γ(H + 1/2).
    pub gamma_const: f64,
    /// sin(πH) Γ(1 + 2H) / (2π), the constant of the spectral density |λ|^{1−2H}.
    pub spectral_const: f64,
}

impl HurstModel {
    pub fn new(h: f64) -> Result<Self> {
        if !(h > 0.0 && h < 1.0) {
            return Err(Error::domain(format!("Hurst parameter must lie in (0, 1), got {h}")));
        }
        Ok(HurstModel {
            h,
            // Γ(1) = 1 exactly; the library gamma is a few ulps off there
            gamma_const: if h == 0.5 { 1.0 } else { 1.0 / gamma(h + 0.5) },
            spectral_const: (PI * h).sin() * gamma(1.0 + 2.0 * h) / (2.0 * PI),
        })
    }

    /// ½(s^{2H} + t^{2H} − |s − t|^{2H}).
    pub fn covariance(&self, s: f64, t: f64) -> Result<f64> {
        if s < 0.0 || t < 0.0 {
            return Err(Error::domain(format!("fBM times must be non-negative, got ({s}, {t})")));
        }
        if self.h == 0.5 {
            // same value, without the rounding of the three-term sum
            return Ok(s.min(t));
        }
        let e = 2.0 * self.h;
        Ok(0.5 * (s.powf(e) + t.powf(e) - (s - t).abs().powf(e)))
    }

    /// Spectral density of μ^(H) with respect to dλ.
    pub fn spectral_density(&self, lambda: f64) -> f64 {
        self.spectral_const * lambda.abs().powf(1.0 - 2.0 * self.h)
    }

    pub fn is_brownian(&self) -> bool {
        self.h == 0.5
    }

    /// Covariance by quadrature of ∫ (e^{iλs}−1)(e^{−iλt}−1)/λ² dμ^(H)(λ).
    ///
    /// The real even integrand 2(1 − cos λs − cos λt + cos λ(s−t)) λ^{−1−2H} is
    /// integrated on [0, L] (adaptive first panel for the λ^{1−2H} behaviour at 0,
    /// quarter-period panels after it) and beyond L by the asymptotic expansion of
    /// ∫_L^∞ e^{iaλ} λ^{−p} dλ. L is doubled until two successive values agree to
    /// `tol` (relative).
    pub fn spectral_covariance(&self, s: f64, t: f64, tol: f64) -> Result<Integral> {
        if s < 0.0 || t < 0.0 {
            return Err(Error::domain(format!("fBM times must be non-negative, got ({s}, {t})")));
        }
        if s == 0.0 || t == 0.0 {
            return Ok(Integral { value: 0.0, error: 0.0 });
        }
        let d = (s - t).abs();
        let p = 1.0 + 2.0 * self.h;
        // A(λ) = 2 sin²(λs/2) + 2 sin²(λt/2) − 2 sin²(λd/2), stable for small λ
        let integrand = |l: f64| {
            if l == 0.0 {
                return 0.0;
            }
            let a = 2.0 * (0.5 * l * s).sin().powi(2) + 2.0 * (0.5 * l * t).sin().powi(2)
                - 2.0 * (0.5 * l * d).sin().powi(2);
            a * l.powf(-p)
        };
        // (coefficient, frequency) with A(λ) = Σ c cos(aλ)
        let mut terms = vec![(1.0, 0.0), (-1.0, s), (-1.0, t)];
        terms.push((1.0, d));
        let a_max = s.max(t);
        let a_min = terms.iter().map(|x| x.1).filter(|a| *a > 0.0).fold(f64::INFINITY, f64::min);
        let width = PI / (2.0 * a_max);

        let head = quadrature::adaptive(&integrand, 0.0, width, 1e-13)?;
        let mut upper = width;
        let mut body = head.value;
        let mut l_target = (100.0 / a_min).max(50.0 * width);
        let mut prev: Option<f64> = None;
        for _ in 0..10 {
            while upper < l_target {
                body += quadrature::gl16(&integrand, upper, upper + width);
                upper += width;
            }
            let tail: f64 = terms.iter().map(|(c, a)| c * cos_tail(*a, upper, p)).sum();
            let total = body + tail;
            if let Some(pv) = prev {
                let err = (total - pv).abs();
                if err <= tol * total.abs().max(1e-300) {
                    return Ok(Integral { value: 2.0 * self.spectral_const * total, error: 2.0 * self.spectral_const * (err + head.error) });
                }
            }
            prev = Some(total);
            l_target = 2.0 * upper;
        }
        Err(Error::numeric("spectral covariance did not converge under interval doubling", prev.unwrap_or(f64::NAN)))
    }
}

/// ∫_L^∞ cos(aλ) λ^{−p} dλ (a = 0 allowed).
fn cos_tail(a: f64, l: f64, p: f64) -> f64 {
    if a == 0.0 {
        return l.powf(1.0 - p) / (p - 1.0);
    }
    // ∫_L^∞ e^{iaλ} λ^{−p} dλ = −(e^{iaL}/(ia)) L^{−p} Σ_k (p)_k / (iaL)^k
    let ial = Complex::new(0.0, a * l);
    let mut term = Complex::new(1.0, 0.0);
    let mut sum = term;
    let mut last = f64::INFINITY;
    for k in 0..60 {
        term = term * (p + k as f64) / ial;
        let m = term.norm();
        if m > last {
            break;
        }
        sum += term;
        last = m;
        if m < 1e-18 {
            break;
        }
    }
    let pre = -Complex::new(0.0, a * l).exp() / Complex::new(0.0, a) * l.powf(-p);
    (pre * sum).re
}

/// Constant in front of the factor kernel.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "kebab-case")]
pub enum Normalization {
    /// 1/Γ(H+1/2); then ∫ l_t² dx = t^{2H} / (Γ(2H+1) sin πH).
    Gamma,
    /// √(Γ(2H+1) sin πH) / Γ(H+1/2), so that ∫ l_s l_t dx = ½(s^{2H}+t^{2H}−|s−t|^{2H}).
    #[default]
    UnitVariance,
}

/// Value of l_t(x), which may be an integrable singularity.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum KernelValue {
    Finite(f64),
    Singular,
}

impl KernelValue {
    pub fn finite(self) -> Option<f64> {
        match self {
            KernelValue::Finite(v) => Some(v),
            KernelValue::Singular => None,
        }
    }
}

/// The kernel l_t(x) = c[χ_{(−∞,0]}(x)((t−x)^{H−½} − (−x)^{H−½}) + χ_{[0,t]}(x)(t−x)^{H−½}].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FactorKernel {
    pub model: HurstModel,
    pub normalization: Normalization,
    /// Budget for the neglected part of the (−∞, 0] tail.
    pub tail_budget: f64,
    /// Largest truncation point allowed for the (−∞, 0] integral.
    pub x_max_cap: f64,
}

/// Factorization Gram with per-entry error estimates.
#[derive(Debug, Clone)]
pub struct FactorGram {
    pub gram: GramMatrix,
    pub errors: DMatrix<f64>,
    /// Truncation point of the (−∞, 0] integrals.
    pub x_max: f64,
}

impl FactorKernel {
    pub fn new(model: HurstModel) -> Self {
        FactorKernel { model, normalization: Normalization::UnitVariance, tail_budget: 1e-8, x_max_cap: 1e12 }
    }

    pub fn with_normalization(model: HurstModel, normalization: Normalization) -> Self {
        FactorKernel { normalization, ..FactorKernel::new(model) }
    }

    fn alpha(&self) -> f64 {
        self.model.h - 0.5
    }

    pub fn norm_const(&self) -> f64 {
        let h = self.model.h;
        match self.normalization {
            Normalization::Gamma => self.model.gamma_const,
            Normalization::UnitVariance if h == 0.5 => 1.0,
            Normalization::UnitVariance => (gamma(2.0 * h + 1.0) * (PI * h).sin()).sqrt() * self.model.gamma_const,
        }
    }

    /// (l_t^−(x), l_t^+(x)).
    pub fn parts(&self, t: f64, x: f64) -> Result<(KernelValue, KernelValue)> {
        if t < 0.0 {
            return Err(Error::domain(format!("time must be non-negative, got {t}")));
        }
        let a = self.alpha();
        let c = self.norm_const();
        // the two indicator supports share the null set {0}; it is assigned to l^+
        let minus = if x >= 0.0 || t == 0.0 {
            KernelValue::Finite(0.0)
        } else {
            let y = -x;
            KernelValue::Finite(c * y.powf(a) * (a * (t / y).ln_1p()).exp_m1())
        };
        let plus = if x < 0.0 || x > t {
            KernelValue::Finite(0.0)
        } else if x == t && a < 0.0 {
            KernelValue::Singular
        } else if a == 0.0 {
            KernelValue::Finite(c)
        } else {
            KernelValue::Finite(c * (t - x).powf(a))
        };
        Ok((minus, plus))
    }

    /// l_t(x).
    pub fn eval(&self, t: f64, x: f64) -> Result<KernelValue> {
        Ok(match self.parts(t, x)? {
            (KernelValue::Finite(a), KernelValue::Finite(b)) => KernelValue::Finite(a + b),
            _ => KernelValue::Singular,
        })
    }

    /// ∫_{−∞}^0 l_s^− l_t^− dx with its error estimate; zero at H = 1/2.
    pub fn integral_minus(&self, s: f64, t: f64) -> Result<(Integral, f64)> {
        let a = self.alpha();
        let c2 = self.norm_const().powi(2);
        if s == 0.0 || t == 0.0 || a == 0.0 {
            return Ok((Integral { value: 0.0, error: 0.0 }, 0.0));
        }
        // g_u(y) = (u+y)^a − y^a = y^a expm1(a ln1p(u/y))
        let g = |u: f64, y: f64| y.powf(a) * (a * (u / y).ln_1p()).exp_m1();
        let f = |y: f64| if y == 0.0 { 0.0 } else { g(s, y) * g(t, y) };
        let scale = s.max(t);

        // Tail beyond X: α² s t y^{2a−2}[1 + (a−1)(s+t)/(2y)], integrated exactly.
        let lead = a * a * s * t;
        let tail_at = |x: f64| {
            lead * (x.powf(2.0 * a - 1.0) / (1.0 - 2.0 * a)
                + (a - 1.0) * (s + t) / 2.0 * x.powf(2.0 * a - 2.0) / (2.0 - 2.0 * a))
        };
        let next_order = |x: f64| lead * (s + t).powi(2) * x.powf(2.0 * a - 3.0) / (3.0 - 2.0 * a);
        let mut x_max = 1e4 * scale;
        while c2 * next_order(x_max) > self.tail_budget {
            x_max *= 4.0;
            if x_max > self.x_max_cap {
                return Err(Error::numeric(
                    "fBM (−∞,0] tail exceeds its budget at the truncation cap",
                    c2 * next_order(self.x_max_cap),
                ));
            }
        }
        let near = quadrature::adaptive(&f, 0.0, scale, 1e-14)?;
        // log-spaced panels on [scale, x_max]
        let fz = |z: f64| {
            let y = z.exp();
            f(y) * y
        };
        let far = quadrature::adaptive(&fz, scale.ln(), x_max.ln(), 1e-14)?;
        let value = c2 * (near.value + far.value + tail_at(x_max));
        let error = c2 * (near.error + far.error + next_order(x_max));
        Ok((Integral { value, error }, x_max))
    }

    /// ∫_0^{s∧t} l_s^+ l_t^+ dx, singularity handled by substituting v = u^{a+1}.
    pub fn integral_plus(&self, s: f64, t: f64) -> Result<Integral> {
        let a = self.alpha();
        let c2 = self.norm_const().powi(2);
        let m = s.min(t);
        let d = (s - t).abs();
        if m == 0.0 {
            return Ok(Integral { value: 0.0, error: 0.0 });
        }
        if d == 0.0 || a == 0.0 {
            return Ok(Integral { value: c2 * m.powf(2.0 * a + 1.0) / (2.0 * a + 1.0), error: 0.0 });
        }
        // ∫_0^m u^a (u+d)^a du = (1/(a+1)) ∫_0^{m^{a+1}} (v^{1/(a+1)} + d)^a dv
        let q = 1.0 / (a + 1.0);
        let f = |v: f64| (v.powf(q) + d).powf(a);
        let r = quadrature::adaptive(&f, 0.0, m.powf(a + 1.0), 1e-14)?;
        Ok(Integral { value: c2 * q * r.value, error: c2 * q * r.error })
    }

    /// G[i][j] = ∫ l_{t_i} l_{t_j} dx.
    pub fn factorization_gram(&self, times: &[f64]) -> Result<FactorGram> {
        check_times(times, false)?;
        let n = times.len();
        let mut g = DMatrix::zeros(n, n);
        let mut e = DMatrix::zeros(n, n);
        let mut x_max: f64 = 0.0;
        for i in 0..n {
            for j in i..n {
                let (minus, xm) = self.integral_minus(times[i], times[j])?;
                let plus = self.integral_plus(times[i], times[j])?;
                x_max = x_max.max(xm);
                g[(i, j)] = minus.value + plus.value;
                g[(j, i)] = g[(i, j)];
                e[(i, j)] = minus.error + plus.error;
                e[(j, i)] = e[(i, j)];
            }
        }
        let labels = times.iter().map(|t| format!("t={t}")).collect();
        Ok(FactorGram { gram: GramMatrix::new(g, labels)?, errors: e, x_max })
    }

    /// Piecewise-constant (cell-average) discretization of l_t against white noise.
    pub fn ito_grid(&self, times: &[f64], spec: &GridSpec) -> Result<ItoGrid> {
        check_times(times, true)?;
        let t_max = times.iter().copied().fold(0.0, f64::max);
        if t_max == 0.0 {
            return Err(Error::input("Itô grid needs a positive time"));
        }
        if spec.cells_per_unit == 0 || spec.ratio <= 1.0 {
            return Err(Error::input("grid needs cells_per_unit ≥ 1 and ratio > 1"));
        }
        let a = self.alpha();
        let c = self.norm_const();
        let n_pos = ((t_max * spec.cells_per_unit as f64).ceil() as usize).max(1);
        let h = t_max / n_pos as f64;
        let mut pos: Vec<f64> = (0..=n_pos).map(|k| if k == n_pos { t_max } else { h * k as f64 }).collect();
        pos.extend(times.iter().copied().filter(|t| *t > 0.0));
        pos.sort_by(f64::total_cmp);
        pos.dedup();

        // Leading tail of ∫ (l_t^−)², used to place the truncation point.
        let mut neg = vec![0.0];
        if a != 0.0 {
            let x_max = (c * c * a * a * t_max * t_max / ((1.0 - 2.0 * a) * spec.tail_budget))
                .powf(1.0 / (1.0 - 2.0 * a))
                .clamp(10.0 * t_max, spec.x_max_cap);
            let mut y = h;
            while y < x_max {
                neg.push(y);
                y *= spec.ratio;
            }
            neg.push(x_max);
        }
        let mut cells: Vec<(f64, f64)> = neg.windows(2).rev().map(|w| (-w[1], -w[0])).collect();
        let n_neg = cells.len();
        cells.extend(pos.windows(2).map(|w| (w[0], w[1])));

        let anti = |u: f64| -> f64 {
            // ∫ (u)^a du antiderivative, u ≥ 0
            if u == 0.0 { 0.0 } else { u.powf(a + 1.0) / (a + 1.0) }
        };
        // G_t(y) = ((t+y)^{a+1} − y^{a+1})/(a+1)
        let g_minus = |t: f64, y: f64| -> f64 {
            if y == 0.0 {
                t.powf(a + 1.0) / (a + 1.0)
            } else {
                y.powf(a + 1.0) * ((a + 1.0) * (t / y).ln_1p()).exp_m1() / (a + 1.0)
            }
        };
        let mut coef = DMatrix::zeros(times.len(), cells.len());
        for (i, &t) in times.iter().enumerate() {
            if t == 0.0 {
                continue;
            }
            for (j, &(lo, hi)) in cells.iter().enumerate() {
                let w = hi - lo;
                let integral = if j < n_neg {
                    if a == 0.0 { 0.0 } else { c * (g_minus(t, -lo) - g_minus(t, -hi)) }
                } else if lo >= t {
                    0.0
                } else {
                    let b = hi.min(t);
                    c * (anti(t - lo) - anti(t - b))
                };
                coef[(i, j)] = integral / w.sqrt();
            }
        }
        Ok(ItoGrid { times: times.to_vec(), cells, n_neg, coef })
    }

    /// Quantifies E(X_t^+ | F([0,s])) = X_s^+ on an Itô grid: the Gaussian-space norm
    /// of (projection of X_t^+ onto the W-increments of [0,s]) − X_s^+.
    pub fn semimartingale_check(&self, s: f64, t: f64, n_cells: usize) -> Result<SemimartingaleReport> {
        if !(s > 0.0 && s <= t) {
            return Err(Error::domain(format!("need 0 < s ≤ t, got s = {s}, t = {t}")));
        }
        if n_cells < 2 {
            return Err(Error::input("grid too coarse: need at least two cells"));
        }
        let spec = GridSpec { cells_per_unit: ((n_cells as f64 / t).ceil() as usize).max(1), ..GridSpec::default() };
        let grid = self.ito_grid(&[s, t], &spec)?;
        let inside: Vec<usize> = (grid.n_neg..grid.cells.len()).filter(|&j| grid.cells[j].1 <= s).collect();
        if inside.len() < 2 {
            return Err(Error::input("grid too coarse: fewer than two cells in [0, s]"));
        }
        let widths: Vec<f64> = inside.iter().map(|&j| grid.cells[j].1 - grid.cells[j].0).collect();
        let (wmin, wmax) = widths.iter().fold((f64::INFINITY, 0.0_f64), |(a, b), w| (a.min(*w), b.max(*w)));
        if wmax / wmin > 1e12 {
            return Err(Error::numeric("increment covariance is ill-conditioned", wmax / wmin));
        }
        // Cov(ΔW_j, ΔW_k) = δ_jk w_j and Cov(X_t^+, ΔW_j) = coef[t, j] √w_j
        let k = inside.len();
        let cov_inc = DMatrix::from_diagonal(&DVector::from_column_slice(&widths));
        let cross = DVector::from_iterator(k, inside.iter().zip(&widths).map(|(&j, w)| grid.coef[(1, j)] * w.sqrt()));
        let beta = cov_inc
            .cholesky()
            .ok_or_else(|| Error::numeric("increment covariance is singular", wmin))?
            .solve(&cross);
        // projection − X_s^+ = Σ_j (β_j − b_j) ΔW_j with b_j the coefficient of X_s^+
        let residual_sq: f64 = inside
            .iter()
            .zip(&widths)
            .zip(beta.iter())
            .map(|((&j, w), bj)| (bj - grid.coef[(0, j)] / w.sqrt()).powi(2) * w)
            .sum();
        Ok(SemimartingaleReport { s, t, n_cells: k, residual: residual_sq.sqrt() })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SemimartingaleReport {
    pub s: f64,
    pub t: f64,
    pub n_cells: usize,
    pub residual: f64,
}

fn check_times(times: &[f64], sorted: bool) -> Result<()> {
    if times.is_empty() {
        return Err(Error::input("need at least one time"));
    }
    if let Some(t) = times.iter().find(|t| !(**t >= 0.0) || !t.is_finite()) {
        return Err(Error::domain(format!("times must be finite and non-negative, got {t}")));
    }
    if sorted && times.windows(2).any(|w| w[1] < w[0]) {
        return Err(Error::input("times must be sorted ascending"));
    }
    Ok(())
}

/// Layout of the Itô grid.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GridSpec {
    /// Uniform cells per unit time on [0, t_max].
    pub cells_per_unit: usize,
    /// Geometric growth of the cells on (−X_max, 0].
    pub ratio: f64,
    /// Budget for the neglected (−∞, −X_max) variance.
    pub tail_budget: f64,
    pub x_max_cap: f64,
}

impl Default for GridSpec {
    fn default() -> Self {
        GridSpec { cells_per_unit: 256, ratio: 1.05, tail_budget: 1e-4, x_max_cap: 1e8 }
    }
}

/// X_t ≈ Σ_j coef[t, j] Z_j with Z_j i.i.d. N(0,1), one per cell.
#[derive(Debug, Clone)]
pub struct ItoGrid {
    pub times: Vec<f64>,
    /// Cells `(lo, hi)` ordered from −X_max to t_max; the first `n_neg` lie in (−∞, 0].
    pub cells: Vec<(f64, f64)>,
    pub n_neg: usize,
    pub coef: DMatrix<f64>,
}

impl ItoGrid {
    pub fn covariance(&self) -> DMatrix<f64> {
        &self.coef * self.coef.transpose()
    }

    pub fn covariance_minus(&self) -> DMatrix<f64> {
        let m = self.coef.columns(0, self.n_neg);
        &m * m.transpose()
    }

    pub fn covariance_plus(&self) -> DMatrix<f64> {
        let m = self.coef.columns(self.n_neg, self.cells.len() - self.n_neg);
        &m * m.transpose()
    }

    /// max |grid covariance − closed form|.
    pub fn bias_bound(&self, model: &HurstModel) -> Result<f64> {
        let c = self.covariance();
        let mut worst = 0.0_f64;
        for (i, s) in self.times.iter().enumerate() {
            for (j, t) in self.times.iter().enumerate() {
                worst = worst.max((c[(i, j)] - model.covariance(*s, *t)?).abs());
            }
        }
        Ok(worst)
    }

    fn sample_columns(&self, cols: std::ops::Range<usize>, n_paths: usize, seed: u64, labels: Vec<String>) -> PathEnsemble {
        // Z for all cells is drawn per path, so disjoint column ranges share nothing.
        let full = self.coef.clone();
        let mut masked = DMatrix::zeros(full.nrows(), full.ncols());
        for j in cols {
            masked.set_column(j, &full.column(j));
        }
        let factor = CovFactor { l: masked, method: Factorization::Cholesky, clipped_mass: 0.0, min_eigenvalue: None };
        field::sample_with_factor(&factor, labels, n_paths, seed)
    }
}

fn time_labels(times: &[f64]) -> Vec<String> {
    times.iter().map(|t| format!("t={t}")).collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum FbmMethod {
    Cholesky,
    ItoGrid,
}

#[derive(Debug, Clone)]
pub struct FbmSimulation {
    pub ensemble: PathEnsemble,
    /// max |implied covariance − closed form| (ito-grid only).
    pub grid_bias: Option<f64>,
}

/// Samples fBM at `times` either by factoring [K^H(t_i, t_j)] or by the Itô grid.
pub fn simulate_fbm(
    model: &HurstModel,
    times: &[f64],
    n_paths: usize,
    method: FbmMethod,
    seed: u64,
    grid: &GridSpec,
) -> Result<FbmSimulation> {
    check_times(times, true)?;
    if n_paths == 0 {
        return Err(Error::input("n_paths must be at least 1"));
    }
    match method {
        FbmMethod::Cholesky => {
            let n = times.len();
            let cov = DMatrix::from_fn(n, n, |i, j| model.covariance(times[i], times[j]).unwrap_or(f64::NAN));
            let ensemble = field::sample_gaussian(&cov, time_labels(times), n_paths, seed, Factorization::Cholesky)?;
            Ok(FbmSimulation { ensemble, grid_bias: None })
        }
        FbmMethod::ItoGrid => {
            let fk = FactorKernel::new(*model);
            let g = fk.ito_grid(times, grid)?;
            let ensemble = g.sample_columns(0..g.cells.len(), n_paths, seed, time_labels(times));
            Ok(FbmSimulation { ensemble, grid_bias: Some(g.bias_bound(model)?) })
        }
    }
}

/// Backward and forward parts X_t = X_t^− + X_t^+ on disjoint noise coordinates.
#[derive(Debug, Clone)]
pub struct FiltrationSplit {
    pub minus: PathEnsemble,
    pub plus: PathEnsemble,
    pub grid_cov_minus: DMatrix<f64>,
    pub grid_cov_plus: DMatrix<f64>,
    /// ∫ l_s^− l_t^− and ∫ l_s^+ l_t^+ by quadrature.
    pub quad_cov_minus: DMatrix<f64>,
    pub quad_cov_plus: DMatrix<f64>,
}

impl FiltrationSplit {
    pub fn total(&self) -> PathEnsemble {
        let mut t = self.plus.clone();
        for (v, m) in t.values.iter_mut().zip(&self.minus.values) {
            *v += m;
        }
        t
    }
}

pub fn filtration_split(fk: &FactorKernel, times: &[f64], n_paths: usize, seed: u64, grid: &GridSpec) -> Result<FiltrationSplit> {
    let g = fk.ito_grid(times, grid)?;
    let minus = g.sample_columns(0..g.n_neg, n_paths, seed, time_labels(times));
    let plus = g.sample_columns(g.n_neg..g.cells.len(), n_paths, seed, time_labels(times));
    let n = times.len();
    let mut qm = DMatrix::zeros(n, n);
    let mut qp = DMatrix::zeros(n, n);
    for i in 0..n {
        for j in 0..n {
            qm[(i, j)] = fk.integral_minus(times[i], times[j])?.0.value;
            qp[(i, j)] = fk.integral_plus(times[i], times[j])?.value;
        }
    }
    Ok(FiltrationSplit {
        minus,
        plus,
        grid_cov_minus: g.covariance_minus(),
        grid_cov_plus: g.covariance_plus(),
        quad_cov_minus: qm,
        quad_cov_plus: qp,
    })
}

/// Options for [`paley_wiener_norm`].
#[derive(Debug, Clone, Copy)]
pub struct PwOptions {
    pub initial_cutoff: f64,
    pub max_cutoff: f64,
    pub tol: f64,
}

impl Default for PwOptions {
    fn default() -> Self {
        PwOptions { initial_cutoff: 8.0, max_cutoff: 1e6, tol: 1e-10 }
    }
}

/// ∫ |f̂(λ)|² dμ^(H)(λ), with the cutoff doubled until the added mass is below `tol`.
pub fn paley_wiener_norm<F: Fn(f64) -> Complex<f64>>(model: &HurstModel, fhat: F, opts: PwOptions) -> Result<f64> {
    let integrand = |l: f64| fhat(l).norm_sqr() * model.spectral_density(l);
    let piece = |a: f64, b: f64| -> Result<f64> {
        // unit panels keep narrow features visible to the adaptive rule
        let mut s = 0.0;
        let mut x = a;
        while x < b {
            let y = (x + 1.0).min(b);
            s += quadrature::adaptive(&integrand, x, y, opts.tol * 1e-2)?.value;
            s += quadrature::adaptive(&integrand, -y, -x, opts.tol * 1e-2)?.value;
            x = y;
        }
        Ok(s)
    };
    let mut cutoff = opts.initial_cutoff;
    let mut total = piece(0.0, cutoff)?;
    let mut partial = vec![total];
    while cutoff < opts.max_cutoff {
        let add = piece(cutoff, 2.0 * cutoff)?;
        total += add;
        cutoff *= 2.0;
        partial.push(total);
        if add.abs() <= opts.tol {
            return Ok(total);
        }
    }
    Err(Error::numeric(
        format!("Paley–Wiener integral did not converge; partial sums {partial:?}"),
        total,
    ))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn model(h: f64) -> HurstModel {
        HurstModel::new(h).unwrap()
    }

    #[test]
    fn constants_at_one_half() {
        let m = model(0.5);
        assert!((m.gamma_const - 1.0).abs() < 1e-14);
        assert!((m.spectral_const - 1.0 / (2.0 * PI)).abs() < 1e-15);
        assert!((m.spectral_density(3.7) - 1.0 / (2.0 * PI)).abs() < 1e-15);
        assert!(HurstModel::new(1.5).is_err());
        assert!(HurstModel::new(0.0).is_err());
    }

    #[test]
    fn closed_form_examples() {
        assert_eq!(model(0.5).covariance(1.0, 2.0).unwrap(), 1.0);
        for h in [0.2, 0.5, 0.9] {
            assert!((model(h).covariance(1.0, 1.0).unwrap() - 1.0).abs() < 1e-15);
            assert_eq!(model(h).covariance(0.0, 1.3).unwrap(), 0.0);
        }
        let v = model(0.7).covariance(1.0, 2.0).unwrap();
        assert!((v - 2f64.powf(0.4)).abs() < 1e-15);
        assert!(matches!(model(0.7).covariance(-1.0, 2.0), Err(Error::Domain(_))));
    }

    #[test]
    fn spectral_examples() {
        let m = model(0.5);
        assert_eq!(m.spectral_covariance(0.0, 1.0, 1e-10).unwrap().value, 0.0);
        let v = m.spectral_covariance(1.0, 1.0, 1e-10).unwrap().value;
        assert!((v - 1.0).abs() < 1e-6, "{v}");
    }

    #[test]
    fn factor_kernel_values() {
        let bm = FactorKernel::new(model(0.5));
        assert_eq!(bm.eval(2.0, 1.0).unwrap(), KernelValue::Finite(1.0));
        assert_eq!(bm.eval(2.0, 0.0).unwrap(), KernelValue::Finite(1.0));
        assert_eq!(bm.eval(2.0, -3.0).unwrap(), KernelValue::Finite(0.0));
        assert_eq!(bm.eval(2.0, 2.5).unwrap(), KernelValue::Finite(0.0));

        let fk = FactorKernel::with_normalization(model(0.7), Normalization::Gamma);
        let v = fk.eval(1.0, -1.0).unwrap().finite().unwrap();
        let expected = (2f64.powf(0.2) - 1.0) / gamma(1.2);
        assert!((v - expected).abs() < 1e-14, "{v} vs {expected}");
        assert_eq!(fk.eval(1.0, 1.5).unwrap(), KernelValue::Finite(0.0));

        let rough = FactorKernel::new(model(0.3));
        assert_eq!(rough.eval(1.0, 1.0).unwrap(), KernelValue::Singular);
        assert!(rough.eval(-1.0, 0.0).is_err());
    }

    #[test]
    fn gamma_normalization_variance_matches_closed_form_constant() {
        for h in [0.3, 0.7] {
            let fk = FactorKernel::with_normalization(model(h), Normalization::Gamma);
            let g = fk.factorization_gram(&[1.0]).unwrap();
            let expected = 1.0 / (gamma(2.0 * h + 1.0) * (PI * h).sin());
            assert!((g.gram.entries[(0, 0)] - expected).abs() < 1e-7, "H={h}");
        }
    }

    #[test]
    fn brownian_factor_gram() {
        let fk = FactorKernel::new(model(0.5));
        let g = fk.factorization_gram(&[1.0, 2.0]).unwrap();
        let expected = DMatrix::from_row_slice(2, 2, &[1.0, 1.0, 1.0, 2.0]);
        assert!((g.gram.entries - expected).abs().max() < 1e-6);
    }

    #[test]
    fn rough_factor_gram_against_closed_form() {
        let m = model(0.3);
        let fk = FactorKernel::new(m);
        let g = fk.factorization_gram(&[0.5, 1.0]).unwrap();
        assert!((g.gram.entries[(0, 1)] - m.covariance(0.5, 1.0).unwrap()).abs() < 1e-3);
        assert!((g.gram.entries[(1, 1)] - 1.0).abs() < 1e-3);
    }

    #[test]
    fn semimartingale_brownian_residual_vanishes() {
        let fk = FactorKernel::new(model(0.5));
        let r = fk.semimartingale_check(1.0, 2.0, 64).unwrap();
        assert!(r.residual <= 1e-12, "{r:?}");
        let fk7 = FactorKernel::new(model(0.7));
        let same = fk7.semimartingale_check(1.0, 1.0, 64).unwrap();
        assert!(same.residual <= 1e-12);
        assert!(fk7.semimartingale_check(0.0, 1.0, 64).is_err());
    }

    #[test]
    fn brownian_split_has_no_backward_part() {
        let fk = FactorKernel::new(model(0.5));
        let s = filtration_split(&fk, &[0.5, 1.0], 50, 3, &GridSpec::default()).unwrap();
        assert!(s.minus.values.iter().all(|v| *v == 0.0));
    }

    #[test]
    fn paley_wiener_examples() {
        let ind = |l: f64| if l.abs() <= 1.0 { Complex::new(1.0, 0.0) } else { Complex::new(0.0, 0.0) };
        let bm = paley_wiener_norm(&model(0.5), ind, PwOptions::default()).unwrap();
        assert!((bm - 1.0 / PI).abs() < 1e-8, "{bm}");

        let m = model(0.7);
        let v = paley_wiener_norm(&m, ind, PwOptions::default()).unwrap();
        let oracle = m.spectral_const * 2.0 / 0.6;
        assert!((v - oracle).abs() < 1e-8, "{v} vs {oracle}");

        let shifted = paley_wiener_norm(&m, |l: f64| Complex::new(0.0, 2.5 * l).exp() * ind(l), PwOptions::default()).unwrap();
        assert!((shifted - v).abs() <= 1e-12 * v);

        let slow = paley_wiener_norm(&m, |_| Complex::new(1.0, 0.0), PwOptions { max_cutoff: 64.0, ..PwOptions::default() });
        assert!(matches!(slow, Err(Error::Numeric { .. })));
    }
}
