//! Time-changed Brownian motion X_t = B_{h(t)}: covariance, simulation, quadratic
//! variation, the Itô-formula residual, and the diffusion equation
//! ∂u/∂t = ½ h′(t) ∂²u/∂x² checked against Gauss–Hermite quadrature and Monte Carlo.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::field::PathEnsemble;
use crate::quadrature;
use crate::rng;
use crate::stats::{self, MeanEstimate};

/// A nondecreasing clock h on [0, T] with h(0) = 0.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Clock {
    Linear,
    /// t^p with p > 0.
    Power { p: f64 },
    /// Piecewise-linear through `(t, h)` breakpoints starting at (0, 0).
    Table { points: Vec<(f64, f64)> },
}

#[derive(Debug, Clone, PartialEq)]
pub struct TimeChange {
    clock: Clock,
    t_max: f64,
}

impl TimeChange {
    pub fn new(clock: Clock, t_max: f64) -> Result<Self> {
        if !(t_max > 0.0 && t_max.is_finite()) {
            return Err(Error::input(format!("horizon must be positive and finite, got {t_max}")));
        }
        match &clock {
            Clock::Linear => {}
            Clock::Power { p } => {
                if !(*p > 0.0 && p.is_finite()) {
                    return Err(Error::domain(format!("power clock needs p > 0, got {p}")));
                }
            }
            Clock::Table { points } => {
                if points.len() < 2 || points[0] != (0.0, 0.0) {
                    return Err(Error::input("clock table needs at least two points, starting at (0, 0)"));
                }
                for w in points.windows(2) {
                    if !(w[1].0 > w[0].0) {
                        return Err(Error::input("clock table times must be strictly increasing"));
                    }
                    if w[1].1 < w[0].1 {
                        return Err(Error::domain("clock table values must be nondecreasing"));
                    }
                }
                let last = points[points.len() - 1].0;
                if t_max > last {
                    return Err(Error::input(format!("clock table ends at {last}, before the horizon {t_max}")));
                }
            }
        }
        Ok(TimeChange { clock, t_max })
    }

    pub fn linear(t_max: f64) -> Self {
        TimeChange { clock: Clock::Linear, t_max }
    }

    pub fn power(p: f64, t_max: f64) -> Result<Self> {
        TimeChange::new(Clock::Power { p }, t_max)
    }

    /// Parses "linear" or "power:p".
    pub fn parse(name: &str, t_max: f64) -> Result<Self> {
        if name == "linear" {
            return TimeChange::new(Clock::Linear, t_max);
        }
        if let Some(p) = name.strip_prefix("power:") {
            let p: f64 = p.parse().map_err(|_| Error::input(format!("bad clock exponent in {name:?}")))?;
            return TimeChange::power(p, t_max);
        }
        Err(Error::input(format!("unknown clock {name:?}; expected linear or power:p")))
    }

    pub fn clock(&self) -> &Clock {
        &self.clock
    }

    pub fn t_max(&self) -> f64 {
        self.t_max
    }

    fn check(&self, t: f64) -> Result<()> {
        if !(0.0..=self.t_max * (1.0 + 1e-12)).contains(&t) {
            return Err(Error::domain(format!("time {t} outside [0, {}]", self.t_max)));
        }
        Ok(())
    }

    pub fn h(&self, t: f64) -> Result<f64> {
        self.check(t)?;
        Ok(match &self.clock {
            Clock::Linear => t,
            Clock::Power { p } => t.powf(*p),
            Clock::Table { points } => {
                let k = points.partition_point(|(x, _)| *x <= t);
                if k == points.len() {
                    points[k - 1].1
                } else {
                    let (x0, h0) = points[k - 1];
                    let (x1, h1) = points[k];
                    h0 + (h1 - h0) * (t - x0) / (x1 - x0)
                }
            }
        })
    }

    /// h′(t); right-sided at table breakpoints.
    pub fn h_prime(&self, t: f64) -> Result<f64> {
        self.check(t)?;
        Ok(match &self.clock {
            Clock::Linear => 1.0,
            Clock::Power { p } => {
                if t == 0.0 {
                    if *p < 1.0 { f64::INFINITY } else if *p == 1.0 { 1.0 } else { 0.0 }
                } else {
                    p * t.powf(p - 1.0)
                }
            }
            Clock::Table { points } => {
                let k = points.partition_point(|(x, _)| *x <= t).min(points.len() - 1);
                let (x0, h0) = points[k - 1];
                let (x1, h1) = points[k];
                (h1 - h0) / (x1 - x0)
            }
        })
    }

    /// h(s ∧ t).
    pub fn covariance(&self, s: f64, t: f64) -> Result<f64> {
        self.check(s)?;
        self.h(s.min(t))
    }
}

fn check_sorted(times: &[f64]) -> Result<()> {
    if times.is_empty() {
        return Err(Error::input("need at least one time"));
    }
    if times.windows(2).any(|w| w[1] < w[0]) {
        return Err(Error::input("times must be sorted ascending"));
    }
    Ok(())
}

/// Samples (B_{h(t_1)}, …, B_{h(t_n)}) from independent Gaussian increments.
pub fn simulate_tc(tc: &TimeChange, times: &[f64], n_paths: usize, seed: u64) -> Result<PathEnsemble> {
    check_sorted(times)?;
    if n_paths == 0 {
        return Err(Error::input("n_paths must be at least 1"));
    }
    let mut sd = Vec::with_capacity(times.len());
    let mut prev = 0.0;
    for &t in times {
        let h = tc.h(t)?;
        sd.push((h - prev).max(0.0).sqrt());
        prev = h;
    }
    let n = times.len();
    let mut values = vec![0.0; n * n_paths];
    values.par_chunks_mut(n).enumerate().for_each(|(p, row)| {
        rng::fill_normals(seed, p as u64, row);
        let mut x = 0.0;
        for (v, s) in row.iter_mut().zip(&sd) {
            x += s * *v;
            *v = x;
        }
    });
    Ok(PathEnsemble {
        labels: times.iter().map(|t| format!("t={t}")).collect(),
        n_paths,
        values,
        seed,
        warnings: Vec::new(),
    })
}

/// Σ (X_{t_{i+1}} − X_{t_i})² per path, with X = 0 at time 0 prepended when the first
/// column is at a positive time.
pub fn tc_quadratic_variation(times: &[f64], ensemble: &PathEnsemble) -> Result<Vec<f64>> {
    if ensemble.n_items() != times.len() {
        return Err(Error::input("ensemble columns do not match the time grid"));
    }
    let lead = times.first().is_some_and(|t| *t > 0.0);
    Ok((0..ensemble.n_paths)
        .map(|p| {
            let row = ensemble.row(p);
            let mut s = if lead { row[0] * row[0] } else { 0.0 };
            for w in row.windows(2) {
                s += (w[1] - w[0]).powi(2);
            }
            s
        })
        .collect())
}

/// Twice-differentiable test functions with analytic derivatives.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum TestFn {
    One,
    Identity,
    Square,
    Cube,
    Sin,
    /// exp(−x²/2)
    GaussianBump,
}

impl TestFn {
    pub const ALL: [TestFn; 6] = [TestFn::One, TestFn::Identity, TestFn::Square, TestFn::Cube, TestFn::Sin, TestFn::GaussianBump];

    pub fn parse(name: &str) -> Result<Self> {
        Ok(match name {
            "one" => TestFn::One,
            "identity" | "x" => TestFn::Identity,
            "square" | "x2" => TestFn::Square,
            "cube" | "x3" => TestFn::Cube,
            "sin" => TestFn::Sin,
            "gaussian-bump" | "exp-bump" | "bump" => TestFn::GaussianBump,
            _ => return Err(Error::input(format!("unknown test function {name:?}"))),
        })
    }

    pub fn f(self, x: f64) -> f64 {
        match self {
            TestFn::One => 1.0,
            TestFn::Identity => x,
            TestFn::Square => x * x,
            TestFn::Cube => x * x * x,
            TestFn::Sin => x.sin(),
            TestFn::GaussianBump => (-0.5 * x * x).exp(),
        }
    }

    pub fn d1(self, x: f64) -> f64 {
        match self {
            TestFn::One => 0.0,
            TestFn::Identity => 1.0,
            TestFn::Square => 2.0 * x,
            TestFn::Cube => 3.0 * x * x,
            TestFn::Sin => x.cos(),
            TestFn::GaussianBump => -x * (-0.5 * x * x).exp(),
        }
    }

    pub fn d2(self, x: f64) -> f64 {
        match self {
            TestFn::One | TestFn::Identity => 0.0,
            TestFn::Square => 2.0,
            TestFn::Cube => 6.0 * x,
            TestFn::Sin => -x.sin(),
            TestFn::GaussianBump => (x * x - 1.0) * (-0.5 * x * x).exp(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ItoResidual {
    pub n_cells: usize,
    pub mean: MeanEstimate,
}

/// Itô-formula residuals on uniform grids of [0, t], all driven by one Brownian
/// path sampled on the finest grid so that refinements share their noise.
/// Every entry of `grids` must divide the largest one.
pub fn ito_formula_residuals(
    tc: &TimeChange,
    f: TestFn,
    t: f64,
    grids: &[usize],
    n_paths: usize,
    seed: u64,
) -> Result<Vec<ItoResidual>> {
    let fine = grids.iter().copied().max().ok_or_else(|| Error::input("need at least one grid"))?;
    if fine == 0 || grids.iter().any(|g| *g == 0 || fine % g != 0) {
        return Err(Error::input("grid sizes must be positive and divide the finest grid"));
    }
    if n_paths < 2 {
        return Err(Error::input("n_paths must be at least 2"));
    }
    let ts: Vec<f64> = (0..=fine).map(|i| t * i as f64 / fine as f64).collect();
    let hs = ts.iter().map(|s| tc.h(*s)).collect::<Result<Vec<_>>>()?;
    let sd: Vec<f64> = hs.windows(2).map(|w| (w[1] - w[0]).max(0.0).sqrt()).collect();
    let hp = ts.iter().map(|s| tc.h_prime(*s)).collect::<Result<Vec<_>>>()?;
    if hp.iter().any(|v| !v.is_finite()) {
        return Err(Error::domain("h′ is unbounded on the grid"));
    }
    let per_path: Vec<Vec<f64>> = (0..n_paths)
        .into_par_iter()
        .map(|p| {
            let mut z = vec![0.0; fine];
            rng::fill_normals(seed, p as u64, &mut z);
            let mut x = vec![0.0; fine + 1];
            for i in 0..fine {
                x[i + 1] = x[i] + sd[i] * z[i];
            }
            grids
                .iter()
                .map(|&n| {
                    let step = fine / n;
                    let dt = t / n as f64;
                    let mut r = f.f(x[fine]) - f.f(x[0]);
                    for i in 0..n {
                        let (a, b) = (i * step, (i + 1) * step);
                        r -= f.d1(x[a]) * (x[b] - x[a]);
                        r -= 0.5 * f.d2(x[a]) * hp[a] * dt;
                    }
                    r
                })
                .collect()
        })
        .collect();
    Ok(grids
        .iter()
        .enumerate()
        .map(|(g, &n)| {
            let col: Vec<f64> = per_path.iter().map(|r| r[g]).collect();
            ItoResidual { n_cells: n, mean: stats::mean_estimate(&col) }
        })
        .collect())
}

pub fn ito_formula_residual(tc: &TimeChange, f: TestFn, t: f64, n_cells: usize, n_paths: usize, seed: u64) -> Result<ItoResidual> {
    Ok(ito_formula_residuals(tc, f, t, &[n_cells], n_paths, seed)?.remove(0))
}

/// Least-squares slope of log|mean residual| against log(cells).
pub fn refinement_slope(res: &[ItoResidual]) -> f64 {
    let pts: Vec<(f64, f64)> = res.iter().map(|r| ((r.n_cells as f64).ln(), r.mean.mean.abs().max(1e-300).ln())).collect();
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    sxy / sxx
}

const HERMITE_NODES: usize = 64;

/// E f(x0 + √h(t) Z) by Gauss–Hermite quadrature.
pub fn u_quadrature(tc: &TimeChange, f: TestFn, t: f64, x0: f64) -> Result<f64> {
    let rule = quadrature::gauss_hermite_prob(HERMITE_NODES);
    let s = tc.h(t)?.sqrt();
    Ok(gh_expectation(&rule, f, x0, s))
}

fn gh_expectation(rule: &quadrature::Rule, f: TestFn, x0: f64, s: f64) -> f64 {
    rule.nodes.iter().zip(&rule.weights).map(|(z, w)| w * f.f(x0 + s * z)).sum()
}

/// E f(x0 + √h(t) Z) by simulation.
pub fn u_monte_carlo(tc: &TimeChange, f: TestFn, t: f64, x0: f64, n_paths: usize, seed: u64) -> Result<MeanEstimate> {
    if n_paths < 2 {
        return Err(Error::input("n_paths must be at least 2"));
    }
    let s = tc.h(t)?.sqrt();
    let vals: Vec<f64> = (0..n_paths)
        .into_par_iter()
        .map(|p| {
            let mut z = [0.0];
            rng::fill_normals(seed, p as u64, &mut z);
            f.f(x0 + s * z[0])
        })
        .collect();
    Ok(stats::mean_estimate(&vals))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SchemeParams {
    pub nx: usize,
    pub nt: usize,
    /// Half-width of the domain in units of √h(t_end).
    pub width_sd: f64,
}

impl Default for SchemeParams {
    fn default() -> Self {
        SchemeParams { nx: 801, nt: 400, width_sd: 8.0 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DiffusionSolution {
    pub t: f64,
    pub xs: Vec<f64>,
    pub u: Vec<f64>,
}

impl DiffusionSolution {
    /// Linear interpolation of u(t, ·).
    pub fn at(&self, x: f64) -> Result<f64> {
        let n = self.xs.len();
        if n == 1 {
            return Ok(self.u[0]);
        }
        if x < self.xs[0] || x > self.xs[n - 1] {
            return Err(Error::domain(format!("x = {x} outside the solution grid")));
        }
        let k = self.xs.partition_point(|v| *v <= x).clamp(1, n - 1);
        let (x0, x1) = (self.xs[k - 1], self.xs[k]);
        Ok(self.u[k - 1] + (self.u[k] - self.u[k - 1]) * (x - x0) / (x1 - x0))
    }
}

/// Crank–Nicolson for ∂u/∂t = ½ h′(t) ∂²u/∂x², u(0, ·) = f, on x0 ± width·√h(t_end)
/// with Dirichlet values taken from the Gauss–Hermite solution.
pub fn diffusion_solve(tc: &TimeChange, f: TestFn, x0: f64, t_end: f64, params: &SchemeParams) -> Result<DiffusionSolution> {
    if params.nx < 3 || params.nt == 0 || !(params.width_sd > 0.0) {
        return Err(Error::input("scheme needs nx ≥ 3, nt ≥ 1 and a positive width"));
    }
    let h_end = tc.h(t_end)?;
    if h_end == 0.0 {
        return Ok(DiffusionSolution { t: t_end, xs: vec![x0], u: vec![f.f(x0)] });
    }
    let half = params.width_sd * h_end.sqrt();
    let nx = params.nx;
    let dx = 2.0 * half / (nx - 1) as f64;
    let xs: Vec<f64> = (0..nx).map(|i| x0 - half + dx * i as f64).collect();
    let mut u: Vec<f64> = xs.iter().map(|x| f.f(*x)).collect();
    let dt = t_end / params.nt as f64;
    let rule = quadrature::gauss_hermite_prob(HERMITE_NODES);
    let m = nx - 2;
    let mut rhs = vec![0.0; m];
    let mut cp = vec![0.0; m];
    for step in 0..params.nt {
        let t0 = dt * step as f64;
        let t1 = if step + 1 == params.nt { t_end } else { t0 + dt };
        let a = 0.5 * tc.h_prime(0.5 * (t0 + t1))?;
        if !a.is_finite() || a < 0.0 {
            return Err(Error::numeric("diffusion coefficient is not finite and non-negative", a));
        }
        let r = a * (t1 - t0) / (dx * dx);
        let s1 = tc.h(t1)?.sqrt();
        let left = gh_expectation(&rule, f, xs[0], s1);
        let right = gh_expectation(&rule, f, xs[nx - 1], s1);
        // (1 + r) u_i − ½r(u_{i−1} + u_{i+1}) = (1 − r) u_i + ½r(u_{i−1} + u_{i+1})
        for i in 0..m {
            let k = i + 1;
            rhs[i] = (1.0 - r) * u[k] + 0.5 * r * (u[k - 1] + u[k + 1]);
        }
        rhs[0] += 0.5 * r * left;
        rhs[m - 1] += 0.5 * r * right;
        // Thomas algorithm with constant diagonals
        let (lo, di, up) = (-0.5 * r, 1.0 + r, -0.5 * r);
        cp[0] = up / di;
        rhs[0] /= di;
        for i in 1..m {
            let denom = di - lo * cp[i - 1];
            cp[i] = up / denom;
            rhs[i] = (rhs[i] - lo * rhs[i - 1]) / denom;
        }
        for i in (0..m - 1).rev() {
            rhs[i] -= cp[i] * rhs[i + 1];
        }
        u[0] = left;
        u[nx - 1] = right;
        u[1..=m].copy_from_slice(&rhs);
    }
    Ok(DiffusionSolution { t: t_end, xs, u })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct McVsPde {
    pub x0: f64,
    pub u_pde: f64,
    pub u_quadrature: f64,
    pub u_mc: f64,
    pub mc_se: f64,
    /// max |u_pde − u_quadrature| over the PDE grid.
    pub pde_max_err: f64,
    pub tolerance: f64,
    pub pass: bool,
}

/// Three-way comparison of u(t, x0).
pub fn mc_vs_pde(
    tc: &TimeChange,
    f: TestFn,
    t: f64,
    x0: f64,
    n_paths: usize,
    seed: u64,
    params: &SchemeParams,
    tolerance: f64,
) -> Result<McVsPde> {
    let sol = diffusion_solve(tc, f, x0, t, params)?;
    let s = tc.h(t)?.sqrt();
    let rule = quadrature::gauss_hermite_prob(HERMITE_NODES);
    let pde_max_err = sol
        .xs
        .iter()
        .zip(&sol.u)
        .map(|(x, u)| (u - gh_expectation(&rule, f, *x, s)).abs())
        .fold(0.0, f64::max);
    let u_pde = sol.at(x0)?;
    let u_quadrature = u_quadrature(tc, f, t, x0)?;
    let mc = u_monte_carlo(tc, f, t, x0, n_paths, seed)?;
    let worst = pde_max_err.max((mc.mean - u_quadrature).abs()).max((mc.mean - u_pde).abs());
    Ok(McVsPde {
        x0,
        u_pde,
        u_quadrature,
        u_mc: mc.mean,
        mc_se: mc.se,
        pde_max_err,
        tolerance,
        pass: worst <= tolerance,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn covariance_examples() {
        let sq = TimeChange::power(2.0, 2.0).unwrap();
        assert_eq!(sq.covariance(1.0, 2.0).unwrap(), 1.0);
        assert_eq!(sq.covariance(0.0, 2.0).unwrap(), 0.0);
        let lin = TimeChange::linear(3.0);
        assert_eq!(lin.covariance(2.5, 1.5).unwrap(), 1.5);
        assert!(lin.h(4.0).is_err());
    }

    #[test]
    fn table_clock() {
        let tc = TimeChange::new(Clock::Table { points: vec![(0.0, 0.0), (1.0, 2.0), (2.0, 2.0), (3.0, 5.0)] }, 3.0).unwrap();
        assert_eq!(tc.h(0.5).unwrap(), 1.0);
        assert_eq!(tc.h(1.5).unwrap(), 2.0);
        assert_eq!(tc.h_prime(1.5).unwrap(), 0.0);
        assert_eq!(tc.h_prime(2.0).unwrap(), 3.0);
        assert_eq!(tc.h_prime(3.0).unwrap(), 3.0);
        let bad = TimeChange::new(Clock::Table { points: vec![(0.0, 0.0), (1.0, 2.0), (2.0, 1.0)] }, 2.0);
        assert!(bad.is_err());
    }

    #[test]
    fn derivatives_match_finite_differences() {
        for f in TestFn::ALL {
            for x in [-1.3, 0.2, 0.9] {
                let e = 1e-5;
                let d1 = (f.f(x + e) - f.f(x - e)) / (2.0 * e);
                let d2 = (f.d1(x + e) - f.d1(x - e)) / (2.0 * e);
                assert!((d1 - f.d1(x)).abs() < 1e-8 && (d2 - f.d2(x)).abs() < 1e-8, "{f:?}");
            }
        }
    }

    #[test]
    fn pde_reproduces_second_moment() {
        for tc in [TimeChange::linear(1.0), TimeChange::power(2.0, 1.0).unwrap()] {
            let sol = diffusion_solve(&tc, TestFn::Square, 0.3, 1.0, &SchemeParams::default()).unwrap();
            for x in [-1.0, 0.3, 2.0] {
                assert!((sol.at(x).unwrap() - (x * x + 1.0)).abs() < 1e-6);
            }
        }
    }

    #[test]
    fn frozen_clock_freezes_solution() {
        let tc = TimeChange::new(Clock::Table { points: vec![(0.0, 0.0), (1.0, 1.0), (2.0, 1.0)] }, 2.0).unwrap();
        let a = diffusion_solve(&tc, TestFn::GaussianBump, 0.0, 1.0, &SchemeParams::default()).unwrap();
        let b = diffusion_solve(&tc, TestFn::GaussianBump, 0.0, 2.0, &SchemeParams { nt: 800, ..SchemeParams::default() }).unwrap();
        assert!((a.at(0.0).unwrap() - b.at(0.0).unwrap()).abs() < 1e-12);
    }

    #[test]
    fn martingale_mean_and_normalization() {
        let tc = TimeChange::power(2.0, 1.0).unwrap();
        let p = SchemeParams::default();
        let one = mc_vs_pde(&tc, TestFn::One, 1.0, 0.4, 1000, 1, &p, 1e-2).unwrap();
        assert!((one.u_pde - 1.0).abs() < 1e-12 && (one.u_mc - 1.0).abs() < 1e-12);
        let id = mc_vs_pde(&tc, TestFn::Identity, 1.0, 0.4, 1000, 1, &p, 1e-2).unwrap();
        assert!((id.u_pde - 0.4).abs() < 1e-10 && (id.u_quadrature - 0.4).abs() < 1e-12);
    }

    #[test]
    fn square_residual_for_linear_clock_is_qv_defect() {
        let tc = TimeChange::linear(1.0);
        let r = ito_formula_residuals(&tc, TestFn::Square, 1.0, &[8], 4, 3).unwrap();
        let ens = simulate_tc(&tc, &(1..=8).map(|i| i as f64 / 8.0).collect::<Vec<_>>(), 4, 3).unwrap();
        let qv = tc_quadratic_variation(&(1..=8).map(|i| i as f64 / 8.0).collect::<Vec<_>>(), &ens).unwrap();
        let m = qv.iter().map(|q| q - 1.0).sum::<f64>() / 4.0;
        assert!((r[0].mean.mean - m).abs() < 1e-12);
    }
}
