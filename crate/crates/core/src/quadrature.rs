//! Gauss rules and an adaptive integrator.

use std::collections::BinaryHeap;
use std::f64::consts::PI;
use std::sync::OnceLock;

use nalgebra::{DMatrix, SymmetricEigen};

use crate::error::{Error, Result};

/// Nodes and weights of a Gauss rule.
#[derive(Debug, Clone)]
pub struct Rule {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
}

/// Gauss–Legendre rule on [-1, 1], nodes by Newton iteration on P_n.
pub fn gauss_legendre(n: usize) -> Rule {
    assert!(n >= 1);
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    let m = n.div_ceil(2);
    for i in 0..m {
        let mut x = (PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (p, d) = legendre_with_derivative(n, x);
            dp = d;
            let dx = p / d;
            x -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        let (_, d) = legendre_with_derivative(n, x);
        if d != 0.0 {
            dp = d;
        }
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        nodes[i] = -x;
        nodes[n - 1 - i] = x;
        weights[i] = w;
        weights[n - 1 - i] = w;
    }
    Rule { nodes, weights }
}

fn legendre_with_derivative(n: usize, x: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = x;
    for k in 2..=n {
        let kf = k as f64;
        let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
        p0 = p1;
        p1 = p2;
    }
    let p = if n == 0 { 1.0 } else { p1 };
    let d = n as f64 * (x * p - p0) / (x * x - 1.0);
    (p, d)
}

/// Probabilists' Gauss–Hermite rule: ∑ w_i f(z_i) ≈ E f(Z), Z ~ N(0,1).
/// Golub–Welsch on the Jacobi matrix of the He_n recurrence.
pub fn gauss_hermite_prob(n: usize) -> Rule {
    let mut jac = DMatrix::<f64>::zeros(n, n);
    for i in 1..n {
        let b = (i as f64).sqrt();
        jac[(i, i - 1)] = b;
        jac[(i - 1, i)] = b;
    }
    let eig = SymmetricEigen::new(jac);
    let mut pairs: Vec<(f64, f64)> = (0..n)
        .map(|i| (eig.eigenvalues[i], eig.eigenvectors[(0, i)].powi(2)))
        .collect();
    pairs.sort_by(|a, b| a.0.total_cmp(&b.0));
    Rule {
        nodes: pairs.iter().map(|p| p.0).collect(),
        weights: pairs.iter().map(|p| p.1).collect(),
    }
}

fn gl_cached(n: usize) -> &'static Rule {
    static GL16: OnceLock<Rule> = OnceLock::new();
    static GL32: OnceLock<Rule> = OnceLock::new();
    static GL8: OnceLock<Rule> = OnceLock::new();
    match n {
        8 => GL8.get_or_init(|| gauss_legendre(8)),
        16 => GL16.get_or_init(|| gauss_legendre(16)),
        32 => GL32.get_or_init(|| gauss_legendre(32)),
        _ => panic!("no cached rule of order {n}"),
    }
}

/// Fixed 16-point Gauss–Legendre on [a, b].
pub fn gl16<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64) -> f64 {
    apply(gl_cached(16), f, a, b)
}

/// Fixed 32-point Gauss–Legendre on [a, b].
pub fn gl32<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64) -> f64 {
    apply(gl_cached(32), f, a, b)
}

pub fn apply<F: Fn(f64) -> f64>(rule: &Rule, f: &F, a: f64, b: f64) -> f64 {
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    rule.nodes
        .iter()
        .zip(&rule.weights)
        .map(|(x, w)| w * f(c + h * x))
        .sum::<f64>()
        * h
}

/// Composite 16-point rule over consecutive breakpoints.
pub fn composite<F: Fn(f64) -> f64>(f: &F, breaks: &[f64]) -> f64 {
    breaks.windows(2).map(|w| gl16(f, w[0], w[1])).sum()
}

/// Result of an adaptive integration.
#[derive(Debug, Clone, Copy)]
pub struct Integral {
    pub value: f64,
    pub error: f64,
}

/// Globally adaptive Gauss–Legendre: each panel is estimated with an 8-point rule on
/// the panel and on its two halves; the panel with the largest discrepancy is
/// bisected until the summed discrepancy is below `abs_tol`.
pub fn adaptive<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64, abs_tol: f64) -> Result<Integral> {
    if a == b {
        return Ok(Integral { value: 0.0, error: 0.0 });
    }
    let rule = gl_cached(8);
    let panel = |lo: f64, hi: f64| {
        let whole = apply(rule, f, lo, hi);
        let mid = 0.5 * (lo + hi);
        let halves = apply(rule, f, lo, mid) + apply(rule, f, mid, hi);
        Panel { lo, hi, value: halves, error: (halves - whole).abs() }
    };
    let first = panel(a, b);
    let (mut value, mut err) = (first.value, first.error);
    let mut heap = BinaryHeap::from([first]);
    const MAX_PANELS: usize = 50_000;
    loop {
        if !value.is_finite() {
            return Err(Error::numeric("integrand produced a non-finite value", f64::INFINITY));
        }
        if err <= abs_tol {
            // resum to shed drift from the running totals
            let value = heap.iter().map(|p| p.value).sum();
            let error = heap.iter().map(|p| p.error).sum();
            return Ok(Integral { value, error });
        }
        if heap.len() >= MAX_PANELS {
            return Err(Error::numeric("adaptive quadrature did not converge", err));
        }
        let worst = heap.pop().expect("non-empty");
        let mid = 0.5 * (worst.lo + worst.hi);
        if mid <= worst.lo || mid >= worst.hi {
            return Err(Error::numeric("adaptive quadrature exhausted precision", err));
        }
        let left = panel(worst.lo, mid);
        let right = panel(mid, worst.hi);
        value += left.value + right.value - worst.value;
        err += left.error + right.error - worst.error;
        heap.push(left);
        heap.push(right);
    }
}

struct Panel {
    lo: f64,
    hi: f64,
    value: f64,
    error: f64,
}

impl PartialEq for Panel {
    fn eq(&self, other: &Self) -> bool {
        self.error.total_cmp(&other.error).is_eq()
    }
}

impl Eq for Panel {}

impl PartialOrd for Panel {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Panel {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        self.error.total_cmp(&other.error)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn legendre_rule_integrates_polynomials_exactly() {
        let rule = gauss_legendre(16);
        let sum_w: f64 = rule.weights.iter().sum();
        assert!((sum_w - 2.0).abs() < 1e-14);
        // degree 31 is the exactness limit
        let v = apply(&rule, &|x: f64| x.powi(30), -1.0, 1.0);
        assert!((v - 2.0 / 31.0).abs() < 1e-14);
    }

    #[test]
    fn hermite_rule_reproduces_gaussian_moments() {
        let rule = gauss_hermite_prob(20);
        let m = |k: i32| -> f64 { rule.nodes.iter().zip(&rule.weights).map(|(z, w)| w * z.powi(k)).sum() };
        assert!((m(0) - 1.0).abs() < 1e-13);
        assert!(m(1).abs() < 1e-13);
        assert!((m(2) - 1.0).abs() < 1e-12);
        assert!((m(4) - 3.0).abs() < 1e-11);
        assert!((m(6) - 15.0).abs() < 1e-10);
    }

    #[test]
    fn adaptive_handles_endpoint_singularity() {
        let r = adaptive(&|x: f64| x.powf(-0.5), 0.0, 1.0, 1e-8).unwrap();
        assert!((r.value - 2.0).abs() < 1e-7, "{}", r.value);
    }

    #[test]
    fn adaptive_reports_non_convergence() {
        let r = adaptive(&|x: f64| 1.0 / x, 0.0, 1.0, 1e-10);
        assert!(r.is_err());
    }
}
