//! Finite (μ, ρ) pairs: a vertex measure μ and a symmetric edge measure W with
//! ρ(A × B) = Σ_{x∈A, y∈B} W[x][y]. Laplacian, energy form, energy kernel, and the
//! reversible Markov chain P = W / row sums.

use std::collections::VecDeque;

use nalgebra::DMatrix;
use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::kernels::Kernel;
use crate::rng;

#[derive(Debug, Clone, PartialEq)]
pub struct WeightedGraph {
    mu: Vec<f64>,
    w: DMatrix<f64>,
    nu: Vec<f64>,
}

/// JSON form `{"mu": [...], "edges": [[x, y, w], ...]}`.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GraphConfig {
    pub mu: Vec<f64>,
    pub edges: Vec<(usize, usize, f64)>,
}

impl WeightedGraph {
    pub fn new(mu: Vec<f64>, w: DMatrix<f64>) -> Result<Self> {
        let n = mu.len();
        if n == 0 {
            return Err(Error::input("graph needs at least one state"));
        }
        if w.nrows() != n || w.ncols() != n {
            return Err(Error::input(format!("weight matrix must be {n}×{n}")));
        }
        if let Some(m) = mu.iter().find(|m| !(**m > 0.0 && m.is_finite())) {
            return Err(Error::domain(format!("vertex measure must be positive and finite, got {m}")));
        }
        for x in 0..n {
            if w[(x, x)] != 0.0 {
                return Err(Error::input(format!("self-loop at state {x}; W must have zero diagonal")));
            }
            for y in 0..n {
                let v = w[(x, y)];
                if !(v >= 0.0 && v.is_finite()) {
                    return Err(Error::domain(format!("edge weight W[{x}][{y}] = {v} is not finite and non-negative")));
                }
                if v != w[(y, x)] {
                    return Err(Error::input(format!("W is not symmetric at ({x}, {y})")));
                }
            }
        }
        let nu = (0..n).map(|x| w.row(x).sum()).collect();
        Ok(WeightedGraph { mu, w, nu })
    }

    /// Builds W from an undirected edge list; repeated edges add up.
    pub fn from_edges(mu: Vec<f64>, edges: &[(usize, usize, f64)]) -> Result<Self> {
        let n = mu.len();
        let mut w = DMatrix::zeros(n, n);
        for &(x, y, v) in edges {
            if x >= n || y >= n {
                return Err(Error::input(format!("edge ({x}, {y}) refers to a state outside 0..{n}")));
            }
            if x == y {
                return Err(Error::input(format!("self-loop at state {x}")));
            }
            w[(x, y)] += v;
            w[(y, x)] += v;
        }
        WeightedGraph::new(mu, w)
    }

    pub fn from_config(cfg: &GraphConfig) -> Result<Self> {
        WeightedGraph::from_edges(cfg.mu.clone(), &cfg.edges)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let cfg: GraphConfig = serde_json::from_str(text).map_err(|e| Error::input(format!("graph JSON: {e}")))?;
        WeightedGraph::from_config(&cfg)
    }

    /// Square adjacency matrix, one comma-separated row per line; μ defaults to 1.
    pub fn from_adjacency_csv(text: &str, mu: Option<Vec<f64>>) -> Result<Self> {
        let rows: Vec<Vec<f64>> = text
            .lines()
            .filter(|l| !l.trim().is_empty())
            .enumerate()
            .map(|(i, l)| {
                l.split(',')
                    .map(|v| v.trim().parse::<f64>().map_err(|_| Error::input(format!("adjacency row {i}: bad number {v:?}"))))
                    .collect()
            })
            .collect::<Result<_>>()?;
        let n = rows.len();
        if rows.iter().any(|r| r.len() != n) {
            return Err(Error::input("adjacency CSV must be square"));
        }
        let w = DMatrix::from_fn(n, n, |i, j| rows[i][j]);
        WeightedGraph::new(mu.unwrap_or_else(|| vec![1.0; n]), w)
    }

    /// Erdős–Rényi-type graph with uniform(0, 1] weights and μ uniform in [0.5, 2).
    pub fn random(n: usize, edge_prob: f64, seed: u64) -> Result<Self> {
        if n == 0 || !(0.0..=1.0).contains(&edge_prob) {
            return Err(Error::input("random graph needs n ≥ 1 and edge probability in [0, 1]"));
        }
        let mut r = rng::path_rng(seed, 0);
        let mu: Vec<f64> = (0..n).map(|_| r.random_range(0.5..2.0)).collect();
        let mut w = DMatrix::zeros(n, n);
        for x in 0..n {
            for y in x + 1..n {
                if r.random_bool(edge_prob) {
                    let v = 1.0 - r.random::<f64>();
                    w[(x, y)] = v;
                    w[(y, x)] = v;
                }
            }
        }
        WeightedGraph::new(mu, w)
    }

    /// [`WeightedGraph::random`] plus a cycle through all states, so every state has
    /// an edge and the chain is irreducible.
    pub fn random_connected(n: usize, edge_prob: f64, seed: u64) -> Result<Self> {
        let g = WeightedGraph::random(n, edge_prob, seed)?;
        if n < 2 {
            return Ok(g);
        }
        let mut r = rng::path_rng(seed, 1);
        let mut w = g.w;
        for x in 0..n {
            let y = (x + 1) % n;
            if x != y && w[(x, y)] == 0.0 {
                let v = 1.0 - r.random::<f64>();
                w[(x, y)] = v;
                w[(y, x)] = v;
            }
        }
        WeightedGraph::new(g.mu, w)
    }

    /// Unit-weight path 0 − 1 − … − (n−1) with unit μ.
    pub fn path(n: usize) -> Result<Self> {
        let edges: Vec<_> = (1..n).map(|i| (i - 1, i, 1.0)).collect();
        WeightedGraph::from_edges(vec![1.0; n], &edges)
    }

    pub fn n(&self) -> usize {
        self.mu.len()
    }

    pub fn mu(&self) -> &[f64] {
        &self.mu
    }

    pub fn weights(&self) -> &DMatrix<f64> {
        &self.w
    }

    /// ν[x] = Σ_y W[x][y] = c[x] μ[x].
    pub fn nu(&self) -> &[f64] {
        &self.nu
    }

    pub fn c(&self) -> Vec<f64> {
        self.nu.iter().zip(&self.mu).map(|(n, m)| n / m).collect()
    }

    /// Slice measure ρ^(x)(y) = W[x][y]/μ[x].
    pub fn slice(&self, x: usize) -> Result<Vec<f64>> {
        self.check_state(x)?;
        Ok(self.w.row(x).iter().map(|v| v / self.mu[x]).collect())
    }

    fn check_state(&self, x: usize) -> Result<()> {
        if x >= self.n() {
            return Err(Error::input(format!("state {x} outside 0..{}", self.n())));
        }
        Ok(())
    }

    fn check_dim(&self, f: &[f64]) -> Result<()> {
        if f.len() != self.n() {
            return Err(Error::input(format!("function has {} values, graph has {} states", f.len(), self.n())));
        }
        Ok(())
    }

    pub fn indicator(&self, subset: &[usize]) -> Result<Vec<f64>> {
        let mut chi = vec![0.0; self.n()];
        for &x in subset {
            self.check_state(x)?;
            chi[x] = 1.0;
        }
        Ok(chi)
    }

    /// (Δf)(x) = (1/μ[x]) Σ_y W[x][y](f(x) − f(y)).
    pub fn laplacian_apply(&self, f: &[f64]) -> Result<Vec<f64>> {
        self.check_dim(f)?;
        Ok((0..self.n())
            .map(|x| {
                let s: f64 = (0..self.n()).map(|y| self.w[(x, y)] * (f[x] - f[y])).sum();
                s / self.mu[x]
            })
            .collect())
    }

    /// ½ Σ_x Σ_y (f(x) − f(y))(h(x) − h(y)) W[x][y].
    pub fn energy_inner(&self, f: &[f64], h: &[f64]) -> Result<f64> {
        self.check_dim(f)?;
        self.check_dim(h)?;
        let n = self.n();
        let mut s = 0.0;
        for x in 0..n {
            for y in 0..n {
                s += (f[x] - f[y]) * (h[x] - h[y]) * self.w[(x, y)];
            }
        }
        Ok(0.5 * s)
    }

    /// ⟨f, h⟩ in L²(μ).
    pub fn l2_inner(&self, f: &[f64], h: &[f64]) -> Result<f64> {
        self.check_dim(f)?;
        self.check_dim(h)?;
        Ok(f.iter().zip(h).zip(&self.mu).map(|((a, b), m)| a * b * m).sum())
    }

    /// Magnitude used for relative identity checks: Σ |f(x)|·|h(y)|·W[x][y] style bound.
    fn scale(&self, f: &[f64], h: &[f64]) -> f64 {
        let fm = f.iter().fold(0.0_f64, |m, v| m.max(v.abs()));
        let hm = h.iter().fold(0.0_f64, |m, v| m.max(v.abs()));
        let wt: f64 = self.nu.iter().sum();
        (fm * hm * wt).max(f64::MIN_POSITIVE)
    }

    /// ⟨φ, f⟩_E against Σ φ (Δf) μ.
    pub fn greens_identity_check(&self, phi: &[f64], f: &[f64]) -> Result<IdentityReport> {
        let lhs = self.energy_inner(phi, f)?;
        let lap = self.laplacian_apply(f)?;
        let rhs = self.l2_inner(phi, &lap)?;
        Ok(IdentityReport::new(lhs, rhs, self.scale(phi, f)))
    }

    /// The Green identity read as T* = Δ, plus μ_f(A) = Σ_{x∈A} (Δf)(x) μ(x).
    pub fn adjoint_check(&self, phi: &[f64], f: &[f64], subsets: &[Vec<usize>]) -> Result<AdjointReport> {
        let identity = self.greens_identity_check(phi, f)?;
        let lap = self.laplacian_apply(f)?;
        let mu_f = subsets
            .iter()
            .map(|a| {
                let chi = self.indicator(a)?;
                Ok(chi.iter().zip(&lap).zip(&self.mu).map(|((c, d), m)| c * d * m).sum())
            })
            .collect::<Result<_>>()?;
        Ok(AdjointReport { identity, mu_f })
    }

    /// β(A, B) = ν(A ∩ B) − ρ(A × B).
    pub fn energy_kernel(&self, a: &[usize], b: &[usize]) -> Result<f64> {
        let ca = self.indicator(a)?;
        let cb = self.indicator(b)?;
        let n = self.n();
        let mut nu_ab = 0.0;
        let mut rho = 0.0;
        for x in 0..n {
            nu_ab += ca[x] * cb[x] * self.nu[x];
            if ca[x] != 0.0 {
                for y in 0..n {
                    rho += cb[y] * self.w[(x, y)];
                }
            }
        }
        Ok(nu_ab - rho)
    }

    pub fn isolated_states(&self) -> Vec<usize> {
        (0..self.n()).filter(|x| self.nu[*x] == 0.0).collect()
    }

    /// P[x][y] = W[x][y] / Σ_z W[x][z]. Isolated states are an error unless
    /// `allow_absorbing`, in which case they get P[x][x] = 1 and are listed.
    pub fn markov_kernel(&self, allow_absorbing: bool) -> Result<MarkovKernel> {
        let isolated = self.isolated_states();
        if !isolated.is_empty() && !allow_absorbing {
            return Err(Error::domain(format!("states {isolated:?} have no edges; c(x) = 0")));
        }
        let n = self.n();
        let p = DMatrix::from_fn(n, n, |x, y| {
            if self.nu[x] == 0.0 {
                if x == y { 1.0 } else { 0.0 }
            } else {
                self.w[(x, y)] / self.nu[x]
            }
        });
        Ok(MarkovKernel { p, absorbing: isolated })
    }

    /// Normalized row sums of W, i.e. c μ / Σ c μ.
    pub fn stationary_distribution(&self) -> Result<Vec<f64>> {
        let total: f64 = self.nu.iter().sum();
        if total == 0.0 {
            return Err(Error::domain("graph has no edges"));
        }
        Ok(self.nu.iter().map(|v| v / total).collect())
    }

    /// Largest |c(x)μ(x)P(x,y) − c(y)μ(y)P(y,x)|.
    pub fn detailed_balance_error(&self) -> Result<f64> {
        let mk = self.markov_kernel(false)?;
        let n = self.n();
        let c = self.c();
        let mut worst = 0.0_f64;
        for x in 0..n {
            for y in 0..n {
                let a = c[x] * self.mu[x] * mk.p[(x, y)];
                let b = c[y] * self.mu[y] * mk.p[(y, x)];
                worst = worst.max((a - b).abs());
            }
        }
        Ok(worst)
    }

    /// max |πP − π| for π the normalized row sums.
    pub fn stationary_residual(&self) -> Result<f64> {
        let mk = self.markov_kernel(false)?;
        let pi = self.stationary_distribution()?;
        let n = self.n();
        Ok((0..n)
            .map(|y| ((0..n).map(|x| pi[x] * mk.p[(x, y)]).sum::<f64>() - pi[y]).abs())
            .fold(0.0, f64::max))
    }

    pub fn is_irreducible(&self) -> bool {
        let n = self.n();
        let mut seen = vec![false; n];
        let mut queue = VecDeque::from([0]);
        seen[0] = true;
        while let Some(x) = queue.pop_front() {
            for y in 0..n {
                if self.w[(x, y)] > 0.0 && !seen[y] {
                    seen[y] = true;
                    queue.push_back(y);
                }
            }
        }
        seen.into_iter().all(|s| s)
    }

    /// ‖f‖²_E against ½[Σ |f − Pf|² ν + Σ VAR_x(f(X₁)) ν(x)].
    pub fn variance_decomposition_check(&self, f: &[f64]) -> Result<VarianceReport> {
        self.check_dim(f)?;
        let mk = self.markov_kernel(false)?;
        let n = self.n();
        let energy = self.energy_inner(f, f)?;
        let mut drift = 0.0;
        let mut spread = 0.0;
        for x in 0..n {
            let pf: f64 = (0..n).map(|y| mk.p[(x, y)] * f[y]).sum();
            let var: f64 = (0..n).map(|y| (f[y] - pf).powi(2) * mk.p[(x, y)]).sum();
            drift += (f[x] - pf).powi(2) * self.nu[x];
            spread += var * self.nu[x];
        }
        let decomposition = 0.5 * (drift + spread);
        Ok(VarianceReport { energy, decomposition, diff: (energy - decomposition).abs(), scale: self.scale(f, f) })
    }

    /// Runs `n_chains` independent chains of `n_steps` from `x0` and pools their
    /// occupation counts.
    pub fn simulate_chain(&self, x0: usize, n_steps: usize, n_chains: usize, seed: u64) -> Result<ChainReport> {
        self.check_state(x0)?;
        let mk = self.markov_kernel(true)?;
        let n = self.n();
        let sampler = mk.sampler();
        let counts: Vec<(Vec<u64>, Vec<u64>)> = (0..n_chains)
            .into_par_iter()
            .map(|c| {
                let mut occ = vec![0u64; n];
                let mut trans = vec![0u64; n * n];
                let mut r = rng::path_rng(seed, c as u64);
                let mut x = x0;
                for _ in 0..n_steps {
                    let y = sampler.step(x, r.random::<f64>());
                    trans[x * n + y] += 1;
                    occ[y] += 1;
                    x = y;
                }
                (occ, trans)
            })
            .collect();
        let mut occupation = vec![0u64; n];
        let mut transitions = vec![0u64; n * n];
        for (o, t) in &counts {
            occupation.iter_mut().zip(o).for_each(|(a, b)| *a += b);
            transitions.iter_mut().zip(t).for_each(|(a, b)| *a += b);
        }
        let total = (n_steps * n_chains) as f64;
        let empirical: Vec<f64> = occupation.iter().map(|c| *c as f64 / total).collect();
        let mut warnings = Vec::new();
        let irreducible = self.is_irreducible() && mk.absorbing.is_empty();
        let (stationary, tv) = if irreducible {
            let pi = self.stationary_distribution()?;
            let tv = 0.5 * pi.iter().zip(&empirical).map(|(a, b)| (a - b).abs()).sum::<f64>();
            (Some(pi), Some(tv))
        } else {
            warnings.push("chain is reducible; stationary-distribution comparison skipped".to_string());
            (None, None)
        };
        let mut transition_max_err = 0.0_f64;
        for x in 0..n {
            let visits: u64 = transitions[x * n..(x + 1) * n].iter().sum();
            if visits > 0 {
                for y in 0..n {
                    let freq = transitions[x * n + y] as f64 / visits as f64;
                    transition_max_err = transition_max_err.max((freq - mk.p[(x, y)]).abs());
                }
            }
        }
        Ok(ChainReport { n_steps, n_chains, empirical, stationary, tv, transition_max_err, warnings })
    }

    /// The visited states of one chain, for reproducibility checks.
    pub fn chain_trajectory(&self, x0: usize, n_steps: usize, seed: u64, chain: u64) -> Result<Vec<usize>> {
        self.check_state(x0)?;
        let mk = self.markov_kernel(true)?;
        let sampler = mk.sampler();
        let mut r = rng::path_rng(seed, chain);
        let mut out = Vec::with_capacity(n_steps + 1);
        let mut x = x0;
        out.push(x);
        for _ in 0..n_steps {
            x = sampler.step(x, r.random::<f64>());
            out.push(x);
        }
        Ok(out)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct IdentityReport {
    pub lhs: f64,
    pub rhs: f64,
    pub diff: f64,
    pub scale: f64,
}

impl IdentityReport {
    fn new(lhs: f64, rhs: f64, scale: f64) -> Self {
        IdentityReport { lhs, rhs, diff: (lhs - rhs).abs(), scale }
    }

    pub fn holds(&self, rel_tol: f64) -> bool {
        self.diff <= rel_tol * self.scale
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AdjointReport {
    pub identity: IdentityReport,
    pub mu_f: Vec<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct VarianceReport {
    pub energy: f64,
    pub decomposition: f64,
    pub diff: f64,
    pub scale: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct MarkovKernel {
    pub p: DMatrix<f64>,
    pub absorbing: Vec<usize>,
}

impl MarkovKernel {
    fn sampler(&self) -> Sampler {
        let n = self.p.nrows();
        let rows = (0..n)
            .map(|x| {
                let mut acc = 0.0;
                let mut cum = Vec::new();
                for y in 0..n {
                    if self.p[(x, y)] > 0.0 {
                        acc += self.p[(x, y)];
                        cum.push((acc, y));
                    }
                }
                cum
            })
            .collect();
        Sampler { rows }
    }
}

struct Sampler {
    rows: Vec<Vec<(f64, usize)>>,
}

impl Sampler {
    fn step(&self, x: usize, u: f64) -> usize {
        let row = &self.rows[x];
        let total = row.last().map_or(1.0, |r| r.0);
        let k = row.partition_point(|(c, _)| *c <= u * total);
        row[k.min(row.len() - 1)].1
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChainReport {
    pub n_steps: usize,
    pub n_chains: usize,
    pub empirical: Vec<f64>,
    pub stationary: Option<Vec<f64>>,
    /// Total-variation distance between `empirical` and `stationary`.
    pub tv: Option<f64>,
    pub transition_max_err: f64,
    pub warnings: Vec<String>,
}

/// β(A, B) = ν(A ∩ B) − ρ(A × B) as a kernel over state subsets.
pub struct EnergyKernel<'a> {
    pub graph: &'a WeightedGraph,
}

impl Kernel for EnergyKernel<'_> {
    type Item = Vec<usize>;

    fn eval(&self, a: &Vec<usize>, b: &Vec<usize>) -> Result<f64> {
        self.graph.energy_kernel(a, b)
    }

    fn label(&self, item: &Vec<usize>) -> String {
        let s: Vec<String> = item.iter().map(|x| x.to_string()).collect();
        format!("{{{}}}", s.join(";"))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn path_examples() {
        let g = WeightedGraph::path(3).unwrap();
        let f = [0.0, 1.0, 0.0];
        assert_eq!(g.laplacian_apply(&f).unwrap(), vec![-1.0, 2.0, -1.0]);
        assert_eq!(g.energy_inner(&f, &f).unwrap(), 2.0);
        assert_eq!(g.laplacian_apply(&[3.0; 3]).unwrap(), vec![0.0; 3]);
        let adj = g.adjoint_check(&f, &f, &[vec![1]]).unwrap();
        assert_eq!(adj.mu_f, vec![2.0]);
        let mk = g.markov_kernel(false).unwrap();
        assert_eq!(mk.p[(1, 0)], 0.5);
        assert_eq!(mk.p[(1, 2)], 0.5);
        assert_eq!(g.stationary_distribution().unwrap(), vec![0.25, 0.5, 0.25]);
    }

    #[test]
    fn isolated_vertex() {
        let g = WeightedGraph::from_edges(vec![1.0; 3], &[(0, 1, 1.0)]).unwrap();
        assert_eq!(g.laplacian_apply(&[1.0, 2.0, 5.0]).unwrap()[2], 0.0);
        assert!(g.markov_kernel(false).is_err());
        assert_eq!(g.markov_kernel(true).unwrap().absorbing, vec![2]);
        assert!(!g.is_irreducible());
    }

    #[test]
    fn validation() {
        let mut w = DMatrix::zeros(2, 2);
        w[(0, 1)] = 1.0;
        assert!(WeightedGraph::new(vec![1.0; 2], w.clone()).is_err());
        w[(1, 0)] = 1.0;
        assert!(WeightedGraph::new(vec![1.0, 0.0], w.clone()).is_err());
        assert!(WeightedGraph::new(vec![1.0; 2], w).is_ok());
        assert!(WeightedGraph::from_edges(vec![1.0; 2], &[(0, 0, 1.0)]).is_err());
        assert!(WeightedGraph::from_edges(vec![1.0; 2], &[(0, 5, 1.0)]).is_err());
    }

    #[test]
    fn inputs_parse() {
        let g = WeightedGraph::from_json(r#"{"mu": [1, 2], "edges": [[0, 1, 0.5]]}"#).unwrap();
        assert_eq!(g.nu(), &[0.5, 0.5]);
        let h = WeightedGraph::from_adjacency_csv("0,1\n1,0\n", None).unwrap();
        assert_eq!(h.c(), vec![1.0, 1.0]);
        assert!(WeightedGraph::from_adjacency_csv("0,1\n2,0\n", None).is_err());
    }

    #[test]
    fn two_state_variance() {
        let g = WeightedGraph::path(2).unwrap();
        let r = g.variance_decomposition_check(&[0.0, 1.0]).unwrap();
        assert_eq!(r.energy, 1.0);
        assert_eq!(r.decomposition, 1.0);
        let z = g.variance_decomposition_check(&[4.0, 4.0]).unwrap();
        assert_eq!((z.energy, z.decomposition), (0.0, 0.0));
    }

    #[test]
    fn constants_have_zero_energy_kernel() {
        let g = WeightedGraph::random(8, 0.5, 4).unwrap();
        let all: Vec<usize> = (0..8).collect();
        assert!(g.energy_kernel(&all, &all).unwrap().abs() < 1e-12);
        assert!(g.energy_kernel(&[0, 1], &[2, 3]).unwrap() <= 0.0);
    }

    #[test]
    fn trajectories_are_reproducible() {
        let g = WeightedGraph::random(6, 0.7, 1).unwrap();
        assert_eq!(g.chain_trajectory(0, 500, 9, 0).unwrap(), g.chain_trajectory(0, 500, 9, 0).unwrap());
        let two = WeightedGraph::path(2).unwrap().simulate_chain(0, 10_000, 2, 5).unwrap();
        assert!(two.tv.unwrap() < 1e-3);
    }
}
