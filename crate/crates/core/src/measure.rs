//! Measures on an interval or a finite set, regions, and partitions.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::quadrature;

/// Default absolute tolerance for integrating density measures.
pub const DENSITY_TOL: f64 = 1e-10;
/// Default recursion depth for the middle-third Cantor measure.
pub const CANTOR_DEPTH: u32 = 30;
/// Tolerance, in measure units, for equal-measure splitting.
pub const SPLIT_TOL: f64 = 1e-12;

/// Half-open interval `[lo, hi)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(from = "[f64; 2]", into = "[f64; 2]")]
pub struct Interval {
    pub lo: f64,
    pub hi: f64,
}

impl From<[f64; 2]> for Interval {
    fn from(v: [f64; 2]) -> Self {
        Interval { lo: v[0], hi: v[1] }
    }
}

impl From<Interval> for [f64; 2] {
    fn from(i: Interval) -> Self {
        [i.lo, i.hi]
    }
}

impl Interval {
    pub fn new(lo: f64, hi: f64) -> Self {
        Interval { lo, hi }
    }

    pub fn len(&self) -> f64 {
        (self.hi - self.lo).max(0.0)
    }

    pub fn is_empty(&self) -> bool {
        self.hi <= self.lo
    }

    pub fn contains(&self, x: f64) -> bool {
        self.lo <= x && x < self.hi
    }

    pub fn intersect(&self, other: &Interval) -> Interval {
        Interval::new(self.lo.max(other.lo), self.hi.min(other.hi))
    }
}

/// A finite union of half-open intervals, or a finite set of points.
///
/// Interval lists are kept sorted, disjoint and non-adjacent; point sets sorted
/// and deduplicated. Both constructors normalize their input.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Region {
    Intervals(Vec<Interval>),
    Points(Vec<f64>),
}

impl Region {
    pub fn interval(lo: f64, hi: f64) -> Self {
        Region::union_of(vec![Interval::new(lo, hi)])
    }

    pub fn union_of(mut ivs: Vec<Interval>) -> Self {
        ivs.retain(|i| !i.is_empty());
        ivs.sort_by(|a, b| a.lo.total_cmp(&b.lo));
        let mut out: Vec<Interval> = Vec::with_capacity(ivs.len());
        for iv in ivs {
            match out.last_mut() {
                Some(last) if iv.lo <= last.hi => last.hi = last.hi.max(iv.hi),
                _ => out.push(iv),
            }
        }
        Region::Intervals(out)
    }

    pub fn points(mut pts: Vec<f64>) -> Self {
        pts.sort_by(f64::total_cmp);
        pts.dedup();
        Region::Points(pts)
    }

    pub fn empty() -> Self {
        Region::Intervals(Vec::new())
    }

    pub fn is_empty(&self) -> bool {
        match self {
            Region::Intervals(v) => v.is_empty(),
            Region::Points(p) => p.is_empty(),
        }
    }

    pub fn intersect(&self, other: &Region) -> Region {
        match (self, other) {
            (Region::Intervals(a), Region::Intervals(b)) => {
                let mut out = Vec::new();
                let (mut i, mut j) = (0, 0);
                while i < a.len() && j < b.len() {
                    let iv = a[i].intersect(&b[j]);
                    if !iv.is_empty() {
                        out.push(iv);
                    }
                    if a[i].hi < b[j].hi {
                        i += 1;
                    } else {
                        j += 1;
                    }
                }
                Region::Intervals(out)
            }
            (Region::Intervals(ivs), Region::Points(p)) | (Region::Points(p), Region::Intervals(ivs)) => {
                Region::Points(p.iter().copied().filter(|x| ivs.iter().any(|iv| iv.contains(*x))).collect())
            }
            (Region::Points(p), Region::Points(q)) => {
                Region::Points(p.iter().copied().filter(|x| q.binary_search_by(|y| y.total_cmp(x)).is_ok()).collect())
            }
        }
    }

    /// Union of two regions of the same kind.
    pub fn union(&self, other: &Region) -> Result<Region> {
        match (self, other) {
            (Region::Intervals(a), Region::Intervals(b)) => {
                Ok(Region::union_of(a.iter().chain(b).copied().collect()))
            }
            (Region::Points(a), Region::Points(b)) => Ok(Region::points(a.iter().chain(b).copied().collect())),
            _ => Err(Error::input("cannot take the union of an interval region and a point region")),
        }
    }

    pub fn is_disjoint(&self, other: &Region) -> bool {
        self.intersect(other).is_empty()
    }

    /// Smallest closed interval containing the region, if non-empty.
    pub fn hull(&self) -> Option<(f64, f64)> {
        match self {
            Region::Intervals(v) => Some((v.first()?.lo, v.last()?.hi)),
            Region::Points(p) => Some((*p.first()?, *p.last()?)),
        }
    }

    pub fn label(&self) -> String {
        match self {
            Region::Intervals(v) if v.is_empty() => "empty".to_string(),
            Region::Intervals(v) => v
                .iter()
                .map(|i| format!("[{};{})", i.lo, i.hi))
                .collect::<Vec<_>>()
                .join("u"),
            Region::Points(p) => {
                format!("{{{}}}", p.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(";"))
            }
        }
    }
}

/// Lebesgue density of a density-kind measure.
#[derive(Debug, Clone, PartialEq)]
pub enum Density {
    Uniform,
    /// `x^p` on a domain inside `[0, ∞)`.
    Power(f64),
    /// Piecewise-linear interpolation of `(x, w)` breakpoints, zero outside.
    Table(Vec<(f64, f64)>),
}

impl Density {
    pub fn eval(&self, x: f64) -> f64 {
        match self {
            Density::Uniform => 1.0,
            Density::Power(p) => x.powf(*p),
            Density::Table(t) => {
                if t.is_empty() || x < t[0].0 || x > t[t.len() - 1].0 {
                    return 0.0;
                }
                let k = t.partition_point(|(xi, _)| *xi <= x);
                if k == t.len() {
                    return t[t.len() - 1].1;
                }
                let (x0, w0) = t[k - 1];
                let (x1, w1) = t[k];
                w0 + (w1 - w0) * (x - x0) / (x1 - x0)
            }
        }
    }

    fn parse(spec: &str) -> Result<Density> {
        if spec == "uniform" {
            return Ok(Density::Uniform);
        }
        if let Some(p) = spec.strip_prefix("power:") {
            let p: f64 = p.parse().map_err(|_| Error::input(format!("bad power exponent in {spec:?}")))?;
            return Ok(Density::Power(p));
        }
        Err(Error::input(format!("unknown density {spec:?}")))
    }
}

/// A σ-finite measure restricted to a bounded window.
#[derive(Debug, Clone, PartialEq)]
pub enum Measure {
    Lebesgue { lo: f64, hi: f64 },
    Density { lo: f64, hi: f64, density: Density, tol: f64 },
    /// Finitely many atoms, sorted by location.
    Atomic { atoms: Vec<(f64, f64)> },
    /// Middle-third Cantor measure on `[0, 1]`.
    Cantor { depth: u32 },
}

impl Measure {
    pub fn lebesgue(lo: f64, hi: f64) -> Self {
        Measure::Lebesgue { lo, hi }
    }

    pub fn unit_lebesgue() -> Self {
        Measure::lebesgue(0.0, 1.0)
    }

    pub fn density(lo: f64, hi: f64, density: Density) -> Result<Self> {
        if let Density::Table(t) = &density {
            if t.windows(2).any(|w| w[1].0 <= w[0].0) {
                return Err(Error::input("density table abscissae must be strictly increasing"));
            }
            if t.iter().any(|(_, w)| *w < 0.0 || !w.is_finite()) {
                return Err(Error::input("density table values must be finite and non-negative"));
            }
        }
        if let Density::Power(_) = density {
            if lo < 0.0 {
                return Err(Error::domain("power density requires a domain inside [0, inf)"));
            }
        }
        Ok(Measure::Density { lo, hi, density, tol: DENSITY_TOL })
    }

    pub fn atomic(mut atoms: Vec<(f64, f64)>) -> Result<Self> {
        if atoms.iter().any(|(x, m)| !x.is_finite() || !m.is_finite() || *m < 0.0) {
            return Err(Error::input("atoms need finite locations and non-negative finite masses"));
        }
        atoms.sort_by(|a, b| a.0.total_cmp(&b.0));
        Ok(Measure::Atomic { atoms })
    }

    /// Unit-mass Dirac comb on the integers `-n..=n`.
    pub fn dirac_comb(n: i64) -> Self {
        Measure::Atomic { atoms: (-n..=n).map(|k| (k as f64, 1.0)).collect() }
    }

    pub fn cantor() -> Self {
        Measure::Cantor { depth: CANTOR_DEPTH }
    }

    pub fn cantor_with_depth(depth: u32) -> Self {
        Measure::Cantor { depth }
    }

    /// Ambient window `[lo, hi]`.
    pub fn domain(&self) -> (f64, f64) {
        match self {
            Measure::Lebesgue { lo, hi } | Measure::Density { lo, hi, .. } => (*lo, *hi),
            Measure::Atomic { atoms } => match (atoms.first(), atoms.last()) {
                (Some(a), Some(b)) => (a.0, b.0),
                _ => (0.0, 0.0),
            },
            Measure::Cantor { .. } => (0.0, 1.0),
        }
    }

    pub fn has_atoms(&self) -> bool {
        matches!(self, Measure::Atomic { .. })
    }

    /// Total mass of the ambient window.
    pub fn total_mass(&self) -> Result<f64> {
        match self {
            Measure::Atomic { atoms } => Ok(atoms.iter().map(|a| a.1).sum()),
            _ => {
                let (lo, hi) = self.domain();
                self.interval_measure(lo, hi)
            }
        }
    }

    fn check_within(&self, r: &Region) -> Result<()> {
        if self.has_atoms() {
            return Ok(());
        }
        let (lo, hi) = self.domain();
        if let Some((a, b)) = r.hull() {
            if a < lo || b > hi || !a.is_finite() || !b.is_finite() {
                return Err(Error::domain(format!(
                    "region {} is not inside the ambient domain [{lo}, {hi}]",
                    r.label()
                )));
            }
        }
        Ok(())
    }

    /// μ([a, b)).
    fn interval_measure(&self, a: f64, b: f64) -> Result<f64> {
        if b <= a {
            return Ok(0.0);
        }
        match self {
            Measure::Lebesgue { .. } => Ok(b - a),
            Measure::Density { density, tol, .. } => integrate_density(density, a, b, *tol),
            Measure::Atomic { atoms } => {
                let i = atoms.partition_point(|x| x.0 < a);
                let j = atoms.partition_point(|x| x.0 < b);
                Ok(atoms[i..j].iter().map(|x| x.1).sum())
            }
            Measure::Cantor { depth } => Ok(cantor_cdf(b, *depth) - cantor_cdf(a, *depth)),
        }
    }

    /// μ(r).
    pub fn measure_of(&self, r: &Region) -> Result<f64> {
        self.check_within(r)?;
        match r {
            Region::Intervals(ivs) => ivs.iter().map(|iv| self.interval_measure(iv.lo, iv.hi)).sum(),
            Region::Points(p) => match self {
                Measure::Atomic { atoms } => Ok(p
                    .iter()
                    .map(|x| {
                        let i = atoms.partition_point(|a| a.0 < *x);
                        atoms[i..].iter().take_while(|a| a.0 == *x).map(|a| a.1).sum::<f64>()
                    })
                    .sum()),
                // finite sets are null for non-atomic measures
                _ => Ok(0.0),
            },
        }
    }

    /// μ(a ∩ b), the set-indexed kernel β_μ.
    pub fn intersection_measure(&self, a: &Region, b: &Region) -> Result<f64> {
        self.check_within(a)?;
        self.check_within(b)?;
        self.measure_of(&a.intersect(b))
    }

    /// F(x) = μ([lo, x]) where `lo` is the left end of the ambient window.
    pub fn cumulative(&self, x: f64) -> Result<f64> {
        let (lo, hi) = self.domain();
        match self {
            Measure::Atomic { atoms } => {
                let j = atoms.partition_point(|a| a.0 <= x);
                Ok(atoms[..j].iter().map(|a| a.1).sum())
            }
            Measure::Cantor { depth } => Ok(cantor_cdf(x, *depth)),
            _ => {
                if x < lo || x > hi {
                    return Err(Error::domain(format!("{x} outside the ambient domain [{lo}, {hi}]")));
                }
                self.interval_measure(lo, x)
            }
        }
    }

    /// Smallest x in [a, b] with μ([a, x)) ≥ target, by bisection on the cumulative.
    pub fn quantile_in(&self, a: f64, b: f64, target: f64) -> Result<f64> {
        let (mut lo, mut hi) = (a, b);
        let base = self.interval_measure(a, a)?;
        debug_assert_eq!(base, 0.0);
        loop {
            let mid = 0.5 * (lo + hi);
            if mid <= lo || mid >= hi {
                return Ok(hi);
            }
            if self.interval_measure(a, mid)? >= target {
                hi = mid;
            } else {
                lo = mid;
            }
            if self.interval_measure(lo, hi)? <= SPLIT_TOL {
                return Ok(hi);
            }
        }
    }
}

fn integrate_density(density: &Density, a: f64, b: f64, tol: f64) -> Result<f64> {
    match density {
        Density::Uniform => Ok(b - a),
        Density::Power(p) => {
            if a <= 0.0 && *p <= -1.0 {
                return Err(Error::domain(format!("x^{p} is not integrable at 0")));
            }
            let r = quadrature::adaptive(&|x: f64| x.powf(*p), a, b, tol)?;
            Ok(r.value)
        }
        Density::Table(t) => {
            // linear pieces: the 16-point rule is exact on each
            let mut breaks = vec![a];
            breaks.extend(t.iter().map(|p| p.0).filter(|x| *x > a && *x < b));
            breaks.push(b);
            Ok(quadrature::composite(&|x| density.eval(x), &breaks))
        }
    }
}

/// Devil's staircase F(x) = μ₃([0, x]).
///
/// Points that are (to rounding) triadic rationals k/3^m with m ≤ 20 are evaluated
/// exactly from their base-3 digits. Elsewhere the triadic recursion runs to
/// `depth` levels and interpolates linearly inside the last cell, so the error is
/// at most 2^-depth.
pub fn cantor_cdf(x: f64, depth: u32) -> f64 {
    if x <= 0.0 {
        return 0.0;
    }
    if x >= 1.0 {
        return 1.0;
    }
    let max_m = depth.min(20);
    let mut pow3: u64 = 1;
    for m in 0..=max_m {
        let scaled = x * pow3 as f64;
        let k = scaled.round();
        if (scaled - k).abs() <= 4.0 * f64::EPSILON * scaled.max(1.0) {
            return cantor_cdf_triadic(k as u64, m);
        }
        pow3 *= 3;
    }
    let mut y = x;
    let mut acc = 0.0;
    let mut scale = 1.0;
    for _ in 0..depth {
        scale *= 0.5;
        if y < 1.0 / 3.0 {
            y *= 3.0;
        } else if y < 2.0 / 3.0 {
            return acc + scale;
        } else {
            acc += scale;
            y = 3.0 * y - 2.0;
        }
    }
    acc + scale * y.clamp(0.0, 1.0)
}

/// F(k / 3^m), exact.
fn cantor_cdf_triadic(k: u64, m: u32) -> f64 {
    let mut digits = Vec::with_capacity(m as usize);
    let mut r = k;
    for _ in 0..m {
        digits.push(r % 3);
        r /= 3;
    }
    if r > 0 {
        return 1.0;
    }
    let mut acc = 0.0;
    let mut scale = 1.0;
    for d in digits.into_iter().rev() {
        scale *= 0.5;
        match d {
            0 => {}
            1 => return acc + scale,
            _ => acc += scale,
        }
    }
    acc
}

/// A partition of a parent interval into consecutive half-open cells.
#[derive(Debug, Clone, PartialEq)]
pub struct Partition {
    parent: Interval,
    cells: Vec<Interval>,
}

impl Partition {
    /// Builds a partition from increasing breakpoints `b_0 < ... < b_n`.
    pub fn from_breaks(breaks: &[f64]) -> Result<Self> {
        if breaks.len() < 2 {
            return Err(Error::input("a partition needs at least two breakpoints"));
        }
        if breaks.windows(2).any(|w| w[1] < w[0]) {
            return Err(Error::input("partition breakpoints must be nondecreasing"));
        }
        Ok(Partition {
            parent: Interval::new(breaks[0], breaks[breaks.len() - 1]),
            cells: breaks.windows(2).map(|w| Interval::new(w[0], w[1])).collect(),
        })
    }

    pub fn uniform(lo: f64, hi: f64, n: usize) -> Result<Self> {
        if n == 0 {
            return Err(Error::input("a partition needs at least one cell"));
        }
        let breaks: Vec<f64> = (0..=n)
            .map(|i| if i == n { hi } else { lo + (hi - lo) * i as f64 / n as f64 })
            .collect();
        Partition::from_breaks(&breaks)
    }

    /// `n` cells of equal μ-measure (equal length where μ has atoms).
    pub fn equal_measure(m: &Measure, lo: f64, hi: f64, n: usize) -> Result<Self> {
        Partition::from_breaks(&[lo, hi])?.refine(m, n)
    }

    pub fn parent(&self) -> Interval {
        self.parent
    }

    pub fn cells(&self) -> &[Interval] {
        &self.cells
    }

    pub fn len(&self) -> usize {
        self.cells.len()
    }

    pub fn is_empty(&self) -> bool {
        self.cells.is_empty()
    }

    pub fn cell_regions(&self) -> Vec<Region> {
        self.cells.iter().map(|c| Region::Intervals(vec![*c])).collect()
    }

    pub fn breaks(&self) -> Vec<f64> {
        let mut b: Vec<f64> = self.cells.iter().map(|c| c.lo).collect();
        b.push(self.parent.hi);
        b
    }

    /// max over cells of μ(cell).
    pub fn mesh(&self, m: &Measure) -> Result<f64> {
        self.cells
            .iter()
            .map(|c| m.measure_of(&Region::Intervals(vec![*c])))
            .try_fold(0.0_f64, |acc, v| v.map(|v| acc.max(v)))
    }

    /// Splits every cell into `factor` sub-cells of equal μ-measure. Cells carrying
    /// no mass (and measures with atoms) are split into equal lengths; degenerate
    /// cells are kept as they are.
    pub fn refine(&self, m: &Measure, factor: usize) -> Result<Partition> {
        if factor < 2 {
            return Err(Error::input("refinement factor must be at least 2"));
        }
        let mut cells = Vec::with_capacity(self.cells.len() * factor);
        for c in &self.cells {
            if c.is_empty() {
                cells.push(*c);
                continue;
            }
            let mass = m.measure_of(&Region::Intervals(vec![*c]))?;
            let mut breaks = vec![c.lo];
            if mass > 0.0 && !m.has_atoms() {
                for k in 1..factor {
                    let target = mass * k as f64 / factor as f64;
                    let x = m.quantile_in(c.lo, c.hi, target)?;
                    breaks.push(x.max(*breaks.last().expect("non-empty")));
                }
            } else {
                breaks.extend((1..factor).map(|k| c.lo + c.len() * k as f64 / factor as f64));
            }
            breaks.push(c.hi);
            cells.extend(breaks.windows(2).map(|w| Interval::new(w[0], w[1])));
        }
        Ok(Partition { parent: self.parent, cells })
    }
}

/// JSON form of a measure:
/// `{"kind": "lebesgue"|"density"|"atomic"|"cantor", ...}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum MeasureConfig {
    Lebesgue {
        #[serde(default = "unit_domain")]
        domain: [f64; 2],
    },
    Density {
        #[serde(default = "unit_domain")]
        domain: [f64; 2],
        density: DensityConfig,
    },
    Atomic {
        #[serde(default)]
        atoms: Vec<[f64; 2]>,
        /// Unit Dirac comb on `-n..=n`, used when `atoms` is empty.
        #[serde(default)]
        dirac_comb: Option<i64>,
    },
    Cantor {
        #[serde(default = "default_depth")]
        depth: u32,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum DensityConfig {
    Named(String),
    Table { table: Vec<[f64; 2]> },
}

fn unit_domain() -> [f64; 2] {
    [0.0, 1.0]
}

fn default_depth() -> u32 {
    CANTOR_DEPTH
}

impl MeasureConfig {
    pub fn build(&self) -> Result<Measure> {
        match self {
            MeasureConfig::Lebesgue { domain } => {
                check_domain(domain)?;
                Ok(Measure::lebesgue(domain[0], domain[1]))
            }
            MeasureConfig::Density { domain, density } => {
                check_domain(domain)?;
                let d = match density {
                    DensityConfig::Named(s) => Density::parse(s)?,
                    DensityConfig::Table { table } => Density::Table(table.iter().map(|p| (p[0], p[1])).collect()),
                };
                Measure::density(domain[0], domain[1], d)
            }
            MeasureConfig::Atomic { atoms, dirac_comb } => match (atoms.is_empty(), dirac_comb) {
                (true, Some(n)) if *n >= 0 => Ok(Measure::dirac_comb(*n)),
                (true, _) => Err(Error::input("atomic measure needs `atoms` or a non-negative `dirac_comb`")),
                (false, _) => Measure::atomic(atoms.iter().map(|a| (a[0], a[1])).collect()),
            },
            MeasureConfig::Cantor { depth } => {
                if *depth == 0 || *depth > 60 {
                    return Err(Error::input("cantor depth must be in 1..=60"));
                }
                Ok(Measure::cantor_with_depth(*depth))
            }
        }
    }
}

fn check_domain(d: &[f64; 2]) -> Result<()> {
    if !(d[0].is_finite() && d[1].is_finite() && d[0] < d[1]) {
        return Err(Error::input(format!("domain must be a finite interval with lo < hi, got {d:?}")));
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn iv(a: f64, b: f64) -> Region {
        Region::interval(a, b)
    }

    #[test]
    fn lebesgue_half_interval() {
        let m = Measure::unit_lebesgue();
        assert_eq!(m.measure_of(&iv(0.0, 0.5)).unwrap(), 0.5);
        assert_eq!(m.cumulative(0.3).unwrap(), 0.3);
    }

    #[test]
    fn cantor_thirds() {
        let m = Measure::cantor_with_depth(20);
        assert_eq!(m.measure_of(&iv(0.0, 1.0 / 3.0)).unwrap(), 0.5);
        assert_eq!(m.measure_of(&iv(1.0 / 3.0, 2.0 / 3.0)).unwrap(), 0.0);
        assert_eq!(m.cumulative(1.0).unwrap(), 1.0);
        assert_eq!(m.cumulative(0.5).unwrap(), 0.5);
        assert_eq!(m.cumulative(0.0).unwrap(), 0.0);
    }

    #[test]
    fn cantor_triadic_points_are_exact() {
        // F(1/9) = 1/4, F(2/9) = 1/4, F(7/9) = 3/4, F(20/27) = 5/8
        assert_eq!(cantor_cdf(1.0 / 9.0, 30), 0.25);
        assert_eq!(cantor_cdf(2.0 / 9.0, 30), 0.25);
        assert_eq!(cantor_cdf(7.0 / 9.0, 30), 0.75);
        assert_eq!(cantor_cdf(20.0 / 27.0, 30), 0.625);
    }

    #[test]
    fn cantor_symmetry_on_generic_points() {
        for &x in &[0.1234, 0.27, 0.71, 0.9] {
            let f = cantor_cdf(x, 40);
            let g = cantor_cdf(1.0 - x, 40);
            // F is only log2/log3-Hölder, so the rounding of x and 1 − x alone moves F by ~1e-10
            assert!((f + g - 1.0).abs() < 1e-9, "{x}: {f} + {g}");
        }
    }

    #[test]
    fn intersections() {
        let m = Measure::unit_lebesgue();
        let a = iv(0.0, 0.5);
        let b = iv(0.25, 0.75);
        assert_eq!(m.intersection_measure(&a, &b).unwrap(), 0.25);
        assert_eq!(m.intersection_measure(&a, &a).unwrap(), 0.5);

        let comb = Measure::dirac_comb(10);
        let p = Region::points(vec![0.0, 1.0, 2.0]);
        let q = Region::points(vec![2.0, 3.0]);
        assert_eq!(comb.intersection_measure(&p, &q).unwrap(), 1.0);
    }

    #[test]
    fn region_outside_domain_is_rejected() {
        let m = Measure::unit_lebesgue();
        assert!(matches!(m.measure_of(&iv(0.5, 1.5)), Err(Error::Domain(_))));
    }

    #[test]
    fn non_integrable_density_is_a_domain_error() {
        let m = Measure::density(0.0, 1.0, Density::Power(-1.5)).unwrap();
        assert!(matches!(m.measure_of(&iv(0.0, 0.5)), Err(Error::Domain(_))));
        // away from the singularity it is fine
        let v = m.measure_of(&iv(0.25, 1.0)).unwrap();
        assert!((v - 2.0).abs() < 1e-9);
    }

    #[test]
    fn density_measures() {
        let m = Measure::density(0.0, 1.0, Density::Power(2.0)).unwrap();
        assert!((m.measure_of(&iv(0.0, 1.0)).unwrap() - 1.0 / 3.0).abs() < 1e-12);
        let t = Measure::density(0.0, 2.0, Density::Table(vec![(0.0, 0.0), (1.0, 2.0), (2.0, 0.0)])).unwrap();
        assert!((t.measure_of(&iv(0.0, 2.0)).unwrap() - 2.0).abs() < 1e-14);
        assert!((t.measure_of(&iv(0.5, 1.5)).unwrap() - 1.5).abs() < 1e-14);
    }

    #[test]
    fn region_normalization_merges_overlaps() {
        let r = Region::union_of(vec![Interval::new(0.5, 0.7), Interval::new(0.0, 0.2), Interval::new(0.1, 0.3)]);
        assert_eq!(r, Region::Intervals(vec![Interval::new(0.0, 0.3), Interval::new(0.5, 0.7)]));
    }

    #[test]
    fn refine_uniform_partition() {
        let m = Measure::unit_lebesgue();
        let p = Partition::uniform(0.0, 1.0, 2).unwrap();
        let r = p.refine(&m, 2).unwrap();
        assert_eq!(r.len(), 4);
        for c in r.cell_regions() {
            assert!((m.measure_of(&c).unwrap() - 0.25).abs() < 1e-15);
        }
        assert!(r.mesh(&m).unwrap() < p.mesh(&m).unwrap());
        assert!(matches!(p.refine(&m, 1), Err(Error::Input(_))));
    }

    #[test]
    fn cantor_equal_measure_split_lands_on_the_gap() {
        // Oracle: bisection directly on the staircase for the level 0.5.
        let (mut lo, mut hi) = (0.0_f64, 1.0_f64);
        while hi - lo > 1e-15 {
            let mid = 0.5 * (lo + hi);
            if cantor_cdf(mid, 30) >= 0.5 { hi = mid } else { lo = mid }
        }
        let m = Measure::cantor();
        let p = Partition::equal_measure(&m, 0.0, 1.0, 2).unwrap();
        let split = p.cells()[0].hi;
        assert!((split - hi).abs() < 1e-9, "{split} vs {hi}");
        assert!((split - 1.0 / 3.0).abs() < 1e-9);
        for c in p.cell_regions() {
            assert!((m.measure_of(&c).unwrap() - 0.5).abs() < 1e-12);
        }
    }

    #[test]
    fn zero_mass_cells_split_by_length_and_degenerate_cells_kept() {
        let m = Measure::cantor();
        let p = Partition::from_breaks(&[0.4, 0.6, 0.6]).unwrap();
        let r = p.refine(&m, 2).unwrap();
        assert_eq!(r.len(), 3);
        assert!((r.cells()[0].hi - 0.5).abs() < 1e-15);
        assert!(r.cells()[2].is_empty());
    }

    #[test]
    fn config_roundtrip_builds_measures() {
        let cfgs = [
            r#"{"kind":"lebesgue","domain":[0,2]}"#,
            r#"{"kind":"density","density":"power:2"}"#,
            r#"{"kind":"density","density":{"table":[[0,1],[1,1]]}}"#,
            r#"{"kind":"atomic","dirac_comb":5}"#,
            r#"{"kind":"cantor","depth":25}"#,
        ];
        for c in cfgs {
            let cfg: MeasureConfig = serde_json::from_str(c).unwrap();
            cfg.build().unwrap();
        }
        let bad: MeasureConfig = serde_json::from_str(r#"{"kind":"density","density":"wobbly"}"#).unwrap();
        assert!(bad.build().is_err());
    }
}
