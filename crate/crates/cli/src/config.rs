//! JSON experiment configs. A config names a subcommand, a seed, an output
//! directory and a parameter object whose schema depends on the subcommand.

use std::path::{Path, PathBuf};

use gfield::fbm::{FbmMethod, Normalization};
use gfield::kl::BasisKind;
use gfield::laplacian::GraphConfig;
use gfield::measure::{Interval, MeasureConfig, Region};
use gfield::timechange::{Clock, SchemeParams, TestFn};
use gfield::verify::FBM_GRID;
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use crate::error::CliError;

/// Top level of a config file.
#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RawConfig {
    pub subcommand: String,
    #[serde(default)]
    pub seed: Option<u64>,
    #[serde(default)]
    pub out_dir: Option<PathBuf>,
    #[serde(default)]
    pub tolerance_scale: Option<f64>,
    #[serde(default = "empty_object")]
    pub params: serde_json::Value,
}

fn empty_object() -> serde_json::Value {
    serde_json::Value::Object(Default::default())
}

#[derive(Debug, Clone)]
pub enum Experiment {
    Field(FieldParams),
    Rkhs(RkhsParams),
    Fbm(FbmParams),
    Timechange(TimechangeParams),
    Laplacian(LaplacianParams),
    Shannon(ShannonParams),
    VerifyAll(VerifyParams),
}

impl Experiment {
    pub fn name(&self) -> &'static str {
        match self {
            Experiment::Field(_) => "field",
            Experiment::Rkhs(_) => "rkhs",
            Experiment::Fbm(_) => "fbm",
            Experiment::Timechange(_) => "timechange",
            Experiment::Laplacian(_) => "laplacian",
            Experiment::Shannon(_) => "shannon",
            Experiment::VerifyAll(_) => "verify-all",
        }
    }

    pub fn validate(&self) -> Result<(), CliError> {
        match self {
            Experiment::Field(p) => p.validate(),
            Experiment::Rkhs(p) => p.validate(),
            Experiment::Fbm(p) => p.validate(),
            Experiment::Timechange(p) => p.validate(),
            Experiment::Laplacian(p) => p.validate(),
            Experiment::Shannon(p) => p.validate(),
            Experiment::VerifyAll(p) => p.validate(),
        }
    }
}

pub struct LoadedConfig {
    pub experiment: Experiment,
    pub seed: Option<u64>,
    pub out_dir: Option<PathBuf>,
    pub tolerance_scale: Option<f64>,
}

/// Parses and validates a config. Errors carry the JSON path of the offending field.
pub fn parse_config(text: &str) -> Result<LoadedConfig, CliError> {
    let de = &mut serde_json::Deserializer::from_str(text);
    let raw: RawConfig = serde_path_to_error::deserialize(de).map_err(|e| {
        let path = e.path().to_string();
        CliError::input_at(if path == "." { String::new() } else { path }, e.into_inner().to_string())
    })?;
    let experiment = match raw.subcommand.as_str() {
        "field" => Experiment::Field(params(&raw.params)?),
        "rkhs" => Experiment::Rkhs(params(&raw.params)?),
        "fbm" => Experiment::Fbm(params(&raw.params)?),
        "timechange" => Experiment::Timechange(params(&raw.params)?),
        "laplacian" => Experiment::Laplacian(params(&raw.params)?),
        "shannon" => Experiment::Shannon(params(&raw.params)?),
        "verify-all" => Experiment::VerifyAll(params(&raw.params)?),
        other => {
            return Err(CliError::input_at(
                "subcommand",
                format!("unknown subcommand {other:?}; expected one of field, rkhs, fbm, timechange, laplacian, shannon, verify-all"),
            ))
        }
    };
    if let Some(s) = raw.tolerance_scale {
        check_positive("tolerance_scale", s)?;
    }
    experiment.validate()?;
    Ok(LoadedConfig { experiment, seed: raw.seed, out_dir: raw.out_dir, tolerance_scale: raw.tolerance_scale })
}

pub fn load_config(path: &Path) -> Result<LoadedConfig, CliError> {
    let text = std::fs::read_to_string(path).map_err(|e| CliError::input(format!("cannot read {}: {e}", path.display())))?;
    parse_config(&text)
}

fn params<T: DeserializeOwned>(v: &serde_json::Value) -> Result<T, CliError> {
    serde_path_to_error::deserialize(v).map_err(|e| {
        let path = e.path().to_string();
        let path = if path == "." { "params".to_string() } else { format!("params.{path}") };
        CliError::input_at(path, e.into_inner().to_string())
    })
}

// ---------------------------------------------------------------- validation helpers

fn check_positive(path: &str, v: f64) -> Result<(), CliError> {
    if v > 0.0 && v.is_finite() {
        Ok(())
    } else {
        Err(CliError::input_at(path, format!("must be positive and finite, got {v}")))
    }
}

fn check_count(path: &str, n: usize) -> Result<(), CliError> {
    if n == 0 {
        Err(CliError::input_at(path, "must be at least 1"))
    } else {
        Ok(())
    }
}

fn check_finite(path: &str, xs: &[f64]) -> Result<(), CliError> {
    match xs.iter().position(|x| !x.is_finite()) {
        Some(i) => Err(CliError::input_at(format!("{path}[{i}]"), "must be finite")),
        None => Ok(()),
    }
}

// ---------------------------------------------------------------- regions

/// `[lo, hi]`, a list of such intervals, or `{"points": [...]}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum RegionSpec {
    Interval([f64; 2]),
    Union(Vec<[f64; 2]>),
    Points { points: Vec<f64> },
}

impl RegionSpec {
    pub fn build(&self, path: &str) -> Result<Region, CliError> {
        let check = |iv: &[f64; 2], p: String| {
            if iv[0].is_finite() && iv[1].is_finite() && iv[0] < iv[1] {
                Ok(Interval::new(iv[0], iv[1]))
            } else {
                Err(CliError::input_at(p, format!("interval needs finite lo < hi, got {iv:?}")))
            }
        };
        match self {
            RegionSpec::Interval(iv) => Ok(Region::union_of(vec![check(iv, path.to_string())?])),
            RegionSpec::Union(ivs) => {
                let ivs = ivs.iter().enumerate().map(|(i, iv)| check(iv, format!("{path}[{i}]"))).collect::<Result<_, _>>()?;
                Ok(Region::union_of(ivs))
            }
            RegionSpec::Points { points } => {
                check_finite(&format!("{path}.points"), points)?;
                Ok(Region::points(points.clone()))
            }
        }
    }

    /// "a,b", "a,b;c,d" for a union, or "points:x1,x2,...".
    pub fn parse(s: &str) -> Result<Self, String> {
        if let Some(rest) = s.strip_prefix("points:") {
            return Ok(RegionSpec::Points { points: gfield::io::parse_float_list(rest)? });
        }
        let ivs = s
            .split(';')
            .map(|part| match gfield::io::parse_float_list(part)?.as_slice() {
                [a, b] => Ok([*a, *b]),
                _ => Err(format!("expected lo,hi in region {part:?}")),
            })
            .collect::<Result<Vec<_>, String>>()?;
        Ok(if ivs.len() == 1 { RegionSpec::Interval(ivs[0]) } else { RegionSpec::Union(ivs) })
    }
}

pub fn build_regions(specs: &[RegionSpec]) -> Result<Vec<Region>, CliError> {
    if specs.is_empty() {
        return Err(CliError::input_at("params.regions", "need at least one region"));
    }
    specs.iter().enumerate().map(|(i, r)| r.build(&format!("params.regions[{i}]"))).collect()
}

/// Parses a measure flag: `lebesgue[:lo,hi]`, `density:lo,hi:<uniform|power:p>`,
/// `atomic:x@w,...`, `dirac-comb:n`, `cantor[:depth]`, or inline JSON.
pub fn parse_measure(s: &str) -> Result<MeasureConfig, String> {
    if s.trim_start().starts_with('{') {
        return serde_json::from_str(s).map_err(|e| format!("bad measure JSON: {e}"));
    }
    let (head, rest) = s.split_once(':').unwrap_or((s, ""));
    let domain = |d: &str| -> Result<[f64; 2], String> {
        match gfield::io::parse_float_list(d)?.as_slice() {
            [a, b] => Ok([*a, *b]),
            _ => Err(format!("expected lo,hi in {d:?}")),
        }
    };
    match head {
        "lebesgue" => Ok(MeasureConfig::Lebesgue { domain: if rest.is_empty() { [0.0, 1.0] } else { domain(rest)? } }),
        "density" => {
            let (d, density) = rest.split_once(':').ok_or("density needs lo,hi:<density>")?;
            Ok(MeasureConfig::Density { domain: domain(d)?, density: gfield::measure::DensityConfig::Named(density.to_string()) })
        }
        "atomic" => {
            let atoms = rest
                .split(',')
                .map(|a| {
                    let (x, w) = a.split_once('@').ok_or(format!("atom {a:?} should be x@w"))?;
                    let p = |v: &str| v.trim().parse::<f64>().map_err(|_| format!("not a number: {v:?}"));
                    Ok([p(x)?, p(w)?])
                })
                .collect::<Result<Vec<_>, String>>()?;
            Ok(MeasureConfig::Atomic { atoms, dirac_comb: None })
        }
        "dirac-comb" => {
            let n = rest.parse::<i64>().map_err(|_| format!("bad comb size {rest:?}"))?;
            Ok(MeasureConfig::Atomic { atoms: vec![], dirac_comb: Some(n) })
        }
        "cantor" => {
            let depth = if rest.is_empty() { gfield::measure::CANTOR_DEPTH } else { rest.parse().map_err(|_| format!("bad depth {rest:?}"))? };
            Ok(MeasureConfig::Cantor { depth })
        }
        _ => Err(format!("unknown measure {s:?}")),
    }
}

fn default_measure() -> MeasureConfig {
    MeasureConfig::Lebesgue { domain: [0.0, 1.0] }
}

// ---------------------------------------------------------------- field

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct KlParams {
    pub basis: BasisKind,
    pub terms: usize,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct FieldParams {
    pub measure: MeasureConfig,
    pub regions: Vec<RegionSpec>,
    pub paths: usize,
    /// Partition the domain into this many cells and check the quadratic variation.
    pub qv_cells: Option<usize>,
    pub kl: Option<KlParams>,
}

impl Default for FieldParams {
    fn default() -> Self {
        FieldParams {
            measure: default_measure(),
            regions: vec![RegionSpec::Interval([0.0, 0.5]), RegionSpec::Interval([0.25, 0.75])],
            paths: 100_000,
            qv_cells: None,
            kl: None,
        }
    }
}

impl FieldParams {
    fn validate(&self) -> Result<(), CliError> {
        build_regions(&self.regions)?;
        check_count("params.paths", self.paths)?;
        if let Some(n) = self.qv_cells {
            check_count("params.qv_cells", n)?;
        }
        if let Some(kl) = &self.kl {
            check_count("params.kl.terms", kl.terms)?;
            if !matches!(self.measure, MeasureConfig::Lebesgue { .. }) {
                return Err(CliError::input_at("params.kl", "the expansion bases are defined for Lebesgue measure only"));
            }
        }
        Ok(())
    }
}

// ---------------------------------------------------------------- rkhs

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RkhsParams {
    pub measure: MeasureConfig,
    pub regions: Vec<RegionSpec>,
    /// Sample values for the membership bound valuesᵀ G⁺ values.
    pub values: Option<Vec<f64>>,
    /// Coefficients α for ‖Σ α_i β(A_i, ·)‖².
    pub coeffs: Option<Vec<f64>>,
    pub pd_tolerance: f64,
}

impl Default for RkhsParams {
    fn default() -> Self {
        RkhsParams {
            measure: default_measure(),
            regions: vec![RegionSpec::Interval([0.0, 0.5]), RegionSpec::Interval([0.25, 0.75])],
            values: None,
            coeffs: None,
            pd_tolerance: gfield::kernels::PD_TOL,
        }
    }
}

impl RkhsParams {
    fn validate(&self) -> Result<(), CliError> {
        let n = build_regions(&self.regions)?.len();
        for (name, v) in [("values", &self.values), ("coeffs", &self.coeffs)] {
            if let Some(v) = v {
                let path = format!("params.{name}");
                check_finite(&path, v)?;
                if v.len() != n {
                    return Err(CliError::input_at(path, format!("has {} entries but there are {n} regions", v.len())));
                }
            }
        }
        if !(self.pd_tolerance >= 0.0) {
            return Err(CliError::input_at("params.pd_tolerance", "must be non-negative"));
        }
        Ok(())
    }
}

// ---------------------------------------------------------------- fbm

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SemimartingaleParams {
    pub s: f64,
    pub t: f64,
    pub cells: usize,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FbmParams {
    pub hurst: f64,
    #[serde(default = "default_fbm_times")]
    pub times: Vec<f64>,
    #[serde(default = "default_fbm_paths")]
    pub paths: usize,
    #[serde(default = "default_fbm_method")]
    pub method: FbmMethod,
    #[serde(default)]
    pub normalization: Normalization,
    /// Compare closed form, spectral quadrature and factorization Gram.
    #[serde(default = "yes")]
    pub compare: bool,
    #[serde(default = "default_fbm_tolerance")]
    pub tolerance: f64,
    #[serde(default)]
    pub semimartingale: Option<SemimartingaleParams>,
    /// Half-width b of the band for the Paley–Wiener norm of χ_[−b, b].
    #[serde(default)]
    pub pw_band: Option<f64>,
    /// Sample the backward and forward parts separately.
    #[serde(default)]
    pub filtration: bool,
}

fn default_fbm_times() -> Vec<f64> {
    FBM_GRID.to_vec()
}

fn default_fbm_paths() -> usize {
    20_000
}

fn default_fbm_method() -> FbmMethod {
    FbmMethod::Cholesky
}

fn default_fbm_tolerance() -> f64 {
    1e-3
}

fn yes() -> bool {
    true
}

impl FbmParams {
    pub fn new(hurst: f64) -> Self {
        FbmParams {
            hurst,
            times: default_fbm_times(),
            paths: default_fbm_paths(),
            method: default_fbm_method(),
            normalization: Normalization::default(),
            compare: true,
            tolerance: default_fbm_tolerance(),
            semimartingale: None,
            pw_band: None,
            filtration: false,
        }
    }

    fn validate(&self) -> Result<(), CliError> {
        if !(self.hurst > 0.0 && self.hurst < 1.0) {
            return Err(CliError::input_at("params.hurst", format!("Hurst index must lie in (0, 1), got {}", self.hurst)));
        }
        if self.times.is_empty() {
            return Err(CliError::input_at("params.times", "need at least one time"));
        }
        for (i, t) in self.times.iter().enumerate() {
            if !(t.is_finite() && *t > 0.0) {
                return Err(CliError::input_at(format!("params.times[{i}]"), format!("must be positive and finite, got {t}")));
            }
        }
        if self.times.windows(2).any(|w| w[1] <= w[0]) {
            return Err(CliError::input_at("params.times", "must be strictly increasing"));
        }
        check_count("params.paths", self.paths)?;
        check_positive("params.tolerance", self.tolerance)?;
        if let Some(s) = &self.semimartingale {
            if !(s.s > 0.0 && s.s < s.t && s.t.is_finite()) {
                return Err(CliError::input_at("params.semimartingale", "need 0 < s < t"));
            }
            check_count("params.semimartingale.cells", s.cells)?;
        }
        if let Some(b) = self.pw_band {
            check_positive("params.pw_band", b)?;
        }
        Ok(())
    }
}

// ---------------------------------------------------------------- timechange

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ItoParams {
    pub cells: Vec<usize>,
    #[serde(default = "default_ito_paths")]
    pub paths: usize,
}

fn default_ito_paths() -> usize {
    20_000
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct TimechangeParams {
    pub clock: Clock,
    /// Evaluation time t of u(t, x).
    pub t: f64,
    /// Horizon of the clock; defaults to `t`.
    pub t_max: Option<f64>,
    pub x0: Vec<f64>,
    pub f: TestFn,
    pub paths: usize,
    pub scheme: SchemeParams,
    pub tolerance: f64,
    pub ito: Option<ItoParams>,
}

impl Default for TimechangeParams {
    fn default() -> Self {
        TimechangeParams {
            clock: Clock::Linear,
            t: 1.0,
            t_max: None,
            x0: vec![0.0],
            f: TestFn::GaussianBump,
            paths: 200_000,
            scheme: SchemeParams::default(),
            tolerance: 1e-2,
            ito: None,
        }
    }
}

impl TimechangeParams {
    pub fn horizon(&self) -> f64 {
        self.t_max.unwrap_or(self.t)
    }

    fn validate(&self) -> Result<(), CliError> {
        check_positive("params.t", self.t)?;
        if let Some(tm) = self.t_max {
            check_positive("params.t_max", tm)?;
            if tm < self.t {
                return Err(CliError::input_at("params.t_max", "must be at least t"));
            }
        }
        if self.x0.is_empty() {
            return Err(CliError::input_at("params.x0", "need at least one starting point"));
        }
        check_finite("params.x0", &self.x0)?;
        check_count("params.paths", self.paths)?;
        if self.scheme.nx < 3 {
            return Err(CliError::input_at("params.scheme.nx", "need at least 3 grid points"));
        }
        check_count("params.scheme.nt", self.scheme.nt)?;
        check_positive("params.scheme.width_sd", self.scheme.width_sd)?;
        check_positive("params.tolerance", self.tolerance)?;
        gfield::timechange::TimeChange::new(self.clock.clone(), self.horizon())
            .map_err(|e| CliError::input_at("params.clock", e.to_string()))?;
        if let Some(ito) = &self.ito {
            if ito.cells.is_empty() {
                return Err(CliError::input_at("params.ito.cells", "need at least one grid size"));
            }
            if let Some(i) = ito.cells.iter().position(|c| *c == 0) {
                return Err(CliError::input_at(format!("params.ito.cells[{i}]"), "must be at least 1"));
            }
            let fine = ito.cells.iter().copied().max().unwrap_or(1);
            if let Some(i) = ito.cells.iter().position(|c| fine % c != 0) {
                return Err(CliError::input_at(format!("params.ito.cells[{i}]"), "every grid size must divide the largest"));
            }
            if ito.paths < 2 {
                return Err(CliError::input_at("params.ito.paths", "must be at least 2"));
            }
        }
        Ok(())
    }
}

// ---------------------------------------------------------------- laplacian

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RandomGraphParams {
    pub n: usize,
    pub p: f64,
    #[serde(default = "yes")]
    pub connected: bool,
}

/// Inline `{"mu", "edges"}`, a file (`.json` or adjacency `.csv`), or a random graph.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(untagged)]
pub enum GraphSource {
    Inline(GraphConfig),
    File {
        file: PathBuf,
        #[serde(default)]
        mu: Option<Vec<f64>>,
    },
    Random {
        random: RandomGraphParams,
    },
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ChainParams {
    #[serde(default)]
    pub x0: usize,
    #[serde(default = "default_chain_steps")]
    pub steps: usize,
    #[serde(default = "default_chains")]
    pub chains: usize,
    #[serde(default = "default_chain_tolerance")]
    pub tolerance: f64,
}

fn default_chain_steps() -> usize {
    1_000_000
}

fn default_chains() -> usize {
    1
}

fn default_chain_tolerance() -> f64 {
    0.02
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct LaplacianParams {
    pub graph: GraphSource,
    pub f: Option<Vec<f64>>,
    pub phi: Option<Vec<f64>>,
    /// State subsets for the adjoint identity and the energy-kernel Gram.
    pub subsets: Option<Vec<Vec<usize>>>,
    pub chain: Option<ChainParams>,
    pub tolerance: f64,
}

impl Default for LaplacianParams {
    fn default() -> Self {
        LaplacianParams {
            graph: GraphSource::Random { random: RandomGraphParams { n: 12, p: 0.3, connected: true } },
            f: None,
            phi: None,
            subsets: None,
            chain: None,
            tolerance: 1e-10,
        }
    }
}

impl LaplacianParams {
    fn validate(&self) -> Result<(), CliError> {
        if let GraphSource::Random { random } = &self.graph {
            check_count("params.graph.random.n", random.n)?;
            if !(0.0..=1.0).contains(&random.p) {
                return Err(CliError::input_at("params.graph.random.p", "edge probability must lie in [0, 1]"));
            }
        }
        for (name, v) in [("f", &self.f), ("phi", &self.phi)] {
            if let Some(v) = v {
                check_finite(&format!("params.{name}"), v)?;
            }
        }
        if let Some(c) = &self.chain {
            check_count("params.chain.steps", c.steps)?;
            check_count("params.chain.chains", c.chains)?;
            check_positive("params.chain.tolerance", c.tolerance)?;
        }
        check_positive("params.tolerance", self.tolerance)
    }
}

// ---------------------------------------------------------------- shannon

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ShannonParams {
    /// Samples f(n); a seeded random signal of 65 samples when absent.
    pub coeffs: Option<Vec<f64>>,
    /// Index of the first sample; centred on 0 when absent.
    pub first: Option<i64>,
    /// Points at which to reconstruct; a quarter-step grid over the window when absent.
    pub eval: Option<Vec<f64>>,
    pub half_width: f64,
    pub tolerance: f64,
}

impl Default for ShannonParams {
    fn default() -> Self {
        ShannonParams { coeffs: None, first: None, eval: None, half_width: 512.0, tolerance: 1e-3 }
    }
}

impl ShannonParams {
    fn validate(&self) -> Result<(), CliError> {
        if let Some(c) = &self.coeffs {
            if c.is_empty() {
                return Err(CliError::input_at("params.coeffs", "need at least one sample"));
            }
            check_finite("params.coeffs", c)?;
        }
        if let Some(e) = &self.eval {
            check_finite("params.eval", e)?;
        }
        check_positive("params.half_width", self.half_width)?;
        check_positive("params.tolerance", self.tolerance)
    }
}

// ---------------------------------------------------------------- verify-all

#[derive(Debug, Clone, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct VerifyParams {
    pub quick: bool,
    pub timings: bool,
    /// Restrict to these check names.
    pub only: Option<Vec<String>>,
}

impl VerifyParams {
    fn validate(&self) -> Result<(), CliError> {
        if let Some(names) = &self.only {
            for (i, n) in names.iter().enumerate() {
                if gfield::verify::find(n).is_none() {
                    return Err(CliError::input_at(format!("params.only[{i}]"), format!("unknown check {n:?}; see list-checks")));
                }
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn invalid_hurst_names_the_field() {
        let e = parse_config(r#"{"subcommand": "fbm", "params": {"hurst": 1.5}}"#).err().unwrap();
        assert_eq!(e.exit_code(), 2);
        assert!(e.to_string().contains("params.hurst"), "{e}");
    }

    #[test]
    fn unknown_field_is_located() {
        let e = parse_config(r#"{"subcommand": "rkhs", "params": {"measure": {"kind": "lebesgue", "domian": [0, 1]}}}"#)
            .err()
            .unwrap();
        assert!(e.to_string().contains("params.measure"), "{e}");
        let e = parse_config(r#"{"subcommand": "rkhs", "sede": 3}"#).err().unwrap();
        assert!(e.to_string().contains("sede"), "{e}");
    }

    #[test]
    fn region_flags() {
        assert_eq!(RegionSpec::parse("0,0.5").unwrap(), RegionSpec::Interval([0.0, 0.5]));
        assert_eq!(RegionSpec::parse("0,1;2,3").unwrap(), RegionSpec::Union(vec![[0.0, 1.0], [2.0, 3.0]]));
        assert_eq!(RegionSpec::parse("points:1,2").unwrap(), RegionSpec::Points { points: vec![1.0, 2.0] });
        assert!(RegionSpec::parse("1").is_err());
        assert!(RegionSpec::Interval([1.0, 0.0]).build("r").is_err());
    }

    #[test]
    fn measure_flags() {
        assert_eq!(parse_measure("lebesgue").unwrap(), default_measure());
        assert_eq!(parse_measure("cantor:12").unwrap(), MeasureConfig::Cantor { depth: 12 });
        assert_eq!(
            parse_measure("atomic:0@1,2@0.5").unwrap(),
            MeasureConfig::Atomic { atoms: vec![[0.0, 1.0], [2.0, 0.5]], dirac_comb: None }
        );
        assert!(parse_measure(r#"{"kind": "cantor"}"#).is_ok());
        assert!(parse_measure("gaussian").is_err());
    }
}
