//! `gfield`: sample and verify Gaussian fields from the command line.
//!
//! Exit codes: 0 when every check passes, 1 on a numeric failure, 2 on bad input.

mod commands;
mod config;
mod error;

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use gfield::fbm::{FbmMethod, Normalization};
use gfield::kl::BasisKind;
use gfield::timechange::{Clock, TestFn};
use serde_json::json;

use crate::commands::{RunContext, RunOutput};
use crate::config::*;
use crate::error::CliError;

const DEFAULT_SEED: u64 = 1;

#[derive(Parser, Debug)]
#[command(name = "gfield", version, about = "Gaussian fields indexed by measures: sampling, kernels and verification")]
struct Cli {
    /// Base seed; every run is reproducible from (parameters, seed).
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Cap on worker threads.
    #[arg(long, global = true)]
    threads: Option<usize>,
    /// Directory for CSV and JSON outputs.
    #[arg(long, global = true)]
    out_dir: Option<PathBuf>,
    /// Multiplies every check tolerance.
    #[arg(long, global = true)]
    tolerance_scale: Option<f64>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Sample X_A for a list of regions and check the covariance law.
    Field(FieldArgs),
    /// Gram matrix of β_μ(A, B) = μ(A ∩ B), PD check, norms and membership bounds.
    Rkhs(RkhsArgs),
    /// Fractional Brownian motion: sampling and the covariance triangle.
    Fbm(FbmArgs),
    /// Time-changed Brownian motion: PDE, quadrature and Monte Carlo for u(t, x).
    Timechange(TimechangeArgs),
    /// Laplacian identities and Markov chain on a weighted graph.
    Laplacian(LaplacianArgs),
    /// Shannon sampling: reconstruction and isometry.
    Shannon(ShannonArgs),
    /// Run the verification catalog and emit one JSON report.
    VerifyAll(VerifyArgs),
    /// Print every check with its reference.
    ListChecks {
        /// Emit JSON instead of one line per check.
        #[arg(long)]
        json: bool,
    },
    /// Run an experiment described by a JSON config file.
    Run {
        config: PathBuf,
    },
}

fn parse_region(s: &str) -> Result<RegionSpec, String> {
    RegionSpec::parse(s)
}

/// A comma separated list given as one flag value.
#[derive(Debug, Clone)]
struct List<T>(Vec<T>);

fn parse_list(s: &str) -> Result<List<f64>, String> {
    gfield::io::parse_float_list(s).map(List)
}

fn parse_usize_list(s: &str) -> Result<List<usize>, String> {
    s.split(',').map(|t| t.trim().parse::<usize>().map_err(|_| format!("not a count: {t:?}"))).collect::<Result<_, _>>().map(List)
}

fn parse_test_fn(s: &str) -> Result<TestFn, String> {
    TestFn::parse(s).map_err(|e| e.to_string())
}

fn parse_clock(s: &str) -> Result<Clock, String> {
    if s == "linear" {
        return Ok(Clock::Linear);
    }
    if let Some(p) = s.strip_prefix("power:") {
        return p.parse().map(|p| Clock::Power { p }).map_err(|_| format!("bad exponent in {s:?}"));
    }
    if s.trim_start().starts_with('{') {
        return serde_json::from_str(s).map_err(|e| format!("bad clock JSON: {e}"));
    }
    Err(format!("unknown clock {s:?}; expected linear, power:p or JSON"))
}

fn parse_json<T: serde::de::DeserializeOwned>(s: &str) -> Result<T, String> {
    serde_json::from_value(serde_json::Value::String(s.to_string())).map_err(|e| e.to_string())
}

#[derive(Args, Debug)]
struct FieldArgs {
    /// lebesgue[:lo,hi], density:lo,hi:<uniform|power:p>, atomic:x@w,..., dirac-comb:n, cantor[:depth] or JSON.
    #[arg(long, value_parser = parse_measure)]
    measure: Option<gfield::measure::MeasureConfig>,
    /// lo,hi or lo,hi;lo,hi for a union, or points:x,...; repeatable.
    #[arg(long = "region", value_parser = parse_region)]
    regions: Vec<RegionSpec>,
    #[arg(long)]
    paths: Option<usize>,
    /// Check the quadratic variation over this many uniform cells.
    #[arg(long)]
    qv_cells: Option<usize>,
    /// Orthonormal basis for the expansion check: haar or fourier-cosine.
    #[arg(long, value_parser = parse_json::<BasisKind>)]
    kl_basis: Option<BasisKind>,
    #[arg(long, default_value_t = 256)]
    kl_terms: usize,
}

#[derive(Args, Debug)]
struct RkhsArgs {
    #[arg(long, value_parser = parse_measure)]
    measure: Option<gfield::measure::MeasureConfig>,
    #[arg(long = "region", value_parser = parse_region)]
    regions: Vec<RegionSpec>,
    /// Sample values for the membership bound.
    #[arg(long, value_parser = parse_list, allow_hyphen_values = true)]
    values: Option<List<f64>>,
    /// Coefficients for the RKHS norm of Σ α_i β(A_i, ·).
    #[arg(long, value_parser = parse_list, allow_hyphen_values = true)]
    coeffs: Option<List<f64>>,
}

#[derive(Args, Debug)]
struct FbmArgs {
    #[arg(long)]
    hurst: f64,
    #[arg(long, value_parser = parse_list, allow_hyphen_values = true)]
    times: Option<List<f64>>,
    #[arg(long)]
    paths: Option<usize>,
    /// cholesky or ito-grid.
    #[arg(long, value_parser = parse_json::<FbmMethod>)]
    method: Option<FbmMethod>,
    /// unit-variance or gamma.
    #[arg(long, value_parser = parse_json::<Normalization>)]
    normalization: Option<Normalization>,
    /// Skip the closed form / spectral / factorization comparison.
    #[arg(long)]
    no_compare: bool,
    /// Semimartingale probe as s,t,cells.
    #[arg(long, value_parser = parse_list, allow_hyphen_values = true)]
    semimartingale: Option<List<f64>>,
    /// Paley–Wiener norm of the indicator of [−b, b].
    #[arg(long)]
    pw_band: Option<f64>,
    /// Sample the backward and forward parts separately.
    #[arg(long)]
    filtration: bool,
}

#[derive(Args, Debug)]
struct TimechangeArgs {
    /// linear, power:p, or JSON such as {"kind":"table","points":[[0,0],[1,2]]}.
    #[arg(long, value_parser = parse_clock)]
    clock: Option<Clock>,
    #[arg(long)]
    t: Option<f64>,
    #[arg(long)]
    t_max: Option<f64>,
    /// Starting points, comma separated.
    #[arg(long, value_parser = parse_list, allow_hyphen_values = true)]
    x0: Option<List<f64>>,
    /// one, identity, square, cube, sin or gaussian-bump.
    #[arg(long, value_parser = parse_test_fn)]
    f: Option<TestFn>,
    #[arg(long)]
    paths: Option<usize>,
    #[arg(long)]
    nx: Option<usize>,
    #[arg(long)]
    nt: Option<usize>,
    /// Itô-formula residual on these grid sizes.
    #[arg(long, value_parser = parse_usize_list)]
    ito_cells: Option<List<usize>>,
}

#[derive(Args, Debug)]
struct LaplacianArgs {
    /// Graph file: JSON {"mu", "edges"} or a CSV adjacency matrix.
    #[arg(long, conflicts_with = "random")]
    graph: Option<PathBuf>,
    /// State weights for a CSV graph.
    #[arg(long, value_parser = parse_list, allow_hyphen_values = true)]
    mu: Option<List<f64>>,
    /// Random connected graph as n,p.
    #[arg(long, value_parser = parse_list, allow_hyphen_values = true)]
    random: Option<List<f64>>,
    /// Simulate the chain for this many steps.
    #[arg(long)]
    chain_steps: Option<usize>,
    #[arg(long, default_value_t = 1)]
    chains: usize,
    #[arg(long, default_value_t = 0)]
    x0: usize,
}

#[derive(Args, Debug)]
struct ShannonArgs {
    /// Samples f(n), comma separated.
    #[arg(long, value_parser = parse_list, allow_hyphen_values = true)]
    coeffs: Option<List<f64>>,
    #[arg(long, allow_negative_numbers = true)]
    first: Option<i64>,
    #[arg(long, value_parser = parse_list, allow_hyphen_values = true)]
    eval: Option<List<f64>>,
    #[arg(long)]
    half_width: Option<f64>,
}

#[derive(Args, Debug)]
struct VerifyArgs {
    /// Smaller Monte Carlo sizes where the criteria allow it.
    #[arg(long)]
    quick: bool,
    /// Include wall-clock runtimes (makes the report non-reproducible).
    #[arg(long)]
    timings: bool,
    /// Comma separated check names.
    #[arg(long, value_delimiter = ',')]
    only: Option<Vec<String>>,
}

fn experiment_from_args(cmd: Command) -> Result<Experiment, CliError> {
    Ok(match cmd {
        Command::Field(a) => {
            let mut p = FieldParams::default();
            if let Some(m) = a.measure {
                p.measure = m;
            }
            if !a.regions.is_empty() {
                p.regions = a.regions;
            }
            if let Some(n) = a.paths {
                p.paths = n;
            }
            p.qv_cells = a.qv_cells;
            p.kl = a.kl_basis.map(|basis| KlParams { basis, terms: a.kl_terms });
            Experiment::Field(p)
        }
        Command::Rkhs(a) => {
            let mut p = RkhsParams::default();
            if let Some(m) = a.measure {
                p.measure = m;
            }
            if !a.regions.is_empty() {
                p.regions = a.regions;
            }
            p.values = a.values.map(|l| l.0);
            p.coeffs = a.coeffs.map(|l| l.0);
            Experiment::Rkhs(p)
        }
        Command::Fbm(a) => {
            let mut p = FbmParams::new(a.hurst);
            if let Some(t) = a.times {
                p.times = t.0;
            }
            if let Some(n) = a.paths {
                p.paths = n;
            }
            if let Some(m) = a.method {
                p.method = m;
            }
            if let Some(n) = a.normalization {
                p.normalization = n;
            }
            p.compare = !a.no_compare;
            p.semimartingale = match a.semimartingale.as_ref().map(|l| l.0.as_slice()) {
                None => None,
                Some([s, t, c]) if *c >= 1.0 && c.fract() == 0.0 => Some(SemimartingaleParams { s: *s, t: *t, cells: *c as usize }),
                Some(_) => return Err(CliError::input_at("--semimartingale", "expected s,t,cells")),
            };
            p.pw_band = a.pw_band;
            p.filtration = a.filtration;
            Experiment::Fbm(p)
        }
        Command::Timechange(a) => {
            let mut p = TimechangeParams::default();
            if let Some(c) = a.clock {
                p.clock = c;
            }
            if let Some(t) = a.t {
                p.t = t;
            }
            p.t_max = a.t_max;
            if let Some(x) = a.x0 {
                p.x0 = x.0;
            }
            if let Some(f) = a.f {
                p.f = f;
            }
            if let Some(n) = a.paths {
                p.paths = n;
            }
            if let Some(n) = a.nx {
                p.scheme.nx = n;
            }
            if let Some(n) = a.nt {
                p.scheme.nt = n;
            }
            p.ito = a.ito_cells.map(|cells| ItoParams { cells: cells.0, paths: 20_000 });
            Experiment::Timechange(p)
        }
        Command::Laplacian(a) => {
            let mut p = LaplacianParams::default();
            match (a.graph, a.random.as_ref().map(|l| l.0.as_slice())) {
                (Some(file), _) => p.graph = GraphSource::File { file, mu: a.mu.map(|l| l.0) },
                (None, Some([n, prob])) if *n >= 1.0 && n.fract() == 0.0 => {
                    p.graph = GraphSource::Random { random: RandomGraphParams { n: *n as usize, p: *prob, connected: true } }
                }
                (None, Some(_)) => return Err(CliError::input_at("--random", "expected n,p")),
                (None, None) => {}
            }
            p.chain = a.chain_steps.map(|steps| ChainParams { x0: a.x0, steps, chains: a.chains, tolerance: 0.02 });
            Experiment::Laplacian(p)
        }
        Command::Shannon(a) => {
            let mut p = ShannonParams { coeffs: a.coeffs.map(|l| l.0), first: a.first, eval: a.eval.map(|l| l.0), ..Default::default() };
            if let Some(h) = a.half_width {
                p.half_width = h;
            }
            Experiment::Shannon(p)
        }
        Command::VerifyAll(a) => Experiment::VerifyAll(VerifyParams { quick: a.quick, timings: a.timings, only: a.only }),
        Command::ListChecks { .. } | Command::Run { .. } => unreachable!("handled before dispatch"),
    })
}

fn report_file(name: &str) -> String {
    if name == "verify-all" {
        "verify-all.json".to_string()
    } else {
        format!("{name}_report.json")
    }
}

fn write_outputs(dir: &Path, name: &str, summary: &serde_json::Value, out: &RunOutput) -> Result<(), CliError> {
    let io = |e: std::io::Error| CliError::input(format!("cannot write to {}: {e}", dir.display()));
    std::fs::create_dir_all(dir).map_err(io)?;
    for (file, text) in &out.artifacts {
        std::fs::write(dir.join(file), text).map_err(io)?;
    }
    let mut json = serde_json::to_string_pretty(summary).expect("report serializes");
    json.push('\n');
    std::fs::write(dir.join(report_file(name)), json).map_err(io)
}

struct Settings {
    seed: u64,
    out_dir: PathBuf,
    tolerance_scale: f64,
}

fn run_experiment(exp: &Experiment, s: &Settings, base_dir: &Path) -> Result<bool, CliError> {
    exp.validate()?;
    if !(s.tolerance_scale > 0.0 && s.tolerance_scale.is_finite()) {
        return Err(CliError::input_at("--tolerance-scale", "must be positive and finite"));
    }
    let ctx = RunContext { seed: s.seed, tolerance_scale: s.tolerance_scale, base_dir };
    let out = commands::execute(exp, &ctx)?;
    let failures: Vec<&str> = out.reports.iter().filter(|r| !r.pass).map(|r| r.check.as_str()).collect();
    let pass = failures.is_empty();
    let summary = json!({
        "subcommand": exp.name(),
        "seed": s.seed,
        "tolerance_scale": s.tolerance_scale,
        "pass": pass,
        "failures": failures,
        "artifacts": out.artifacts.iter().map(|a| a.0.as_str()).chain([report_file(exp.name()).as_str()]).collect::<Vec<_>>(),
        "reports": out.reports,
        "details": out.details,
    });
    write_outputs(&s.out_dir, exp.name(), &summary, &out)?;
    emit(&serde_json::to_string_pretty(&summary).expect("report serializes"));
    if !pass {
        eprintln!("failed checks: {}", failures.join(", "));
    }
    Ok(pass)
}

/// Prints a line to stdout; a closed pipe (as with `| head`) is not an error.
fn emit(text: &str) {
    use std::io::Write;
    let mut out = std::io::stdout().lock();
    let _ = writeln!(out, "{text}");
}

fn list_checks(json: bool) {
    let catalog = gfield::verify::catalog();
    if json {
        let v: Vec<_> = catalog
            .iter()
            .map(|c| json!({ "check": c.name, "anchor": c.anchor, "criterion": c.criterion }))
            .collect();
        emit(&serde_json::to_string_pretty(&v).expect("catalog serializes"));
    } else {
        emit(&catalog.iter().map(|c| c.title()).collect::<Vec<_>>().join("\n"));
    }
}

fn run(cli: Cli) -> Result<bool, CliError> {
    if let Some(n) = cli.threads {
        if n == 0 {
            return Err(CliError::input_at("--threads", "must be at least 1"));
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| CliError::input(format!("cannot size the thread pool: {e}")))?;
    }
    match cli.command {
        Command::ListChecks { json } => {
            list_checks(json);
            Ok(true)
        }
        Command::Run { config } => {
            let loaded = load_config(&config)?;
            let base_dir = config.parent().map(Path::to_path_buf).unwrap_or_default();
            // explicit flags win over the config, which wins over defaults
            let settings = Settings {
                seed: cli.seed.or(loaded.seed).unwrap_or(DEFAULT_SEED),
                out_dir: cli.out_dir.or(loaded.out_dir.map(|d| base_dir.join(d))).unwrap_or_else(|| PathBuf::from(".")),
                tolerance_scale: cli.tolerance_scale.or(loaded.tolerance_scale).unwrap_or(1.0),
            };
            run_experiment(&loaded.experiment, &settings, &base_dir)
        }
        cmd => {
            let exp = experiment_from_args(cmd)?;
            let settings = Settings {
                seed: cli.seed.unwrap_or(DEFAULT_SEED),
                out_dir: cli.out_dir.unwrap_or_else(|| PathBuf::from(".")),
                tolerance_scale: cli.tolerance_scale.unwrap_or(1.0),
            };
            run_experiment(&exp, &settings, Path::new("."))
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
