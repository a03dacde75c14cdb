//! Acceptance suite: one line per criterion, each backed by the verification
//! catalog at the documented tolerances.

use std::time::Instant;

use gfield::verify::{self, Context, VerificationReport};

const SEED: u64 = 20_240_601;

const TITLES: [&str; 13] = [
    "covariance law",
    "quadratic variation cell and partition identities",
    "fBM closed form / spectral / factorization triangle",
    "H = 1/2 degeneracy and time-change distinction",
    "Karhunen-Loeve Parseval sum and Z independence",
    "moment identities and Gaussian integration by parts",
    "time change: PDE, quadrature and MC; Ito residual",
    "Laplacian identities on random graphs",
    "Markov chain stationarity",
    "Shannon sampling",
    "Cantor measure and staircase norm",
    "verify-all reproducibility",
    "semimartingale probe",
];

fn time_limit(criterion: u8) -> Option<f64> {
    match criterion {
        1 => Some(10.0),
        3 => Some(60.0),
        _ => None,
    }
}

fn summarize(reports: &[VerificationReport]) -> String {
    reports
        .iter()
        .map(|r| {
            let tol = r.tolerance.map_or("reported".to_string(), |t| format!("{t:.1e}"));
            format!("{}={:.3e} (tol {tol})", r.check, r.discrepancy.abs())
        })
        .collect::<Vec<_>>()
        .join("; ")
}

fn main() {
    let ctx = Context::new(SEED);
    let catalog = verify::catalog();
    let mut failed = Vec::new();
    for criterion in 1..=13u8 {
        let start = Instant::now();
        let (ok, detail) = if criterion == 12 {
            let quick = Context { quick: true, ..ctx };
            let a = serde_json::to_string_pretty(&verify::verify_all(&quick, false)).unwrap();
            let b = serde_json::to_string_pretty(&verify::verify_all(&quick, false)).unwrap();
            (a == b, format!("two verify-all runs, {} bytes each, identical: {}", a.len(), a == b))
        } else {
            let reports: Vec<VerificationReport> =
                catalog.iter().filter(|c| c.criterion == Some(criterion)).map(|c| c.run(&ctx)).collect();
            assert!(!reports.is_empty(), "criterion {criterion} has no checks");
            let notes: Vec<String> = reports.iter().flat_map(|r| r.notes.iter().filter(|n| n.starts_with("error")).cloned()).collect();
            let mut detail = summarize(&reports);
            if !notes.is_empty() {
                detail.push_str(&format!(" [{}]", notes.join("; ")));
            }
            (reports.iter().all(|r| r.pass), detail)
        };
        let secs = start.elapsed().as_secs_f64();
        let in_time = time_limit(criterion).is_none_or(|lim| secs < lim);
        let pass = ok && in_time;
        let limit = time_limit(criterion).map_or(String::new(), |l| format!(", limit {l:.0} s"));
        println!(
            "criterion {criterion:2} {} {}: {detail} ({secs:.2} s{limit})",
            if pass { "PASS" } else { "FAIL" },
            TITLES[criterion as usize - 1],
        );
        if !pass {
            failed.push(criterion);
        }
    }
    if failed.is_empty() {
        println!("acceptance: all 13 criteria pass");
    } else {
        println!("acceptance: failed criteria {failed:?}");
        std::process::exit(1);
    }
}
