//! Runs every acceptance criterion at its stated tolerance and prints one
//! line per criterion. Exits with status 1 if any criterion fails.

use std::collections::BTreeMap;
use std::process::ExitCode;
use std::time::Instant;

use conic_sigma2::verify::{run_suite, Check, Suite, VerifyConfig};

const TITLES: [&str; 12] = [
    "smooth Gauss-Bonnet-Chern total",
    "conic Gauss-Bonnet-Chern totals",
    "curvature constancy of reconstructed footballs",
    "first-integral conservation",
    "level-set identities C' = A' + 4C, A = (2/3)(D - D(+inf))",
    "monotone quantity equality case",
    "limits of z, D, C",
    "key-estimate equality",
    "divergence identity and convergence order",
    "divisor classifier",
    "symmetric-function and reflection properties",
    "Monte-Carlo volume cross-check",
];

fn main() -> ExitCode {
    let start = Instant::now();
    let checks = run_suite(Suite::All, &VerifyConfig::default());
    let mut by_criterion: BTreeMap<u8, Vec<&Check>> = BTreeMap::new();
    for c in &checks {
        by_criterion.entry(c.criterion).or_default().push(c);
    }
    let mut failed = 0;
    for n in 1..=12u8 {
        let group = by_criterion.get(&n).map(Vec::as_slice).unwrap_or(&[]);
        let passed = !group.is_empty() && group.iter().all(|c| c.passed);
        if !passed {
            failed += 1;
        }
        let detail: Vec<&str> = group.iter().map(|c| c.label.as_str()).collect();
        println!(
            "{} criterion {n:>2} ({}): {}",
            if passed { "PASS" } else { "FAIL" },
            TITLES[n as usize - 1],
            detail.join("; ")
        );
    }
    println!(
        "acceptance: {} of 12 criteria passed in {:.1}s",
        12 - failed,
        start.elapsed().as_secs_f64()
    );
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
