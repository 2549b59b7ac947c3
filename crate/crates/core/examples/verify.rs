//! The verification harness on the interval: constants, bounds on `g_n`,
//! inclusion of `K_n` and convergence of the measures, as a JSON report.
//!
//! `cargo run --release --example verify -- [out_dir]`

use std::path::PathBuf;

use chebjulia::harness::{Harness, HarnessConfig};
use chebjulia::io::write_atomic;
use chebjulia::minimax::dualize;
use chebjulia::sets::{sample_set_with, Placement};
use chebjulia::{solve_chebyshev, ChebyshevPolynomial, SetDescriptor, SolverOptions};

fn main() -> chebjulia::Result<()> {
    let out = std::env::args().nth(1).map(PathBuf::from).unwrap_or_else(std::env::temp_dir);
    std::fs::create_dir_all(&out)?;
    let d = SetDescriptor::interval(-1.0, 1.0);
    let set = sample_set_with(&d, 2048, Placement::Chebyshev)?;
    let duals: Vec<ChebyshevPolynomial> = [4, 8, 16]
        .iter()
        .map(|&n| solve_chebyshev(&set, n, &SolverOptions::default()).map(|t| dualize(&t)))
        .collect::<Result<_, _>>()?;
    let refs: Vec<&ChebyshevPolynomial> = duals.iter().collect();
    let mut config = HarnessConfig::default();
    config.brolin.samples = 10_000;
    let report = Harness::new(&d, &refs, config)?.run();
    let k = report.constants;
    println!("R = {}, C = {:.4}, M = {:.4}, N0 = {}", k.R, k.C, k.M, k.N0);
    for c in &report.checks {
        println!("{} {:<28} n={:<3} {:?}", if c.pass { "PASS" } else { "FAIL" }, c.name, c.n, c.margin);
    }
    for e in &report.errors {
        println!("skipped {}: {}", e.check, e.message);
    }
    let path = out.join("interval_report.json");
    write_atomic(&path, report.to_json()?.as_bytes())?;
    println!("overall {} -> {}", if report.pass { "PASS" } else { "FAIL" }, path.display());
    Ok(())
}
