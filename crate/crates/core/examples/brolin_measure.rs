//! Backward random iteration for the measure of maximal entropy of `𝒯_16`
//! on `[−1, 1]`, compared with the arcsine moments.
//!
//! `cargo run --release --example brolin_measure -- [out_dir]`

use std::path::PathBuf;

use chebjulia::brolin::{brolin_run, moments, BrolinOptions};
use chebjulia::io::{measure_csv, write_atomic};
use chebjulia::minimax::dualize;
use chebjulia::potential::reference_potential;
use chebjulia::sets::{sample_set_with, Placement};
use chebjulia::{solve_chebyshev, SetDescriptor, SolverOptions};

fn main() -> chebjulia::Result<()> {
    let out = std::env::args().nth(1).map(PathBuf::from).unwrap_or_else(std::env::temp_dir);
    std::fs::create_dir_all(&out)?;
    let d = SetDescriptor::interval(-1.0, 1.0);
    let p = dualize(&solve_chebyshev(&sample_set_with(&d, 2048, Placement::Chebyshev)?, 16, &SolverOptions::default())?);
    let run = brolin_run(&p, &BrolinOptions { samples: 20_000, seed: 16, ..Default::default() })?;
    let m = moments(&run.measure, 6);
    let exact = reference_potential(&d)?.moments(6);
    for (k, (a, b)) in m.iter().zip(&exact).enumerate() {
        println!("m_{k} = {:+.4} (arcsine {:+.4})", a.re, b.re);
    }
    let path = out.join("brolin_interval_n16.csv");
    write_atomic(&path, measure_csv(&run.measure).as_bytes())?;
    println!("{} points, {} failures -> {}", run.measure.len(), run.failures, path.display());
    Ok(())
}
