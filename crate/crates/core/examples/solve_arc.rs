//! Chebyshev polynomials of a circular arc, with their certificates.
//!
//! Run with `cargo run --release --example solve_arc`.

use std::f64::consts::FRAC_PI_2;

use chebjulia::minimax::default_sample_count;
use chebjulia::{sample_set, solve_chebyshev, SetDescriptor, SolverOptions};

fn main() -> chebjulia::Result<()> {
    let arc = SetDescriptor::arc(FRAC_PI_2);
    println!("{:>3} {:>14} {:>12} {:>10} {:>8}", "n", "||T_n||", "gamma_n", "gap", "samples");
    for n in [2, 4, 6, 8, 12] {
        let set = sample_set(&arc, default_sample_count(n))?;
        let t = solve_chebyshev(&set, n, &SolverOptions::default())?;
        println!("{n:>3} {:>14.8e} {:>12.6} {:>10.2e} {:>8}", t.sup_norm(), t.gamma, t.certificate.gap(), t.sample_count);
    }
    Ok(())
}
