//! `γ_n^{-1/n}` approaching the logarithmic capacity of an arc, against the
//! equilibrium-charge oracle and the closed form `sin(α/2)`.

use chebjulia::minimax::{capacity_estimate, default_sample_count};
use chebjulia::potential::reference_potential;
use chebjulia::{sample_set, solve_chebyshev, SetDescriptor, SolverOptions};

fn main() -> chebjulia::Result<()> {
    let alpha = 1.0;
    let arc = SetDescriptor::arc(alpha);
    let mut gammas = Vec::new();
    for n in [4, 8, 12, 16, 24] {
        let t = solve_chebyshev(&sample_set(&arc, default_sample_count(n))?, n, &SolverOptions::default())?;
        gammas.push((n, t.gamma));
    }
    let est = capacity_estimate(&gammas)?;
    for (n, c) in est.degrees.iter().zip(&est.estimates) {
        println!("n={n:<3} gamma_n^(-1/n) = {c:.6}");
    }
    println!("extrapolated  {:.6}", est.extrapolated);
    println!("oracle        {:.6}", reference_potential(&arc)?.cap);
    println!("sin(alpha/2)  {:.6}", (alpha / 2.0).sin());
    Ok(())
}
