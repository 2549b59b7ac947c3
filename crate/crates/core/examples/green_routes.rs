//! The Green's function of `K_n` by iteration against the one-step estimate
//! `(1/n) log⁺|𝒯_n|`, for the interval, where `g_Ω(2) = log(2 + √3)`.

use chebjulia::dynamics::{escape_radius, green_iterated, green_single_eval, DEFAULT_KMAX};
use chebjulia::minimax::dualize;
use chebjulia::potential::reference_potential;
use chebjulia::sets::{sample_set_with, Placement};
use chebjulia::{solve_chebyshev, Complex, SetDescriptor, SolverOptions};

fn main() -> chebjulia::Result<()> {
    let d = SetDescriptor::interval(-1.0, 1.0);
    let g = reference_potential(&d)?;
    let z = Complex::new(2.0, 0.0);
    println!("g_Omega(2) = {:.9}", g.green(z));
    let set = sample_set_with(&d, 2048, Placement::Chebyshev)?;
    for n in [2, 4, 8, 16] {
        let p = dualize(&solve_chebyshev(&set, n, &SolverOptions::default())?);
        let r = escape_radius(&p)?.radius;
        let it = green_iterated(&p, z, r, DEFAULT_KMAX);
        let one = green_single_eval(&p, z, 0.0);
        println!(
            "n={n:<3} iterated {:.9} (±{:.1e}, {} steps)   single {:.9}   difference {:.5} ~ log 2/n = {:.5}",
            it.value,
            it.error_bound,
            it.iterations,
            one.value,
            it.value - one.value,
            2f64.ln() / n as f64
        );
    }
    Ok(())
}
