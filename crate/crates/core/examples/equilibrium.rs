//! Discrete equilibrium measure and logarithmic energy of a sampled interval.

use chebjulia::potential::{discrete_equilibrium, energy, reference_potential};
use chebjulia::{sample_set, SetDescriptor};

fn main() -> chebjulia::Result<()> {
    let d = SetDescriptor::interval(-1.0, 1.0);
    let set = sample_set(&d, 256)?;
    let eq = discrete_equilibrium(&set)?;
    let w = &eq.measure.weights;
    println!("{} iterations, converged {}", eq.iterations, eq.converged);
    println!("weight at the end {:.5}, at the middle {:.5} (endpoint clustering)", w[0], w[w.len() / 2]);
    println!("off-diagonal energy {:.5}", energy(&eq.measure)?);
    println!("log capacity        {:.5}", reference_potential(&d)?.energy());
    Ok(())
}
