//! Preimages of points under a dual Chebyshev polynomial of the arc, and how
//! many land in a disk away from the arc's hull.

use std::f64::consts::FRAC_PI_2;

use chebjulia::dynamics::{escape_radius, preimages};
use chebjulia::minimax::{default_sample_count, dualize, PolyMap};
use chebjulia::{sample_set, solve_chebyshev, Complex, SetDescriptor, SolverOptions};

fn main() -> chebjulia::Result<()> {
    let arc = SetDescriptor::arc(FRAC_PI_2);
    let (center, radius) = (Complex::new(-1.2, 0.0), 0.2);
    for n in [5, 10, 20] {
        let p = dualize(&solve_chebyshev(&sample_set(&arc, default_sample_count(n))?, n, &SolverOptions::default())?);
        let r = escape_radius(&p)?.radius;
        let mut worst = 0;
        let mut residual: f64 = 0.0;
        for k in 0..32 {
            let w = Complex::from_polar(r * (k as f64 / 32.0).sqrt(), 2.4 * k as f64);
            let zs = preimages(&p, w)?;
            residual = residual.max(zs.iter().map(|z| (p.eval(*z) - w).norm()).fold(0.0, f64::max));
            worst = worst.max(zs.iter().filter(|z| (**z - center).norm() <= radius).count());
        }
        println!("n={n:<3} R={r:<5} max preimages in D(-1.2, 0.2): {worst}   max |p(z) - w| {residual:.1e}");
    }
    Ok(())
}
