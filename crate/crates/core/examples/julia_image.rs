//! Filled Julia sets of dual Chebyshev polynomials of an arc, as PGM images.
//!
//! `cargo run --release --example julia_image -- [out_dir]`

use std::f64::consts::FRAC_PI_2;
use std::path::PathBuf;

use chebjulia::dynamics::{filled_julia_grid, JuliaGridOptions};
use chebjulia::io::{julia_pgm, write_atomic};
use chebjulia::minimax::{default_sample_count, dualize};
use chebjulia::{sample_set, solve_chebyshev, SetDescriptor, SolverOptions};

fn main() -> chebjulia::Result<()> {
    let out = std::env::args().nth(1).map(PathBuf::from).unwrap_or_else(std::env::temp_dir);
    std::fs::create_dir_all(&out)?;
    let arc = SetDescriptor::arc(FRAC_PI_2);
    let opts = JuliaGridOptions { resolution: 256, ..Default::default() };
    for n in [4, 8, 16] {
        let t = solve_chebyshev(&sample_set(&arc, default_sample_count(n))?, n, &SolverOptions::default())?;
        let region = filled_julia_grid(&dualize(&t), &opts)?;
        let path = out.join(format!("arc_julia_n{n}.pgm"));
        write_atomic(&path, &julia_pgm(&region))?;
        println!("n={n:<3} {} filled cells -> {}", region.filled_julia.count(), path.display());
    }
    Ok(())
}
