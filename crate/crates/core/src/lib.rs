//! Chebyshev polynomials of planar compact sets and the dynamics of their
//! dual polynomials.
//!
//! The crate computes the monic minimax (Chebyshev) polynomial `T_n` of a
//! sampled compact set `K`, its dual `𝒯_n = T_n / ‖T_n‖_K`, and then studies
//! `𝒯_n` as a dynamical system: escape radii, filled Julia sets on a grid,
//! Green's functions, preimages and samples of the measure of maximal
//! entropy. The [`harness`] module turns these into numeric checks of
//! containment and convergence statements relating `K_n` and `ω_n` to `K`
//! and its equilibrium measure.
//!
//! ```
//! use chebjulia::minimax::dualize;
//! use chebjulia::sets::{sample_set_with, Placement};
//! use chebjulia::{solve_chebyshev, SetDescriptor, SolverOptions};
//!
//! let set = sample_set_with(&SetDescriptor::interval(-1.0, 1.0), 512, Placement::Chebyshev)?;
//! let t = solve_chebyshev(&set, 6, &SolverOptions::default())?;
//! assert!((t.gamma - 32.0).abs() < 1e-6);
//! assert!((dualize(&t).sup_norm() - 1.0).abs() < 1e-12);
//! # Ok::<(), chebjulia::Error>(())
//! ```

// NaN-rejecting comparisons and index loops over coupled arrays are deliberate.
#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::needless_range_loop, clippy::type_complexity)]

pub mod brolin;
pub mod cli;
pub mod dynamics;
pub mod error;
pub mod harness;
pub mod io;
pub mod minimax;
pub mod potential;
pub mod roots;
pub mod sets;

pub use num_complex::Complex64 as Complex;

pub use error::{Error, Result};
pub use minimax::{solve_chebyshev, ChebyshevPolynomial, SolverOptions};
pub use sets::{sample_set, Grid, Mask, SampledSet, SetDescriptor, Window};
