use thiserror::Error;

use crate::Complex;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    Parameter(String),
    #[error("under-sampled set: {samples} samples, need at least {required}")]
    UnderSampled { samples: usize, required: usize },
    #[error("degenerate set: orthogonalization broke down at degree {0}")]
    DegenerateSet(usize),
    #[error("rank deficient: {distinct} distinct points cannot support degree {degree}")]
    Rank { distinct: usize, degree: usize },
    #[error("solver did not converge (best sup-norm {best_sup_norm:e}, lower bound {lower:e})")]
    Convergence { best_sup_norm: f64, lower: f64 },
    #[error("domain error: {0}")]
    Domain(String),
    #[error("numerical failure: {0}")]
    Numerical(String),
    #[error("root finder failed; {} roots flagged as unconverged", .unconverged.len())]
    RootFinder { roots: Vec<Complex>, unconverged: Vec<usize> },
    #[error("shape mismatch: {0}")]
    Shape(String),
    #[error("window too small: mask touches the window boundary")]
    WindowTooSmall,
    #[error("escape radius search exceeded {0}")]
    DivergenceConfiguration(f64),
    #[error("unsupported descriptor for {0}")]
    Unsupported(String),
    #[error("sampling failed: {failures} root-finder failures in {steps} steps")]
    Sampling { failures: usize, steps: usize },
    #[error("containment K_n in D(R) failed for degree {0}")]
    ConstantDerivation(usize),
    #[error("precondition violated: {0}")]
    Precondition(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
