//! Sampling the measure of maximal entropy by backward random iteration.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::dynamics::{escape_radius, Preimager};
use crate::error::{Error, Result};
use crate::minimax::PolyMap;
use crate::potential::EmpiricalMeasure;
use crate::sets::Polygon;
use crate::Complex;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct BrolinOptions {
    pub samples: usize,
    pub burn_in: usize,
    pub seed: u64,
    /// Defaults to `2R` on the positive real axis.
    pub start: Option<Complex>,
}

impl Default for BrolinOptions {
    fn default() -> Self {
        BrolinOptions { samples: 100_000, burn_in: 50, seed: 0, start: None }
    }
}

impl BrolinOptions {
    pub fn validate(&self) -> Result<()> {
        if self.samples < 1000 {
            return Err(Error::Parameter(format!("sample count must be ≥ 1000, got {}", self.samples)));
        }
        if self.burn_in < 10 {
            return Err(Error::Parameter(format!("burn-in must be ≥ 10, got {}", self.burn_in)));
        }
        Ok(())
    }
}

/// Chain output with its failure count.
#[derive(Clone, Debug)]
pub struct BrolinRun {
    pub measure: EmpiricalMeasure,
    pub failures: usize,
    pub steps: usize,
    pub radius: f64,
}

/// Backward random walk `z_{k+1} ∈ p^{-1}(z_k)`, each preimage chosen with
/// probability `1/n` (multiplicity counted).
pub fn brolin_run<P: PolyMap + ?Sized>(p: &P, opts: &BrolinOptions) -> Result<BrolinRun> {
    opts.validate()?;
    let radius = escape_radius(p)?.radius;
    let start = opts.start.unwrap_or(Complex::new(2.0 * radius, 0.0));
    if start.norm() <= radius {
        return Err(Error::Parameter(format!("start point {start} lies inside D({radius})")));
    }
    let pre = Preimager::new(p)?;
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    let steps = opts.burn_in + opts.samples;
    let mut z = start;
    let mut points = Vec::with_capacity(opts.samples);
    let mut failures = 0;
    for k in 0..steps {
        match pre.solve(z) {
            Ok(roots) => {
                z = roots[rng.gen_range(0..roots.len())];
            }
            Err(_) => {
                // Skip: stay at the current point, keep the stream aligned.
                failures += 1;
                let _: usize = rng.gen_range(0..p.degree());
            }
        }
        if k >= opts.burn_in {
            points.push(z);
        }
    }
    if failures * 100 > steps {
        return Err(Error::Sampling { failures, steps });
    }
    Ok(BrolinRun { measure: EmpiricalMeasure::uniform(points)?, failures, steps, radius })
}

pub fn brolin_sample<P: PolyMap + ?Sized>(p: &P, opts: &BrolinOptions) -> Result<EmpiricalMeasure> {
    Ok(brolin_run(p, opts)?.measure)
}

/// `m_k = Σ w_i z_i^k` for `k = 0..=kmax`.
pub fn moments(mu: &EmpiricalMeasure, kmax: usize) -> Vec<Complex> {
    let mut out = vec![Complex::new(0.0, 0.0); kmax + 1];
    for (z, w) in mu.points.iter().zip(&mu.weights) {
        let mut zk = Complex::new(1.0, 0.0);
        for m in out.iter_mut() {
            *m += zk * w;
            zk *= z;
        }
    }
    out
}

/// Mass at distance greater than `delta` from the polygon (interior counts
/// as distance 0).
pub fn mass_outside(mu: &EmpiricalMeasure, hull: &Polygon, delta: f64) -> Result<f64> {
    if hull.vertices.is_empty() {
        return Err(Error::Domain("empty polygon".into()));
    }
    if !(delta >= 0.0) {
        return Err(Error::Parameter(format!("delta must be ≥ 0, got {delta}")));
    }
    Ok(mu.points.iter().zip(&mu.weights).filter(|(z, _)| hull.distance(**z) > delta).map(|(_, w)| w).sum::<f64>() + 0.0)
}

/// `f(z) = Σ_{j+k≤3} c_{jk} z^j z̄^k`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TestFunction {
    pub terms: Vec<(u32, u32, Complex)>,
}

impl TestFunction {
    pub fn eval(&self, z: Complex) -> Complex {
        let zb = z.conj();
        self.terms.iter().map(|(j, k, c)| c * z.powu(*j) * zb.powu(*k)).sum()
    }
}

/// Random test functions with `|f| ≤ 1` on the closed unit disk.
pub fn random_test_functions(count: usize, seed: u64) -> Vec<TestFunction> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count)
        .map(|_| {
            let mut terms = Vec::new();
            for j in 0..=3u32 {
                for k in 0..=(3 - j) {
                    // Uniform in the unit disk by rejection.
                    let c = loop {
                        let c = Complex::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0));
                        if c.norm() <= 1.0 {
                            break c;
                        }
                    };
                    terms.push((j, k, c));
                }
            }
            let total: f64 = terms.iter().map(|t| t.2.norm()).sum();
            for t in terms.iter_mut() {
                t.2 /= total;
            }
            TestFunction { terms }
        })
        .collect()
}

/// `max_f |∫ f dμ − (1/n) ∫ Σ_{p(w)=z} f(w) dμ(z)|`; zero for the balanced
/// measure.
pub fn balancedness_residual<P: PolyMap + ?Sized>(p: &P, mu: &EmpiricalMeasure, fs: &[TestFunction]) -> Result<f64> {
    let pre = Preimager::new(p)?;
    let n = p.degree() as f64;
    let pulled: Vec<Vec<Complex>> = mu
        .points
        .par_iter()
        .map(|z| {
            let roots = pre.solve(*z)?;
            Ok(fs.iter().map(|f| roots.iter().map(|w| f.eval(*w)).sum::<Complex>() / n).collect())
        })
        .collect::<Result<_>>()?;
    let mut worst: f64 = 0.0;
    for (i, f) in fs.iter().enumerate() {
        let direct: Complex = mu.points.iter().zip(&mu.weights).map(|(z, w)| f.eval(*z) * w).sum();
        let back: Complex = pulled.iter().zip(&mu.weights).map(|(v, w)| v[i] * w).sum();
        worst = worst.max((direct - back).norm());
    }
    Ok(worst)
}
