//! Logarithmic potential theory reference data: Green's functions,
//! capacities and equilibrium moments, closed-form where classical and
//! computed by discrete energy maximization otherwise.

use nalgebra::{DMatrix, DVector};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::sets::{SampledSet, SetDescriptor};
use crate::Complex;

/// Probability measure with finite support.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EmpiricalMeasure {
    pub points: Vec<Complex>,
    pub weights: Vec<f64>,
}

impl EmpiricalMeasure {
    pub fn new(points: Vec<Complex>, weights: Vec<f64>) -> Result<Self> {
        if points.len() != weights.len() {
            return Err(Error::Shape(format!("{} points, {} weights", points.len(), weights.len())));
        }
        if points.is_empty() {
            return Err(Error::Domain("empty measure".into()));
        }
        if weights.iter().any(|w| !(*w >= 0.0)) {
            return Err(Error::Domain("weights must be non-negative".into()));
        }
        let total = compensated_sum(&weights);
        if (total - 1.0).abs() > 1e-12 {
            return Err(Error::Domain(format!("weights sum to {total}, not 1")));
        }
        if points.iter().any(|z| !(z.re.is_finite() && z.im.is_finite())) {
            return Err(Error::Domain("support is unbounded".into()));
        }
        Ok(EmpiricalMeasure { points, weights })
    }

    /// Equal weights `1/N`.
    pub fn uniform(points: Vec<Complex>) -> Result<Self> {
        let n = points.len();
        EmpiricalMeasure::new(points, vec![1.0 / n as f64; n])
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }
}

/// Neumaier summation.
pub fn compensated_sum(xs: &[f64]) -> f64 {
    let (mut sum, mut c) = (0.0f64, 0.0f64);
    for &x in xs {
        let t = sum + x;
        c += if sum.abs() >= x.abs() { (sum - t) + x } else { (x - t) + sum };
        sum = t;
    }
    sum + c
}

/// `Σ_{i≠j} w_i w_j log|z_i − z_j|`; `−∞` when two charged points coincide.
pub fn energy(mu: &EmpiricalMeasure) -> Result<f64> {
    if mu.len() < 2 {
        return Err(Error::Domain("energy needs at least two support points".into()));
    }
    let rows: Vec<f64> = (0..mu.len())
        .into_par_iter()
        .map(|i| {
            let (zi, wi) = (mu.points[i], mu.weights[i]);
            if wi == 0.0 {
                return 0.0;
            }
            let mut s = 0.0;
            for j in 0..mu.len() {
                if j != i && mu.weights[j] > 0.0 {
                    let d = (zi - mu.points[j]).norm();
                    if d == 0.0 {
                        return f64::NEG_INFINITY;
                    }
                    s += mu.weights[j] * d.ln();
                }
            }
            wi * s
        })
        .collect();
    Ok(rows.into_iter().sum())
}

/// Nearest-neighbour distance of every point.
fn spacing(points: &[Complex]) -> Vec<f64> {
    (0..points.len())
        .map(|i| {
            points.iter().enumerate().filter(|(j, _)| *j != i).map(|(_, z)| (z - points[i]).norm()).fold(f64::INFINITY, f64::min)
        })
        .collect()
}

/// Energy matrix with the self-energy `log h − 3/2` of a segment of length
/// `h` on the diagonal.
fn energy_matrix(points: &[Complex], cells: &[f64]) -> DMatrix<f64> {
    let m = points.len();
    DMatrix::from_fn(m, m, |i, j| if i == j { cells[i].ln() - 1.5 } else { (points[i] - points[j]).norm().ln() })
}

fn project_simplex(v: &mut [f64]) {
    let mut u: Vec<f64> = v.to_vec();
    u.sort_by(|a, b| b.total_cmp(a));
    let mut acc = 0.0;
    let mut theta = 0.0;
    for (k, x) in u.iter().enumerate() {
        acc += x;
        let t = (acc - 1.0) / (k + 1) as f64;
        if x - t > 0.0 {
            theta = t;
        }
    }
    for x in v.iter_mut() {
        *x = (*x - theta).max(0.0);
    }
}

/// Result of [`discrete_equilibrium`].
#[derive(Clone, Debug)]
pub struct EquilibriumResult {
    pub measure: EmpiricalMeasure,
    pub iterations: usize,
    /// Norm of the projected gradient at the last iterate.
    pub gradient_norm: f64,
    /// Fewer than the iteration cap were needed.
    pub converged: bool,
}

pub const EQUILIBRIUM_ITERATIONS: usize = 10_000;

/// Energy-maximizing weights on the samples by projected gradient ascent
/// with a fixed step. Each sample carries the self-energy of a segment as
/// long as its nearest-neighbour distance; without it the discrete problem
/// is not concave and collapses onto a point mass.
pub fn discrete_equilibrium(set: &SampledSet) -> Result<EquilibriumResult> {
    let m = set.len();
    if m < 2 {
        return Err(Error::Domain("discrete equilibrium needs at least two samples".into()));
    }
    let h = spacing(&set.points);
    if h.contains(&0.0) {
        return Err(Error::Domain("samples must be distinct".into()));
    }
    let l = energy_matrix(&set.points, &h);
    // Largest eigenvalue modulus of L on zero-sum vectors, by power iteration.
    let center = |v: &mut DVector<f64>| {
        let mean = v.mean();
        v.add_scalar_mut(-mean);
    };
    let mut v = DVector::from_fn(m, |i, _| ((i * 7919) % 104_729) as f64 / 104_729.0 - 0.5);
    center(&mut v);
    let mut lambda = 1.0;
    for _ in 0..200 {
        let mut lv = &l * &v;
        center(&mut lv);
        let norm = lv.norm();
        if norm == 0.0 {
            break;
        }
        lambda = norm / v.norm();
        v = lv / norm;
    }
    let step = 0.5 / (2.0 * lambda * 1.05);
    let mut w = DVector::from_element(m, 1.0 / m as f64);
    let mut iterations = 0;
    let mut gradient_norm = f64::INFINITY;
    while iterations < EQUILIBRIUM_ITERATIONS {
        iterations += 1;
        let grad = (&l * &w) * 2.0;
        let mut next: Vec<f64> = w.iter().zip(grad.iter()).map(|(a, g)| a + step * g).collect();
        project_simplex(&mut next);
        let next = DVector::from_vec(next);
        gradient_norm = (&next - &w).norm() / step;
        w = next;
        if gradient_norm < 1e-8 {
            break;
        }
    }
    let measure = EmpiricalMeasure::new(set.points.clone(), normalize(w.as_slice()))?;
    Ok(EquilibriumResult { measure, iterations, gradient_norm, converged: gradient_norm < 1e-8 })
}

fn normalize(w: &[f64]) -> Vec<f64> {
    let s: f64 = w.iter().sum();
    w.iter().map(|x| x / s).collect()
}

/// Charges on a curve at a fixed discretization: cell midpoints, weights and
/// the constant potential `I` they produce on the curve.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CurveCharges {
    pub points: Vec<Complex>,
    pub weights: Vec<f64>,
    pub energy: f64,
}

/// Cells of a curve, clustered toward the endpoints of open curves.
fn curve_cells(d: &SetDescriptor, m: usize) -> (Vec<Complex>, Vec<f64>) {
    let closed = matches!(d, SetDescriptor::Circle { .. });
    let breaks: Vec<f64> = (0..=m)
        .map(|k| {
            let s = k as f64 / m as f64;
            if closed {
                s
            } else {
                0.5 * (1.0 - (std::f64::consts::PI * s).cos())
            }
        })
        .collect();
    let mut points = Vec::with_capacity(m);
    let mut lengths = Vec::with_capacity(m);
    for k in 0..m {
        let (a, b) = (breaks[k], breaks[k + 1]);
        points.push(d.point_at(0.5 * (a + b)));
        // Arc length of the cell by a 4-piece polyline.
        let len: f64 = (0..4)
            .map(|j| (d.point_at(a + (b - a) * (j + 1) as f64 / 4.0) - d.point_at(a + (b - a) * j as f64 / 4.0)).norm())
            .sum();
        lengths.push(len);
    }
    (points, lengths)
}

/// Solves the equilibrium conditions `L w = I·1`, `Σ w = 1` on `m` cells.
pub fn curve_charges(d: &SetDescriptor, m: usize) -> Result<CurveCharges> {
    if !d.is_curve() {
        return Err(Error::Unsupported(format!("curve charges for {d}")));
    }
    let (points, lengths) = curve_cells(d, m);
    let l = energy_matrix(&points, &lengths);
    let mut a = DMatrix::<f64>::zeros(m + 1, m + 1);
    a.view_mut((0, 0), (m, m)).copy_from(&l);
    for i in 0..m {
        a[(i, m)] = -1.0;
        a[(m, i)] = 1.0;
    }
    let mut rhs = DVector::<f64>::zeros(m + 1);
    rhs[m] = 1.0;
    let x = a.lu().solve(&rhs).ok_or_else(|| Error::Numerical("singular equilibrium system".into()))?;
    let weights: Vec<f64> = x.rows(0, m).iter().copied().collect();
    Ok(CurveCharges { points, weights, energy: x[m] })
}

/// Aitken extrapolation of a sequence assumed to converge geometrically in
/// the refinement level.
fn aitken(a: f64, b: f64, c: f64) -> f64 {
    let denom = (c - b) - (b - a);
    if denom == 0.0 || (c - b) * (b - a) <= 0.0 {
        c
    } else {
        c - (c - b) * (c - b) / denom
    }
}

/// Arc data from the discrete equilibrium oracle.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CurveOracle {
    pub levels: Vec<usize>,
    pub energies: Vec<f64>,
    pub extrapolated_energy: f64,
    /// Finest-level charges, used for the Green's function and moments.
    pub charges: CurveCharges,
}

pub const ORACLE_LEVELS: [usize; 3] = [512, 1024, 2048];

pub fn curve_oracle(d: &SetDescriptor, levels: &[usize]) -> Result<CurveOracle> {
    if levels.len() < 3 {
        return Err(Error::Parameter("oracle needs three refinement levels".into()));
    }
    let charges: Vec<CurveCharges> = levels.iter().map(|&m| curve_charges(d, m)).collect::<Result<_>>()?;
    let energies: Vec<f64> = charges.iter().map(|c| c.energy).collect();
    let k = energies.len();
    let extrapolated_energy = aitken(energies[k - 3], energies[k - 2], energies[k - 1]);
    Ok(CurveOracle { levels: levels.to_vec(), energies, extrapolated_energy, charges: charges.into_iter().last().unwrap() })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "model", rename_all = "kebab-case")]
pub enum PotentialModel {
    Circle { center: Complex, radius: f64 },
    Interval { a: f64, b: f64 },
    Charges(CurveOracle),
}

/// Green's function, capacity and equilibrium moments of an analytic set.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ReferencePotential {
    pub descriptor: SetDescriptor,
    pub cap: f64,
    pub model: PotentialModel,
}

pub fn reference_potential(d: &SetDescriptor) -> Result<ReferencePotential> {
    d.validate()?;
    let (cap, model) = match d {
        SetDescriptor::Circle { radius } => (*radius, PotentialModel::Circle { center: Complex::new(0.0, 0.0), radius: *radius }),
        SetDescriptor::Interval { a, b } => ((b - a) / 4.0, PotentialModel::Interval { a: *a, b: *b }),
        SetDescriptor::Arc { .. } => {
            let oracle = curve_oracle(d, &ORACLE_LEVELS)?;
            (oracle.extrapolated_energy.exp(), PotentialModel::Charges(oracle))
        }
        _ => return Err(Error::Unsupported(format!("reference potential for {d}"))),
    };
    Ok(ReferencePotential { descriptor: d.clone(), cap, model })
}

impl ReferencePotential {
    /// `g_Ω(z) ≥ 0`.
    pub fn green(&self, z: Complex) -> f64 {
        match &self.model {
            PotentialModel::Circle { center, radius } => ((z - center).norm() / radius).ln().max(0.0),
            PotentialModel::Interval { a, b } => {
                let x = (2.0 * z - (a + b)) / (b - a);
                let s = (x * x - 1.0).sqrt();
                // Outer branch: |x + √(x²−1)| ≥ 1.
                (x + s).norm().max((x - s).norm()).ln().max(0.0)
            }
            PotentialModel::Charges(o) => {
                let c = &o.charges;
                let u: f64 = c.points.iter().zip(&c.weights).map(|(p, w)| w * (z - p).norm().ln()).sum();
                (u - c.energy).max(0.0)
            }
        }
    }

    /// `I(ω_K) = log Cpct(K)`.
    pub fn energy(&self) -> f64 {
        self.cap.ln()
    }

    /// `∫ z^k dω_K`.
    pub fn moment(&self, k: usize) -> Complex {
        match &self.model {
            // Uniform measure on a circle: only the constant term survives.
            PotentialModel::Circle { center, .. } => center.powu(k as u32),
            PotentialModel::Interval { a, b } => {
                let (mid, half) = ((a + b) / 2.0, (b - a) / 2.0);
                let mut s = 0.0;
                for j in (0..=k).step_by(2) {
                    s += binomial(k, j) * half.powi(j as i32) * mid.powi((k - j) as i32) * arcsine_moment(j);
                }
                Complex::new(s, 0.0)
            }
            PotentialModel::Charges(o) => {
                o.charges.points.iter().zip(&o.charges.weights).map(|(p, w)| p.powu(k as u32) * w).sum()
            }
        }
    }

    pub fn moments(&self, kmax: usize) -> Vec<Complex> {
        (0..=kmax).map(|k| self.moment(k)).collect()
    }

    pub fn table(&self, kmax: usize) -> ReferenceTable {
        ReferenceTable {
            descriptor: self.descriptor.clone(),
            cap: self.cap,
            moments: self.moments(kmax).iter().map(|m| [m.re, m.im]).collect(),
        }
    }
}

/// JSON reference table.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ReferenceTable {
    pub descriptor: SetDescriptor,
    pub cap: f64,
    pub moments: Vec<[f64; 2]>,
}

fn binomial(n: usize, k: usize) -> f64 {
    (0..k).fold(1.0, |acc, j| acc * (n - j) as f64 / (j + 1) as f64)
}

/// `∫ x^k dx / (π√(1−x²))` on `[−1, 1]`.
fn arcsine_moment(k: usize) -> f64 {
    if k % 2 == 1 {
        0.0
    } else {
        binomial(k, k / 2) / 2f64.powi(k as i32)
    }
}

/// `∫ z^k dω_K` for analytic descriptors.
pub fn equilibrium_moments(d: &SetDescriptor, k: usize) -> Result<Complex> {
    Ok(reference_potential(d)?.moment(k))
}
