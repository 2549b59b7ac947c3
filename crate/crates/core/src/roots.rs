//! All-roots solvers: Aberth–Ehrlich simultaneous iteration on an arbitrary
//! evaluator, and companion-matrix eigenvalues for small monomial inputs.

use std::f64::consts::PI;

use nalgebra::DMatrix;

use crate::Complex;

/// Outcome of a simultaneous root iteration.
#[derive(Clone, Debug)]
pub struct RootSet {
    pub roots: Vec<Complex>,
    /// Per-root flag: the last Newton–Aberth correction met the tolerance.
    pub converged: Vec<bool>,
    pub iterations: usize,
}

/// Horner evaluation of `Σ c_k z^k` and its derivative (ascending coefficients).
pub fn horner(coeffs: &[Complex], z: Complex) -> (Complex, Complex) {
    let mut p = Complex::new(0.0, 0.0);
    let mut dp = Complex::new(0.0, 0.0);
    for c in coeffs.iter().rev() {
        dp = dp * z + p;
        p = p * z + c;
    }
    (p, dp)
}

/// Starting points for Aberth: a rotated circle of radius `radius` about `center`.
pub fn circle_guesses(degree: usize, center: Complex, radius: f64) -> Vec<Complex> {
    (0..degree).map(|k| center + Complex::from_polar(radius, 2.0 * PI * k as f64 / degree as f64 + 0.4)).collect()
}

/// Aberth–Ehrlich iteration with Gauss–Seidel updates. `eval` returns
/// `(p(z), p'(z))`; iteration stops once every correction is below
/// `tol · max(1, |z|)` or after `max_iter` sweeps.
pub fn aberth<F>(eval: F, guesses: Vec<Complex>, max_iter: usize, tol: f64) -> RootSet
where
    F: Fn(Complex) -> (Complex, Complex),
{
    let n = guesses.len();
    let mut z = guesses;
    let mut converged = vec![false; n];
    let mut iterations = 0;
    while iterations < max_iter && !converged.iter().all(|&c| c) {
        iterations += 1;
        for k in 0..n {
            if converged[k] {
                continue;
            }
            let (p, dp) = eval(z[k]);
            if p == Complex::new(0.0, 0.0) {
                converged[k] = true;
                continue;
            }
            let ratio = p / dp;
            let repulsion: Complex = (0..n)
                .filter(|&j| j != k)
                .map(|j| {
                    let d = z[k] - z[j];
                    if d == Complex::new(0.0, 0.0) {
                        Complex::new(0.0, 0.0)
                    } else {
                        d.inv()
                    }
                })
                .sum();
            let mut step = ratio / (Complex::new(1.0, 0.0) - ratio * repulsion);
            if !(step.re.is_finite() && step.im.is_finite()) {
                // p' vanished: nudge off the critical point.
                step = Complex::new(1e-3, 1e-3) * z[k].norm().max(1.0);
            }
            z[k] -= step;
            converged[k] = step.norm() <= tol * z[k].norm().max(1.0);
        }
    }
    RootSet { roots: z, converged, iterations }
}

/// Roots of a monomial polynomial (ascending coefficients, non-zero leading
/// coefficient) as eigenvalues of the companion matrix.
pub fn companion_roots(coeffs: &[Complex]) -> Option<Vec<Complex>> {
    let n = coeffs.len().checked_sub(1)?;
    if n == 0 {
        return Some(Vec::new());
    }
    let lead = coeffs[n];
    if lead.norm() == 0.0 {
        return None;
    }
    let mut m = DMatrix::<Complex>::zeros(n, n);
    for i in 1..n {
        m[(i, i - 1)] = Complex::new(1.0, 0.0);
    }
    for i in 0..n {
        m[(i, n - 1)] = -coeffs[i] / lead;
    }
    let schur = m.try_schur(1e-15, 10_000)?;
    let eig = schur.eigenvalues()?;
    Some(eig.iter().copied().collect())
}

/// Upper bound on root moduli (Fujiwara) for ascending coefficients.
pub fn root_bound(coeffs: &[Complex]) -> f64 {
    let n = coeffs.len() - 1;
    let lead = coeffs[n].norm();
    let mut b: f64 = 0.0;
    for k in 0..n {
        let term = (coeffs[k].norm() / lead).powf(1.0 / (n - k) as f64);
        b = b.max(if k == 0 { term * 0.5f64.powf(1.0 / n as f64) } else { term });
    }
    2.0 * b
}
