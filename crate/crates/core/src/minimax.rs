//! Monic minimax (Chebyshev) polynomials of a sampled compact set.
//!
//! Solving happens in a basis orthonormalized on the samples by an Arnoldi
//! process, so the collocation matrix stays well conditioned at degrees
//! where the monomial Vandermonde matrix is useless. The discrete minimax
//! problem is solved by Lawson's iteratively reweighted least squares; the
//! weighted least-squares residual at the final weights is a lower bound on
//! the discrete optimum, which certifies the returned sup-norm. For analytic
//! curves an exchange step moves the samples onto the local maxima of the
//! error along the curve, so the certified value is the optimum on the
//! continuum rather than on the initial mesh.

use std::ops::AddAssign;

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::roots::{aberth, circle_guesses, companion_roots, horner};
use crate::sets::{SampledSet, SetDescriptor};
use crate::Complex;

/// Highest degree for which monomial coefficients are recovered.
pub const MONOMIAL_CAP: usize = 30;

/// Default number of samples for curve descriptors at degree `n`.
pub fn default_sample_count(n: usize) -> usize {
    (64 * n).max(1024)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SolverOptions {
    pub max_iterations: usize,
    /// Relative change of the lower bound below which Lawson has stagnated.
    pub tol: f64,
    /// Weight update `w ← w·|e|^exponent`.
    pub lawson_exponent: f64,
    pub restarts: usize,
    /// Target ratio `upper/lower − 1`; larger gaps set the warning flag.
    pub certificate_tol: f64,
    /// Exchange rounds moving samples onto local error maxima (curves only).
    pub exchange_rounds: usize,
}

impl Default for SolverOptions {
    fn default() -> Self {
        SolverOptions {
            max_iterations: 500,
            tol: 1e-10,
            lawson_exponent: 1.0,
            restarts: 3,
            certificate_tol: 1e-6,
            exchange_rounds: 8,
        }
    }
}

impl SolverOptions {
    pub fn validate(&self) -> Result<()> {
        if self.max_iterations == 0 || !(self.tol > 0.0) || !(self.lawson_exponent > 0.0) || !(self.certificate_tol > 0.0) {
            return Err(Error::Parameter(format!("solver options must be positive: {self:?}")));
        }
        Ok(())
    }
}

/// Arnoldi recurrence: `z q_k = Σ_{j≤k+1} h[k][j] q_j`, with `q_0 = 1` and
/// `h[k][k+1] > 0`. The `q_k` are orthonormal for the uniform discrete
/// inner product `⟨u, v⟩ = (1/m) Σ ū_i v_i` on the samples.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Recurrence {
    pub columns: Vec<Vec<Complex>>,
}

impl Recurrence {
    pub fn degree(&self) -> usize {
        self.columns.len()
    }

    /// Leading monomial coefficient of `q_k`.
    pub fn leading(&self, k: usize) -> f64 {
        self.columns[..k].iter().enumerate().map(|(j, col)| 1.0 / col[j + 1].re).product()
    }

    /// `q_0(z), …, q_n(z)`.
    pub fn eval_all(&self, z: Complex, out: &mut Vec<Complex>) {
        out.clear();
        out.push(Complex::new(1.0, 0.0));
        for (k, col) in self.columns.iter().enumerate() {
            let mut v = z * out[k];
            for j in 0..=k {
                v -= col[j] * out[j];
            }
            out.push(v / col[k + 1]);
        }
    }

    /// Values and derivatives of `q_0, …, q_n` at `z`.
    pub fn eval_all_d(&self, z: Complex, q: &mut Vec<Complex>, dq: &mut Vec<Complex>) {
        q.clear();
        dq.clear();
        q.push(Complex::new(1.0, 0.0));
        dq.push(Complex::new(0.0, 0.0));
        for (k, col) in self.columns.iter().enumerate() {
            let mut v = z * q[k];
            let mut dv = q[k] + z * dq[k];
            for j in 0..=k {
                v -= col[j] * q[j];
                dv -= col[j] * dq[j];
            }
            q.push(v / col[k + 1]);
            dq.push(dv / col[k + 1]);
        }
    }

    /// Monomial coefficients (ascending) of every `q_k`.
    pub fn monomials(&self) -> Vec<Vec<Complex>> {
        let mut polys = vec![vec![Complex::new(1.0, 0.0)]];
        for (k, col) in self.columns.iter().enumerate() {
            let mut next = vec![Complex::new(0.0, 0.0); k + 2];
            for (i, c) in polys[k].iter().enumerate() {
                next[i + 1] += c;
            }
            for j in 0..=k {
                for (i, c) in polys[j].iter().enumerate() {
                    next[i] -= col[j] * c;
                }
            }
            for c in next.iter_mut() {
                *c /= col[k + 1];
            }
            polys.push(next);
        }
        polys
    }
}

/// Orthonormal basis of degree `0..=n` on a sample set.
#[derive(Clone, Debug)]
pub struct OrthoBasis {
    pub recurrence: Recurrence,
    /// `values[k][i] = q_k(z_i)`.
    pub values: Vec<Vec<Complex>>,
    /// 2-norm condition number of the scaled collocation matrix `Q/√m`.
    pub condition: f64,
}

fn count_distinct(points: &[Complex]) -> usize {
    let mut pts = points.to_vec();
    pts.sort_by(|a, b| a.re.total_cmp(&b.re).then(a.im.total_cmp(&b.im)));
    pts.dedup_by(|a, b| (*a - *b).norm() <= 1e-14 * (1.0 + b.norm()));
    pts.len()
}

/// Builds the Arnoldi basis of degree `n` on the samples.
pub fn build_basis(set: &SampledSet, n: usize) -> Result<OrthoBasis> {
    let m = set.len();
    let required = if set.descriptor.is_curve() { 4 * (n + 1) } else { n + 1 };
    if m < required {
        return Err(Error::UnderSampled { samples: m, required });
    }
    let z = &set.points;
    let inner =
        |u: &[Complex], v: &[Complex]| -> Complex { u.iter().zip(v).map(|(a, b)| a.conj() * b).sum::<Complex>() / m as f64 };
    let mut values: Vec<Vec<Complex>> = vec![vec![Complex::new(1.0, 0.0); m]];
    let mut columns = Vec::with_capacity(n);
    for k in 0..n {
        let mut v: Vec<Complex> = z.iter().zip(&values[k]).map(|(a, b)| a * b).collect();
        let start = inner(&v, &v).re.sqrt();
        let mut h = vec![Complex::new(0.0, 0.0); k + 2];
        // Two passes of modified Gram–Schmidt.
        for _ in 0..2 {
            for j in 0..=k {
                let c = inner(&values[j], &v);
                h[j] += c;
                for (vi, qi) in v.iter_mut().zip(&values[j]) {
                    *vi -= c * qi;
                }
            }
        }
        let norm = inner(&v, &v).re.sqrt();
        if !(norm > 1e-12 * start.max(f64::MIN_POSITIVE)) {
            return Err(Error::DegenerateSet(k + 1));
        }
        h[k + 1] = Complex::new(norm, 0.0);
        for vi in v.iter_mut() {
            *vi /= norm;
        }
        values.push(v);
        columns.push(h);
    }
    let gram = DMatrix::<Complex>::from_fn(n + 1, n + 1, |i, j| inner(&values[i], &values[j]));
    let eig = gram.symmetric_eigenvalues();
    let (lo, hi) = eig.iter().fold((f64::INFINITY, 0.0f64), |(lo, hi), &e| (lo.min(e), hi.max(e)));
    let condition = (hi / lo.max(f64::MIN_POSITIVE)).sqrt();
    Ok(OrthoBasis { recurrence: Recurrence { columns }, values, condition })
}

/// Lawson outcome on a fixed sample set.
#[derive(Clone, Debug)]
struct LawsonRun {
    /// `T_n / L_n = q_n + Σ_{j<n} d_j q_j`.
    d: Vec<Complex>,
    upper: f64,
    lower: f64,
    iterations: usize,
    weights: Vec<f64>,
}

fn weighted_least_squares(basis: &OrthoBasis, w: &[f64]) -> Option<Vec<Complex>> {
    let n = basis.values.len() - 1;
    let active: Vec<usize> = (0..w.len()).filter(|&i| w[i] > 0.0).collect();
    let rows = active.len();
    if rows < n {
        return None;
    }
    let sw: Vec<f64> = active.iter().map(|&i| w[i].sqrt()).collect();
    let a = DMatrix::<Complex>::from_fn(rows, n, |r, c| basis.values[c][active[r]] * sw[r]);
    let b = DVector::<Complex>::from_fn(rows, |r, _| -basis.values[n][active[r]] * sw[r]);
    let qr = a.qr();
    let mut qtb = b;
    qr.q_tr_mul(&mut qtb);
    let r = qr.r();
    let mut x = vec![Complex::new(0.0, 0.0); n];
    for i in (0..n).rev() {
        let mut s = qtb[i];
        for j in i + 1..n {
            s -= r[(i, j)] * x[j];
        }
        if r[(i, i)].norm() == 0.0 {
            return None;
        }
        x[i] = s / r[(i, i)];
    }
    Some(x)
}

fn residual(basis: &OrthoBasis, d: &[Complex]) -> Vec<Complex> {
    let n = d.len();
    (0..basis.values[0].len())
        .map(|i| {
            let mut e = basis.values[n][i];
            for (j, dj) in d.iter().enumerate() {
                e += dj * basis.values[j][i];
            }
            e
        })
        .collect()
}

fn lawson(basis: &OrthoBasis, mut w: Vec<f64>, opts: &SolverOptions, target: f64) -> Option<LawsonRun> {
    let total: f64 = w.iter().sum();
    w.iter_mut().for_each(|x| *x /= total);
    let mut best: Option<LawsonRun> = None;
    let mut best_lower: f64 = 0.0;
    let mut prev_lower = 0.0;
    for it in 1..=opts.max_iterations {
        let d = weighted_least_squares(basis, &w)?;
        let e = residual(basis, &d);
        let lower = e.iter().zip(&w).map(|(ei, wi)| wi * ei.norm_sqr()).sum::<f64>().sqrt();
        let upper = e.iter().map(|ei| ei.norm()).fold(0.0, f64::max);
        if !(upper.is_finite() && lower.is_finite()) {
            return best;
        }
        best_lower = best_lower.max(lower);
        if best.as_ref().is_none_or(|b| upper < b.upper) {
            best = Some(LawsonRun { d, upper, lower: best_lower, iterations: it, weights: w.clone() });
        }
        let run = best.as_mut().unwrap();
        run.lower = best_lower;
        run.iterations = it;
        if run.upper <= best_lower * (1.0 + target) || it >= HANDOFF_ITERATIONS {
            break;
        }
        if it > 1 && (lower - prev_lower).abs() <= opts.tol * lower {
            break;
        }
        prev_lower = lower;
        let mut sum = 0.0;
        for (wi, ei) in w.iter_mut().zip(&e) {
            *wi *= ei.norm().powf(opts.lawson_exponent);
            sum += *wi;
        }
        if !(sum > 0.0) {
            break;
        }
        let floor = 1e-300;
        for wi in w.iter_mut() {
            *wi /= sum;
            if *wi < floor {
                *wi = 0.0;
            }
        }
    }
    best
}

/// Gap at which Lawson hands over to the exchange polish.
const HANDOFF_GAP: f64 = 1e-3;
/// Relative gap the exchange polish aims for.
const POLISH_GAP: f64 = 1e-9;
/// Lawson iterations before the exchange polish takes over.
const HANDOFF_ITERATIONS: usize = 60;

/// Minimizes `max_{i∈S} |e_i(d)|` on a small index set by a log-barrier
/// Newton method for the equivalent second-order cone program. Returns the
/// minimizer and the barrier multipliers, which are dual weights on `S`.
fn socp_on_subset(basis: &OrthoBasis, subset: &[usize], d0: &[Complex]) -> Option<(Vec<Complex>, Vec<f64>)> {
    let n = d0.len();
    let dim = 2 * n + 1;
    // Real form: u_i = c_i + G_i x with x = (Re d, Im d).
    let c: Vec<[f64; 2]> = subset.iter().map(|&i| [basis.values[n][i].re, basis.values[n][i].im]).collect();
    let g: Vec<Vec<[f64; 2]>> = subset
        .iter()
        .map(|&i| {
            let mut row = vec![[0.0; 2]; 2 * n];
            for j in 0..n {
                let q = basis.values[j][i];
                row[j] = [q.re, q.im];
                row[n + j] = [-q.im, q.re];
            }
            row
        })
        .collect();
    let resid = |x: &[f64]| -> Vec<[f64; 2]> {
        (0..subset.len())
            .map(|k| {
                let mut u = c[k];
                for (j, gj) in g[k].iter().enumerate() {
                    u[0] += gj[0] * x[j];
                    u[1] += gj[1] * x[j];
                }
                u
            })
            .collect()
    };
    let mut x: Vec<f64> = d0.iter().map(|z| z.re).chain(d0.iter().map(|z| z.im)).collect();
    let start = resid(&x).iter().map(|u| u[0].hypot(u[1])).fold(0.0, f64::max);
    if !(start > 0.0) {
        return None;
    }
    let mut t = 1.05 * start;
    let k = subset.len() as f64;
    let mut mu = 0.05 * t / k;
    let feasible = |x: &[f64], t: f64| resid(x).iter().all(|u| u[0].hypot(u[1]) < t);
    let mut stalled = false;
    loop {
        for _ in 0..60 {
            let u = resid(&x);
            let mut grad = DVector::<f64>::zeros(dim);
            grad[2 * n] = 1.0 / mu;
            // Rows of the rank-one part (∇s/s) and of the scaled Jacobian.
            let mut v = DMatrix::<f64>::zeros(u.len(), dim);
            let mut gs = DMatrix::<f64>::zeros(2 * u.len(), 2 * n);
            let mut tt = 0.0;
            for (kk, ui) in u.iter().enumerate() {
                let r = ui[0].hypot(ui[1]);
                let s = (t - r) * (t + r);
                let sc = (2.0 / s).sqrt();
                // ∇s = (−2 Gᵀu, 2t); −log s has gradient −∇s/s.
                for j in 0..2 * n {
                    let gj = g[kk][j];
                    v[(kk, j)] = -2.0 * (gj[0] * ui[0] + gj[1] * ui[1]) / s;
                    gs[(2 * kk, j)] = sc * gj[0];
                    gs[(2 * kk + 1, j)] = sc * gj[1];
                }
                v[(kk, 2 * n)] = 2.0 * t / s;
                tt -= 2.0 / s;
            }
            for j in 0..dim {
                grad[j] -= v.column(j).sum();
            }
            let mut hess = v.tr_mul(&v);
            let hxx = gs.tr_mul(&gs);
            hess.view_mut((0, 0), (2 * n, 2 * n)).add_assign(&hxx);
            hess[(2 * n, 2 * n)] += tt;
            let step = match hess.clone().cholesky() {
                Some(chol) => chol.solve(&(-&grad)),
                None => match hess.lu().solve(&(-&grad)) {
                    Some(step) => step,
                    None => {
                        stalled = true;
                        break;
                    }
                },
            };
            let decrement = -grad.dot(&step);
            if !(decrement > 1e-18) {
                break;
            }
            // Damped Newton step for a self-concordant barrier.
            let lambda = decrement.sqrt();
            let mut alpha = if lambda < 0.25 { 1.0 } else { 1.0 / (1.0 + lambda) };
            let mut accepted = false;
            for _ in 0..60 {
                let xn: Vec<f64> = x.iter().enumerate().map(|(j, v)| v + alpha * step[j]).collect();
                let tn = t + alpha * step[2 * n];
                if feasible(&xn, tn) {
                    x = xn;
                    t = tn;
                    accepted = true;
                    break;
                }
                alpha *= 0.5;
            }
            if !accepted || decrement < 1e-14 {
                break;
            }
        }
        if stalled || 2.0 * k * mu <= POLISH_GAP * t {
            break;
        }
        mu *= 0.1;
    }
    let u = resid(&x);
    let mut w: Vec<f64> = u
        .iter()
        .map(|ui| {
            let r = ui[0].hypot(ui[1]);
            2.0 * mu * t / ((t - r) * (t + r))
        })
        .collect();
    let sum: f64 = w.iter().sum();
    w.iter_mut().for_each(|v| *v /= sum);
    let d = (0..n).map(|j| Complex::new(x[j], x[n + j])).collect();
    Some((d, w))
}

/// Exchange polish: solve exactly on an active set, add the worst
/// violators, repeat. The weighted least-squares value of the barrier
/// multipliers is a lower bound for the full discrete problem.
fn polish(basis: &OrthoBasis, run: LawsonRun, target: f64) -> LawsonRun {
    let n = run.d.len();
    let m = run.weights.len();
    let wmax = run.weights.iter().cloned().fold(0.0, f64::max);
    let mut in_set = vec![false; m];
    let e = residual(basis, &run.d);
    let mut order: Vec<usize> = (0..m).collect();
    order.sort_by(|&a, &b| e[b].norm().total_cmp(&e[a].norm()));
    for (i, w) in run.weights.iter().enumerate() {
        if *w >= 1e-2 * wmax {
            in_set[i] = true;
        }
    }
    for &i in order.iter().take(2 * n + 2) {
        in_set[i] = true;
    }
    let mut best = run;
    for _ in 0..40 {
        let subset: Vec<usize> = (0..m).filter(|&i| in_set[i]).collect();
        let Some((d, ws)) = socp_on_subset(basis, &subset, &best.d) else { break };
        let mut w = vec![0.0; m];
        for (k, &i) in subset.iter().enumerate() {
            w[i] = ws[k];
        }
        if let Some(dl) = weighted_least_squares(basis, &w) {
            let el = residual(basis, &dl);
            let lower = el.iter().zip(&w).map(|(a, b)| b * a.norm_sqr()).sum::<f64>().sqrt();
            best.lower = best.lower.max(lower);
        }
        let e = residual(basis, &d);
        let upper = e.iter().map(|a| a.norm()).fold(0.0, f64::max);
        if upper < best.upper {
            best.upper = upper;
            best.d = d;
            best.weights = w;
        }
        if best.upper <= best.lower * (1.0 + target) {
            break;
        }
        let mut violators: Vec<usize> = (0..m).filter(|&i| !in_set[i] && e[i].norm() > best.lower).collect();
        if violators.is_empty() {
            break;
        }
        violators.sort_by(|&a, &b| e[b].norm().total_cmp(&e[a].norm()));
        for &i in violators.iter().take(2 * n + 2) {
            in_set[i] = true;
        }
    }
    best
}

/// Deterministic, conjugation-symmetric starting weights for restart `r`.
fn restart_weights(points: &[Complex], r: usize) -> Vec<f64> {
    if r == 0 {
        return vec![1.0; points.len()];
    }
    let rf = r as f64;
    points.iter().map(|z| 1.0 + 0.5 * (rf * (2.3 * z.re + 1.7 * z.im.abs()) + rf).cos()).collect()
}

/// Certificate attached to a solved polynomial.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct Certificate {
    /// Lower bound on the discrete minimax value.
    pub lower: f64,
    /// Attained sample sup-norm.
    pub upper: f64,
    pub iterations: usize,
    pub runs: usize,
    /// `upper/lower − 1` exceeded the requested tolerance.
    pub warning: bool,
    /// Restarts disagreed beyond 1e-8 without both certifying.
    pub ambiguous: bool,
    /// Local maxima of the error on the continuum exceed the sample sup-norm
    /// by this relative amount (0 when not refined).
    pub continuum_excess: f64,
}

impl Certificate {
    pub fn gap(&self) -> f64 {
        self.upper / self.lower - 1.0
    }
}

/// A degree-`n` Chebyshev polynomial of a sampled set, or its dual.
///
/// The represented polynomial is `scale · T_n` where `T_n` is monic:
/// `scale = 1` for `T_n` itself and `scale = γ_n` for the dual `𝒯_n`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ChebyshevPolynomial {
    pub degree: usize,
    pub recurrence: Recurrence,
    /// `T_n = Σ_k combo[k] q_k` with `combo[n]` the reciprocal of `q_n`'s
    /// leading coefficient.
    pub combo: Vec<Complex>,
    /// `‖T_n‖` on the samples.
    pub monic_norm: f64,
    /// `1 / ‖T_n‖`, the leading coefficient of `𝒯_n`.
    pub gamma: f64,
    pub scale: f64,
    /// Ascending monomial coefficients of `T_n` (monic), when `n ≤ 30`.
    pub monomial_coeffs: Option<Vec<Complex>>,
    /// Monomial coefficients agree with the basis on the samples.
    pub monomial_reliable: bool,
    pub certificate: Certificate,
    pub sample_count: usize,
    /// Disk containing the samples (and hence every zero).
    pub support_center: Complex,
    pub support_radius: f64,
    /// Phase applied to make the leading coefficient positive; always 0 for
    /// monic solutions.
    pub rotation: f64,
    pub condition: f64,
}

/// Polynomial self-map used by the dynamics and sampling code.
pub trait PolyMap: Sync {
    fn degree(&self) -> usize;
    /// Leading coefficient.
    fn leading(&self) -> Complex;
    fn eval(&self, z: Complex) -> Complex;
    fn eval_d(&self, z: Complex) -> (Complex, Complex);
    /// Disk `(center, radius)` containing all zeros.
    fn zero_disk(&self) -> (Complex, f64);
    /// Monomial coefficients when they are trustworthy for evaluation.
    fn monomials(&self) -> Option<Vec<Complex>>;
}

impl ChebyshevPolynomial {
    /// Represented polynomial's sup-norm on the samples (1 for the dual).
    pub fn sup_norm(&self) -> f64 {
        self.scale * self.monic_norm
    }

    /// Sup-norm 1 on the samples (for `γ_n = 1` the monic and dual forms coincide).
    pub fn is_dual(&self) -> bool {
        (self.sup_norm() - 1.0).abs() <= 1e-9
    }

    /// Monomial coefficients of the represented polynomial.
    pub fn scaled_monomials(&self) -> Option<Vec<Complex>> {
        self.monomial_coeffs.as_ref().map(|c| c.iter().map(|a| a * self.scale).collect())
    }

    fn eval_basis(&self, z: Complex) -> Complex {
        let mut q = Vec::with_capacity(self.degree + 1);
        self.recurrence.eval_all(z, &mut q);
        q.iter().zip(&self.combo).map(|(a, b)| a * b).sum::<Complex>() * self.scale
    }

    fn eval_basis_d(&self, z: Complex) -> (Complex, Complex) {
        let mut q = Vec::with_capacity(self.degree + 1);
        let mut dq = Vec::with_capacity(self.degree + 1);
        self.recurrence.eval_all_d(z, &mut q, &mut dq);
        let p: Complex = q.iter().zip(&self.combo).map(|(a, b)| a * b).sum();
        let dp: Complex = dq.iter().zip(&self.combo).map(|(a, b)| a * b).sum();
        (p * self.scale, dp * self.scale)
    }

    fn horner_ready(&self) -> Option<&Vec<Complex>> {
        if self.monomial_reliable && self.degree <= MONOMIAL_CAP {
            self.monomial_coeffs.as_ref()
        } else {
            None
        }
    }

    pub fn to_export(&self) -> PolynomialExport {
        let pair = |z: &Complex| [z.re, z.im];
        PolynomialExport {
            degree: self.degree,
            gamma_n: self.gamma,
            sup_norm: self.monic_norm,
            monomial_coeffs: self.monomial_coeffs.as_ref().map(|c| c.iter().map(pair).collect()),
            monomial_reliable: self.monomial_reliable,
            recurrence: self.recurrence.columns.iter().map(|c| c.iter().map(pair).collect()).collect(),
            combo: self.combo.iter().map(pair).collect(),
            sample_count: self.sample_count,
            certificate: CertificateExport {
                lower: self.certificate.lower,
                upper: self.certificate.upper,
                warning: self.certificate.warning,
                ambiguous: self.certificate.ambiguous,
            },
            support: [self.support_center.re, self.support_center.im, self.support_radius],
            condition: self.condition,
        }
    }

    /// Rebuilds the monic polynomial from its export.
    pub fn from_export(e: &PolynomialExport) -> Result<Self> {
        let c = |p: &[f64; 2]| Complex::new(p[0], p[1]);
        if e.recurrence.len() != e.degree || e.combo.len() != e.degree + 1 {
            return Err(Error::Shape("recurrence table does not match degree".into()));
        }
        Ok(ChebyshevPolynomial {
            degree: e.degree,
            recurrence: Recurrence { columns: e.recurrence.iter().map(|col| col.iter().map(c).collect()).collect() },
            combo: e.combo.iter().map(c).collect(),
            monic_norm: e.sup_norm,
            gamma: e.gamma_n,
            scale: 1.0,
            monomial_coeffs: e.monomial_coeffs.as_ref().map(|v| v.iter().map(c).collect()),
            monomial_reliable: e.monomial_reliable,
            certificate: Certificate {
                lower: e.certificate.lower,
                upper: e.certificate.upper,
                warning: e.certificate.warning,
                ambiguous: e.certificate.ambiguous,
                ..Default::default()
            },
            sample_count: e.sample_count,
            support_center: Complex::new(e.support[0], e.support[1]),
            support_radius: e.support[2],
            rotation: 0.0,
            condition: e.condition,
        })
    }
}

impl PolyMap for ChebyshevPolynomial {
    fn degree(&self) -> usize {
        self.degree
    }

    fn leading(&self) -> Complex {
        Complex::new(self.scale, 0.0)
    }

    fn eval(&self, z: Complex) -> Complex {
        match self.horner_ready() {
            Some(c) => horner(c, z).0 * self.scale,
            None => self.eval_basis(z),
        }
    }

    fn eval_d(&self, z: Complex) -> (Complex, Complex) {
        match self.horner_ready() {
            Some(c) => {
                let (p, dp) = horner(c, z);
                (p * self.scale, dp * self.scale)
            }
            None => self.eval_basis_d(z),
        }
    }

    fn zero_disk(&self) -> (Complex, f64) {
        (self.support_center, self.support_radius)
    }

    fn monomials(&self) -> Option<Vec<Complex>> {
        self.horner_ready().map(|c| c.iter().map(|a| a * self.scale).collect())
    }
}

/// A polynomial given by ascending monomial coefficients.
#[derive(Clone, Debug, PartialEq)]
pub struct MonomialPolynomial {
    pub coeffs: Vec<Complex>,
}

impl MonomialPolynomial {
    pub fn new(coeffs: Vec<Complex>) -> Self {
        MonomialPolynomial { coeffs }
    }

    /// `z^n`.
    pub fn power(n: usize) -> Self {
        let mut coeffs = vec![Complex::new(0.0, 0.0); n + 1];
        coeffs[n] = Complex::new(1.0, 0.0);
        MonomialPolynomial { coeffs }
    }
}

impl PolyMap for MonomialPolynomial {
    fn degree(&self) -> usize {
        self.coeffs.len() - 1
    }

    fn leading(&self) -> Complex {
        *self.coeffs.last().unwrap()
    }

    fn eval(&self, z: Complex) -> Complex {
        horner(&self.coeffs, z).0
    }

    fn eval_d(&self, z: Complex) -> (Complex, Complex) {
        horner(&self.coeffs, z)
    }

    fn zero_disk(&self) -> (Complex, f64) {
        (Complex::new(0.0, 0.0), crate::roots::root_bound(&self.coeffs))
    }

    fn monomials(&self) -> Option<Vec<Complex>> {
        Some(self.coeffs.clone())
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CertificateExport {
    pub lower: f64,
    pub upper: f64,
    pub warning: bool,
    pub ambiguous: bool,
}

/// JSON form of a solved polynomial.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PolynomialExport {
    pub degree: usize,
    pub gamma_n: f64,
    pub sup_norm: f64,
    pub monomial_coeffs: Option<Vec<[f64; 2]>>,
    pub monomial_reliable: bool,
    pub recurrence: Vec<Vec<[f64; 2]>>,
    pub combo: Vec<[f64; 2]>,
    pub sample_count: usize,
    pub certificate: CertificateExport,
    pub support: [f64; 3],
    pub condition: f64,
}

/// Inverse of [`SetDescriptor::point_at`] for curves that have one.
fn parameter_of(descriptor: &SetDescriptor, z: Complex) -> Option<f64> {
    use std::f64::consts::PI;
    match descriptor {
        SetDescriptor::Circle { .. } => Some(z.arg().rem_euclid(2.0 * PI) / (2.0 * PI)),
        SetDescriptor::Interval { a, b } => Some(((z.re - a) / (b - a)).clamp(0.0, 1.0)),
        SetDescriptor::Arc { half_angle } => Some(((z.arg() + half_angle) / (2.0 * half_angle)).clamp(0.0, 1.0)),
        SetDescriptor::Polyline { vertices } if vertices.len() > 1 => {
            let total = descriptor.arc_length();
            if total == 0.0 {
                return None;
            }
            let mut acc = 0.0;
            let mut best = (f64::INFINITY, 0.0);
            for w in vertices.windows(2) {
                let ab = w[1] - w[0];
                let len = ab.norm();
                let t = if len == 0.0 { 0.0 } else { (((z - w[0]) * ab.conj()).re / (len * len)).clamp(0.0, 1.0) };
                let d = (z - (w[0] + ab * t)).norm();
                if d < best.0 {
                    best = (d, (acc + t * len) / total);
                }
                acc += len;
            }
            Some(best.1)
        }
        _ => None,
    }
}

fn golden_max(f: impl Fn(f64) -> f64, mut a: f64, mut b: f64, iters: usize) -> (f64, f64) {
    let g = 0.5 * (5f64.sqrt() - 1.0);
    let mut x1 = b - g * (b - a);
    let mut x2 = a + g * (b - a);
    let (mut f1, mut f2) = (f(x1), f(x2));
    for _ in 0..iters {
        if f1 < f2 {
            a = x1;
            x1 = x2;
            f1 = f2;
            x2 = a + g * (b - a);
            f2 = f(x2);
        } else {
            b = x2;
            x2 = x1;
            f2 = f1;
            x1 = b - g * (b - a);
            f1 = f(x1);
        }
    }
    if f1 > f2 {
        (x1, f1)
    } else {
        (x2, f2)
    }
}

/// Local maxima of `|T_n|` along the curve, refined between neighbouring
/// samples. Returns the new points and the largest refined value.
fn continuum_maxima(
    set: &SampledSet,
    recurrence: &Recurrence,
    combo: &[Complex],
    sample_abs: &[f64],
    spacing: f64,
) -> Option<(Vec<Complex>, f64)> {
    let d = &set.descriptor;
    let params: Vec<f64> = set.points.iter().map(|z| parameter_of(d, *z)).collect::<Option<_>>()?;
    let closed = matches!(d, SetDescriptor::Circle { .. });
    let mut order: Vec<usize> = (0..params.len()).collect();
    order.sort_by(|&i, &j| params[i].total_cmp(&params[j]));
    let top = sample_abs.iter().cloned().fold(0.0, f64::max);
    let abs_at = |t: f64| {
        let mut q = Vec::new();
        recurrence.eval_all(d.point_at(t), &mut q);
        q.iter().zip(combo).map(|(a, b)| a * b).sum::<Complex>().norm()
    };
    let m = order.len();
    let mut found = Vec::new();
    let mut best = 0.0f64;
    for pos in 0..m {
        let i = order[pos];
        let (prev, next) = match (pos, closed) {
            (0, false) => (None, Some(order[1])),
            (p, false) if p == m - 1 => (Some(order[m - 2]), None),
            (p, _) => (Some(order[(p + m - 1) % m]), Some(order[(p + 1) % m])),
        };
        let v = sample_abs[i];
        if v < 0.5 * top || prev.is_some_and(|j| sample_abs[j] > v) || next.is_some_and(|j| sample_abs[j] > v) {
            continue;
        }
        let unwrap = |j: usize, below: bool| {
            let mut t = params[j];
            if closed && below && t > params[i] {
                t -= 1.0;
            }
            if closed && !below && t < params[i] {
                t += 1.0;
            }
            t
        };
        let mut lo = prev.map_or(params[i], |j| unwrap(j, true)).min(params[i] - spacing);
        let mut hi = next.map_or(params[i], |j| unwrap(j, false)).max(params[i] + spacing);
        if !closed {
            lo = lo.max(0.0);
            hi = hi.min(1.0);
        }
        if hi - lo <= 0.0 {
            continue;
        }
        let (t, val) = golden_max(abs_at, lo, hi, 60);
        // Endpoints of an open curve can be maxima themselves.
        let (t, val) =
            [(lo, abs_at(lo)), (hi, abs_at(hi))].into_iter().fold((t, val), |acc, c| if c.1 > acc.1 { c } else { acc });
        best = best.max(val);
        if val > v * (1.0 + 1e-13) {
            found.push(d.point_at(t.rem_euclid(if closed { 1.0 } else { f64::INFINITY })));
        }
    }
    Some((found, best))
}

/// On a conjugation-symmetric sample set with a real recurrence,
/// `(T(z) + conj T(conj z))/2` is monic with no larger sup-norm; its basis
/// coefficients are the real parts.
fn symmetrize(basis: &OrthoBasis, run: &mut LawsonRun) {
    let cols = &basis.recurrence.columns;
    let scale = cols.iter().flatten().map(|h| h.norm()).fold(0.0, f64::max);
    if cols.iter().flatten().any(|h| h.im.abs() > 1e-12 * scale) {
        return;
    }
    let d: Vec<Complex> = run.d.iter().map(|x| Complex::new(x.re, 0.0)).collect();
    let upper = residual(basis, &d).iter().map(|e| e.norm()).fold(0.0, f64::max);
    if upper <= run.upper * (1.0 + 1e-14) {
        run.d = d;
        run.upper = upper;
    }
}

struct Solution {
    basis: OrthoBasis,
    run: LawsonRun,
    runs: usize,
    ambiguous: bool,
}

fn solve_on(set: &SampledSet, n: usize, opts: &SolverOptions, warm: Option<&[f64]>) -> Result<Solution> {
    let basis = build_basis(set, n)?;
    let mut best: Option<LawsonRun> = None;
    let mut uppers = Vec::new();
    let mut runs = 0;
    for r in 0..=opts.restarts {
        let w = match (r, warm) {
            (0, Some(w)) => w.to_vec(),
            _ => restart_weights(&set.points, r),
        };
        runs += 1;
        if let Some(run) = lawson(&basis, w, opts, opts.certificate_tol.max(HANDOFF_GAP)) {
            let run = polish(&basis, run, POLISH_GAP.max(opts.certificate_tol.min(POLISH_GAP)));
            let certified = run.upper <= run.lower * (1.0 + opts.certificate_tol);
            uppers.push((run.upper, certified));
            if best.as_ref().is_none_or(|b| run.upper < b.upper) {
                let lower = best.as_ref().map_or(run.lower, |b| b.lower.max(run.lower));
                best = Some(LawsonRun { lower, ..run });
            } else if let Some(b) = best.as_mut() {
                b.lower = b.lower.max(run.lower);
            }
            if certified {
                break;
            }
        }
    }
    let run = best.ok_or_else(|| Error::Numerical("weighted least squares failed".into()))?;
    let ambiguous = uppers.iter().any(|&(u, cu)| uppers.iter().any(|&(v, cv)| (u - v).abs() > 1e-8 * run.upper && !(cu && cv)));
    Ok(Solution { basis, run, runs, ambiguous })
}

/// Monic polynomial of degree `n` with minimal sup-norm on the samples.
pub fn solve_chebyshev(set: &SampledSet, n: usize, opts: &SolverOptions) -> Result<ChebyshevPolynomial> {
    opts.validate()?;
    if n == 0 {
        return Err(Error::Parameter("degree must be ≥ 1".into()));
    }
    let distinct = count_distinct(&set.points);
    if distinct < n + 1 {
        return Err(Error::Rank { distinct, degree: n });
    }
    let symmetric = set.descriptor.is_conjugation_symmetric();
    let mut set = set.clone();
    let spacing = 1.5 / set.len() as f64;
    let mut sol = solve_on(&set, n, opts, None)?;
    let mut excess = 0.0;
    for _ in 0..opts.exchange_rounds {
        let rec = &sol.basis.recurrence;
        let mut combo = sol.run.d.clone();
        combo.push(Complex::new(1.0, 0.0));
        let e = residual(&sol.basis, &sol.run.d);
        let abs: Vec<f64> = e.iter().map(|x| x.norm()).collect();
        let Some((extra, peak)) = continuum_maxima(&set, rec, &combo, &abs, spacing) else { break };
        excess = (peak / sol.run.upper - 1.0).max(0.0);
        if extra.is_empty() || excess <= 1e-11 {
            break;
        }
        let extra = if symmetric { extra.iter().flat_map(|z| [*z, z.conj()]).collect() } else { extra };
        let grown = set.with_extra_points(&extra);
        // Warm start: keep the old weights, give new points a larger share.
        let mean = 1.0 / grown.len() as f64;
        let mut w: Vec<f64> = sol.run.weights.iter().map(|x| x + mean).collect();
        w.resize(grown.len(), 4.0 * mean);
        set = grown;
        sol = solve_on(&set, n, opts, Some(&w))?;
    }
    let Solution { basis, mut run, runs, ambiguous } = sol;
    if symmetric {
        symmetrize(&basis, &mut run);
    }
    let lead = basis.recurrence.leading(n);
    let l_n = lead.recip();
    let mut combo: Vec<Complex> = run.d.iter().map(|d| d * l_n).collect();
    combo.push(Complex::new(l_n, 0.0));
    let monic_norm = run.upper * l_n;
    let gamma = 1.0 / monic_norm;
    let certificate = Certificate {
        lower: run.lower * l_n,
        upper: monic_norm,
        iterations: run.iterations,
        runs,
        warning: run.upper > run.lower * (1.0 + opts.certificate_tol),
        ambiguous,
        continuum_excess: excess,
    };
    let center = set.points.iter().sum::<Complex>() / set.len() as f64;
    let radius = set.points.iter().map(|z| (z - center).norm()).fold(0.0, f64::max);
    let mut poly = ChebyshevPolynomial {
        degree: n,
        recurrence: basis.recurrence.clone(),
        combo,
        monic_norm,
        gamma,
        scale: 1.0,
        monomial_coeffs: None,
        monomial_reliable: false,
        certificate,
        sample_count: set.len(),
        support_center: center,
        support_radius: radius,
        rotation: 0.0,
        condition: basis.condition,
    };
    if !(monic_norm.is_finite() && monic_norm > 0.0) {
        return Err(Error::Convergence { best_sup_norm: monic_norm, lower: poly.certificate.lower });
    }
    if n <= MONOMIAL_CAP {
        let polys = basis.recurrence.monomials();
        let mut coeffs = vec![Complex::new(0.0, 0.0); n + 1];
        for (k, p) in polys.iter().enumerate() {
            for (i, c) in p.iter().enumerate() {
                coeffs[i] += poly.combo[k] * c;
            }
        }
        coeffs[n] = Complex::new(1.0, 0.0);
        let worst = set.points.iter().map(|z| (horner(&coeffs, *z).0 - poly.eval_basis(*z)).norm()).fold(0.0, f64::max);
        poly.monomial_reliable = worst <= 1e-10 * monic_norm;
        poly.monomial_coeffs = Some(coeffs);
    }
    Ok(poly)
}

/// The dual polynomial `𝒯_n = T_n / ‖T_n‖`.
pub fn dualize(t: &ChebyshevPolynomial) -> ChebyshevPolynomial {
    ChebyshevPolynomial { scale: t.gamma, ..t.clone() }
}

/// Szegő-type capacity estimates from leading coefficients.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CapacityEstimate {
    pub degrees: Vec<usize>,
    /// `γ_n^{-1/n}`.
    pub estimates: Vec<f64>,
    /// `log` of the estimates.
    pub energies: Vec<f64>,
    /// Limit of a fit `log Cpct + c/n` to the last three estimates.
    pub extrapolated: f64,
}

pub fn capacity_estimate(gammas: &[(usize, f64)]) -> Result<CapacityEstimate> {
    if gammas.len() < 2 {
        return Err(Error::Domain("need at least two (n, γ_n) pairs".into()));
    }
    if gammas.windows(2).any(|w| w[1].0 <= w[0].0) {
        return Err(Error::Domain("degrees must be strictly increasing".into()));
    }
    if let Some((n, g)) = gammas.iter().find(|(_, g)| !(*g > 0.0)) {
        return Err(Error::Domain(format!("γ_{n} = {g} is not positive")));
    }
    let estimates: Vec<f64> = gammas.iter().map(|(n, g)| g.powf(-1.0 / *n as f64)).collect();
    let energies: Vec<f64> = estimates.iter().map(|c| c.ln()).collect();
    // log γ_n^{-1/n} = log Cpct(K) + c/n + o(1/n): least squares in 1/n
    // over the last three degrees.
    let k = estimates.len();
    let tail: Vec<(f64, f64)> = gammas[k.saturating_sub(3)..]
        .iter()
        .zip(&energies[k.saturating_sub(3)..])
        .map(|((n, _), e)| (1.0 / *n as f64, *e))
        .collect();
    let t = tail.len() as f64;
    let (mx, my) = (tail.iter().map(|p| p.0).sum::<f64>() / t, tail.iter().map(|p| p.1).sum::<f64>() / t);
    let sxx: f64 = tail.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let sxy: f64 = tail.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let extrapolated = (my - sxy / sxx * mx).exp();
    Ok(CapacityEstimate { degrees: gammas.iter().map(|g| g.0).collect(), estimates, energies, extrapolated })
}

/// Zeros of the polynomial with multiplicity.
pub fn zero_locations<P: PolyMap + ?Sized>(p: &P) -> Result<Vec<Complex>> {
    preimages_of(p, Complex::new(0.0, 0.0))
}

/// All solutions of `p(z) = w`, checked to a residual of
/// `1e-8 · max(1, |w|, |leading|)`.
pub fn preimages_of<P: PolyMap + ?Sized>(p: &P, w: Complex) -> Result<Vec<Complex>> {
    preimages_from(p, w, None)
}

/// As [`preimages_of`], starting Aberth from the given guesses when present.
pub fn preimages_from<P: PolyMap + ?Sized>(p: &P, w: Complex, guesses: Option<Vec<Complex>>) -> Result<Vec<Complex>> {
    let n = p.degree();
    if n == 0 {
        return Ok(Vec::new());
    }
    if n > 64 {
        return Err(Error::Parameter(format!("root finding supports n ≤ 64, got {n}")));
    }
    let lead = p.leading().norm();
    let tol = 1e-8 * 1f64.max(w.norm()).max(lead);
    let f = |z: Complex| {
        let (v, dv) = p.eval_d(z);
        (v - w, dv)
    };
    let (center, radius) = p.zero_disk();
    // Every solution lies within (|w|/|lead|)^{1/n} of some zero.
    let reach = radius + (w.norm() / lead).powf(1.0 / n as f64);
    let polish = |roots: &mut Vec<Complex>| -> f64 {
        for r in roots.iter_mut() {
            for _ in 0..3 {
                let (v, dv) = f(*r);
                if dv.norm() == 0.0 || v.norm() <= tol * 1e-6 {
                    break;
                }
                let next = *r - v / dv;
                if f(next).0.norm() < v.norm() {
                    *r = next;
                } else {
                    break;
                }
            }
        }
        roots.iter().map(|r| f(*r).0.norm()).fold(0.0, f64::max)
    };
    let start = guesses.filter(|g| g.len() == n).unwrap_or_else(|| circle_guesses(n, center, reach.max(1e-3)));
    let mut roots = aberth(f, start, 500, 1e-13).roots;
    let worst = polish(&mut roots);
    if worst <= tol {
        return Ok(roots);
    }
    let mut best = (worst, roots);
    if n <= MONOMIAL_CAP {
        if let Some(mut coeffs) = p.monomials() {
            coeffs[0] -= w;
            if let Some(mut roots) = companion_roots(&coeffs) {
                let worst = polish(&mut roots);
                if worst < best.0 {
                    best = (worst, roots);
                }
            }
        }
    }
    let (_, roots) = best;
    let unconverged: Vec<usize> = roots.iter().enumerate().filter(|(_, r)| !(f(**r).0.norm() <= tol)).map(|(i, _)| i).collect();
    if unconverged.is_empty() {
        Ok(roots)
    } else {
        Err(Error::RootFinder { roots, unconverged })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sets::{sample_set, sample_set_with, Placement};
    use std::f64::consts::PI;

    #[test]
    fn circle_basis_is_monomial() {
        let s = sample_set(&SetDescriptor::circle(1.0), 256).unwrap();
        let b = build_basis(&s, 5).unwrap();
        for (k, col) in b.recurrence.columns.iter().enumerate() {
            assert!((col[k + 1].re - 1.0).abs() < 1e-12);
            for j in 0..=k {
                assert!(col[j].norm() < 1e-12);
            }
        }
        for k in 0..=5 {
            for (i, z) in s.points.iter().enumerate() {
                assert!((b.values[k][i] - z.powu(k as u32)).norm() < 1e-12);
            }
        }
        assert!(b.condition < 1.0 + 1e-10);
    }

    #[test]
    fn interval_basis_matches_gram_schmidt() {
        let s = sample_set_with(&SetDescriptor::interval(-1.0, 1.0), 1024, Placement::Chebyshev).unwrap();
        let n = 8;
        let b = build_basis(&s, n).unwrap();
        // Oracle: classical Gram–Schmidt on monomials.
        let m = s.len() as f64;
        let mut gs: Vec<Vec<f64>> = Vec::new();
        for k in 0..=n {
            let mut v: Vec<f64> = s.points.iter().map(|z| z.re.powi(k as i32)).collect();
            for q in &gs {
                let c: f64 = q.iter().zip(&v).map(|(a, b)| a * b).sum::<f64>() / m;
                v.iter_mut().zip(q).for_each(|(x, y)| *x -= c * y);
            }
            let norm = (v.iter().map(|x| x * x).sum::<f64>() / m).sqrt();
            gs.push(v.into_iter().map(|x| x / norm).collect());
        }
        for k in 0..=n {
            for i in 0..s.len() {
                assert!((b.values[k][i] - Complex::new(gs[k][i], 0.0)).norm() < 1e-9);
            }
        }
        let h = &b.recurrence.columns;
        assert!((h[0][1].re - 0.5f64.sqrt()).abs() < 1e-2);
        for k in 1..n {
            assert!((h[k][k + 1].re - 0.5).abs() < 1e-2, "{:?}", h[k][k + 1]);
            assert!(h[k][k].norm() < 1e-12);
        }
    }

    #[test]
    fn point_list_basis_is_interpolatory() {
        let pts: Vec<Complex> = (0..5).map(|k| Complex::new(k as f64, 0.5 * k as f64 * k as f64)).collect();
        let s = sample_set(&SetDescriptor::PointList { points: pts }, 5).unwrap();
        let b = build_basis(&s, 4).unwrap();
        assert!(b.condition < 1.0 + 1e-8);
        let too_small = sample_set(&SetDescriptor::circle(1.0), 10).unwrap();
        assert!(matches!(build_basis(&too_small, 4), Err(Error::UnderSampled { .. })));
    }

    #[test]
    fn degenerate_point_list_breaks_down() {
        let pts = vec![Complex::new(1.0, 0.0), Complex::new(2.0, 0.0), Complex::new(1.0, 0.0), Complex::new(2.0, 0.0)];
        let s = SampledSet { descriptor: SetDescriptor::PointList { points: pts.clone() }, points: pts, weights: None };
        assert!(matches!(build_basis(&s, 3), Err(Error::DegenerateSet(_))));
        assert!(matches!(solve_chebyshev(&s, 3, &SolverOptions::default()), Err(Error::Rank { .. })));
    }

    #[test]
    fn circle_solution_is_z_to_the_n() {
        let s = sample_set(&SetDescriptor::circle(1.0), 1024).unwrap();
        let t = solve_chebyshev(&s, 7, &SolverOptions::default()).unwrap();
        assert!((t.monic_norm - 1.0).abs() < 1e-12);
        assert!((t.gamma - 1.0).abs() < 1e-12);
        let c = t.monomial_coeffs.as_ref().unwrap();
        for (k, a) in c.iter().enumerate() {
            let e = if k == 7 { 1.0 } else { 0.0 };
            assert!((a - Complex::new(e, 0.0)).norm() < 1e-10);
        }
    }

    #[test]
    fn interval_solution_equioscillates() {
        let s = sample_set_with(&SetDescriptor::interval(-1.0, 1.0), 1024, Placement::Chebyshev).unwrap();
        let t = solve_chebyshev(&s, 6, &SolverOptions::default()).unwrap();
        assert!((t.monic_norm - 0.03125).abs() < 0.03125 * 1e-6, "{}", t.monic_norm);
        assert!((t.gamma - 32.0).abs() < 32.0 * 1e-6);
        let dual = dualize(&t);
        // Oracle: the classical three-term recurrence for cos(6θ).
        for k in 0..=200 {
            let theta = PI * k as f64 / 200.0;
            let x = theta.cos();
            let (mut t0, mut t1) = (1.0, x);
            for _ in 1..6 {
                let t2 = 2.0 * x * t1 - t0;
                t0 = t1;
                t1 = t2;
            }
            assert!((dual.eval(Complex::new(x, 0.0)).re - t1).abs() < 1e-6);
        }
        let extrema = (0..=6)
            .filter(|k| {
                let x = (PI * *k as f64 / 6.0).cos();
                (dual.eval(Complex::new(x, 0.0)).norm() - 1.0).abs() < 1e-6
            })
            .count();
        assert_eq!(extrema, 7);
    }

    #[test]
    fn dualize_normalizes_and_is_idempotent_on_values() {
        let s = sample_set(&SetDescriptor::arc(1.0), 1024).unwrap();
        let t = solve_chebyshev(&s, 4, &SolverOptions::default()).unwrap();
        let d = dualize(&t);
        assert!((d.sup_norm() - 1.0).abs() < 1e-14);
        assert_eq!(d.gamma, t.gamma);
        assert_eq!(d.leading(), Complex::new(t.gamma, 0.0));
        let dd = dualize(&t);
        assert_eq!(d, dd);
        for z in &s.points {
            assert!(d.eval(*z).norm() <= 1.0 + 1e-9);
        }
    }

    #[test]
    fn capacity_estimates() {
        let circle = capacity_estimate(&[(2, 1.0), (3, 1.0), (4, 1.0)]).unwrap();
        assert!(circle.estimates.iter().all(|c| (c - 1.0).abs() < 1e-15));
        assert_eq!(circle.extrapolated, 1.0);
        let g: Vec<(usize, f64)> = [4usize, 8, 16, 32].iter().map(|&n| (n, 2f64.powi(n as i32 - 1))).collect();
        let iv = capacity_estimate(&g).unwrap();
        for (c, (n, _)) in iv.estimates.iter().zip(&g) {
            assert!((c - 2f64.powf(-1.0 + 1.0 / *n as f64)).abs() < 1e-15);
        }
        assert!((iv.extrapolated - 0.5).abs() < 1e-12);
        assert!(capacity_estimate(&[(2, 1.0), (3, 0.0)]).is_err());
        assert!(capacity_estimate(&[(2, 1.0)]).is_err());
    }

    #[test]
    fn zeros_of_power_and_interval() {
        let z7 = MonomialPolynomial::power(7);
        let zeros = zero_locations(&z7).unwrap();
        assert_eq!(zeros.len(), 7);
        assert!(zeros.iter().all(|z| z.norm() < 1e-2));
        let s = sample_set_with(&SetDescriptor::interval(-1.0, 1.0), 1024, Placement::Chebyshev).unwrap();
        let t = dualize(&solve_chebyshev(&s, 6, &SolverOptions::default()).unwrap());
        let mut zeros: Vec<f64> = zero_locations(&t).unwrap().iter().map(|z| z.re).collect();
        zeros.sort_by(f64::total_cmp);
        let mut expected: Vec<f64> = (1..=6).map(|k| ((2 * k - 1) as f64 * PI / 12.0).cos()).collect();
        expected.sort_by(f64::total_cmp);
        for (a, b) in zeros.iter().zip(&expected) {
            assert!((a - b).abs() < 1e-6);
        }
    }
}
