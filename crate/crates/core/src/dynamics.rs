//! Iteration of a polynomial self-map: escape radius, filled Julia set on a
//! grid, Green's function by iteration and by a single evaluation, and
//! preimages.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::minimax::{preimages_from, preimages_of, zero_locations, PolyMap};
use crate::sets::{Grid, GridRegion, Mask, Window};
use crate::Complex;

pub const DEFAULT_KMAX: usize = 60;
const CIRCLE_SAMPLES: usize = 512;
const SEARCH_START: f64 = 1.1;
const SEARCH_LIMIT: f64 = 1_048_576.0;

/// Escape radius and iteration budget for one polynomial.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct EscapeData {
    pub radius: f64,
    pub kmax: usize,
    /// `min |p(z)| / |z|` over the circle `|z| = radius`.
    pub expansion: f64,
}

fn log_capacity<P: PolyMap + ?Sized>(p: &P) -> f64 {
    -p.leading().norm().ln() / (p.degree() as f64 - 1.0)
}

/// `Cpct(K_P) = |a|^{-1/(n-1)}` for leading coefficient `a`.
pub fn capacity_from_dynamics<P: PolyMap + ?Sized>(p: &P) -> Result<f64> {
    if p.degree() < 2 {
        return Err(Error::Parameter("capacity of K_P needs degree ≥ 2".into()));
    }
    if !(p.leading().norm() > 0.0) {
        return Err(Error::Domain("leading coefficient vanishes".into()));
    }
    Ok(log_capacity(p).exp())
}

/// Smallest `R = 1.1 · 2^j` with `|p(z)| > |z|` on 512 points of `|z| = R`
/// and every zero inside `D(R)`.
pub fn escape_radius<P: PolyMap + ?Sized>(p: &P) -> Result<EscapeData> {
    if p.degree() < 2 {
        return Err(Error::Parameter("escape radius needs degree ≥ 2".into()));
    }
    let zeros = zero_locations(p)?;
    let zmax = zeros.iter().map(|z| z.norm()).fold(0.0, f64::max);
    let mut r = SEARCH_START;
    while r <= SEARCH_LIMIT {
        if zmax < r {
            let expansion = (0..CIRCLE_SAMPLES)
                .map(|k| {
                    let z = Complex::from_polar(r, 2.0 * std::f64::consts::PI * k as f64 / CIRCLE_SAMPLES as f64);
                    p.eval(z).norm() / r
                })
                .fold(f64::INFINITY, f64::min);
            if expansion > 1.0 {
                return Ok(EscapeData { radius: r, kmax: DEFAULT_KMAX, expansion });
            }
        }
        r *= 2.0;
    }
    Err(Error::DivergenceConfiguration(SEARCH_LIMIT))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum GreenMethod {
    Iterated,
    SingleEval,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct GreenEvaluation {
    pub value: f64,
    pub method: GreenMethod,
    pub error_bound: f64,
    /// Iterations used (1 for single evaluation).
    pub iterations: usize,
}

/// Modulus beyond which iteration stops: large enough that the Böttcher
/// correction is negligible, small enough that one more step cannot overflow.
fn stop_modulus<P: PolyMap + ?Sized>(p: &P, radius: f64) -> f64 {
    let n = p.degree() as f64;
    let log_lead = p.leading().norm().ln().max(0.0);
    (1e8 * radius).min(0.5 * ((650.0 - log_lead) / n).exp()).max(4.0 * radius)
}

/// State of one orbit followed until it leaves the stop disk.
#[derive(Clone, Copy, Debug)]
struct Orbit {
    /// First `k` with `|p^k(z)| > R` (`None` if never within budget).
    escape: Option<usize>,
    log_modulus_at_escape: f64,
    green: f64,
    error_bound: f64,
    /// `|∇g|`, available when the orbit escaped.
    grad: f64,
    iterations: usize,
}

fn follow<P: PolyMap + ?Sized>(p: &P, z: Complex, radius: f64, kmax: usize, with_grad: bool) -> Orbit {
    let n = p.degree() as f64;
    let log_cap = log_capacity(p);
    let stop = stop_modulus(p, radius);
    let mut w = z;
    let mut dw = Complex::new(1.0, 0.0);
    let mut log_scale = 0.0;
    let mut escape = None;
    let mut log_mod = 0.0;
    let mut k = 0usize;
    // Budget counts escapes past R; the orbit may run a few more steps
    // beyond kmax to reach the stop modulus once it has escaped.
    loop {
        let modulus = w.norm();
        if escape.is_none() && modulus > radius {
            escape = Some(k);
            log_mod = modulus.ln();
        }
        if modulus > stop || (escape.is_some() && k >= kmax + 500) {
            let scale = n.powi(-(k as i32));
            let green = ((modulus.ln() - log_cap) * scale).max(0.0);
            let bound = scale * (modulus / (modulus - radius)).ln();
            let grad = if with_grad { (dw.norm().ln() + log_scale - modulus.ln()).exp() * scale } else { 0.0 };
            return Orbit { escape, log_modulus_at_escape: log_mod, green, error_bound: bound, grad, iterations: k };
        }
        if escape.is_none() && k >= kmax {
            let scale = n.powi(-(k as i32));
            let bound = scale * ((2.0 * radius).ln() - log_cap).max(0.0);
            return Orbit { escape: None, log_modulus_at_escape: 0.0, green: 0.0, error_bound: bound, grad: 0.0, iterations: k };
        }
        let (next, d) = if with_grad { p.eval_d(w) } else { (p.eval(w), Complex::new(0.0, 0.0)) };
        if !(next.re.is_finite() && next.im.is_finite()) {
            // Overflow: treat as escaped here and use the last finite iterate.
            let scale = n.powi(-(k as i32));
            let escape = escape.or(Some(k + 1));
            let green = ((modulus.ln() - log_cap) * scale).max(0.0);
            return Orbit {
                escape,
                log_modulus_at_escape: log_mod.max(modulus.ln()),
                green,
                error_bound: green,
                grad: 0.0,
                iterations: k,
            };
        }
        if with_grad {
            dw *= d;
            let m = dw.norm();
            if m > 1e100 || (m < 1e-100 && m > 0.0) {
                log_scale += m.ln();
                dw /= m;
            }
        }
        w = next;
        k += 1;
    }
}

/// Green's function of the basin of infinity by iteration.
///
/// The orbit is followed until `|p^k(z)|` is large, then the limit is read
/// off with the asymptotic `g(w) = log|w| − log Cpct + O(R/|w|)`, which is
/// far more accurate than truncating `n^{-k} log|p^k|` at a fixed radius.
pub fn green_iterated<P: PolyMap + ?Sized>(p: &P, z: Complex, radius: f64, kmax: usize) -> GreenEvaluation {
    let o = follow(p, z, radius, kmax, false);
    GreenEvaluation { value: o.green, method: GreenMethod::Iterated, error_bound: o.error_bound, iterations: o.iterations }
}

/// `(1/n) log⁺|p(z)|`, within `M/n` of the Green's function of `K` for dual
/// Chebyshev polynomials.
pub fn green_single_eval<P: PolyMap + ?Sized>(p: &P, z: Complex, m_const: f64) -> GreenEvaluation {
    let n = p.degree() as f64;
    let value = p.eval(z).norm().ln().max(0.0) / n;
    GreenEvaluation { value, method: GreenMethod::SingleEval, error_bound: m_const / n, iterations: 1 }
}

/// `max |g(p(z)) − n·g(z)|` over the test points.
pub fn functional_equation_check<P: PolyMap + ?Sized>(p: &P, points: &[Complex], radius: f64, kmax: usize) -> f64 {
    let n = p.degree() as f64;
    points
        .par_iter()
        .map(|z| {
            let g = green_iterated(p, *z, radius, kmax).value;
            let gp = green_iterated(p, p.eval(*z), radius, kmax).value;
            (gp - n * g).abs()
        })
        .collect::<Vec<_>>()
        .into_iter()
        .fold(0.0, f64::max)
}

/// Options for [`filled_julia_grid`].
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct JuliaGridOptions {
    pub window: Window,
    pub resolution: usize,
    pub kmax: usize,
    /// Also mark cells whose distance estimate to `K_P` is below one cell.
    pub distance_estimate: bool,
}

impl Default for JuliaGridOptions {
    fn default() -> Self {
        JuliaGridOptions { window: Window::square(1.5), resolution: 512, kmax: DEFAULT_KMAX, distance_estimate: true }
    }
}

/// Escape-time rendering of the filled Julia set.
///
/// A cell belongs to the mask when its centre does not leave `D(R)` within
/// `kmax` steps or, with the distance estimate on, when `g/|∇g|` puts the
/// centre within one cell of `K_P`. The second rule keeps Julia sets of zero
/// area (segments, arcs) visible at cell-centre sampling.
pub fn filled_julia_grid<P: PolyMap + ?Sized>(p: &P, opts: &JuliaGridOptions) -> Result<GridRegion> {
    if opts.resolution < 64 {
        return Err(Error::Parameter(format!("resolution must be ≥ 64, got {}", opts.resolution)));
    }
    let grid = Grid::new(opts.window, opts.resolution)?;
    let esc = escape_radius(p)?;
    filled_julia_grid_with(p, grid, esc.radius, opts.kmax, opts.distance_estimate)
}

pub fn filled_julia_grid_with<P: PolyMap + ?Sized>(
    p: &P,
    grid: Grid,
    radius: f64,
    kmax: usize,
    distance_estimate: bool,
) -> Result<GridRegion> {
    let cell = grid.cell();
    let orbits: Vec<Orbit> =
        (0..grid.len()).into_par_iter().map(|i| follow(p, grid.center_of(i), radius, kmax, distance_estimate)).collect();
    let mut escape = Vec::with_capacity(orbits.len());
    let mut log_modulus = Vec::with_capacity(orbits.len());
    let mut green = Vec::with_capacity(orbits.len());
    let mut cells = Vec::with_capacity(orbits.len());
    for o in &orbits {
        let near = distance_estimate && o.escape.is_some() && o.grad > 0.0 && o.green / o.grad <= cell;
        escape.push(o.escape.map_or(0, |k| k as u32 + 1));
        log_modulus.push(o.log_modulus_at_escape);
        green.push(o.green);
        cells.push(o.escape.is_none() || near);
    }
    Ok(GridRegion {
        grid,
        escape,
        log_modulus,
        green,
        filled_julia: Mask { grid, cells },
        convex_hull: None,
        polynomial_hull: None,
    })
}

/// Product form `a · Π (z − ζ_i)` built from computed zeros.
#[derive(Clone, Debug)]
pub struct ProductForm {
    pub lead: Complex,
    pub zeros: Vec<Complex>,
}

impl PolyMap for ProductForm {
    fn degree(&self) -> usize {
        self.zeros.len()
    }

    fn leading(&self) -> Complex {
        self.lead
    }

    fn eval(&self, z: Complex) -> Complex {
        self.zeros.iter().fold(self.lead, |acc, r| acc * (z - r))
    }

    fn eval_d(&self, z: Complex) -> (Complex, Complex) {
        let mut p = self.lead;
        let mut dp = Complex::new(0.0, 0.0);
        for r in &self.zeros {
            dp = dp * (z - r) + p;
            p *= z - r;
        }
        (p, dp)
    }

    fn zero_disk(&self) -> (Complex, f64) {
        (Complex::new(0.0, 0.0), self.zeros.iter().map(|z| z.norm()).fold(0.0, f64::max))
    }

    fn monomials(&self) -> Option<Vec<Complex>> {
        None
    }
}

/// Repeated solver for `p(z) = w`: roots come from the product form and
/// are accepted only after a residual check in `p` itself.
pub struct Preimager<'a, P: PolyMap + ?Sized> {
    pub poly: &'a P,
    pub product: ProductForm,
    /// `p'(ζ_i)` at each zero, for first-order starting guesses.
    slopes: Vec<Complex>,
    reach: f64,
}

impl<'a, P: PolyMap + ?Sized> Preimager<'a, P> {
    pub fn new(poly: &'a P) -> Result<Self> {
        let zeros = zero_locations(poly)?;
        let product = ProductForm { lead: poly.leading(), zeros };
        let slopes = product.zeros.iter().map(|z| product.eval_d(*z).1).collect();
        let reach = product.zero_disk().1.max(1.0);
        Ok(Preimager { poly, product, slopes, reach })
    }

    /// Roots of `p(z) = w` move away from the zeros like `w / p'(ζ)`;
    /// far from the zeros, circle guesses are used instead.
    fn guesses(&self, w: Complex) -> Option<Vec<Complex>> {
        let n = self.product.zeros.len();
        let mut out = Vec::with_capacity(n);
        for (i, (z, d)) in self.product.zeros.iter().zip(&self.slopes).enumerate() {
            let step = w / d;
            if !(step.norm() <= 0.5 * self.reach) {
                return None;
            }
            // A tiny index-dependent offset keeps guesses distinct.
            out.push(z + step + Complex::from_polar(1e-9 * self.reach, 2.4 * i as f64));
        }
        Some(out)
    }

    pub fn tolerance(&self, w: Complex) -> f64 {
        1e-8 * 1f64.max(w.norm()).max(self.poly.leading().norm())
    }

    pub fn solve(&self, w: Complex) -> Result<Vec<Complex>> {
        let tol = self.tolerance(w);
        if let Ok(mut roots) = preimages_from(&self.product, w, self.guesses(w)) {
            let mut ok = true;
            for r in roots.iter_mut() {
                let v = self.poly.eval(*r) - w;
                if v.norm() <= tol {
                    continue;
                }
                // One Newton step in the primary evaluator.
                let (_, dv) = self.poly.eval_d(*r);
                let next = *r - v / dv;
                if (self.poly.eval(next) - w).norm() <= tol {
                    *r = next;
                } else {
                    ok = false;
                    break;
                }
            }
            if ok {
                return Ok(roots);
            }
        }
        preimages_of(self.poly, w)
    }
}

/// All solutions of `p(z) = w` with multiplicity.
pub fn preimages<P: PolyMap + ?Sized>(p: &P, w: Complex) -> Result<Vec<Complex>> {
    Preimager::new(p)?.solve(w)
}

/// Filled Julia mask and escape data for a batch of polynomials on one grid.
pub fn masks_for<P: PolyMap + ?Sized>(polys: &[&P], grid: Grid, kmax: usize) -> Result<Vec<Mask>> {
    polys
        .iter()
        .map(|p| {
            let r = escape_radius(*p)?.radius;
            Ok(filled_julia_grid_with(*p, grid, r, kmax, true)?.filled_julia)
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::minimax::{dualize, solve_chebyshev, MonomialPolynomial, SolverOptions};
    use crate::sets::{hausdorff_distance, sample_set, sample_set_with, Placement, SetDescriptor};

    fn interval_dual(n: usize) -> crate::ChebyshevPolynomial {
        let s = sample_set_with(&SetDescriptor::interval(-1.0, 1.0), 1024.max(64 * n), Placement::Chebyshev).unwrap();
        dualize(&solve_chebyshev(&s, n, &SolverOptions::default()).unwrap())
    }

    /// Classical interval Green's function `log|z + √(z²−1)|`, outer branch.
    fn interval_green(z: Complex) -> f64 {
        let s = (z * z - 1.0).sqrt();
        (z + s).norm().max((z - s).norm()).ln()
    }

    #[test]
    fn escape_radius_examples() {
        let e = escape_radius(&MonomialPolynomial::power(2)).unwrap();
        assert!(e.radius <= 2.0 && e.expansion > 1.0);
        let t6 = interval_dual(6);
        let e = escape_radius(&t6).unwrap();
        assert!(e.radius <= 2.0);
        for k in 0..=50 {
            let x = -1.0 + k as f64 / 25.0;
            assert!(green_iterated(&t6, Complex::new(x, 0.0), e.radius, DEFAULT_KMAX).value < 1e-9);
        }
        assert!(escape_radius(&MonomialPolynomial::power(1)).is_err());
    }

    #[test]
    fn green_of_z_squared() {
        let p = MonomialPolynomial::power(2);
        let g = green_iterated(&p, Complex::new(4.0, 0.0), 1.1, DEFAULT_KMAX);
        assert!((g.value - 4f64.ln()).abs() < 1e-12);
        assert_eq!(green_iterated(&p, Complex::new(0.5, 0.0), 1.1, DEFAULT_KMAX).value, 0.0);
        let s = green_single_eval(&MonomialPolynomial::power(7), Complex::new(2.0, 0.0), 1.0);
        assert!((s.value - 2f64.ln()).abs() < 1e-14);
        assert!((s.error_bound - 1.0 / 7.0).abs() < 1e-15);
    }

    #[test]
    fn interval_green_iterated() {
        let t4 = interval_dual(4);
        let r = escape_radius(&t4).unwrap().radius;
        let g = green_iterated(&t4, Complex::new(2.0, 0.0), r, DEFAULT_KMAX);
        assert!((g.value - (2.0 + 3f64.sqrt()).ln()).abs() < 1e-6, "{g:?}");
        for z in [Complex::new(0.3, 0.7), Complex::new(-1.4, 0.1), Complex::new(0.0, 1.2)] {
            assert!((green_iterated(&t4, z, r, DEFAULT_KMAX).value - interval_green(z)).abs() < 1e-6);
        }
    }

    #[test]
    fn two_routes_agree_within_bound() {
        let t6 = interval_dual(6);
        let r = escape_radius(&t6).unwrap().radius;
        let m = (4.0 * r / (0.9 * 0.5)).ln();
        for k in 0..40 {
            let z = Complex::from_polar(0.2 + 0.07 * k as f64, 0.37 * k as f64);
            let a = green_iterated(&t6, z, r, DEFAULT_KMAX);
            let b = green_single_eval(&t6, z, m);
            assert!((a.value - b.value).abs() <= b.error_bound + a.error_bound);
        }
        let s = sample_set(&SetDescriptor::interval(-1.0, 1.0), 200).unwrap();
        for z in &s.points {
            assert!(green_single_eval(&t6, *z, m).value < 1e-9);
        }
    }

    #[test]
    fn functional_equation_examples() {
        let p = MonomialPolynomial::power(2);
        let pts: Vec<Complex> = (0..100).map(|k| Complex::from_polar(1.5 + 0.015 * k as f64, 0.91 * k as f64)).collect();
        assert!(functional_equation_check(&p, &pts, 1.1, DEFAULT_KMAX) <= 1e-9);
        let t6 = interval_dual(6);
        let r = escape_radius(&t6).unwrap().radius;
        let ring: Vec<Complex> = (0..100).map(|k| Complex::from_polar(2.0, 0.0628 * k as f64 + 0.01)).collect();
        assert!(functional_equation_check(&t6, &ring, r, DEFAULT_KMAX) <= 1e-6);
        let inside = [Complex::new(0.2, 0.0), Complex::new(-0.9, 0.0)];
        assert_eq!(functional_equation_check(&t6, &inside, r, DEFAULT_KMAX), 0.0);
    }

    #[test]
    fn capacity_examples() {
        assert!((capacity_from_dynamics(&MonomialPolynomial::power(7)).unwrap() - 1.0).abs() < 1e-15);
        let t6 = interval_dual(6);
        assert!((capacity_from_dynamics(&t6).unwrap() - 0.5).abs() < 1e-9);
    }

    #[test]
    fn preimage_examples() {
        let p = MonomialPolynomial::power(2);
        let mut r = preimages(&p, Complex::new(1.0, 0.0)).unwrap();
        r.sort_by(|a, b| a.re.total_cmp(&b.re));
        assert!((r[0] + 1.0).norm() < 1e-12 && (r[1] - 1.0).norm() < 1e-12);
        let r0 = preimages(&p, Complex::new(0.0, 0.0)).unwrap();
        assert_eq!(r0.len(), 2);
        assert!(r0.iter().all(|z| z.norm() < 1e-7));
        let t6 = interval_dual(6);
        let pre = Preimager::new(&t6).unwrap();
        let mut z: Vec<f64> = pre.solve(Complex::new(0.0, 0.0)).unwrap().iter().map(|z| z.re).collect();
        z.sort_by(f64::total_cmp);
        let mut expected: Vec<f64> = (1..=6).map(|k| ((2 * k - 1) as f64 * std::f64::consts::PI / 12.0).cos()).collect();
        expected.sort_by(f64::total_cmp);
        for (a, b) in z.iter().zip(&expected) {
            assert!((a - b).abs() < 1e-8);
        }
        let w = Complex::new(0.7, -1.3);
        for root in pre.solve(w).unwrap() {
            assert!((t6.eval(root) - w).norm() <= pre.tolerance(w));
        }
    }

    #[test]
    fn unit_disk_grid() {
        let region = filled_julia_grid(&MonomialPolynomial::power(2), &JuliaGridOptions::default()).unwrap();
        let boundary = region.filled_julia.boundary().points();
        let circle = sample_set(&SetDescriptor::circle(1.0), 2048).unwrap();
        let d = hausdorff_distance(&boundary, &circle.points).unwrap();
        assert!(d <= 2.0 * region.grid.cell(), "{d}");
        for (i, &e) in region.escape.iter().enumerate() {
            if e == 0 {
                assert!(region.filled_julia.cells[i]);
                assert_eq!(region.green[i], 0.0);
            }
        }
    }

    #[test]
    fn interval_grid_is_thin() {
        let t8 = interval_dual(8);
        let opts = JuliaGridOptions { resolution: 256, ..Default::default() };
        let region = filled_julia_grid(&t8, &opts).unwrap();
        let cell = region.grid.cell();
        let mut hits = 0;
        for i in 0..region.grid.len() {
            let z = region.grid.center_of(i);
            if region.filled_julia.cells[i] {
                hits += 1;
                assert!(z.im.abs() <= 2.0 * cell && z.re.abs() <= 1.0 + 2.0 * cell, "{z}");
            }
        }
        assert!(hits >= 2 * (2.0 / cell) as usize - 4);
    }

    #[test]
    fn escape_is_monotone_under_p() {
        let t6 = interval_dual(6);
        let r = escape_radius(&t6).unwrap().radius;
        let grid = Grid::new(Window::square(1.5), 96).unwrap();
        let region = filled_julia_grid_with(&t6, grid, r, DEFAULT_KMAX, false).unwrap();
        for i in (0..grid.len()).step_by(7) {
            let k = region.escape[i];
            if k > 1 {
                let z = t6.eval(grid.center_of(i));
                let o = follow(&t6, z, r, DEFAULT_KMAX, false);
                assert!(o.escape.is_some_and(|j| j as u32 + 1 < k));
            }
        }
    }
}
