//! Numeric verification of the containment and convergence statements for
//! a family of dual Chebyshev polynomials `𝒯_n` of one set `K`.
//!
//! A [`Harness`] computes the filled Julia grids once, derives the constants
//! `R`, `C`, `M = log(4R/C)` and `N_0`, and then runs each check. Every check
//! produces [`CheckRecord`]s whose verdict is a pure function of the recorded
//! margin, tolerance and relation, so a report can be re-judged from its JSON.

use std::f64::consts::PI;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::brolin::{balancedness_residual, brolin_run, moments, random_test_functions, BrolinOptions};
use crate::dynamics::{
    capacity_from_dynamics, escape_radius, filled_julia_grid_with, functional_equation_check, green_iterated, Preimager,
    DEFAULT_KMAX,
};
use crate::error::{Error, Result};
use crate::minimax::{ChebyshevPolynomial, PolyMap};
use crate::potential::{discrete_equilibrium, reference_potential, EmpiricalMeasure, ReferencePotential};
use crate::sets::{
    convex_hull, fill_holes, hausdorff_distance, sample_set, Grid, GridRegion, Mask, Polygon, SampledSet, SetDescriptor, Window,
};
use crate::Complex;

/// Constants shared by all degrees of one experiment.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[allow(non_snake_case)]
pub struct HarnessConstants {
    pub R: f64,
    pub C: f64,
    pub M: f64,
    pub N0: usize,
    /// Guided-sequence constants; `a = 1`, `b = 0` for Chebyshev polynomials.
    pub a: f64,
    pub b: f64,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Relation {
    /// Pass when `margin ≤ tolerance`.
    AtMost,
    /// Pass when `margin ≥ tolerance`.
    AtLeast,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CheckRecord {
    pub name: String,
    pub n: usize,
    /// `None` when the quantity is undefined (recorded as a failure).
    pub margin: Option<f64>,
    pub tolerance: f64,
    pub relation: Relation,
    pub pass: bool,
    #[serde(default, skip_serializing_if = "String::is_empty")]
    pub note: String,
}

impl CheckRecord {
    pub fn new(name: &str, n: usize, margin: f64, tolerance: f64, relation: Relation) -> Self {
        let margin = margin.is_finite().then_some(margin);
        let mut r = CheckRecord { name: name.into(), n, margin, tolerance, relation, pass: false, note: String::new() };
        r.pass = r.verdict();
        r
    }

    pub fn with_note(mut self, note: impl Into<String>) -> Self {
        self.note = note.into();
        self
    }

    /// Verdict recomputed from margin, tolerance and relation.
    pub fn verdict(&self) -> bool {
        match (self.margin, self.relation) {
            (Some(m), Relation::AtMost) => m <= self.tolerance,
            (Some(m), Relation::AtLeast) => m >= self.tolerance,
            (None, _) => false,
        }
    }
}

/// Tolerances of every check; all default to the acceptance values.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct Tolerances {
    /// Guided margin must be `≥ −guided`.
    pub guided: f64,
    /// Grid truncation allowance in `g_n ≤ g_Ω + M/n`.
    pub green_upper: f64,
    /// Upper inclusion `K_n ⊂ Co(K)`, in cells.
    pub upper_cells: f64,
    /// Lower-inclusion semidistance at the largest degree, in cells.
    pub lower_final_cells: f64,
    /// Moment error at the largest degree.
    pub moment_error: f64,
    /// Distance from the hull defining "outside" for the mass check.
    pub hull_delta: f64,
    pub functional_equation: f64,
    /// Dilation of the Julia mask used for the support check, in cells.
    pub support_cells: usize,
}

impl Default for Tolerances {
    fn default() -> Self {
        Tolerances {
            guided: 0.05,
            green_upper: 0.02,
            upper_cells: 2.0,
            lower_final_cells: 5.0,
            moment_error: 0.05,
            hull_delta: 0.05,
            functional_equation: 1e-6,
            support_cells: 2,
        }
    }
}

impl Tolerances {
    /// Defaults, with the wider oracle allowance for sets whose reference
    /// potential comes from discrete charges.
    pub fn for_set(d: &SetDescriptor) -> Self {
        let base = Tolerances::default();
        match d {
            SetDescriptor::Circle { .. } | SetDescriptor::Interval { .. } => base,
            _ => Tolerances { green_upper: 0.05, ..base },
        }
    }
}

/// Disk `V` avoiding `Po(K)` and the radius of the target disk `|w| ≤ R_w`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct PreimageProbe {
    pub center: Complex,
    pub radius: f64,
    /// `None` means the harness escape radius `R`.
    pub target_radius: Option<f64>,
}

impl PreimageProbe {
    /// Default disk for each analytic family.
    pub fn for_set(d: &SetDescriptor) -> Option<Self> {
        match d {
            SetDescriptor::Circle { radius } => {
                Some(PreimageProbe { center: Complex::new(3.0 * radius, 0.0), radius: 0.5 * radius, target_radius: Some(1.0) })
            }
            SetDescriptor::Interval { a, b } => {
                let (mid, half) = ((a + b) / 2.0, (b - a) / 2.0);
                Some(PreimageProbe { center: Complex::new(mid, 2.0 * half), radius: 0.3 * half, target_radius: Some(2.0) })
            }
            SetDescriptor::Arc { .. } => {
                Some(PreimageProbe { center: Complex::new(-1.2, 0.0), radius: 0.2, target_radius: None })
            }
            _ => None,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct HarnessConfig {
    pub window: Window,
    pub resolution: usize,
    pub kmax: usize,
    /// Samples of `K` used by the containment and inclusion checks.
    pub set_samples: usize,
    /// Chain options; degree `n` uses seed `brolin.seed + n`.
    pub brolin: BrolinOptions,
    pub test_functions: usize,
    pub guided_probes: usize,
    pub functional_probes: usize,
    pub preimage_probes: usize,
    /// Defaults per descriptor when absent.
    pub tolerances: Option<Tolerances>,
    pub preimage: Option<PreimageProbe>,
    /// Skip the Brolin-measure checks.
    pub skip_measure: bool,
}

impl Default for HarnessConfig {
    fn default() -> Self {
        HarnessConfig {
            window: Window::square(1.5),
            resolution: 512,
            kmax: DEFAULT_KMAX,
            set_samples: 4096,
            brolin: BrolinOptions::default(),
            test_functions: 20,
            guided_probes: 200,
            functional_probes: 100,
            preimage_probes: 64,
            tolerances: None,
            preimage: None,
            skip_measure: false,
        }
    }
}

/// Per-degree measured quantities; absent when the check did not run.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct DegreeMeasurements {
    pub n: usize,
    pub gamma: f64,
    pub capacity: f64,
    pub escape_radius: f64,
    pub green_upper: Option<f64>,
    pub k_sup_green: Option<f64>,
    pub upper_cells: Option<f64>,
    pub lower_cells: Option<f64>,
    pub moment_error: Option<f64>,
    pub mass_outside: Option<f64>,
    pub balancedness: Option<f64>,
    pub sampling_failures: Option<usize>,
    pub preimage_count: Option<usize>,
    pub functional_residual: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ReportEnv {
    pub resolution: usize,
    pub window: Window,
    pub kmax: usize,
    pub set_samples: usize,
    pub samples: usize,
    pub burn_in: usize,
    pub seeds: Vec<u64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CheckError {
    pub check: String,
    pub message: String,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct VerificationReport {
    pub set: String,
    pub degrees: Vec<usize>,
    pub constants: HarnessConstants,
    pub tolerances: Tolerances,
    pub checks: Vec<CheckRecord>,
    pub decay: DecayFit,
    pub measurements: Vec<DegreeMeasurements>,
    pub errors: Vec<CheckError>,
    pub env: ReportEnv,
    pub pass: bool,
}

impl VerificationReport {
    /// Re-derives the overall verdict from the records.
    pub fn recompute(&self) -> bool {
        self.errors.is_empty() && self.checks.iter().all(|c| c.verdict() && c.pass == c.verdict())
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn failed(&self) -> impl Iterator<Item = &CheckRecord> {
        self.checks.iter().filter(|c| !c.pass)
    }
}

/// Experiment state: polynomials sorted by degree, their Julia grids and
/// the derived constants.
pub struct Harness<'a> {
    pub descriptor: SetDescriptor,
    pub polys: Vec<&'a ChebyshevPolynomial>,
    pub config: HarnessConfig,
    pub tolerances: Tolerances,
    pub samples: SampledSet,
    pub hull: Polygon,
    pub reference: Option<ReferencePotential>,
    pub grid: Grid,
    pub radii: Vec<f64>,
    pub regions: Vec<GridRegion>,
    pub constants: HarnessConstants,
}

fn degree_list(polys: &[&ChebyshevPolynomial]) -> Vec<usize> {
    polys.iter().map(|p| p.degree).collect()
}

/// `n` points spread over the disk `D(center, radius)` (sunflower layout).
fn disk_probes(center: Complex, radius: f64, n: usize) -> Vec<Complex> {
    let golden = PI * (3.0 - 5f64.sqrt());
    (0..n).map(|j| center + Complex::from_polar(radius * ((j as f64 + 0.5) / n as f64).sqrt(), golden * j as f64)).collect()
}

fn circle_probes(center: Complex, radius: f64, n: usize) -> Vec<Complex> {
    (0..n).map(|j| center + Complex::from_polar(radius, 2.0 * PI * (j as f64 + 0.5) / n as f64)).collect()
}

impl<'a> Harness<'a> {
    /// Computes the Julia grids of every degree and the constants.
    pub fn new(descriptor: &SetDescriptor, polys: &[&'a ChebyshevPolynomial], config: HarnessConfig) -> Result<Self> {
        descriptor.validate()?;
        if polys.len() < 2 {
            return Err(Error::Precondition("the harness needs at least two degrees".into()));
        }
        let mut polys = polys.to_vec();
        polys.sort_by_key(|p| p.degree);
        if let Some(p) = polys.iter().find(|p| !p.is_dual() || p.degree < 2) {
            return Err(Error::Parameter(format!("degree {} is not a dual polynomial of degree ≥ 2", p.degree)));
        }
        if polys.windows(2).any(|w| w[0].degree == w[1].degree) {
            return Err(Error::Parameter("repeated degree".into()));
        }
        let tolerances = config.tolerances.unwrap_or_else(|| Tolerances::for_set(descriptor));
        let samples = sample_set(descriptor, config.set_samples)?;
        let hull = convex_hull(&samples.points)?;
        let reference = reference_potential(descriptor).ok();
        let grid = Grid::new(config.window, config.resolution)?;
        let radii: Vec<f64> = polys.iter().map(|p| escape_radius(*p).map(|e| e.radius)).collect::<Result<_>>()?;
        let regions: Vec<GridRegion> = polys
            .iter()
            .zip(&radii)
            .map(|(p, r)| filled_julia_grid_with(*p, grid, *r, config.kmax, true))
            .collect::<Result<_>>()?;
        let constants = derive_constants(&polys, &radii, &regions)?;
        Ok(Harness {
            descriptor: descriptor.clone(),
            polys,
            config,
            tolerances,
            samples,
            hull,
            reference,
            grid,
            radii,
            regions,
            constants,
        })
    }

    pub fn degrees(&self) -> Vec<usize> {
        degree_list(&self.polys)
    }

    fn reference(&self) -> Result<&ReferencePotential> {
        self.reference.as_ref().ok_or_else(|| Error::Unsupported(format!("reference Green's function for {}", self.descriptor)))
    }

    /// Indices of degrees `n ≥ N_0`.
    fn tail(&self) -> impl Iterator<Item = usize> + '_ {
        (0..self.polys.len()).filter(|&i| self.polys[i].degree >= self.constants.N0)
    }

    /// Centroid of `Co(K)` and the largest sample distance from it.
    fn spread(&self) -> (Complex, f64) {
        let v = &self.hull.vertices;
        let centroid = v.iter().sum::<Complex>() / v.len() as f64;
        let reach = self.samples.points.iter().map(|z| (z - centroid).norm()).fold(0.0, f64::max);
        (centroid, reach)
    }

    /// Per-degree containment records `K_n ⊂ D(R)` for `n ≥ N_0`.
    pub fn check_containment(&self) -> Vec<CheckRecord> {
        self.tail()
            .map(|i| {
                let reach = containment_reach(self.polys[i], &self.regions[i], self.constants.R);
                CheckRecord::new("constants.containment", self.polys[i].degree, reach, self.constants.R, Relation::AtMost)
            })
            .collect()
    }

    /// `min [(1/n) log⁺|𝒯_n| − (a g_Ω − b)]` over probes outside `Co(K)` at
    /// the largest degree.
    pub fn check_guided(&self) -> Result<Vec<CheckRecord>> {
        let reference = self.reference()?;
        let p = *self.polys.last().expect("two degrees");
        let (centroid, reach) = self.spread();
        let probes = circle_probes(centroid, 1.25 * reach + 0.1, self.config.guided_probes);
        let n = p.degree as f64;
        let (a, b) = (self.constants.a, self.constants.b);
        let margin = probes
            .iter()
            .map(|z| p.eval(*z).norm().ln().max(0.0) / n - (a * reference.green(*z) - b))
            .fold(f64::INFINITY, f64::min);
        Ok(vec![CheckRecord::new("guided", p.degree, margin, -self.tolerances.guided, Relation::AtLeast)])
    }

    /// `max over grid cells of g_n − g_Ω − M/n` per degree.
    pub fn check_green_upper(&self) -> Result<(Vec<CheckRecord>, Vec<f64>)> {
        let reference = self.reference()?;
        let g_ref: Vec<f64> = (0..self.grid.len()).into_par_iter().map(|k| reference.green(self.grid.center_of(k))).collect();
        let mut out = Vec::new();
        let mut values = Vec::new();
        for (p, region) in self.polys.iter().zip(&self.regions) {
            let slack = self.constants.M / p.degree as f64;
            let v = region.green.iter().zip(&g_ref).map(|(g, r)| g - r - slack).fold(f64::NEG_INFINITY, f64::max);
            values.push(v);
            out.push(CheckRecord::new("green_upper", p.degree, v, self.tolerances.green_upper, Relation::AtMost));
        }
        Ok((out, values))
    }

    /// `s_n = max over K-samples of g_n`, required `≤ M/n` for `n ≥ N_0`.
    pub fn check_k_containment(&self) -> (Vec<CheckRecord>, Vec<f64>) {
        let s: Vec<f64> = self
            .polys
            .iter()
            .zip(&self.radii)
            .map(|(p, r)| {
                self.samples
                    .points
                    .par_iter()
                    .map(|z| green_iterated(*p, *z, *r, self.config.kmax).value)
                    .reduce(|| 0.0, f64::max)
            })
            .collect();
        let mut out = Vec::new();
        let tail: Vec<usize> = self.tail().collect();
        for &i in &tail {
            let n = self.polys[i].degree;
            out.push(CheckRecord::new("k_containment", n, s[i], self.constants.M / n as f64, Relation::AtMost));
        }
        (out, s)
    }

    /// Fits of `s_n` over `n ≥ N_0`: the `c/n` model and the free exponent.
    pub fn decay(&self, s: &[f64]) -> DecayFit {
        let pts: Vec<(f64, f64)> = self.tail().map(|i| (self.polys[i].degree as f64, s[i])).collect();
        let num: f64 = pts.iter().map(|(n, s)| s / n).sum();
        let den: f64 = pts.iter().map(|(n, _)| 1.0 / (n * n)).sum();
        let free = decay_fit(&pts);
        DecayFit { c: num / den, alpha: free.map(|f| f.0), c_free: free.map(|f| f.1) }
    }

    /// Upper inclusion `K_n ⊂ Co(K)` and the lower-inclusion trend, in cells.
    pub fn check_main_theorem(&self) -> Result<(Vec<CheckRecord>, Vec<(f64, f64)>)> {
        if self.polys.len() < 3 {
            return Err(Error::Precondition("the inclusion check needs at least three degrees".into()));
        }
        if self.config.resolution < 512 {
            return Err(Error::Precondition(format!("grid resolution {} is below 512", self.config.resolution)));
        }
        let cell = self.grid.cell();
        let mut margins = Vec::new();
        for region in &self.regions {
            let po = fill_holes(&region.filled_julia)?;
            let upper = region.filled_julia.points().par_iter().map(|z| self.hull.distance(*z)).reduce(|| 0.0, f64::max) / cell;
            let lower = self.samples.points.par_iter().map(|z| po.distance(*z)).reduce(|| 0.0, f64::max) / cell;
            margins.push((upper, lower));
        }
        let mut out = Vec::new();
        let tail: Vec<usize> = self.tail().collect();
        for &i in &tail {
            out.push(CheckRecord::new(
                "main.upper",
                self.polys[i].degree,
                margins[i].0,
                self.tolerances.upper_cells,
                Relation::AtMost,
            ));
        }
        for w in tail.windows(2) {
            let (prev, next) = (margins[w[0]].1, margins[w[1]].1);
            out.push(
                CheckRecord::new("main.lower.trend", self.polys[w[1]].degree, next - prev, 0.0, Relation::AtMost)
                    .with_note(format!("n={} to n={}", self.polys[w[0]].degree, self.polys[w[1]].degree)),
            );
        }
        if let Some(&i) = tail.last() {
            out.push(CheckRecord::new(
                "main.lower",
                self.polys[i].degree,
                margins[i].1,
                self.tolerances.lower_final_cells,
                Relation::AtMost,
            ));
        }
        Ok((out, margins))
    }

    /// Moments and hull mass of `ω̂_n`, balancedness and support.
    pub fn check_weakstar(&self) -> Result<(Vec<CheckRecord>, Vec<MeasureStats>)> {
        let kmax = 6;
        let target = match &self.reference {
            Some(r) => r.moments(kmax),
            None => moments(&discrete_equilibrium(&self.samples)?.measure, kmax),
        };
        let fs = random_test_functions(self.config.test_functions, self.config.brolin.seed);
        let mut stats = Vec::new();
        for (p, region) in self.polys.iter().zip(&self.regions) {
            let opts = BrolinOptions { seed: self.config.brolin.seed.wrapping_add(p.degree as u64), ..self.config.brolin };
            let run = brolin_run(*p, &opts)?;
            let mu = &run.measure;
            let m = moments(mu, kmax);
            let moment_error = m.iter().zip(&target).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max);
            let mass = crate::brolin::mass_outside(mu, &self.hull, self.tolerances.hull_delta)?;
            let balancedness = balancedness_residual(*p, mu, &fs)?;
            let support = region.filled_julia.dilate(self.tolerances.support_cells);
            let outside = support_escapes(mu, &support);
            stats.push(MeasureStats {
                n: p.degree,
                moment_error,
                mass_outside: mass,
                balancedness,
                outside_support: outside,
                failures: run.failures,
            });
        }
        let noise = 3.0 / (self.config.brolin.samples as f64).sqrt();
        let mut out = Vec::new();
        for (p, s) in self.polys.iter().zip(&stats) {
            let n = p.degree;
            out.push(CheckRecord::new(
                "weakstar.mass_outside",
                n,
                s.mass_outside,
                self.constants.M / n as f64 + noise,
                Relation::AtMost,
            ));
            let allowance = 5.0 / (self.config.brolin.samples as f64).sqrt();
            out.push(CheckRecord::new("weakstar.balancedness", n, s.balancedness, allowance, Relation::AtMost));
            out.push(CheckRecord::new("weakstar.support", n, s.outside_support as f64, 0.0, Relation::AtMost));
        }
        for w in stats.windows(2) {
            let note = format!("n={} to n={}, allowance 3/sqrt(N)", w[0].n, w[1].n);
            out.push(
                CheckRecord::new(
                    "weakstar.moments.trend",
                    w[1].n,
                    w[1].moment_error - w[0].moment_error,
                    noise,
                    Relation::AtMost,
                )
                .with_note(note.clone()),
            );
            out.push(
                CheckRecord::new(
                    "weakstar.mass_outside.trend",
                    w[1].n,
                    w[1].mass_outside - w[0].mass_outside,
                    noise,
                    Relation::AtMost,
                )
                .with_note(note),
            );
        }
        let last = stats.last().expect("two degrees");
        out.push(CheckRecord::new("weakstar.moments", last.n, last.moment_error, self.tolerances.moment_error, Relation::AtMost));
        Ok((out, stats))
    }

    /// Census of solutions of `𝒯_n(z) = w` inside `V` over targets `|w| ≤ R_w`.
    pub fn check_preimage_bound(&self, probe: &PreimageProbe) -> Result<(Vec<CheckRecord>, Vec<usize>)> {
        // Po(K) at grid level: rasterized samples with holes filled.
        let k_mask = Mask::rasterize(self.grid, &self.samples.points, 0.75 * self.grid.cell());
        let po = fill_holes(&k_mask)?;
        if po.distance(probe.center) <= probe.radius {
            return Err(Error::Precondition(format!("V = D({}, {}) meets the polynomial hull of K", probe.center, probe.radius)));
        }
        let rw = probe.target_radius.unwrap_or(self.constants.R);
        let targets = disk_probes(Complex::new(0.0, 0.0), rw, self.config.preimage_probes);
        let mut counts = Vec::new();
        for p in &self.polys {
            let pre = Preimager::new(*p)?;
            let per: Vec<usize> = targets
                .par_iter()
                .map(|w| Ok(pre.solve(*w)?.iter().filter(|z| (**z - probe.center).norm() <= probe.radius).count()))
                .collect::<Result<_>>()?;
            counts.push(per.into_iter().max().unwrap_or(0));
        }
        let tail: Vec<usize> = self.tail().collect();
        let out = tail
            .windows(2)
            .map(|w| {
                let (a, b) = (counts[w[0]], counts[w[1]]);
                CheckRecord::new("preimage.trend", self.polys[w[1]].degree, b as f64 - a as f64, 0.0, Relation::AtMost)
                    .with_note(format!("count {a} at n={} to {b} at n={}", self.polys[w[0]].degree, self.polys[w[1]].degree))
            })
            .collect();
        Ok((out, counts))
    }

    /// `|g(𝒯_n(z)) − n g(z)|` on escaping probes, every degree.
    pub fn check_functional_equation(&self) -> (Vec<CheckRecord>, Vec<f64>) {
        let (centroid, reach) = self.spread();
        let mut out = Vec::new();
        let mut values = Vec::new();
        for (p, r) in self.polys.iter().zip(&self.radii) {
            // Annulus outside Co(K), inside the escape disk's double.
            let inner = 1.25 * reach + 0.1;
            let outer = (2.0 * r).max(inner * 1.5);
            let probes: Vec<Complex> = disk_probes(centroid, 1.0, self.config.functional_probes)
                .into_iter()
                .map(|u| {
                    let t = u - centroid;
                    let rho = inner + (outer - inner) * t.norm();
                    centroid + Complex::from_polar(rho, t.arg())
                })
                .collect();
            let v = functional_equation_check(*p, &probes, *r, self.config.kmax);
            values.push(v);
            out.push(CheckRecord::new("functional_equation", p.degree, v, self.tolerances.functional_equation, Relation::AtMost));
        }
        (out, values)
    }

    /// Runs every applicable check; check errors are recorded, not raised.
    pub fn run(&self) -> VerificationReport {
        let mut checks = self.check_containment();
        let mut errors = Vec::new();
        let mut meas: Vec<DegreeMeasurements> = self
            .polys
            .iter()
            .zip(&self.radii)
            .map(|(p, r)| DegreeMeasurements {
                n: p.degree,
                gamma: p.gamma,
                capacity: capacity_from_dynamics(*p).unwrap_or(f64::NAN),
                escape_radius: *r,
                ..Default::default()
            })
            .collect();
        let mut record_err = |check: &str, e: Error| errors.push(CheckError { check: check.into(), message: e.to_string() });

        match self.check_guided() {
            Ok(r) => checks.extend(r),
            Err(e) => record_err("guided", e),
        }
        match self.check_green_upper() {
            Ok((r, v)) => {
                checks.extend(r);
                meas.iter_mut().zip(v).for_each(|(m, v)| m.green_upper = Some(v));
            }
            Err(e) => record_err("green_upper", e),
        }
        let (r, s) = self.check_k_containment();
        checks.extend(r);
        let decay = self.decay(&s);
        meas.iter_mut().zip(s).for_each(|(m, v)| m.k_sup_green = Some(v));
        match self.check_main_theorem() {
            Ok((r, v)) => {
                checks.extend(r);
                meas.iter_mut().zip(v).for_each(|(m, (u, l))| {
                    m.upper_cells = Some(u);
                    m.lower_cells = Some(l);
                });
            }
            Err(e) => record_err("main", e),
        }
        if !self.config.skip_measure {
            match self.check_weakstar() {
                Ok((r, v)) => {
                    checks.extend(r);
                    meas.iter_mut().zip(v).for_each(|(m, s)| {
                        m.moment_error = Some(s.moment_error);
                        m.mass_outside = Some(s.mass_outside);
                        m.balancedness = Some(s.balancedness);
                        m.sampling_failures = Some(s.failures);
                    });
                }
                Err(e) => record_err("weakstar", e),
            }
        }
        if let Some(probe) = self.config.preimage.or_else(|| PreimageProbe::for_set(&self.descriptor)) {
            match self.check_preimage_bound(&probe) {
                Ok((r, v)) => {
                    checks.extend(r);
                    meas.iter_mut().zip(v).for_each(|(m, c)| m.preimage_count = Some(c));
                }
                Err(e) => record_err("preimage", e),
            }
        }
        let (r, v) = self.check_functional_equation();
        checks.extend(r);
        meas.iter_mut().zip(v).for_each(|(m, v)| m.functional_residual = Some(v));

        checks.sort_by(|a, b| a.n.cmp(&b.n).then_with(|| a.name.cmp(&b.name)));
        errors.sort_by(|a, b| a.check.cmp(&b.check));
        let pass = errors.is_empty() && checks.iter().all(|c| c.pass);
        VerificationReport {
            set: self.descriptor.to_string(),
            degrees: self.degrees(),
            constants: self.constants,
            tolerances: self.tolerances,
            checks,
            decay,
            measurements: meas,
            errors,
            env: ReportEnv {
                resolution: self.config.resolution,
                window: self.config.window,
                kmax: self.config.kmax,
                set_samples: self.config.set_samples,
                samples: self.config.brolin.samples,
                burn_in: self.config.brolin.burn_in,
                seeds: if self.config.skip_measure {
                    Vec::new()
                } else {
                    self.polys.iter().map(|p| self.config.brolin.seed.wrapping_add(p.degree as u64)).collect()
                },
            },
            pass,
        }
    }
}

/// `s_n ≈ c/n` (least squares) and, when every `s_n > 0`, the free fit
/// `s_n ≈ c_free n^{-α}`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct DecayFit {
    pub c: f64,
    pub alpha: Option<f64>,
    pub c_free: Option<f64>,
}

/// Statistics of one Brolin sample.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct MeasureStats {
    pub n: usize,
    pub moment_error: f64,
    pub mass_outside: f64,
    pub balancedness: f64,
    /// Samples outside the dilated Julia mask (or the window).
    pub outside_support: usize,
    pub failures: usize,
}

fn support_escapes(mu: &EmpiricalMeasure, support: &Mask) -> usize {
    let g = support.grid;
    mu.points
        .iter()
        .filter(|z| match g.cell_of(**z) {
            Some((r, c)) => !support.get(r, c),
            None => true,
        })
        .count()
}

/// Largest `|z|` over the member cells (padded by half a cell diagonal), or
/// `∞` when a never-escaping cell maps outside `D̄(R)`.
fn containment_reach(p: &ChebyshevPolynomial, region: &GridRegion, radius: f64) -> f64 {
    let half = 0.5 * region.grid.dx().hypot(region.grid.dy());
    let cells = &region.filled_julia.cells;
    (0..cells.len())
        .into_par_iter()
        .filter(|&k| cells[k])
        .map(|k| {
            let z = region.grid.center_of(k);
            if region.escape[k] == 0 && p.eval(z).norm() > radius {
                f64::INFINITY
            } else {
                z.norm() + half
            }
        })
        .reduce(|| 0.0, f64::max)
}

/// Derives `R`, `C`, `M` and `N_0` and verifies containment on the grid.
fn derive_constants(polys: &[&ChebyshevPolynomial], radii: &[f64], regions: &[GridRegion]) -> Result<HarnessConstants> {
    let r = radii.iter().copied().fold(1.0, f64::max);
    let cap = polys.iter().map(|p| capacity_from_dynamics(*p)).collect::<Result<Vec<_>>>()?;
    let c = (0.9 * cap.iter().copied().fold(f64::INFINITY, f64::min)).min(1.0);
    if !(c > 0.0) {
        return Err(Error::Numerical(format!("capacity bound {c} is not positive")));
    }
    // N_0: start of the longest tail of degrees that all satisfy containment.
    let ok: Vec<bool> = polys.iter().zip(regions).map(|(p, g)| containment_reach(p, g, r) < r).collect();
    let first = (0..ok.len()).rev().take_while(|&i| ok[i]).last();
    let n0 = match first {
        Some(i) => polys[i].degree,
        None => return Err(Error::ConstantDerivation(polys.last().expect("two degrees").degree)),
    };
    Ok(HarnessConstants { R: r, C: c, M: (4.0 * r / c).ln(), N0: n0, a: 1.0, b: 0.0 })
}

/// Least-squares fit of `log s = log c − α log n`; `None` if any `s ≤ 0` or
/// fewer than two points.
pub fn decay_fit(points: &[(f64, f64)]) -> Option<(f64, f64)> {
    if points.len() < 2 || points.iter().any(|(_, s)| !(*s > 0.0)) {
        return None;
    }
    let xs: Vec<f64> = points.iter().map(|(n, _)| n.ln()).collect();
    let ys: Vec<f64> = points.iter().map(|(_, s)| s.ln()).collect();
    let k = xs.len() as f64;
    let (mx, my) = (xs.iter().sum::<f64>() / k, ys.iter().sum::<f64>() / k);
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    if sxx == 0.0 {
        return None;
    }
    let slope = sxy / sxx;
    Some((-slope, (my - slope * mx).exp()))
}

/// Hausdorff distance between the cell centres of two masks, in cells.
pub fn mask_distance_cells(a: &Mask, b: &Mask) -> Result<f64> {
    if a.grid != b.grid {
        return Err(Error::Shape(format!("{:?} vs {:?}", a.grid, b.grid)));
    }
    Ok(hausdorff_distance(&a.points(), &b.points())? / a.grid.cell())
}
