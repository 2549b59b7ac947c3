//! Acceptance suite: one PASS/FAIL line per criterion.
//!
//! Reference values (Green's functions, capacities, hulls, arcsine moments)
//! are computed here from closed forms, independently of the library.

use std::f64::consts::{FRAC_PI_2, PI};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::Path;
use std::time::{Duration, Instant};

use chebjulia::brolin::{balancedness_residual, brolin_run, mass_outside, moments, random_test_functions, BrolinOptions};
use chebjulia::cli::{run_verify, RunConfig};
use chebjulia::dynamics::{green_iterated, green_single_eval};
use chebjulia::harness::{mask_distance_cells, Harness, HarnessConfig, PreimageProbe};
use chebjulia::minimax::{default_sample_count, dualize};
use chebjulia::potential::reference_potential;
use chebjulia::sets::{sample_set_with, Placement};
use chebjulia::{solve_chebyshev, ChebyshevPolynomial, Complex, Mask, SetDescriptor, SolverOptions, Window};

const SEED: u64 = 20240601;
const BROLIN_SAMPLES: usize = 100_000;

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: String) -> Outcome {
    Outcome { pass, detail }
}

/// `log|x + √(x² − 1)|` on the outer branch, for `[−1, 1]`.
fn green_interval(z: Complex) -> f64 {
    let s = (z * z - 1.0).sqrt();
    (z + s).norm().max((z - s).norm()).ln()
}

/// Exterior map of `[−t, t]` onto `|ζ| > 1`.
fn joukowski_inverse(u: Complex, t: f64) -> Complex {
    let x = u / t;
    let s = (x * x - 1.0).sqrt();
    if (x + s).norm() >= (x - s).norm() {
        x + s
    } else {
        x - s
    }
}

/// Green's function of the complement of `{e^{iθ} : |θ| ≤ α}` with pole at
/// infinity. The Cayley map `u = i(1 − z)/(1 + z)` sends the arc to
/// `[−tan(α/2), tan(α/2)]` and infinity to `−i`.
fn green_arc(z: Complex, alpha: f64) -> f64 {
    let i = Complex::new(0.0, 1.0);
    let t = (alpha / 2.0).tan();
    let zeta = joukowski_inverse(i * (1.0 - z) / (1.0 + z), t);
    let pole = joukowski_inverse(-i, t);
    ((1.0 - zeta * pole.conj()) / (zeta - pole)).norm().ln().max(0.0)
}

/// Distance to the half disk `{|z| ≤ 1, Re z ≥ 0}`, the hull of arc(π/2).
fn half_disk_distance(z: Complex) -> f64 {
    if z.re >= 0.0 {
        (z.norm() - 1.0).max(0.0)
    } else {
        (Complex::new(0.0, z.im.clamp(-1.0, 1.0)) - z).norm()
    }
}

/// `∫ x^k dω` for the arcsine law on `[−1, 1]`.
fn arcsine_moment(k: usize) -> f64 {
    if k % 2 == 1 {
        return 0.0;
    }
    let mut m = 1.0;
    for j in 0..k / 2 {
        m *= (k - j) as f64 / ((j + 1) as f64 * 4.0);
    }
    m
}

fn solve_duals(d: &SetDescriptor, degrees: &[usize], m: Option<usize>, placement: Placement) -> Vec<ChebyshevPolynomial> {
    degrees
        .iter()
        .map(|&n| {
            let s = sample_set_with(d, m.unwrap_or_else(|| default_sample_count(n)), placement).unwrap();
            dualize(&solve_chebyshev(&s, n, &SolverOptions::default()).unwrap())
        })
        .collect()
}

fn config(resolution: usize) -> HarnessConfig {
    HarnessConfig {
        window: Window::square(1.5),
        resolution,
        brolin: BrolinOptions { samples: BROLIN_SAMPLES, seed: SEED, ..Default::default() },
        ..Default::default()
    }
}

struct Fixtures {
    circle: Vec<ChebyshevPolynomial>,
    circle_time: Duration,
    interval: Vec<ChebyshevPolynomial>,
    interval_time: Duration,
    arc: Vec<ChebyshevPolynomial>,
    arc_time: Duration,
}

fn timed<T>(f: impl FnOnce() -> T) -> (T, Duration) {
    let t = Instant::now();
    let v = f();
    (v, t.elapsed())
}

fn criterion_1(fx: &Fixtures) -> Outcome {
    let start = Instant::now();
    let d = SetDescriptor::circle(1.0);
    let mut coeff_dev: f64 = 0.0;
    let mut gamma_dev: f64 = 0.0;
    for p in &fx.circle {
        let c = p.scaled_monomials().expect("low degree");
        for (k, a) in c.iter().enumerate() {
            let target = if k == p.degree { 1.0 } else { 0.0 };
            coeff_dev = coeff_dev.max((a - target).norm());
        }
        gamma_dev = gamma_dev.max((p.gamma - 1.0).abs());
    }
    let refs: Vec<&ChebyshevPolynomial> = fx.circle.iter().collect();
    let h = Harness::new(&d, &refs, config(512)).unwrap();
    let disk = Mask::from_fn(h.grid, |z| z.norm() <= 1.0);
    let mask_dev = h.regions.iter().map(|r| mask_distance_cells(&r.filled_julia, &disk).unwrap()).fold(0.0, f64::max);
    let fe = h.check_functional_equation().1.into_iter().fold(0.0, f64::max);
    FE_CIRCLE.with(|c| c.set(fe));
    let elapsed = fx.circle_time + start.elapsed();
    outcome(
        coeff_dev <= 1e-8 && gamma_dev <= 1e-10 && mask_dev <= 2.0 && elapsed.as_secs_f64() <= 30.0,
        format!(
            "max coeff dev {coeff_dev:.2e} (≤ 1e-8), max |γ_n − 1| {gamma_dev:.2e} (≤ 1e-10), mask vs disk {mask_dev:.2} cells (≤ 2), {:.1} s (≤ 30)",
            elapsed.as_secs_f64()
        ),
    )
}

thread_local! {
    static FE_CIRCLE: std::cell::Cell<f64> = const { std::cell::Cell::new(f64::NAN) };
    static FE_INTERVAL: std::cell::Cell<f64> = const { std::cell::Cell::new(f64::NAN) };
}

fn criterion_2(fx: &Fixtures) -> Outcome {
    let start = Instant::now();
    let d = SetDescriptor::interval(-1.0, 1.0);
    let gamma_dev = fx.interval.iter().map(|p| (p.gamma / 2f64.powi(p.degree as i32 - 1) - 1.0).abs()).fold(0.0, f64::max);
    let refs: Vec<&ChebyshevPolynomial> = fx.interval.iter().collect();
    let h = Harness::new(&d, &refs, config(1024)).unwrap();
    let (dx, dy) = (h.grid.dx(), h.grid.dy());
    let segment = Mask::from_fn(h.grid, |z| z.im.abs() <= 0.5 * dy && z.re.abs() <= 1.0 + 0.5 * dx);
    let mask_dev = h.regions.iter().map(|r| mask_distance_cells(&r.filled_julia, &segment).unwrap()).fold(0.0, f64::max);
    let exact = green_interval(Complex::new(2.0, 0.0));
    let z = Complex::new(2.0, 0.0);
    let mut iter_dev: f64 = 0.0;
    let mut single_dev: f64 = 0.0;
    let mut per_degree = Vec::new();
    for (p, r) in fx.interval.iter().zip(&h.radii) {
        let a = green_iterated(p, z, *r, h.config.kmax).value;
        let b = green_single_eval(p, z, h.constants.M).value;
        iter_dev = iter_dev.max((a - exact).abs());
        single_dev = single_dev.max((b - exact).abs());
        per_degree.push(format!("n={}: {:.4}/{:.4}", p.degree, a - exact, b - exact));
    }
    let fe = h.check_functional_equation().1.into_iter().fold(0.0, f64::max);
    FE_INTERVAL.with(|c| c.set(fe));
    let elapsed = fx.interval_time + start.elapsed();
    outcome(
        gamma_dev <= 1e-6 && mask_dev <= 2.0 && iter_dev <= 0.02 && single_dev <= 0.02 && elapsed.as_secs_f64() <= 120.0,
        format!(
            "max rel γ_n err {gamma_dev:.2e} (≤ 1e-6), D_H(K_n, segment) {mask_dev:.2} cells (≤ 2), g_n(2) − {exact:.6} iterated/single [{}] (≤ 0.02 both), {:.1} s (≤ 120)",
            per_degree.join(", "),
            elapsed.as_secs_f64()
        ),
    )
}

fn criterion_3(fx: &Fixtures) -> Outcome {
    let oracle = (FRAC_PI_2 / 2.0).sin();
    let lib = reference_potential(&SetDescriptor::arc(FRAC_PI_2)).unwrap().cap;
    let roots: Vec<f64> = fx.arc.iter().map(|p| p.gamma.powf(-1.0 / p.degree as f64)).collect();
    let gaps: Vec<f64> = roots.iter().map(|r| (r - oracle).abs()).collect();
    let monotone = roots.windows(2).all(|w| w[1] <= w[0]) && gaps.windows(2).all(|w| w[1] <= w[0]);
    let last = *gaps.last().unwrap();
    outcome(
        monotone && last <= 0.05 && (lib - oracle).abs() <= 1e-3,
        format!(
            "γ_n^(-1/n) = {:?}, oracle {oracle:.6} (library {lib:.6}), monotone {monotone}, final gap {last:.4} (≤ 0.05)",
            roots.iter().map(|r| format!("{r:.5}")).collect::<Vec<_>>()
        ),
    )
}

struct Green {
    pass: bool,
    detail: String,
}

fn green_bounds(h: &Harness, oracle: impl Fn(Complex) -> f64 + Sync, tol: f64) -> Green {
    use rayon::prelude::*;
    let g_ref: Vec<f64> = (0..h.grid.len()).into_par_iter().map(|k| oracle(h.grid.center_of(k))).collect();
    let mut upper = Vec::new();
    for (p, region) in h.polys.iter().zip(&h.regions) {
        let slack = h.constants.M / p.degree as f64;
        let v = region.green.iter().zip(&g_ref).map(|(g, r)| g - r - slack).fold(f64::NEG_INFINITY, f64::max);
        upper.push(v);
    }
    let (records, s) = h.check_k_containment();
    let fit = h.decay(&s);
    let upper_ok = upper.iter().all(|v| *v <= tol);
    let contained = records.iter().all(|r| r.verdict());
    let alpha_ok = fit.alpha.is_some_and(|a| (0.7..=1.3).contains(&a));
    Green {
        pass: upper_ok && contained && alpha_ok,
        detail: format!(
            "max[g_n − g − M/n] {:?} (≤ {tol}), s_n {:?} vs M/n (N0 = {}) {}, decay exponent {} (in [0.7, 1.3])",
            upper.iter().map(|v| format!("{v:.4}")).collect::<Vec<_>>(),
            s.iter().map(|v| format!("{v:.3e}")).collect::<Vec<_>>(),
            h.constants.N0,
            if contained { "ok" } else { "violated" },
            fit.alpha.map_or("undefined (some s_n = 0)".to_string(), |a| format!("{a:.3}"))
        ),
    }
}

fn main() {
    if std::env::args().any(|a| a == "--list") {
        return;
    }
    let only: Option<Vec<usize>> = std::env::args()
        .skip(1)
        .find_map(|a| a.strip_prefix("--criteria=").map(|s| s.split(',').filter_map(|x| x.trim().parse().ok()).collect()));
    // libtest flags passed by `cargo test` are ignored.
    let wanted = |k: usize| only.as_ref().is_none_or(|o| o.contains(&k));

    let circle_d = SetDescriptor::circle(1.0);
    let interval_d = SetDescriptor::interval(-1.0, 1.0);
    let arc_d = SetDescriptor::arc(FRAC_PI_2);
    let arc_degrees = [5usize, 10, 20, 40];
    let (circle, circle_time) = timed(|| solve_duals(&circle_d, &[2, 3, 4, 5, 6, 7, 8], None, Placement::Uniform));
    let (interval, interval_time) = timed(|| solve_duals(&interval_d, &[4, 8, 16], Some(2048), Placement::Chebyshev));
    let need_arc = [3, 4, 5, 6, 8, 9].iter().any(|&k| wanted(k));
    let (arc, arc_time) = if need_arc {
        timed(|| solve_duals(&arc_d, &arc_degrees, None, Placement::Uniform))
    } else {
        (Vec::new(), Duration::ZERO)
    };
    let fx = Fixtures { circle, circle_time, interval, interval_time, arc, arc_time };

    let mut results: Vec<(usize, &str, Outcome)> = Vec::new();
    let mut run = |k: usize, title: &'static str, f: &mut dyn FnMut() -> Outcome| {
        if !wanted(k) {
            return;
        }
        let o = catch_unwind(AssertUnwindSafe(f)).unwrap_or_else(|e| {
            let msg = e.downcast_ref::<String>().cloned().or_else(|| e.downcast_ref::<&str>().map(|s| s.to_string()));
            outcome(false, format!("panicked: {}", msg.unwrap_or_default()))
        });
        println!("{} criterion {k:2} {title}: {}", if o.pass { "PASS" } else { "FAIL" }, o.detail);
        results.push((k, title, o));
    };

    run(1, "circle anchor", &mut || criterion_1(&fx));
    run(2, "interval anchor", &mut || criterion_2(&fx));
    run(3, "capacity limit", &mut || criterion_3(&fx));

    // Shared arc harness at 1024² in [−1.5, 1.5]².
    let arc_start = Instant::now();
    let arc_refs: Vec<&ChebyshevPolynomial> = fx.arc.iter().collect();
    let arc_harness = if need_arc { Harness::new(&arc_d, &arc_refs, config(1024)).ok() } else { None };
    let arc_setup = arc_start.elapsed();
    let missing = || outcome(false, "arc harness could not be built".into());

    run(4, "green bounds", &mut || {
        let Some(h) = &arc_harness else { return missing() };
        let int_refs: Vec<&ChebyshevPolynomial> = fx.interval.iter().collect();
        let hi = Harness::new(&interval_d, &int_refs, config(512)).unwrap();
        let a = green_bounds(&hi, green_interval, 0.02);
        // The arc oracle vanishes on the arc and behaves like log|z| − log sin(π/4).
        let far = Complex::from_polar(1e3, 0.3);
        let tail = (green_arc(far, FRAC_PI_2) - far.norm().ln() + (PI / 4.0).sin().ln()).abs();
        let on = (0..=16)
            .map(|k| green_arc(Complex::from_polar(1.0, -FRAC_PI_2 + PI * k as f64 / 16.0), FRAC_PI_2))
            .fold(0.0, f64::max);
        assert!(tail <= 10.0 / 1e3 && on <= 1e-6, "arc oracle: tail {tail}, on arc {on}");
        let b = green_bounds(h, |z| green_arc(z, FRAC_PI_2), 0.05);
        outcome(a.pass && b.pass, format!("interval: {}; arc: {}", a.detail, b.detail))
    });

    run(5, "inclusion surrogate", &mut || {
        let Some(h) = &arc_harness else { return missing() };
        let t = Instant::now();
        let cell = h.grid.cell();
        // Upper inclusion against the exact half disk.
        let upper: Vec<f64> = h
            .regions
            .iter()
            .map(|r| r.filled_julia.points().iter().map(|z| half_disk_distance(*z)).fold(0.0, f64::max) / cell)
            .collect();
        let (_, margins) = h.check_main_theorem().unwrap();
        let lower: Vec<f64> = margins.iter().map(|m| m.1).collect();
        let trend = lower.windows(2).all(|w| w[1] <= w[0]);
        let total = fx.arc_time + arc_setup + t.elapsed();
        let pass = upper.iter().all(|u| *u <= 2.0) && trend && *lower.last().unwrap() <= 5.0 && total.as_secs_f64() <= 600.0;
        outcome(
            pass,
            format!(
                "upper {:?} cells (≤ 2 each), lower {:?} cells (non-increasing, ≤ 5 at n=40), {:.1} s (≤ 600)",
                upper.iter().map(|v| format!("{v:.2}")).collect::<Vec<_>>(),
                lower.iter().map(|v| format!("{v:.2}")).collect::<Vec<_>>(),
                total.as_secs_f64()
            ),
        )
    });

    run(6, "measure convergence", &mut || {
        let Some(h) = &arc_harness else { return missing() };
        let noise = 3.0 / (BROLIN_SAMPLES as f64).sqrt();
        let p16 = fx.interval.iter().find(|p| p.degree == 16).unwrap();
        let opts = BrolinOptions { samples: BROLIN_SAMPLES, seed: SEED + 16, ..Default::default() };
        let m = moments(&brolin_run(p16, &opts).unwrap().measure, 6);
        let moment_err = m.iter().enumerate().map(|(k, mk)| (mk - arcsine_moment(k)).norm()).fold(0.0, f64::max);
        let mut masses = Vec::new();
        let mut bounded = true;
        for p in &fx.arc {
            let opts = BrolinOptions { samples: BROLIN_SAMPLES, seed: SEED + p.degree as u64, ..Default::default() };
            let mu = brolin_run(p, &opts).unwrap().measure;
            let mass: f64 =
                mu.points.iter().zip(&mu.weights).filter(|(z, _)| half_disk_distance(**z) > 0.05).map(|(_, w)| w).sum::<f64>()
                    + 0.0;
            let lib = mass_outside(&mu, &h.hull, 0.05).unwrap();
            assert!((mass - lib).abs() <= 1e-3, "hull mass {mass} vs {lib}");
            bounded &= mass <= h.constants.M / p.degree as f64 + noise;
            masses.push(mass);
        }
        let decreasing = masses.windows(2).all(|w| w[1] <= w[0]);
        outcome(
            moment_err <= 0.02 && bounded && decreasing,
            format!(
                "interval n=16 max moment err {moment_err:.4} (≤ 0.02); arc mass outside Co+0.05 {:?} (≤ M/n + {noise:.4}: {bounded}, decreasing: {decreasing})",
                masses.iter().map(|v| format!("{v:.4}")).collect::<Vec<_>>()
            ),
        )
    });

    run(7, "balanced measure", &mut || {
        let p8 = fx.interval.iter().find(|p| p.degree == 8).unwrap();
        let opts = BrolinOptions { samples: BROLIN_SAMPLES, seed: SEED + 8, ..Default::default() };
        let mu = brolin_run(p8, &opts).unwrap().measure;
        let fs = random_test_functions(20, SEED);
        let r = balancedness_residual(p8, &mu, &fs).unwrap();
        let bound = 5.0 / (BROLIN_SAMPLES as f64).sqrt();
        outcome(r <= bound, format!("residual {r:.3e} (≤ {bound:.3e})"))
    });

    run(8, "preimage bound", &mut || {
        let Some(h) = &arc_harness else { return missing() };
        let probe = PreimageProbe { center: Complex::new(-1.2, 0.0), radius: 0.2, target_radius: None };
        let (_, counts) = h.check_preimage_bound(&probe).unwrap();
        let ok = counts.windows(2).all(|w| w[1] <= w[0]);
        outcome(ok, format!("max preimage counts in V over n = {arc_degrees:?}: {counts:?} (non-increasing)"))
    });

    run(9, "functional equation", &mut || {
        let Some(h) = &arc_harness else { return missing() };
        let arc_fe = h.check_functional_equation().1.into_iter().fold(0.0, f64::max);
        let (c, i) = (FE_CIRCLE.with(|c| c.get()), FE_INTERVAL.with(|c| c.get()));
        let worst = [c, i, arc_fe].into_iter().fold(0.0, |a: f64, b| if b.is_nan() { f64::INFINITY } else { a.max(b) });
        outcome(worst <= 1e-6, format!("max residual circle {c:.2e}, interval {i:.2e}, arc {arc_fe:.2e} (≤ 1e-6)"))
    });

    run(10, "determinism", &mut || {
        let dir = tempfile::tempdir().unwrap();
        let base = RunConfig::from_json(
            r#"{"set": {"kind": "interval", "a": -1, "b": 1}, "degrees": [4, 8, 16],
                "grid": {"resolution": 128}, "brolin": {"samples": 2000}, "set_samples": 512, "seed": 11}"#,
        )
        .unwrap();
        let outs = ["a", "b"].map(|s| dir.path().join(s));
        for o in &outs {
            run_verify(&RunConfig { output: o.clone(), ..base.clone() }).unwrap();
        }
        let (same, files) = compare_dirs(&outs[0], &outs[1]);
        outcome(
            same && files.iter().any(|f| f == "report.json") && files.iter().any(|f| f.ends_with(".pgm")),
            format!("{} files compared: {same}", files.len()),
        )
    });

    let failed: Vec<usize> = results.iter().filter(|r| !r.2.pass).map(|r| r.0).collect();
    println!("acceptance: {} of {} criteria pass", results.len() - failed.len(), results.len());
    if !failed.is_empty() {
        println!("failing criteria: {failed:?}");
        std::process::exit(1);
    }
}

fn compare_dirs(a: &Path, b: &Path) -> (bool, Vec<String>) {
    let mut names: Vec<String> = match std::fs::read_dir(a) {
        Ok(rd) => rd.filter_map(|e| e.ok()).map(|e| e.file_name().to_string_lossy().into_owned()).collect(),
        Err(_) => return (false, Vec::new()),
    };
    names.sort();
    let same = !names.is_empty()
        && names.iter().all(|n| std::fs::read(a.join(n)).ok() == std::fs::read(b.join(n)).ok())
        && std::fs::read_dir(b).map(|rd| rd.count()).unwrap_or(0) == names.len();
    (same, names)
}
