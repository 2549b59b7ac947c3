//! Command-line front end: configuration, the five commands and exit codes.

use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::brolin::{brolin_run, moments, BrolinOptions};
use crate::dynamics::{escape_radius, filled_julia_grid_with, DEFAULT_KMAX};
use crate::error::{Error, Result};
use crate::harness::{Harness, HarnessConfig, PreimageProbe, Tolerances, VerificationReport};
use crate::io::{green_grid_text, julia_pgm, points_csv, write_atomic};
use crate::minimax::{default_sample_count, dualize, solve_chebyshev, ChebyshevPolynomial, SolverOptions};
use crate::sets::{sample_set_with, Grid, Placement, SetDescriptor, Window};

pub const EXIT_OK: i32 = 0;
pub const EXIT_CHECK_FAILED: i32 = 1;
pub const EXIT_USAGE: i32 = 2;
pub const EXIT_NUMERICAL: i32 = 3;

/// Environment variable capping the worker thread count.
pub const THREADS_VAR: &str = "CHEBJULIA_THREADS";

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct GridConfig {
    pub window: Window,
    pub resolution: usize,
    pub kmax: usize,
}

impl Default for GridConfig {
    fn default() -> Self {
        GridConfig { window: Window::square(1.5), resolution: 512, kmax: DEFAULT_KMAX }
    }
}

/// How `K` is sampled for the solver.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SamplingConfig {
    /// Samples per degree; `max(64n, 1024)` when absent.
    pub count: Option<usize>,
    pub placement: Placement,
}

/// One JSON document describing a run. Command-line flags override keys.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct RunConfig {
    pub set: SetDescriptor,
    pub degrees: Vec<usize>,
    pub sampling: SamplingConfig,
    pub grid: GridConfig,
    pub solver: SolverOptions,
    /// The chain seed is taken from `seed`; `brolin.seed` is ignored.
    pub brolin: BrolinOptions,
    pub output: PathBuf,
    /// Degree `n` draws from stream `seed + n`.
    pub seed: u64,
    pub moments: usize,
    pub tolerances: Option<Tolerances>,
    pub preimage: Option<PreimageProbe>,
    /// Samples of `K` used by the harness checks.
    pub set_samples: usize,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            set: SetDescriptor::circle(1.0),
            degrees: vec![2, 3, 4, 5, 6, 7, 8],
            sampling: SamplingConfig::default(),
            grid: GridConfig::default(),
            solver: SolverOptions::default(),
            brolin: BrolinOptions::default(),
            output: PathBuf::from("out"),
            seed: 0,
            moments: 6,
            tolerances: None,
            preimage: None,
            set_samples: 4096,
        }
    }
}

impl RunConfig {
    pub fn validate(&self) -> Result<()> {
        self.set.validate()?;
        self.grid.window.validate()?;
        self.solver.validate()?;
        if self.degrees.is_empty() {
            return Err(Error::Parameter("degree list is empty".into()));
        }
        if let Some(n) = self.degrees.iter().find(|&&n| n < 2) {
            return Err(Error::Parameter(format!("degree {n} < 2 cannot define a dynamical system")));
        }
        if self.grid.resolution < 64 {
            return Err(Error::Parameter(format!("resolution must be ≥ 64, got {}", self.grid.resolution)));
        }
        self.chain().validate()
    }

    pub fn from_json(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn chain(&self) -> BrolinOptions {
        BrolinOptions { seed: self.seed, ..self.brolin }
    }

    pub fn harness(&self) -> HarnessConfig {
        HarnessConfig {
            window: self.grid.window,
            resolution: self.grid.resolution,
            kmax: self.grid.kmax,
            set_samples: self.set_samples,
            brolin: self.chain(),
            tolerances: self.tolerances,
            preimage: self.preimage,
            ..Default::default()
        }
    }

    fn sorted_degrees(&self) -> Vec<usize> {
        let mut d = self.degrees.clone();
        d.sort_unstable();
        d.dedup();
        d
    }
}

/// Parses `5,10,20`, `2..8` (inclusive) or mixtures such as `2..4,8`.
pub fn parse_degrees(s: &str) -> Result<Vec<usize>> {
    let bad = || Error::Parameter(format!("bad degree list {s:?}"));
    let mut out = Vec::new();
    for part in s.split(',').map(str::trim).filter(|p| !p.is_empty()) {
        if let Some((a, b)) = part.split_once("..") {
            let b = b.strip_prefix('=').unwrap_or(b);
            let (a, b): (usize, usize) = (a.trim().parse().map_err(|_| bad())?, b.trim().parse().map_err(|_| bad())?);
            if a > b {
                return Err(bad());
            }
            out.extend(a..=b);
        } else {
            out.push(part.parse().map_err(|_| bad())?);
        }
    }
    if out.is_empty() {
        return Err(bad());
    }
    Ok(out)
}

#[derive(Debug, Parser)]
#[command(name = "chebjulia", version, about = "Chebyshev polynomials of planar sets and the dynamics of their duals")]
pub struct Cli {
    /// JSON run configuration.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Output directory.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    #[arg(long, global = true)]
    pub resolution: Option<usize>,
    /// Degree list or inclusive range: `5,10,20,40`, `2..8`.
    #[arg(long, global = true)]
    pub degrees: Option<String>,
    /// Set as `kind:params`, e.g. `arc:1.5708`, `interval:-1,1`, `circle:1`.
    #[arg(long, global = true, allow_hyphen_values = true)]
    pub set: Option<String>,
    /// Brolin sample count.
    #[arg(long, global = true)]
    pub samples: Option<usize>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Solve for T_n and write `cheb_n<k>.json`.
    Solve,
    /// Render `julia_n<k>.pgm`.
    Julia {
        /// Also write the Green's function grid `green_n<k>.txt`.
        #[arg(long)]
        green_grid: bool,
    },
    /// Run the harness and write `report.json`.
    Verify,
    /// Sample the Brolin measure: `brolin_n<k>.csv`, `moments_n<k>.json`.
    Measure,
    /// Re-judge and summarize an existing `report.json`.
    Report,
}

impl Cli {
    /// Config file (if any) with flags applied on top.
    pub fn resolve(&self) -> Result<RunConfig> {
        let mut c = match &self.config {
            Some(p) => RunConfig::from_json(&read_input(p)?)?,
            None => RunConfig::default(),
        };
        if let Some(o) = &self.out {
            c.output = o.clone();
        }
        if let Some(s) = self.seed {
            c.seed = s;
        }
        if let Some(r) = self.resolution {
            c.grid.resolution = r;
        }
        if let Some(d) = &self.degrees {
            c.degrees = parse_degrees(d)?;
        }
        if let Some(s) = &self.set {
            c.set = s.parse()?;
        }
        if let Some(n) = self.samples {
            c.brolin.samples = n;
        }
        c.validate()?;
        Ok(c)
    }
}

/// Exit code for an error: 2 for bad input, 3 for numerical failure.
pub fn exit_code(e: &Error) -> i32 {
    match e {
        Error::Parameter(_) | Error::Unsupported(_) | Error::Json(_) | Error::Shape(_) => EXIT_USAGE,
        _ => EXIT_NUMERICAL,
    }
}

/// Applies `CHEBJULIA_THREADS` to the global pool (once per process).
pub fn configure_threads() -> Result<()> {
    let Ok(v) = std::env::var(THREADS_VAR) else { return Ok(()) };
    let k: usize = v
        .trim()
        .parse()
        .ok()
        .filter(|&k| k > 0)
        .ok_or_else(|| Error::Parameter(format!("{THREADS_VAR} must be a positive integer, got {v:?}")))?;
    // A second initialization in the same process is harmless.
    let _ = rayon::ThreadPoolBuilder::new().num_threads(k).build_global();
    Ok(())
}

fn out_path(c: &RunConfig, name: String) -> PathBuf {
    c.output.join(name)
}

/// Solves `T_n` for one degree under the run's sampling rule.
pub fn solve_degree(c: &RunConfig, n: usize) -> Result<ChebyshevPolynomial> {
    let m = c.sampling.count.unwrap_or_else(|| default_sample_count(n));
    let s = sample_set_with(&c.set, m, c.sampling.placement)?;
    solve_chebyshev(&s, n, &c.solver)
}

/// Solves every degree in parallel, writing `cheb_n<k>.json` as each
/// finishes. Returns monic solutions in degree order.
pub fn solve_all(c: &RunConfig) -> Result<Vec<ChebyshevPolynomial>> {
    std::fs::create_dir_all(&c.output)?;
    c.sorted_degrees()
        .par_iter()
        .map(|&n| {
            let t = solve_degree(c, n)?;
            let json = serde_json::to_string_pretty(&t.to_export())?;
            write_atomic(&out_path(c, format!("cheb_n{n}.json")), json.as_bytes())?;
            Ok(t)
        })
        .collect::<Vec<Result<_>>>()
        .into_iter()
        .collect()
}

pub fn cmd_solve(c: &RunConfig) -> Result<String> {
    let ts = solve_all(c)?;
    let mut s = format!("{:>4} {:>22} {:>14} {:>11}\n", "n", "gamma_n", "gamma_n^(-1/n)", "gap");
    for t in &ts {
        s += &format!(
            "{:>4} {:>22.12e} {:>14.10} {:>11.3e}\n",
            t.degree,
            t.gamma,
            t.gamma.powf(-1.0 / t.degree as f64),
            t.certificate.gap()
        );
    }
    Ok(s)
}

pub fn cmd_julia(c: &RunConfig, green_grid: bool) -> Result<String> {
    let duals: Vec<_> = solve_all(c)?.iter().map(dualize).collect();
    let grid = Grid::new(c.grid.window, c.grid.resolution)?;
    let mut s = String::new();
    for p in &duals {
        let r = escape_radius(p)?.radius;
        let region = filled_julia_grid_with(p, grid, r, c.grid.kmax, true)?;
        write_atomic(&out_path(c, format!("julia_n{}.pgm", p.degree)), &julia_pgm(&region))?;
        if green_grid {
            write_atomic(&out_path(c, format!("green_n{}.txt", p.degree)), green_grid_text(&region).as_bytes())?;
        }
        s += &format!("n={:<4} cells={:<8} R={}\n", p.degree, region.filled_julia.count(), r);
    }
    Ok(s)
}

/// Runs the harness; also writes the Julia images it computed.
pub fn run_verify(c: &RunConfig) -> Result<VerificationReport> {
    let duals: Vec<_> = solve_all(c)?.iter().map(dualize).collect();
    let refs: Vec<&ChebyshevPolynomial> = duals.iter().collect();
    let h = Harness::new(&c.set, &refs, c.harness())?;
    for (p, region) in h.polys.iter().zip(&h.regions) {
        write_atomic(&out_path(c, format!("julia_n{}.pgm", p.degree)), &julia_pgm(region))?;
    }
    let report = h.run();
    write_atomic(&out_path(c, "report.json".into()), report.to_json()?.as_bytes())?;
    Ok(report)
}

pub fn summarize(r: &VerificationReport) -> String {
    let k = &r.constants;
    let mut s = format!("set {}  degrees {:?}\nR = {}  C = {:.6}  M = {:.6}  N0 = {}\n", r.set, r.degrees, k.R, k.C, k.M, k.N0);
    for c in &r.checks {
        let rel = match c.relation {
            crate::harness::Relation::AtMost => "<=",
            crate::harness::Relation::AtLeast => ">=",
        };
        let m = c.margin.map_or("undefined".to_string(), |m| format!("{m:.6e}"));
        s += &format!(
            "{} {:>4} {:<28} {:>14} {} {:.3e}{}\n",
            if c.pass { "PASS" } else { "FAIL" },
            c.n,
            c.name,
            m,
            rel,
            c.tolerance,
            if c.note.is_empty() { String::new() } else { format!("  ({})", c.note) }
        );
    }
    for e in &r.errors {
        s += &format!("ERROR {}: {}\n", e.check, e.message);
    }
    s += if r.recompute() { "overall: PASS\n" } else { "overall: FAIL\n" };
    s
}

#[derive(Serialize)]
struct MomentReport {
    n: usize,
    #[serde(rename = "N")]
    samples: usize,
    seed: u64,
    moments: Vec<[f64; 2]>,
    failures: usize,
}

pub fn cmd_measure(c: &RunConfig) -> Result<String> {
    let duals: Vec<_> = solve_all(c)?.iter().map(dualize).collect();
    let mut s = String::new();
    for p in &duals {
        let opts = BrolinOptions { seed: c.seed.wrapping_add(p.degree as u64), ..c.chain() };
        let run = brolin_run(p, &opts)?;
        write_atomic(&out_path(c, format!("brolin_n{}.csv", p.degree)), points_csv(&run.measure.points).as_bytes())?;
        let m = moments(&run.measure, c.moments);
        let rep = MomentReport {
            n: p.degree,
            samples: run.measure.len(),
            seed: opts.seed,
            moments: m.iter().map(|z| [z.re, z.im]).collect(),
            failures: run.failures,
        };
        write_atomic(&out_path(c, format!("moments_n{}.json", p.degree)), serde_json::to_string_pretty(&rep)?.as_bytes())?;
        s += &format!(
            "n={:<4} N={} seed={} m1={:.6} m2={:.6}\n",
            p.degree,
            rep.samples,
            opts.seed,
            m[1.min(c.moments)],
            m[2.min(c.moments)]
        );
    }
    Ok(s)
}

pub fn read_report(dir: &Path) -> Result<VerificationReport> {
    Ok(serde_json::from_str(&read_input(&dir.join("report.json"))?)?)
}

/// Unreadable inputs are usage errors, not numerical ones.
fn read_input(path: &Path) -> Result<String> {
    std::fs::read_to_string(path).map_err(|e| Error::Parameter(format!("cannot read {}: {e}", path.display())))
}

/// Parses arguments, runs the command and returns the exit code.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
        }
    };
    match run(&cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            exit_code(&e)
        }
    }
}

fn run(cli: &Cli) -> Result<i32> {
    configure_threads()?;
    if let Command::Report = cli.command {
        // Only the output directory matters here.
        let dir = match (&cli.out, &cli.config) {
            (Some(o), _) => o.clone(),
            (None, Some(p)) => RunConfig::from_json(&read_input(p)?)?.output,
            (None, None) => RunConfig::default().output,
        };
        let r = read_report(&dir)?;
        print!("{}", summarize(&r));
        return Ok(if r.recompute() { EXIT_OK } else { EXIT_CHECK_FAILED });
    }
    let c = cli.resolve()?;
    match cli.command {
        Command::Solve => print!("{}", cmd_solve(&c)?),
        Command::Julia { green_grid } => print!("{}", cmd_julia(&c, green_grid)?),
        Command::Measure => print!("{}", cmd_measure(&c)?),
        Command::Verify => {
            let r = run_verify(&c)?;
            print!("{}", summarize(&r));
            return Ok(if r.pass { EXIT_OK } else { EXIT_CHECK_FAILED });
        }
        Command::Report => unreachable!(),
    }
    Ok(EXIT_OK)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn degree_lists() {
        assert_eq!(parse_degrees("2..5").unwrap(), vec![2, 3, 4, 5]);
        assert_eq!(parse_degrees("5,10, 20,40").unwrap(), vec![5, 10, 20, 40]);
        assert_eq!(parse_degrees("2..3,8").unwrap(), vec![2, 3, 8]);
        assert_eq!(parse_degrees("6").unwrap(), vec![6]);
        for bad in ["", "a", "5..2", "1,,x"] {
            assert!(parse_degrees(bad).is_err(), "{bad}");
        }
    }

    #[test]
    fn config_round_trip() {
        let mut c = RunConfig { set: SetDescriptor::arc(1.25), degrees: vec![5, 10], seed: 7, ..Default::default() };
        c.sampling.placement = Placement::Chebyshev;
        c.tolerances = Some(Tolerances::default());
        let back = RunConfig::from_json(&c.to_json().unwrap()).unwrap();
        assert_eq!(back, c);
        let partial = RunConfig::from_json(r#"{"set": {"kind": "interval", "a": -1, "b": 1}, "degrees": [6]}"#).unwrap();
        assert_eq!(partial.grid, GridConfig::default());
    }

    #[test]
    fn flags_override_config() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("c.json");
        std::fs::write(&path, RunConfig { seed: 1, ..Default::default() }.to_json().unwrap()).unwrap();
        let cli = Cli::try_parse_from([
            "chebjulia",
            "solve",
            "--config",
            path.to_str().unwrap(),
            "--seed",
            "9",
            "--degrees",
            "3..4",
            "--set",
            "interval:-1,1",
            "--resolution",
            "128",
        ])
        .unwrap();
        let c = cli.resolve().unwrap();
        assert_eq!((c.seed, c.degrees.clone(), c.grid.resolution), (9, vec![3, 4], 128));
        assert_eq!(c.set, SetDescriptor::interval(-1.0, 1.0));
    }

    #[test]
    fn invalid_configs_are_usage_errors() {
        let bad = RunConfig { degrees: vec![1], ..Default::default() };
        assert_eq!(exit_code(&bad.validate().unwrap_err()), EXIT_USAGE);
        let bad = RunConfig { degrees: vec![], ..Default::default() };
        assert!(bad.validate().is_err());
        assert_eq!(main_with_args(["chebjulia", "solve", "--set", "blob:1"]), EXIT_USAGE);
        assert_eq!(main_with_args(["chebjulia", "nonsense"]), EXIT_USAGE);
    }

    #[test]
    fn solve_writes_exports() {
        let dir = tempfile::tempdir().unwrap();
        let c = RunConfig { degrees: vec![2, 3], output: dir.path().to_path_buf(), ..Default::default() };
        let table = cmd_solve(&c).unwrap();
        assert_eq!(table.lines().count(), 3);
        for n in [2, 3] {
            let text = std::fs::read_to_string(dir.path().join(format!("cheb_n{n}.json"))).unwrap();
            let e: crate::minimax::PolynomialExport = serde_json::from_str(&text).unwrap();
            assert!((e.gamma_n - 1.0).abs() < 1e-10);
        }
    }
}
