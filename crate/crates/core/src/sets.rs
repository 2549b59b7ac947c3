//! Compact subsets of the plane: descriptors, finite samples, convex hulls,
//! grid masks, Hausdorff distances and finite-sequence limit sets.

use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::Complex;

/// A compact set `K` in the complex plane.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum SetDescriptor {
    /// Circle of the given radius centred at the origin.
    Circle { radius: f64 },
    /// Real segment `[a, b]`.
    Interval { a: f64, b: f64 },
    /// Unit-circle arc `{e^{iθ} : |θ| ≤ half_angle}`.
    Arc { half_angle: f64 },
    /// A finite set of points.
    PointList { points: Vec<Complex> },
    /// An open polygonal chain through the given vertices.
    Polyline { vertices: Vec<Complex> },
}

/// Placement rule for samples on intervals.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Placement {
    #[default]
    Uniform,
    /// Chebyshev–Lobatto points `cos(πk/(m-1))`, mapped to `[a, b]`.
    Chebyshev,
}

fn finite(z: &Complex) -> bool {
    z.re.is_finite() && z.im.is_finite()
}

impl SetDescriptor {
    pub fn circle(radius: f64) -> Self {
        SetDescriptor::Circle { radius }
    }

    pub fn interval(a: f64, b: f64) -> Self {
        SetDescriptor::Interval { a, b }
    }

    pub fn arc(half_angle: f64) -> Self {
        SetDescriptor::Arc { half_angle }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::Parameter(msg));
        match self {
            SetDescriptor::Circle { radius } => {
                if !(radius.is_finite() && *radius > 0.0) {
                    return bad(format!("circle radius must be positive, got {radius}"));
                }
            }
            SetDescriptor::Interval { a, b } => {
                if !(a.is_finite() && b.is_finite() && a < b) {
                    return bad(format!("interval needs a < b, got [{a}, {b}]"));
                }
            }
            SetDescriptor::Arc { half_angle } => {
                if !(*half_angle > 0.0 && *half_angle <= PI) {
                    return bad(format!("arc half-angle must lie in (0, π], got {half_angle}"));
                }
            }
            SetDescriptor::PointList { points } => {
                if points.is_empty() || !points.iter().all(finite) {
                    return bad("point list must be non-empty and finite".into());
                }
            }
            SetDescriptor::Polyline { vertices } => {
                if vertices.is_empty() || !vertices.iter().all(finite) {
                    return bad("polyline must be non-empty and finite".into());
                }
            }
        }
        Ok(())
    }

    /// True for continua with a parametrization (everything but point lists).
    pub fn is_curve(&self) -> bool {
        !matches!(self, SetDescriptor::PointList { .. })
    }

    pub fn is_conjugation_symmetric(&self) -> bool {
        match self {
            SetDescriptor::Circle { .. } | SetDescriptor::Interval { .. } | SetDescriptor::Arc { .. } => true,
            SetDescriptor::PointList { points } => points.iter().all(|p| points.iter().any(|q| (q - p.conj()).norm() <= 1e-12)),
            SetDescriptor::Polyline { .. } => false,
        }
    }

    pub fn arc_length(&self) -> f64 {
        match self {
            SetDescriptor::Circle { radius } => 2.0 * PI * radius,
            SetDescriptor::Interval { a, b } => b - a,
            SetDescriptor::Arc { half_angle } => 2.0 * half_angle,
            SetDescriptor::PointList { .. } => 0.0,
            SetDescriptor::Polyline { vertices } => vertices.windows(2).map(|w| (w[1] - w[0]).norm()).sum(),
        }
    }

    /// Point at parameter `t ∈ [0, 1]` along the curve (arc-length for
    /// polylines). Closed curves are periodic in `t`.
    pub fn point_at(&self, t: f64) -> Complex {
        match self {
            SetDescriptor::Circle { radius } => Complex::from_polar(*radius, 2.0 * PI * t),
            SetDescriptor::Interval { a, b } => Complex::new(a + (b - a) * t, 0.0),
            SetDescriptor::Arc { half_angle } => Complex::from_polar(1.0, -half_angle + 2.0 * half_angle * t),
            SetDescriptor::PointList { points } => {
                let k = ((t.clamp(0.0, 1.0)) * (points.len() - 1) as f64).round() as usize;
                points[k]
            }
            SetDescriptor::Polyline { vertices } => {
                let total = self.arc_length();
                if vertices.len() == 1 || total == 0.0 {
                    return vertices[0];
                }
                let mut s = t.clamp(0.0, 1.0) * total;
                for w in vertices.windows(2) {
                    let len = (w[1] - w[0]).norm();
                    if s <= len {
                        return if len == 0.0 { w[0] } else { w[0] + (w[1] - w[0]) * (s / len) };
                    }
                    s -= len;
                }
                *vertices.last().unwrap()
            }
        }
    }

    /// Distance from `z` to the described set. Exact for analytic kinds and
    /// polylines; for point lists it is the nearest-point distance.
    pub fn distance(&self, z: Complex) -> f64 {
        match self {
            SetDescriptor::Circle { radius } => (z.norm() - radius).abs(),
            SetDescriptor::Interval { a, b } => {
                let x = z.re.clamp(*a, *b);
                (z - Complex::new(x, 0.0)).norm()
            }
            SetDescriptor::Arc { half_angle } => {
                let theta = z.arg();
                if z.norm() > 0.0 && theta.abs() <= *half_angle {
                    (z.norm() - 1.0).abs()
                } else {
                    let e1 = Complex::from_polar(1.0, *half_angle);
                    (z - e1).norm().min((z - e1.conj()).norm())
                }
            }
            SetDescriptor::PointList { points } => points.iter().map(|p| (z - p).norm()).fold(f64::INFINITY, f64::min),
            SetDescriptor::Polyline { vertices } => {
                if vertices.len() == 1 {
                    return (z - vertices[0]).norm();
                }
                vertices.windows(2).map(|w| segment_distance(z, w[0], w[1])).fold(f64::INFINITY, f64::min)
            }
        }
    }
}

/// `--set` mini-grammar: `circle:1`, `interval:-1,1`, `arc:1.5708`,
/// `points:re,im;re,im;...`, `polyline:re,im;re,im;...`.
impl FromStr for SetDescriptor {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let (kind, params) = s.split_once(':').ok_or_else(|| Error::Parameter(format!("expected kind:params, got {s:?}")))?;
        let nums = |p: &str| -> Result<Vec<f64>> {
            p.split(',')
                .map(|x| x.trim().parse::<f64>().map_err(|_| Error::Parameter(format!("bad number {x:?} in {s:?}"))))
                .collect()
        };
        let complex_list = |p: &str| -> Result<Vec<Complex>> {
            p.split(';')
                .map(|pair| match nums(pair)?.as_slice() {
                    [re] => Ok(Complex::new(*re, 0.0)),
                    [re, im] => Ok(Complex::new(*re, *im)),
                    _ => Err(Error::Parameter(format!("bad point {pair:?}"))),
                })
                .collect()
        };
        let d = match kind.trim() {
            "circle" => match nums(params)?.as_slice() {
                [r] => SetDescriptor::circle(*r),
                _ => return Err(Error::Parameter("circle takes one radius".into())),
            },
            "interval" => match nums(params)?.as_slice() {
                [a, b] => SetDescriptor::interval(*a, *b),
                _ => return Err(Error::Parameter("interval takes a,b".into())),
            },
            "arc" => match nums(params)?.as_slice() {
                [alpha] => SetDescriptor::arc(*alpha),
                _ => return Err(Error::Parameter("arc takes one half-angle".into())),
            },
            "points" => SetDescriptor::PointList { points: complex_list(params)? },
            "polyline" => SetDescriptor::Polyline { vertices: complex_list(params)? },
            other => return Err(Error::Parameter(format!("unknown set kind {other:?}"))),
        };
        d.validate()?;
        Ok(d)
    }
}

impl fmt::Display for SetDescriptor {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let list = |pts: &[Complex]| pts.iter().map(|z| format!("{},{}", z.re, z.im)).collect::<Vec<_>>().join(";");
        match self {
            SetDescriptor::Circle { radius } => write!(f, "circle:{radius}"),
            SetDescriptor::Interval { a, b } => write!(f, "interval:{a},{b}"),
            SetDescriptor::Arc { half_angle } => write!(f, "arc:{half_angle}"),
            SetDescriptor::PointList { points } => write!(f, "points:{}", list(points)),
            SetDescriptor::Polyline { vertices } => write!(f, "polyline:{}", list(vertices)),
        }
    }
}

/// A finite sample of a compact set.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SampledSet {
    pub descriptor: SetDescriptor,
    pub points: Vec<Complex>,
    pub weights: Option<Vec<f64>>,
}

impl SampledSet {
    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    /// Largest distance from a point of the described continuum to the
    /// nearest sample, estimated on a 16× finer parameter grid.
    pub fn mesh(&self) -> f64 {
        if !self.descriptor.is_curve() {
            return 0.0;
        }
        let fine = 16 * self.points.len();
        (0..=fine)
            .map(|k| {
                let z = self.descriptor.point_at(k as f64 / fine as f64);
                self.points.iter().map(|p| (z - p).norm()).fold(f64::INFINITY, f64::min)
            })
            .fold(0.0, f64::max)
    }

    /// Adds points not already present (within 1e-14), keeping order.
    pub fn with_extra_points(&self, extra: &[Complex]) -> SampledSet {
        let mut points = self.points.clone();
        for z in extra {
            if !points.iter().any(|p| (p - z).norm() <= 1e-14) {
                points.push(*z);
            }
        }
        SampledSet { descriptor: self.descriptor.clone(), points, weights: None }
    }
}

/// Samples `m` points of the set with uniform placement.
pub fn sample_set(descriptor: &SetDescriptor, m: usize) -> Result<SampledSet> {
    sample_set_with(descriptor, m, Placement::Uniform)
}

pub fn sample_set_with(descriptor: &SetDescriptor, m: usize, placement: Placement) -> Result<SampledSet> {
    descriptor.validate()?;
    let points = match descriptor {
        SetDescriptor::PointList { points } => {
            if m < points.len() {
                return Err(Error::Parameter(format!("m = {m} is smaller than the point list ({})", points.len())));
            }
            points.clone()
        }
        SetDescriptor::Polyline { vertices } if vertices.len() == 1 => vertices.clone(),
        _ => {
            if m < 2 {
                return Err(Error::Parameter(format!("curves need m ≥ 2 samples, got {m}")));
            }
            match (descriptor, placement) {
                (SetDescriptor::Circle { radius }, _) => {
                    (0..m).map(|k| Complex::from_polar(*radius, 2.0 * PI * k as f64 / m as f64)).collect()
                }
                (SetDescriptor::Interval { a, b }, Placement::Chebyshev) => {
                    let (mid, half) = (0.5 * (a + b), 0.5 * (b - a));
                    (0..m)
                        .map(|k| {
                            // Lobatto nodes, listed from a to b; exact endpoints.
                            let x = if k == 0 {
                                *a
                            } else if k == m - 1 {
                                *b
                            } else {
                                mid - half * (PI * k as f64 / (m - 1) as f64).cos()
                            };
                            Complex::new(x, 0.0)
                        })
                        .collect()
                }
                _ => (0..m).map(|k| descriptor.point_at(k as f64 / (m - 1) as f64)).collect(),
            }
        }
    };
    Ok(SampledSet { descriptor: descriptor.clone(), points, weights: None })
}

fn cross(o: Complex, a: Complex, b: Complex) -> f64 {
    (a.re - o.re) * (b.im - o.im) - (a.im - o.im) * (b.re - o.re)
}

pub(crate) fn segment_distance(z: Complex, a: Complex, b: Complex) -> f64 {
    let ab = b - a;
    let len2 = ab.norm_sqr();
    if len2 == 0.0 {
        return (z - a).norm();
    }
    let t = (((z - a) * ab.conj()).re / len2).clamp(0.0, 1.0);
    (z - (a + ab * t)).norm()
}

/// Convex polygon with counter-clockwise vertices. One vertex is a point,
/// two vertices a segment.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Polygon {
    pub vertices: Vec<Complex>,
}

impl Polygon {
    pub fn is_degenerate(&self) -> bool {
        self.vertices.len() < 3
    }

    fn edges(&self) -> impl Iterator<Item = (Complex, Complex)> + '_ {
        let n = self.vertices.len();
        (0..n).map(move |i| (self.vertices[i], self.vertices[(i + 1) % n]))
    }

    /// Distance to the boundary.
    pub fn boundary_distance(&self, z: Complex) -> f64 {
        match self.vertices.len() {
            0 => f64::INFINITY,
            1 => (z - self.vertices[0]).norm(),
            _ => self.edges().map(|(a, b)| segment_distance(z, a, b)).fold(f64::INFINITY, f64::min),
        }
    }

    pub fn contains(&self, z: Complex) -> bool {
        if self.is_degenerate() {
            return self.boundary_distance(z) == 0.0;
        }
        self.edges().all(|(a, b)| cross(a, b, z) >= 0.0)
    }

    /// Negative inside, positive outside.
    pub fn signed_distance(&self, z: Complex) -> f64 {
        let d = self.boundary_distance(z);
        if !self.is_degenerate() && self.contains(z) {
            -d
        } else {
            d
        }
    }

    /// Distance from `z` to the closed convex region.
    pub fn distance(&self, z: Complex) -> f64 {
        self.signed_distance(z).max(0.0)
    }

    /// Regular-polygon approximation of a disk, circumscribed so that the
    /// disk lies inside.
    pub fn disk(center: Complex, radius: f64, sides: usize) -> Polygon {
        let r = radius / (PI / sides as f64).cos();
        Polygon { vertices: (0..sides).map(|k| center + Complex::from_polar(r, 2.0 * PI * k as f64 / sides as f64)).collect() }
    }
}

/// Monotone-chain convex hull of a finite point set.
pub fn convex_hull(points: &[Complex]) -> Result<Polygon> {
    if points.is_empty() {
        return Err(Error::Domain("convex hull of an empty set".into()));
    }
    let mut pts: Vec<Complex> = points.to_vec();
    pts.sort_by(|a, b| a.re.total_cmp(&b.re).then(a.im.total_cmp(&b.im)));
    pts.dedup();
    if pts.len() < 3 {
        return Ok(Polygon { vertices: pts });
    }
    let mut lower: Vec<Complex> = Vec::with_capacity(pts.len());
    for &p in &pts {
        while lower.len() >= 2 && cross(lower[lower.len() - 2], lower[lower.len() - 1], p) <= 0.0 {
            lower.pop();
        }
        lower.push(p);
    }
    let mut upper: Vec<Complex> = Vec::with_capacity(pts.len());
    for &p in pts.iter().rev() {
        while upper.len() >= 2 && cross(upper[upper.len() - 2], upper[upper.len() - 1], p) <= 0.0 {
            upper.pop();
        }
        upper.push(p);
    }
    lower.pop();
    upper.pop();
    lower.extend(upper);
    Ok(Polygon { vertices: lower })
}

/// Axis-aligned rectangle in the complex plane.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Window {
    pub re_min: f64,
    pub re_max: f64,
    pub im_min: f64,
    pub im_max: f64,
}

impl Window {
    pub fn new(re_min: f64, re_max: f64, im_min: f64, im_max: f64) -> Self {
        Window { re_min, re_max, im_min, im_max }
    }

    /// `[-h, h] × [-h, h]`.
    pub fn square(h: f64) -> Self {
        Window::new(-h, h, -h, h)
    }

    pub fn validate(&self) -> Result<()> {
        if self.re_max > self.re_min && self.im_max > self.im_min {
            Ok(())
        } else {
            Err(Error::Parameter(format!("window has no area: {self:?}")))
        }
    }

    pub fn contains(&self, z: Complex) -> bool {
        z.re >= self.re_min && z.re <= self.re_max && z.im >= self.im_min && z.im <= self.im_max
    }
}

/// A `resolution × resolution` grid of cells over a window. Row 0 is the top
/// (largest imaginary part), matching image orientation.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Grid {
    pub window: Window,
    pub resolution: usize,
}

impl Grid {
    pub fn new(window: Window, resolution: usize) -> Result<Self> {
        window.validate()?;
        if resolution < 2 {
            return Err(Error::Parameter(format!("resolution must be ≥ 2, got {resolution}")));
        }
        Ok(Grid { window, resolution })
    }

    pub fn len(&self) -> usize {
        self.resolution * self.resolution
    }

    pub fn is_empty(&self) -> bool {
        self.resolution == 0
    }

    pub fn dx(&self) -> f64 {
        (self.window.re_max - self.window.re_min) / self.resolution as f64
    }

    pub fn dy(&self) -> f64 {
        (self.window.im_max - self.window.im_min) / self.resolution as f64
    }

    /// Cell size used as the unit for grid-level tolerances.
    pub fn cell(&self) -> f64 {
        self.dx().max(self.dy())
    }

    pub fn center(&self, row: usize, col: usize) -> Complex {
        Complex::new(self.window.re_min + (col as f64 + 0.5) * self.dx(), self.window.im_max - (row as f64 + 0.5) * self.dy())
    }

    pub fn center_of(&self, index: usize) -> Complex {
        self.center(index / self.resolution, index % self.resolution)
    }

    /// Cell containing `z`, if inside the window.
    pub fn cell_of(&self, z: Complex) -> Option<(usize, usize)> {
        if !self.window.contains(z) {
            return None;
        }
        let col = ((z.re - self.window.re_min) / self.dx()).floor() as usize;
        let row = ((self.window.im_max - z.im) / self.dy()).floor() as usize;
        Some((row.min(self.resolution - 1), col.min(self.resolution - 1)))
    }
}

/// Boolean membership per grid cell, row-major.
#[derive(Clone, Debug, PartialEq)]
pub struct Mask {
    pub grid: Grid,
    pub cells: Vec<bool>,
}

impl Mask {
    pub fn empty(grid: Grid) -> Self {
        Mask { grid, cells: vec![false; grid.len()] }
    }

    pub fn from_fn(grid: Grid, f: impl Fn(Complex) -> bool + Sync) -> Self {
        let cells = (0..grid.len()).into_par_iter().map(|i| f(grid.center_of(i))).collect();
        Mask { grid, cells }
    }

    /// Cells whose centre lies within `tol` of the given point set.
    pub fn rasterize(grid: Grid, points: &[Complex], tol: f64) -> Self {
        let mut mask = Mask::empty(grid);
        for &z in points {
            if let Some((r, c)) = grid.cell_of(z) {
                mask.cells[r * grid.resolution + c] = true;
            }
        }
        if tol > 0.0 {
            let (dx, dy, n) = (grid.dx(), grid.dy(), grid.resolution as isize);
            let w = grid.window;
            for &z in points {
                let c0 = ((z.re - tol - w.re_min) / dx).floor().max(0.0) as isize;
                let c1 = (((z.re + tol - w.re_min) / dx).floor() as isize).min(n - 1);
                let r0 = ((w.im_max - z.im - tol) / dy).floor().max(0.0) as isize;
                let r1 = (((w.im_max - z.im + tol) / dy).floor() as isize).min(n - 1);
                for r in r0..=r1 {
                    for c in c0..=c1 {
                        if (grid.center(r as usize, c as usize) - z).norm() <= tol {
                            mask.cells[(r * n + c) as usize] = true;
                        }
                    }
                }
            }
        }
        mask
    }

    /// Distance from `z` to the union of the member cells as closed squares
    /// (`0` inside a member cell, `∞` for an empty mask).
    pub fn distance(&self, z: Complex) -> f64 {
        let g = self.grid;
        let (dx, dy, n) = (g.dx(), g.dy(), g.resolution as isize);
        let square = |r: isize, c: isize| {
            let ctr = g.center(r as usize, c as usize);
            let ex = ((z.re - ctr.re).abs() - 0.5 * dx).max(0.0);
            let ey = ((z.im - ctr.im).abs() - 0.5 * dy).max(0.0);
            ex.hypot(ey)
        };
        // Start from the nearest cell (clamped into the grid) and widen rings
        // until no unvisited ring can be closer.
        let c0 = (((z.re - g.window.re_min) / dx).floor() as isize).clamp(0, n - 1);
        let r0 = (((g.window.im_max - z.im) / dy).floor() as isize).clamp(0, n - 1);
        let mut best = f64::INFINITY;
        for ring in 0..n {
            let reach = (ring - 1).max(0) as f64 * dx.min(dy);
            if reach > best {
                break;
            }
            for r in (r0 - ring).max(0)..=(r0 + ring).min(n - 1) {
                let full = (r - r0).abs() == ring;
                let mut c = (c0 - ring).max(0);
                while c <= (c0 + ring).min(n - 1) {
                    if self.cells[(r * n + c) as usize] {
                        best = best.min(square(r, c));
                    }
                    c = if full || c == c0 + ring { c + 1 } else { c0 + ring };
                }
            }
        }
        best
    }

    pub fn get(&self, row: usize, col: usize) -> bool {
        self.cells[row * self.grid.resolution + col]
    }

    pub fn count(&self) -> usize {
        self.cells.iter().filter(|&&b| b).count()
    }

    pub fn is_empty(&self) -> bool {
        !self.cells.iter().any(|&b| b)
    }

    /// Centres of the member cells.
    pub fn points(&self) -> Vec<Complex> {
        self.cells.iter().enumerate().filter(|(_, &b)| b).map(|(i, _)| self.grid.center_of(i)).collect()
    }

    /// Member cells with at least one 4-neighbour outside the mask.
    pub fn boundary(&self) -> Mask {
        let n = self.grid.resolution;
        let mut out = Mask::empty(self.grid);
        for r in 0..n {
            for c in 0..n {
                if !self.get(r, c) {
                    continue;
                }
                let edge = r == 0 || c == 0 || r == n - 1 || c == n - 1;
                if edge || !self.get(r - 1, c) || !self.get(r + 1, c) || !self.get(r, c - 1) || !self.get(r, c + 1) {
                    out.cells[r * n + c] = true;
                }
            }
        }
        out
    }

    pub fn touches_boundary(&self) -> bool {
        let n = self.grid.resolution;
        (0..n).any(|k| self.get(0, k) || self.get(n - 1, k) || self.get(k, 0) || self.get(k, n - 1))
    }

    fn check_grid(&self, other: &Mask) -> Result<()> {
        if self.grid != other.grid {
            return Err(Error::Shape(format!("{:?} vs {:?}", self.grid, other.grid)));
        }
        Ok(())
    }

    pub fn union(&self, other: &Mask) -> Result<Mask> {
        self.check_grid(other)?;
        let cells = self.cells.iter().zip(&other.cells).map(|(a, b)| *a || *b).collect();
        Ok(Mask { grid: self.grid, cells })
    }

    pub fn intersection(&self, other: &Mask) -> Result<Mask> {
        self.check_grid(other)?;
        let cells = self.cells.iter().zip(&other.cells).map(|(a, b)| *a && *b).collect();
        Ok(Mask { grid: self.grid, cells })
    }

    pub fn is_subset_of(&self, other: &Mask) -> Result<bool> {
        self.check_grid(other)?;
        Ok(self.cells.iter().zip(&other.cells).all(|(a, b)| !*a || *b))
    }

    /// 8-neighbourhood dilation by `radius` cells.
    pub fn dilate(&self, radius: usize) -> Mask {
        let n = self.grid.resolution as isize;
        let rad = radius as isize;
        let mut out = Mask::empty(self.grid);
        for r in 0..n {
            for c in 0..n {
                if !self.cells[(r * n + c) as usize] {
                    continue;
                }
                for dr in -rad..=rad {
                    for dc in -rad..=rad {
                        let (rr, cc) = (r + dr, c + dc);
                        if rr >= 0 && cc >= 0 && rr < n && cc < n {
                            out.cells[(rr * n + cc) as usize] = true;
                        }
                    }
                }
            }
        }
        out
    }
}

/// Fills the bounded holes of a mask: the complement of the 4-connected
/// flood fill of non-member cells reachable from the window boundary.
pub fn fill_holes(mask: &Mask) -> Result<Mask> {
    if mask.touches_boundary() {
        return Err(Error::WindowTooSmall);
    }
    let n = mask.grid.resolution;
    let mut outside = vec![false; n * n];
    let mut stack: Vec<usize> = Vec::new();
    for k in 0..n {
        for idx in [k, (n - 1) * n + k, k * n, k * n + n - 1] {
            if !mask.cells[idx] && !outside[idx] {
                outside[idx] = true;
                stack.push(idx);
            }
        }
    }
    while let Some(idx) = stack.pop() {
        let (r, c) = (idx / n, idx % n);
        let mut visit = |j: usize| {
            if !mask.cells[j] && !outside[j] {
                outside[j] = true;
                stack.push(j);
            }
        };
        if r > 0 {
            visit(idx - n);
        }
        if r + 1 < n {
            visit(idx + n);
        }
        if c > 0 {
            visit(idx - 1);
        }
        if c + 1 < n {
            visit(idx + 1);
        }
    }
    Ok(Mask { grid: mask.grid, cells: outside.into_iter().map(|o| !o).collect() })
}

/// Per-cell escape data and membership flags over a grid.
#[derive(Clone, Debug)]
pub struct GridRegion {
    pub grid: Grid,
    /// First iteration count at which the orbit left the escape disk
    /// (`1` when the cell centre starts outside), `0` if it never did.
    pub escape: Vec<u32>,
    /// `log|p^k(z)|` at escape; `0` for cells that never escaped.
    pub log_modulus: Vec<f64>,
    /// Green's function estimate at each cell centre.
    pub green: Vec<f64>,
    pub filled_julia: Mask,
    pub convex_hull: Option<Mask>,
    pub polynomial_hull: Option<Mask>,
}

impl GridRegion {
    /// A region carrying only a membership mask (no dynamics).
    pub fn from_mask(mask: Mask) -> Self {
        let len = mask.grid.len();
        GridRegion {
            grid: mask.grid,
            escape: vec![0; len],
            log_modulus: vec![0.0; len],
            green: vec![0.0; len],
            filled_julia: mask,
            convex_hull: None,
            polynomial_hull: None,
        }
    }
}

/// Polynomial convex hull of the region's membership mask at grid level.
pub fn polynomial_hull_mask(region: &GridRegion) -> Result<GridRegion> {
    let filled = fill_holes(&region.filled_julia)?;
    let mut out = region.clone();
    out.polynomial_hull = Some(filled);
    Ok(out)
}

/// Directed Hausdorff distance `sup_{a∈A} inf_{b∈B} |a − b|`.
pub fn hausdorff_semidistance(a: &[Complex], b: &[Complex]) -> Result<f64> {
    if a.is_empty() || b.is_empty() {
        return Err(Error::Domain("Hausdorff distance of an empty set".into()));
    }
    if (a.len() as f64) * (b.len() as f64) > 1e7 {
        let index = BucketIndex::new(b);
        Ok(a.par_iter().map(|&z| index.nearest(z)).reduce(|| 0.0, f64::max))
    } else {
        Ok(a.par_iter().map(|&z| nearest_brute(z, b)).reduce(|| 0.0, f64::max))
    }
}

pub fn hausdorff_distance(a: &[Complex], b: &[Complex]) -> Result<f64> {
    Ok(hausdorff_semidistance(a, b)?.max(hausdorff_semidistance(b, a)?))
}

fn nearest_brute(z: Complex, b: &[Complex]) -> f64 {
    b.iter().map(|w| (z - w).norm()).fold(f64::INFINITY, f64::min)
}

/// Uniform bucket grid for nearest-neighbour queries. Returns the same
/// distances as the brute-force scan.
struct BucketIndex<'a> {
    points: &'a [Complex],
    origin: Complex,
    size: f64,
    dim: usize,
    buckets: Vec<Vec<usize>>,
}

impl<'a> BucketIndex<'a> {
    fn new(points: &'a [Complex]) -> Self {
        let (mut lo, mut hi) = (points[0], points[0]);
        for p in points {
            lo = Complex::new(lo.re.min(p.re), lo.im.min(p.im));
            hi = Complex::new(hi.re.max(p.re), hi.im.max(p.im));
        }
        let dim = ((points.len() as f64).sqrt().ceil() as usize).clamp(1, 2048);
        let span = (hi.re - lo.re).max(hi.im - lo.im).max(1e-300);
        let size = span / dim as f64 * (1.0 + 1e-12);
        let mut buckets = vec![Vec::new(); dim * dim];
        let mut index = BucketIndex { points, origin: lo, size, dim, buckets: Vec::new() };
        for (i, p) in points.iter().enumerate() {
            let (bx, by) = index.bucket(*p);
            buckets[by * dim + bx].push(i);
        }
        index.buckets = buckets;
        index
    }

    fn bucket(&self, z: Complex) -> (usize, usize) {
        let fx = ((z.re - self.origin.re) / self.size).floor();
        let fy = ((z.im - self.origin.im) / self.size).floor();
        let clamp = |f: f64| (f.max(0.0) as usize).min(self.dim - 1);
        (clamp(fx), clamp(fy))
    }

    fn nearest(&self, z: Complex) -> f64 {
        let (bx, by) = self.bucket(z);
        let (bx, by) = (bx as isize, by as isize);
        let mut best = f64::INFINITY;
        // Distance from z to the clamped bucket, so rings account for z outside the box.
        let outside = {
            let cx = self.origin.re + (bx as f64 + 0.5) * self.size;
            let cy = self.origin.im + (by as f64 + 0.5) * self.size;
            ((z.re - cx).abs() - 0.5 * self.size).max(0.0).hypot(((z.im - cy).abs() - 0.5 * self.size).max(0.0))
        };
        for ring in 0..=(2 * self.dim as isize) {
            if ring > 0 && outside.max((ring - 1) as f64 * self.size) > best {
                break;
            }
            for dy in -ring..=ring {
                for dx in -ring..=ring {
                    if dx.abs() != ring && dy.abs() != ring {
                        continue;
                    }
                    let (x, y) = (bx + dx, by + dy);
                    if x < 0 || y < 0 || x >= self.dim as isize || y >= self.dim as isize {
                        continue;
                    }
                    for &i in &self.buckets[y as usize * self.dim + x as usize] {
                        best = best.min((z - self.points[i]).norm());
                    }
                }
            }
        }
        best
    }
}

/// Grid-level surrogates for the liminf and limsup of a set sequence.
#[derive(Clone, Debug)]
pub struct LimitSets {
    pub liminf: Mask,
    pub limsup: Mask,
}

/// Finite-sequence limit sets over the tail (last half) of `masks`:
/// `limsup` is the union of the tail masks; `liminf` keeps the cells of
/// that union which lie within one cell of every tail mask.
pub fn limit_sets(masks: &[Mask]) -> Result<LimitSets> {
    if masks.len() < 2 {
        return Err(Error::Domain("limit sets need at least two masks".into()));
    }
    let grid = masks[0].grid;
    if let Some(m) = masks.iter().find(|m| m.grid != grid) {
        return Err(Error::Shape(format!("{:?} vs {:?}", m.grid, grid)));
    }
    let tail = &masks[masks.len() / 2..];
    let mut limsup = Mask::empty(grid);
    for m in tail {
        limsup = limsup.union(m)?;
    }
    let mut liminf = limsup.clone();
    for m in tail {
        liminf = liminf.intersection(&m.dilate(1))?;
    }
    Ok(LimitSets { liminf, limsup })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex {
        Complex::new(re, im)
    }

    #[test]
    fn circle_samples_start_at_one() {
        let s = sample_set(&SetDescriptor::circle(1.0), 4).unwrap();
        let expected = [c(1.0, 0.0), c(0.0, 1.0), c(-1.0, 0.0), c(0.0, -1.0)];
        for (p, e) in s.points.iter().zip(expected) {
            assert!((p - e).norm() < 1e-15);
        }
    }

    #[test]
    fn interval_uniform_three_points() {
        let s = sample_set(&SetDescriptor::interval(-1.0, 1.0), 3).unwrap();
        assert_eq!(s.points, vec![c(-1.0, 0.0), c(0.0, 0.0), c(1.0, 0.0)]);
    }

    #[test]
    fn arc_samples_are_on_the_arc_and_equally_spaced() {
        let d = SetDescriptor::arc(PI / 2.0);
        let s = sample_set(&d, 4097).unwrap();
        assert_eq!(s.len(), 4097);
        assert!((s.points[0] - c(0.0, -1.0)).norm() < 1e-15);
        assert!((s.points[4096] - c(0.0, 1.0)).norm() < 1e-15);
        for (k, p) in s.points.iter().enumerate() {
            let theta = -PI / 2.0 + PI * k as f64 / 4096.0;
            assert!((p.arg() - theta).abs() < 1e-12);
            assert!(d.distance(*p) < 1e-12);
        }
    }

    #[test]
    fn mesh_bound_holds_for_curves() {
        for d in [
            SetDescriptor::circle(2.0),
            SetDescriptor::interval(-1.0, 3.0),
            SetDescriptor::arc(1.0),
            SetDescriptor::Polyline { vertices: vec![c(0.0, 0.0), c(1.0, 0.0), c(1.0, 2.0)] },
        ] {
            let m = 101;
            let s = sample_set(&d, m).unwrap();
            assert!(s.mesh() <= d.arc_length() / (m - 1) as f64 * 1.01, "{d}");
        }
    }

    #[test]
    fn invalid_descriptors_are_rejected() {
        assert!(sample_set(&SetDescriptor::circle(0.0), 10).is_err());
        assert!(sample_set(&SetDescriptor::interval(1.0, -1.0), 10).is_err());
        assert!(sample_set(&SetDescriptor::arc(4.0), 10).is_err());
        assert!(sample_set(&SetDescriptor::PointList { points: vec![] }, 10).is_err());
        assert!(sample_set(&SetDescriptor::circle(1.0), 1).is_err());
    }

    #[test]
    fn descriptor_grammar_round_trips() {
        for s in ["circle:1", "interval:-1,1", "arc:1.5708", "points:0,0;1,0.5"] {
            let d: SetDescriptor = s.parse().unwrap();
            assert_eq!(d.to_string().parse::<SetDescriptor>().unwrap(), d);
        }
        assert!("ellipse:1".parse::<SetDescriptor>().is_err());
        assert!("arc".parse::<SetDescriptor>().is_err());
    }

    #[test]
    fn hull_of_collinear_points_is_a_segment() {
        let h = convex_hull(&[c(-1.0, 0.0), c(0.0, 0.0), c(1.0, 0.0)]).unwrap();
        assert_eq!(h.vertices, vec![c(-1.0, 0.0), c(1.0, 0.0)]);
        assert_eq!(h.distance(c(0.5, 0.0)), 0.0);
        assert!((h.distance(c(0.0, 2.0)) - 2.0).abs() < 1e-15);
    }

    #[test]
    fn hull_drops_interior_points() {
        let h = convex_hull(&[c(0.0, 0.0), c(1.0, 0.0), c(0.0, 1.0), c(0.25, 0.25)]).unwrap();
        assert_eq!(h.vertices, vec![c(0.0, 0.0), c(1.0, 0.0), c(0.0, 1.0)]);
        assert!(h.contains(c(0.25, 0.25)));
    }

    #[test]
    fn hull_of_half_circle_arc_is_the_half_disk() {
        let s = sample_set(&SetDescriptor::arc(PI / 2.0), 4097).unwrap();
        let h = convex_hull(&s.points).unwrap();
        assert!(h.vertices.contains(&s.points[0]) && h.vertices.contains(&s.points[4096]));
        for p in &s.points {
            assert!(h.signed_distance(*p) <= 1e-12);
        }
        assert!(h.contains(c(0.5, 0.0)));
        assert!(h.contains(c(1e-3, 0.9)));
        assert!(!h.contains(c(-1e-3, 0.0)));
        assert!((h.distance(c(-0.5, 0.0)) - 0.5).abs() < 1e-12);
    }

    #[test]
    fn hausdorff_examples() {
        assert_eq!(hausdorff_semidistance(&[c(0.0, 0.0)], &[c(3.0, 0.0)]).unwrap(), 3.0);
        assert_eq!(hausdorff_distance(&[c(0.0, 0.0)], &[c(3.0, 0.0)]).unwrap(), 3.0);
        let circle = sample_set(&SetDescriptor::circle(1.0), 2048).unwrap().points;
        let segment = sample_set(&SetDescriptor::interval(-1.0, 1.0), 2048).unwrap().points;
        let d = hausdorff_semidistance(&circle, &segment).unwrap();
        assert!((d - 1.0).abs() < 1e-3, "{d}");
        assert_eq!(hausdorff_distance(&circle, &circle).unwrap(), 0.0);
        assert!(hausdorff_semidistance(&[], &circle).is_err());
    }

    #[test]
    fn circle_versus_disk_cells() {
        let grid = Grid::new(Window::square(1.5), 256).unwrap();
        let disk = Mask::from_fn(grid, |z| z.norm() <= 1.0);
        let circle = sample_set(&SetDescriptor::circle(1.0), 2048).unwrap().points;
        let cells = disk.points();
        let d = hausdorff_distance(&circle, &cells).unwrap();
        assert!((d - 1.0).abs() <= grid.cell(), "{d}");
        assert!(hausdorff_semidistance(&circle, &cells).unwrap() <= grid.cell());
    }

    #[test]
    fn bucket_index_agrees_with_brute_force() {
        let a = sample_set(&SetDescriptor::arc(2.0), 4000).unwrap().points;
        let b = sample_set(&SetDescriptor::circle(0.7), 3001).unwrap().points;
        let index = BucketIndex::new(&b);
        for z in a.iter().step_by(7).chain([c(5.0, -3.0), c(0.0, 0.0)].iter()) {
            assert_eq!(index.nearest(*z), nearest_brute(*z, &b));
        }
    }

    #[test]
    fn annulus_fills_to_disk() {
        let grid = Grid::new(Window::square(2.0), 64).unwrap();
        let ring = Mask::from_fn(grid, |z| (z.norm() - 1.0).abs() <= grid.cell());
        let filled = polynomial_hull_mask(&GridRegion::from_mask(ring.clone())).unwrap();
        let po = filled.polynomial_hull.unwrap();
        let disk = Mask::from_fn(grid, |z| z.norm() <= 1.0 + grid.cell());
        assert_eq!(po, disk);
        assert!(ring.is_subset_of(&po).unwrap());
    }

    #[test]
    fn segment_fill_is_unchanged_and_boundary_contact_errors() {
        let grid = Grid::new(Window::square(2.0), 64).unwrap();
        let seg = Mask::from_fn(grid, |z| z.re.abs() <= 1.0 && z.im.abs() < grid.cell());
        assert_eq!(fill_holes(&seg).unwrap(), seg);
        let wide = Mask::from_fn(grid, |z| z.im.abs() < grid.cell());
        assert!(matches!(fill_holes(&wide), Err(Error::WindowTooSmall)));
    }

    #[test]
    fn diagonal_boundaries_do_not_leak() {
        // An 8-connected diamond outline still encloses its interior.
        let grid = Grid::new(Window::square(1.0), 32).unwrap();
        let mut mask = Mask::empty(grid);
        for k in 0..8 {
            for (r, c) in [(8 + k, 16 + k), (16 + k, 24 - k), (24 - k, 16 - k), (16 - k, 8 + k)] {
                mask.cells[r * 32 + c] = true;
            }
        }
        let filled = fill_holes(&mask).unwrap();
        assert!(filled.get(16, 16));
        assert!(!filled.get(2, 2));
    }

    #[test]
    fn limit_sets_of_constant_and_alternating_sequences() {
        let grid = Grid::new(Window::square(1.0), 32).unwrap();
        let a = Mask::from_fn(grid, |z| (z - c(-0.5, 0.0)).norm() < 0.2);
        let b = Mask::from_fn(grid, |z| (z - c(0.5, 0.0)).norm() < 0.2);
        let constant = limit_sets(&[a.clone(), a.clone(), a.clone()]).unwrap();
        assert_eq!(constant.liminf, a);
        assert_eq!(constant.limsup, a);
        let alt = limit_sets(&[a.clone(), b.clone(), a.clone(), b.clone()]).unwrap();
        assert!(alt.liminf.is_empty());
        assert!(a.union(&b).unwrap().is_subset_of(&alt.limsup).unwrap());
        let other = Mask::empty(Grid::new(Window::square(1.0), 16).unwrap());
        assert!(matches!(limit_sets(&[a, other]), Err(Error::Shape(_))));
    }

    fn brute_distance(mask: &Mask, z: Complex) -> f64 {
        let (dx, dy) = (mask.grid.dx(), mask.grid.dy());
        mask.points()
            .iter()
            .map(|ctr| {
                let ex = ((z.re - ctr.re).abs() - 0.5 * dx).max(0.0);
                let ey = ((z.im - ctr.im).abs() - 0.5 * dy).max(0.0);
                ex.hypot(ey)
            })
            .fold(f64::INFINITY, f64::min)
    }

    #[test]
    fn mask_distance_agrees_with_brute_force() {
        let grid = Grid::new(Window::new(-1.0, 2.0, -1.0, 1.0), 40).unwrap();
        let mask = Mask::from_fn(grid, |z| (z - c(1.2, 0.3)).norm() < 0.15 || (z.re + 0.6).abs() < 0.03);
        for k in 0..400 {
            let t = k as f64 * 0.7371;
            let z = c(0.5 + 2.2 * t.cos(), 1.4 * (1.3 * t).sin());
            let (a, b) = (mask.distance(z), brute_distance(&mask, z));
            assert!((a - b).abs() <= 1e-12, "{z}: {a} vs {b}");
        }
        for z in mask.points() {
            assert_eq!(mask.distance(z), 0.0);
        }
        assert_eq!(Mask::empty(grid).distance(c(0.0, 0.0)), f64::INFINITY);
    }

    #[test]
    fn rasterize_with_tolerance_matches_the_definition() {
        let grid = Grid::new(Window::square(1.0), 50).unwrap();
        let pts: Vec<Complex> = (0..37).map(|k| Complex::from_polar(0.7, k as f64 * 0.41) + c(0.2, -0.1)).collect();
        let tol = 0.09;
        let fast = Mask::rasterize(grid, &pts, tol);
        let slow = Mask::from_fn(grid, |z| pts.iter().any(|p| (z - p).norm() <= tol));
        let hit = Mask::rasterize(grid, &pts, 0.0);
        assert_eq!(fast, slow.union(&hit).unwrap());
        assert!(pts.iter().all(|&p| {
            let (r, col) = grid.cell_of(p).unwrap();
            hit.get(r, col)
        }));
    }
}
