//! File formats: point and measure CSV, PGM images, text grids, and atomic
//! writes.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use crate::error::{Error, Result};
use crate::potential::EmpiricalMeasure;
use crate::sets::{GridRegion, Mask};
use crate::Complex;

/// Writes `bytes` to a sibling temporary file, then renames it into place.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<()> {
    let name =
        path.file_name().ok_or_else(|| Error::Parameter(format!("not a file path: {}", path.display())))?.to_string_lossy();
    let tmp = path.with_file_name(format!(".{name}.{}.tmp", std::process::id()));
    fs::write(&tmp, bytes)?;
    if let Err(e) = fs::rename(&tmp, path) {
        let _ = fs::remove_file(&tmp);
        return Err(e.into());
    }
    Ok(())
}

/// `re,im` header, one point per row, 17 significant digits.
pub fn points_csv(points: &[Complex]) -> String {
    let mut s = String::with_capacity(48 * points.len() + 6);
    s.push_str("re,im\n");
    for z in points {
        let _ = writeln!(s, "{:.16e},{:.16e}", z.re, z.im);
    }
    s
}

/// `re,im,weight` rows.
pub fn measure_csv(mu: &EmpiricalMeasure) -> String {
    let mut s = String::with_capacity(72 * mu.len() + 13);
    s.push_str("re,im,weight\n");
    for (z, w) in mu.points.iter().zip(&mu.weights) {
        let _ = writeln!(s, "{:.16e},{:.16e},{:.16e}", z.re, z.im, w);
    }
    s
}

/// Parses `re,im` (extra columns ignored) after a header line.
pub fn parse_points_csv(text: &str) -> Result<Vec<Complex>> {
    let mut lines = text.lines();
    match lines.next() {
        Some(h) if h.trim().starts_with("re,im") => {}
        _ => return Err(Error::Parameter("CSV must start with a `re,im` header".into())),
    }
    lines
        .filter(|l| !l.trim().is_empty())
        .enumerate()
        .map(|(i, l)| {
            let mut it = l.split(',').map(|f| f.trim().parse::<f64>());
            match (it.next(), it.next()) {
                (Some(Ok(re)), Some(Ok(im))) => Ok(Complex::new(re, im)),
                _ => Err(Error::Parameter(format!("bad CSV row {}: {l}", i + 2))),
            }
        })
        .collect()
}

/// Binary PGM (P5, maxval 255).
pub fn pgm(width: usize, height: usize, pixels: &[u8]) -> Result<Vec<u8>> {
    if pixels.len() != width * height {
        return Err(Error::Shape(format!("{} pixels for a {width}×{height} image", pixels.len())));
    }
    let mut out = format!("P5\n{width} {height}\n255\n").into_bytes();
    out.extend_from_slice(pixels);
    Ok(out)
}

/// Returns `(width, height, pixels)` of a P5 image with maxval 255.
pub fn parse_pgm(bytes: &[u8]) -> Result<(usize, usize, Vec<u8>)> {
    let bad = || Error::Parameter("not a P5 PGM with maxval 255".into());
    let mut fields = Vec::new();
    let mut pos = 0;
    while fields.len() < 4 {
        while pos < bytes.len() && bytes[pos].is_ascii_whitespace() {
            pos += 1;
        }
        let start = pos;
        while pos < bytes.len() && !bytes[pos].is_ascii_whitespace() {
            pos += 1;
        }
        if start == pos {
            return Err(bad());
        }
        fields.push(std::str::from_utf8(&bytes[start..pos]).map_err(|_| bad())?.to_string());
    }
    pos += 1;
    let num = |s: &str| s.parse::<usize>().map_err(|_| bad());
    if fields[0] != "P5" || num(&fields[3])? != 255 {
        return Err(bad());
    }
    let (w, h) = (num(&fields[1])?, num(&fields[2])?);
    let data = bytes.get(pos..pos + w * h).ok_or_else(bad)?.to_vec();
    Ok((w, h, data))
}

/// Mask image: 255 for members, 0 otherwise.
pub fn mask_pgm(mask: &Mask) -> Vec<u8> {
    let n = mask.grid.resolution;
    let px: Vec<u8> = mask.cells.iter().map(|&b| if b { 255 } else { 0 }).collect();
    pgm(n, n, &px).expect("square grid")
}

/// Grey level of an escaped cell: light near `K_n`, darker as `g` grows.
pub fn shade(g: f64) -> u8 {
    let g = if g.is_finite() { g.clamp(0.0, 1.0) } else { 1.0 };
    (255 - (190.0 * g).round() as i64).max(64) as u8
}

/// Figure-style rendering: filled Julia set black, exterior shaded by `g_n`.
pub fn julia_pgm(region: &GridRegion) -> Vec<u8> {
    let n = region.grid.resolution;
    let px: Vec<u8> =
        region.filled_julia.cells.iter().zip(&region.green).map(|(&member, &g)| if member { 0 } else { shade(g) }).collect();
    pgm(n, n, &px).expect("square grid")
}

/// Text grid: `re_min re_max im_min im_max nrows ncols`, then one row of
/// `g` values per line with 9 significant digits.
pub fn green_grid_text(region: &GridRegion) -> String {
    let g = region.grid;
    let w = g.window;
    let n = g.resolution;
    let mut s = String::with_capacity(16 * n * n + 64);
    let _ = writeln!(s, "{:.8e} {:.8e} {:.8e} {:.8e} {n} {n}", w.re_min, w.re_max, w.im_min, w.im_max);
    for row in region.green.chunks(n) {
        let line: Vec<String> = row.iter().map(|v| format!("{v:.8e}")).collect();
        s.push_str(&line.join(" "));
        s.push('\n');
    }
    s
}
