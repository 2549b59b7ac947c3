//! Convex hull, filled-in hull of a grid mask, Hausdorff distances and the
//! grid limit sets of a sequence of masks.

use chebjulia::sets::{convex_hull, fill_holes, hausdorff_distance, limit_sets};
use chebjulia::{sample_set, Complex, Grid, Mask, SetDescriptor, Window};

fn main() -> chebjulia::Result<()> {
    let circle = sample_set(&SetDescriptor::circle(1.0), 256)?;
    let hull = convex_hull(&circle.points)?;
    println!("Co(circle): {} vertices, distance from 2 is {:.6}", hull.vertices.len(), hull.distance(Complex::new(2.0, 0.0)));

    let grid = Grid::new(Window::square(1.5), 128)?;
    let ring = Mask::rasterize(grid, &circle.points, grid.cell());
    let filled = fill_holes(&ring)?;
    println!("ring: {} cells, polynomial hull: {} cells", ring.count(), filled.count());

    // Circles of radius 1 + 1/(4k) converge to the unit circle.
    let masks: Vec<Mask> = (1..=8)
        .map(|k| {
            let pts = sample_set(&SetDescriptor::circle(1.0 + 0.25 / k as f64), 512).unwrap().points;
            println!("k={k} D_H to unit circle {:.4}", hausdorff_distance(&pts, &circle.points).unwrap());
            Mask::rasterize(grid, &pts, 0.0)
        })
        .collect();
    let lim = limit_sets(&masks)?;
    println!("liminf {} cells, limsup {} cells", lim.liminf.count(), lim.limsup.count());
    Ok(())
}
