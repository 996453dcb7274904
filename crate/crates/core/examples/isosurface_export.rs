//! Writes the 1/√e surface of an analytic squeezed-state QPD as PLY.

use std::path::PathBuf;

use nalgebra::{Matrix3, Vector3};
use polartomo::analysis::{extract_isosurface, INV_SQRT_E};
use polartomo::io::write_ply;
use polartomo::radon::{analytic_volume, VolumeSpec};

fn main() -> polartomo::Result<()> {
    let out = std::env::args().nth(1).map(PathBuf::from).unwrap_or_else(|| std::env::temp_dir().join("ellipsoid.ply"));
    let cov = Matrix3::from_diagonal(&Vector3::new(2.0, 0.5, 2.0));
    let volume = analytic_volume(&Vector3::zeros(), &cov, &VolumeSpec::new(6.0, 51)?)?;
    let surface = extract_isosurface(&volume, INV_SQRT_E)?;

    let semi = surface.axis_extents(&Vector3::zeros());
    println!("semi-axes {semi:.3?}, expected {:.3?}", [2f64.sqrt(), 0.5f64.sqrt(), 2f64.sqrt()]);

    // ×10 display exaggeration only touches the file
    write_ply(&out, &surface, |p| (p * 10.0).into())?;
    println!(
        "{} vertices, {} triangles -> {}",
        surface.points.len(),
        surface.triangles.as_ref().map_or(0, Vec::len),
        out.display()
    );
    Ok(())
}
