//! Reconstructs an anisotropic Gaussian from exact tomograms and compares it
//! with the closed form.

use nalgebra::{Matrix3, Vector3};
use polartomo::histogram::TomogramSet;
use polartomo::radon::{analytic_volume, normalize, reconstruct, NormalizeMode, VolumeSpec};
use polartomo::stokes::{build_grid, GridSpec, StokesAxis};

fn main() -> polartomo::Result<()> {
    let cov = Matrix3::from_diagonal(&Vector3::new(1.0, 0.25, 4.0));
    let grid = build_grid(&GridSpec::standard())?;
    let set = TomogramSet::from_gaussian(&grid, &Vector3::zeros(), &cov)?.mirror_completed(StokesAxis::S2);
    let spec = VolumeSpec::new(8.0, 61)?;

    let w = normalize(&reconstruct(&set, &spec)?, NormalizeMode::PeakOne)?;
    let exact = normalize(&analytic_volume(&Vector3::zeros(), &cov, &spec)?, NormalizeMode::PeakOne)?;

    let inv = cov.try_inverse().unwrap();
    let l2 = |inside: &dyn Fn(usize) -> bool| {
        let (mut num, mut den) = (0.0, 0.0);
        for (i, (a, b)) in w.values.iter().zip(&exact.values).enumerate() {
            if inside(i) {
                num += (a - b).powi(2);
                den += b * b;
            }
        }
        100.0 * (num / den).sqrt()
    };
    let within_2_sigma = |i: usize| {
        let [x, y, z] = spec.unflatten(i);
        let p = spec.position(x, y, z);
        (p.transpose() * inv * p)[(0, 0)] <= 4.0
    };
    // streaks from the coarse 10° angular steps dominate far from the centre
    println!(
        "{} tomograms, relative L2 error {:.2}% within 2 sigma, {:.2}% over the whole box",
        set.len(),
        l2(&within_2_sigma),
        l2(&|_| true)
    );
    for x in [0.0, 0.5, 1.0, 2.0] {
        let p = Vector3::new(x, 0.0, 0.0);
        println!("W({x:.1},0,0) = {:.4}  exact {:.4}", w.interpolate(&p).unwrap(), exact.interpolate(&p).unwrap());
    }
    Ok(())
}
