//! Prints the canonical Poincaré-sphere directions reached by the default
//! waveplate scan, and how many the S2 reflection adds.

use polartomo::stokes::{build_grid, waveplate_to_direction, GridSpec, WavePlateSetting};

fn main() -> polartomo::Result<()> {
    let spec = GridSpec::standard();
    let grid = build_grid(&spec)?;
    println!("{} settings -> {} distinct canonical directions", spec.settings().len(), grid.len());

    for (alpha, beta) in [(0.0, 0.0), (0.0, 22.5), (22.5, 22.5), (0.0, 45.0)] {
        let d = waveplate_to_direction(WavePlateSetting::new(alpha, beta));
        println!("alpha={alpha:5.1} beta={beta:5.1} -> theta={:6.2} phi={:7.2}", d.theta_deg(), d.phi_deg());
    }

    let completed = grid.mirror_completed(polartomo::stokes::StokesAxis::S2);
    let added = completed.entries.iter().filter(|e| e.mirrored.is_some()).count();
    println!("S2 mirror completion adds {added} directions ({} total)", completed.len());
    Ok(())
}
