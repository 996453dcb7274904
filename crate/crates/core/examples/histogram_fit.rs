//! Fits one simulated tomogram and removes the electronic noise from it.

use polartomo::histogram::{build_histogram, deconvolve_noise, fit_gaussian, fit_residual, DEFAULT_BINS};
use polartomo::pipeline::simulate_noise;
use polartomo::states::{make_state, sample_pulses, PulseRecord, StateKind, StateParams};
use polartomo::stokes::{Direction, StokesAxis};

fn main() -> polartomo::Result<()> {
    let state = make_state(&StateParams::new(StateKind::PhiMinus, 3e5).electronic_noise(2e-9))?;
    let d = Direction::axis(StokesAxis::S2);
    let signal: Vec<f64> = sample_pulses(&state, &d, 20_000, 1)?.iter().map(PulseRecord::difference).collect();
    let noise: Vec<f64> = simulate_noise(&state, 20_000, 1)?.iter().map(PulseRecord::difference).collect();

    let measured = fit_gaussian(&signal)?;
    let electronic = fit_gaussian(&noise)?;
    let clean = deconvolve_noise(&measured, &electronic)?;
    let hist = build_histogram(&signal, DEFAULT_BINS)?;

    let truth = state.calibration.volt_seconds(state.projected_statistics(&d).1.sqrt());
    println!("measured  sigma {:.4e} V s (residual {:.3})", measured.std, fit_residual(&hist, &measured));
    println!("noise     sigma {:.4e} V s", electronic.std);
    println!("recovered sigma {:.4e} V s, truth {:.4e}", clean.std, truth);
    Ok(())
}
