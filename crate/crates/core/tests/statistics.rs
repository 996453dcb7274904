//! Seed-ensemble checks of the simulated statistics and the estimators.

use polartomo::histogram::{build_histogram, fit_gaussian, fit_residual, DEFAULT_BINS};
use polartomo::states::{derive_seed, make_state, sample_pulses, PulseRecord, StateKind, StateParams};
use polartomo::stokes::Direction;

fn mean_and_se(xs: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    let m = xs.iter().sum::<f64>() / n;
    let var = xs.iter().map(|x| (x - m).powi(2)).sum::<f64>() / (n - 1.0);
    (m, (var / n).sqrt())
}

#[test]
fn difference_variance_is_unbiased_including_both_detectors_noise() {
    let sigma_e = 2e-9;
    let state = make_state(&StateParams::new(StateKind::PhiMinus, 3e5).electronic_noise(sigma_e)).unwrap();
    let d = Direction::from_degrees(60.0, 35.0);
    let (_, var_photons) = state.projected_statistics(&d);
    let v = state.calibration.volts_per_photon;
    let expected = var_photons * v * v + 2.0 * sigma_e * sigma_e;
    let variances: Vec<f64> = (0..100)
        .map(|s| {
            let recs = sample_pulses(&state, &d, 2000, derive_seed(7, s)).unwrap();
            let diffs: Vec<f64> = recs.iter().map(PulseRecord::difference).collect();
            fit_gaussian(&diffs).unwrap().variance()
        })
        .collect();
    let (m, se) = mean_and_se(&variances);
    assert!((m - expected).abs() <= 3.0 * se, "{m} vs {expected} (se {se})");
}

#[test]
fn fitted_mean_scatter_matches_its_standard_error() {
    let n = 1000;
    let state = make_state(&StateParams::new(StateKind::PseudoCoherent, 1e4)).unwrap();
    let d = Direction::from_degrees(90.0, 0.0);
    let means: Vec<f64> = (0..200)
        .map(|s| {
            let recs = sample_pulses(&state, &d, n, derive_seed(11, s)).unwrap();
            let diffs: Vec<f64> = recs.iter().map(PulseRecord::difference).collect();
            fit_gaussian(&diffs).unwrap().mean
        })
        .collect();
    let (_, se) = mean_and_se(&means);
    let scatter = se * (means.len() as f64).sqrt();
    let expected = state.calibration.volt_seconds(1e4f64.sqrt()) / (n as f64).sqrt();
    assert!((scatter / expected - 1.0).abs() < 0.15, "{scatter} vs {expected}");
}

#[test]
fn residual_shrinks_with_sample_count() {
    let state = make_state(&StateParams::new(StateKind::PsiMinus, 1e5)).unwrap();
    let d = Direction::from_degrees(30.0, 10.0);
    let mean_residual = |n: usize| {
        (0..10)
            .map(|s| {
                let recs = sample_pulses(&state, &d, n, derive_seed(n as u64, s)).unwrap();
                let diffs: Vec<f64> = recs.iter().map(PulseRecord::difference).collect();
                let fit = fit_gaussian(&diffs).unwrap();
                fit_residual(&build_histogram(&diffs, DEFAULT_BINS).unwrap(), &fit)
            })
            .sum::<f64>()
            / 10.0
    };
    let r = [mean_residual(1_000), mean_residual(10_000), mean_residual(100_000)];
    assert!(r[0] > r[1] && r[1] > r[2], "{r:?}");
}
