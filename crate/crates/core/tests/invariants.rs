//! Property tests for the geometric, statistical and reconstruction invariants.

use nalgebra::{Matrix3, Rotation3, Vector3};
use polartomo::analysis::{extract_isosurface, squeezing_report, volume_covariance, INV_SQRT_E};
use polartomo::histogram::{deconvolve_noise, fit_gaussian, mirror_fit, GaussianFit, TomogramSet};
use polartomo::radon::{
    analytic_volume, filtered_projection, normalize, reconstruct, unit_area_filtered_projection, AxisUnits,
    NormalizeMode, QpdVolume, VolumeSpec,
};
use polartomo::states::{make_state, Calibration, StateKind, StateParams};
use polartomo::stokes::{
    build_grid, canonicalize_direction, dop_first_order, dop_higher_order, waveplate_to_direction, Direction,
    DirectionScan, GridSpec, StokesVector, WavePlateSetting,
};
use proptest::prelude::*;

fn rotation() -> impl Strategy<Value = Rotation3<f64>> {
    (-3.2..3.2f64, -1.6..1.6f64, -3.2..3.2f64).prop_map(|(r, p, y)| Rotation3::from_euler_angles(r, p, y))
}

fn covariance() -> impl Strategy<Value = Matrix3<f64>> {
    (rotation(), 0.1..5.0f64, 0.1..5.0f64, 0.1..5.0f64).prop_map(|(r, a, b, c)| {
        let m = r.matrix();
        m * Matrix3::from_diagonal(&Vector3::new(a, b, c)) * m.transpose()
    })
}

fn standard_set(cov: &Matrix3<f64>, mean: &Vector3<f64>) -> TomogramSet {
    let grid = build_grid(&GridSpec::standard()).unwrap();
    TomogramSet::from_gaussian(&grid, mean, cov).unwrap()
}

fn rel_max_diff(a: &[f64], b: &[f64]) -> f64 {
    let scale = a.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    a.iter().zip(b).fold(0.0f64, |m, (x, y)| m.max((x - y).abs())) / scale
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    #[test]
    fn waveplate_directions_are_unit(alpha in -720.0..720.0f64, beta in -720.0..720.0f64) {
        let n = waveplate_to_direction(WavePlateSetting::new(alpha, beta)).unit_vector();
        prop_assert!((n.norm() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn canonicalization_is_idempotent_and_signed(theta in -7.0..7.0f64, phi in -20.0..20.0f64) {
        let d = Direction::new(theta, phi);
        let (c, sign) = canonicalize_direction(d);
        let (cc, sign2) = canonicalize_direction(c);
        prop_assert!(cc.approx_eq(&c));
        prop_assert_eq!(sign2.value(), 1.0);
        prop_assert!(c.theta <= std::f64::consts::FRAC_PI_2 + 1e-12);
        let diff = c.unit_vector() - d.unit_vector() * sign.value();
        prop_assert!(diff.norm() < 1e-12);
    }

    #[test]
    fn first_order_dop_is_rotation_invariant(r in rotation(), s in prop::array::uniform3(-1.0..1.0f64)) {
        let p = Vector3::from(s);
        let a = StokesVector::new(2.0, p.x, p.y, p.z);
        let q = r * p;
        let b = StokesVector::new(2.0, q.x, q.y, q.z);
        prop_assert!((dop_first_order(&a).unwrap() - dop_first_order(&b).unwrap()).abs() < 1e-12);
    }

    #[test]
    fn fit_is_affine_equivariant(
        xs in prop::collection::vec(-10.0..10.0f64, 3..60),
        a in prop_oneof![-5.0..-0.1f64, 0.1..5.0f64],
        b in -100.0..100.0f64,
    ) {
        prop_assume!(xs.iter().any(|x| (x - xs[0]).abs() > 1e-3));
        let f = fit_gaussian(&xs).unwrap();
        let ys: Vec<f64> = xs.iter().map(|x| a * x + b).collect();
        let g = fit_gaussian(&ys).unwrap();
        prop_assert!((g.mean - (a * f.mean + b)).abs() <= 1e-9 * (1.0 + g.mean.abs()));
        prop_assert!((g.std - a.abs() * f.std).abs() <= 1e-9 * g.std);
    }

    #[test]
    fn deconvolution_inverts_convolution(signal in 0.01..10.0f64, noise in 0.0..10.0f64, mu in -5.0..5.0f64) {
        let measured = GaussianFit::exact(mu, (signal * signal + noise * noise).sqrt()).unwrap();
        let noise_fit = GaussianFit { mean: 0.0, std: noise, residual: 0.0 };
        let out = deconvolve_noise(&measured, &noise_fit).unwrap();
        let back = (out.std * out.std + noise * noise).sqrt();
        prop_assert!((back - measured.std).abs() <= 1e-12 * measured.std);
    }

    #[test]
    fn mirror_fit_is_an_involution(mu in -50.0..50.0f64, sigma in 1e-3..50.0f64) {
        let f = GaussianFit::exact(mu, sigma).unwrap();
        prop_assert_eq!(mirror_fit(&mirror_fit(&f)), f);
        prop_assert_eq!(mirror_fit(&f).std, f.std);
    }

    #[test]
    fn filtered_projection_integrates_to_zero(mu in -3.0..3.0f64, sigma in 0.05..5.0f64) {
        let fit = GaussianFit::exact(mu, sigma).unwrap();
        let n = 20_000;
        let h = 20.0 * sigma / n as f64;
        let mut acc = 0.0;
        for i in 0..=n {
            let s = mu - 10.0 * sigma + i as f64 * h;
            let w = if i == 0 || i == n { 0.5 } else { 1.0 };
            acc += w * unit_area_filtered_projection(&fit, s);
        }
        prop_assert!((acc * h).abs() <= 1e-6);
    }

    #[test]
    fn constructed_states_are_psd_and_classified(
        n in 1.0..1e7f64,
        xi in 0.01..1.0f64,
        zeta in 1.0..10.0f64,
        g2 in 1.0..3.0f64,
        kind in prop::sample::select(vec![
            StateKind::PsiPlus, StateKind::PsiMinus, StateKind::PhiPlus, StateKind::PhiMinus, StateKind::PseudoCoherent,
        ]),
    ) {
        prop_assume!(xi < 0.999);
        let s = make_state(&StateParams::new(kind, n).squeezing(xi, zeta).g2(g2)).unwrap();
        prop_assert!(s.is_positive_semidefinite());
        let below = (0..3).filter(|&i| s.covariance[(i, i)] < n).count();
        let expected = match kind {
            StateKind::PsiMinus => 3,
            StateKind::PseudoCoherent => 0,
            _ => 1,
        };
        prop_assert_eq!(below, expected);
    }

    #[test]
    fn loss_is_monotone_and_fixes_coherent_noise(n in 1.0..1e6f64, e1 in 0.0..1.0f64, e2 in 0.0..1.0f64) {
        prop_assume!(e1 < e2);
        let mk = |eta| make_state(&StateParams::new(StateKind::PseudoCoherent, n).efficiency(eta)).unwrap();
        let (a, b) = (mk(e1), mk(e2));
        prop_assert!(a.mean.s0 < b.mean.s0);
        prop_assert!(a.mean.s1 < b.mean.s1);
        if e1 > 0.0 {
            prop_assert!((a.covariance[(0, 0)] / a.mean.s0 - 1.0).abs() < 1e-9);
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn second_order_dop_matches_eigenvalues(cov in covariance()) {
        let eig = nalgebra::SymmetricEigen::new(cov).eigenvalues;
        let (lo, hi) = (eig.min(), eig.max());
        let expected = (hi - lo) / (hi + lo);
        let got = dop_higher_order(|d| { let n = d.unit_vector(); (n.transpose() * cov * n)[(0, 0)] }, 2, &DirectionScan::default()).unwrap();
        prop_assert!((got - expected).abs() <= 1e-3, "{got} vs {expected}");
    }

    #[test]
    fn reconstruction_is_linear(a in covariance(), b in covariance()) {
        let spec = VolumeSpec::new(6.0, 9).unwrap();
        let sa = standard_set(&a, &Vector3::zeros());
        let sb = standard_set(&b, &Vector3::new(0.5, -0.3, 0.2));
        let mut both = sa.clone();
        both.tomograms.extend(sb.tomograms.iter().copied());
        let va = reconstruct(&sa, &spec).unwrap();
        let vb = reconstruct(&sb, &spec).unwrap();
        let vab = reconstruct(&both, &spec).unwrap();
        let sum: Vec<f64> = va.values.iter().zip(&vb.values).map(|(x, y)| x + y).collect();
        prop_assert!(rel_max_diff(&sum, &vab.values) < 1e-12);
    }

    #[test]
    fn reconstruction_permutes_with_axes(
        cov in covariance(),
        mean in prop::array::uniform3(-1.0..1.0f64),
        perm in prop::sample::select(vec![[0, 1, 2], [1, 0, 2], [0, 2, 1], [2, 1, 0], [1, 2, 0], [2, 0, 1]]),
    ) {
        let spec = VolumeSpec::new(6.0, 11).unwrap();
        let set = standard_set(&cov, &Vector3::from(mean));
        let v = reconstruct(&set, &spec).unwrap();
        let w = reconstruct(&set.permuted_axes(perm).unwrap(), &spec).unwrap();
        let n = spec.resolution;
        let mut moved = vec![0.0; v.values.len()];
        for i in 0..v.values.len() {
            let src = spec.unflatten(i);
            let mut dst = [0; 3];
            for k in 0..3 {
                dst[perm[k]] = src[k];
            }
            moved[dst[0] + n * (dst[1] + n * dst[2])] = v.values[i];
        }
        prop_assert!(rel_max_diff(&moved, &w.values) < 1e-9);
    }

    #[test]
    fn zero_mean_reconstruction_is_inversion_symmetric(cov in covariance()) {
        let spec = VolumeSpec::new(6.0, 13).unwrap();
        let v = reconstruct(&standard_set(&cov, &Vector3::zeros()), &spec).unwrap();
        let reversed: Vec<f64> = v.values.iter().rev().copied().collect();
        prop_assert!(rel_max_diff(&v.values, &reversed) < 1e-10);
    }

    #[test]
    fn isosurface_points_sit_on_the_level(cov in covariance(), f in 0.2..0.9f64) {
        let spec = VolumeSpec::new(4.0 * 5f64.sqrt(), 25).unwrap();
        let v = analytic_volume(&Vector3::zeros(), &cov, &spec).unwrap();
        let iso = extract_isosurface(&v, f).unwrap();
        for p in &iso.points {
            let value = v.interpolate(p).unwrap();
            prop_assert!((value - iso.level).abs() <= 0.01 * iso.level);
        }
    }

    #[test]
    fn moments_and_classification_ignore_peak_normalization(cov in covariance(), n in 1.0..10.0f64) {
        let spec = VolumeSpec::new(4.0 * 5f64.sqrt(), 21).unwrap();
        let v = analytic_volume(&Vector3::zeros(), &cov, &spec).unwrap();
        let p = normalize(&v, NormalizeMode::PeakOne).unwrap();
        let (a, b) = (volume_covariance(&v).unwrap(), volume_covariance(&p).unwrap());
        prop_assert!((a.covariance - b.covariance).norm() <= 1e-9 * a.covariance.norm());
        let cal = Calibration::default();
        let ra = squeezing_report(&v, n, &cal).unwrap();
        let rb = squeezing_report(&p, n, &cal).unwrap();
        prop_assert_eq!(ra.squeezed_axes, rb.squeezed_axes);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(4))]

    #[test]
    fn diagonal_gaussians_match_the_oracle(s in prop::array::uniform3(0.6..2.0f64)) {
        let cov = Matrix3::from_diagonal(&Vector3::from(s).map(|x| x * x));
        let grid = build_grid(&GridSpec::full_hemisphere()).unwrap();
        let set = TomogramSet::from_gaussian(&grid, &Vector3::zeros(), &cov).unwrap();
        let smax = s.iter().copied().fold(0.0, f64::max);
        let spec = VolumeSpec::new(4.0 * smax, 41).unwrap();
        let v = normalize(&reconstruct(&set, &spec).unwrap(), NormalizeMode::PeakOne).unwrap();
        let a = normalize(&analytic_volume(&Vector3::zeros(), &cov, &spec).unwrap(), NormalizeMode::PeakOne).unwrap();
        let (mut num, mut den) = (0.0, 0.0);
        for i in 0..spec.voxel_count() {
            let [x, y, z] = spec.unflatten(i);
            if spec.position(x, y, z).norm() <= 2.0 * smax {
                num += (v.values[i] - a.values[i]).powi(2);
                den += a.values[i].powi(2);
            }
        }
        prop_assert!((num / den).sqrt() <= 0.05, "L2 error {}", (num / den).sqrt());
    }
}

#[test]
fn peak_and_zero_crossings_of_the_filtered_projection() {
    let fit = GaussianFit::exact(0.0, 1.0).unwrap();
    assert_eq!(filtered_projection(&fit, 0.0), -1.0);
    assert!(filtered_projection(&fit, 1.0).abs() < 1e-15);
    assert!(filtered_projection(&fit, -1.0).abs() < 1e-15);
}

#[test]
fn volume_from_fn_is_x_fastest() {
    let spec = VolumeSpec::new(1.0, 3).unwrap();
    let v = QpdVolume::from_fn(spec, AxisUnits::Arbitrary, |p| p.x + 10.0 * p.y + 100.0 * p.z);
    assert_eq!(v.values[1], 0.0 - 10.0 - 100.0);
    assert_eq!(v.values[3], -1.0 + 0.0 - 100.0);
    assert!((INV_SQRT_E - (-0.5f64).exp()).abs() < 1e-15);
}
