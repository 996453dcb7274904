//! Discrete hemisphere inverse Radon transform for Gaussian tomograms.
//!
//! Each tomogram contributes the second derivative of its (unit-area)
//! Gaussian projection, evaluated at `S = p·n`, weighted by `sin θ·Δθ·Δφ`:
//!
//! ```text
//! W(p) = −Δθ Δφ Σᵢ sin θᵢ · H''ᵢ(p·nᵢ)
//! ```

use std::f64::consts::PI;

use nalgebra::{Matrix3, SymmetricEigen, Vector3};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Result, TomoError};
use crate::histogram::{GaussianFit, TomogramSet};

/// Default voxels per axis.
pub const DEFAULT_RESOLUTION: usize = 61;

/// Default half-width in units of the largest fitted σ.
pub const DEFAULT_EXTENT_SIGMAS: f64 = 4.0;

/// Cubic voxel grid centred on the origin.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct VolumeSpec {
    /// Half-width per axis, in signal units.
    pub extent: f64,
    /// Voxels per axis; odd so the origin is a voxel centre.
    pub resolution: usize,
}

impl VolumeSpec {
    pub fn new(extent: f64, resolution: usize) -> Result<Self> {
        let spec = Self { extent, resolution };
        spec.validate()?;
        Ok(spec)
    }

    /// `extent = max|⟨S⟩| + 4·max ΔS` so a displaced distribution fits too.
    pub fn for_tomograms(set: &TomogramSet, resolution: usize) -> Result<Self> {
        Self::new(set.max_abs_mean() + DEFAULT_EXTENT_SIGMAS * set.max_std(), resolution)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.extent > 0.0 && self.extent.is_finite()) {
            return Err(TomoError::invalid("extent", format!("must be positive, got {}", self.extent)));
        }
        if self.resolution < 3 || self.resolution % 2 == 0 {
            return Err(TomoError::invalid(
                "resolution",
                format!("must be an odd integer >= 3, got {}", self.resolution),
            ));
        }
        Ok(())
    }

    pub fn voxel_size(&self) -> f64 {
        2.0 * self.extent / (self.resolution - 1) as f64
    }

    /// Coordinate of voxel index `i` along any axis.
    pub fn coordinate(&self, i: usize) -> f64 {
        let half = (self.resolution / 2) as f64;
        (i as f64 - half) * self.voxel_size()
    }

    pub fn voxel_count(&self) -> usize {
        self.resolution.pow(3)
    }

    /// Flat index, x fastest.
    pub fn index(&self, ix: usize, iy: usize, iz: usize) -> usize {
        ix + self.resolution * (iy + self.resolution * iz)
    }

    pub fn unflatten(&self, idx: usize) -> [usize; 3] {
        let n = self.resolution;
        [idx % n, (idx / n) % n, idx / (n * n)]
    }

    pub fn position(&self, ix: usize, iy: usize, iz: usize) -> Vector3<f64> {
        Vector3::new(self.coordinate(ix), self.coordinate(iy), self.coordinate(iz))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Normalization {
    Raw,
    PeakOne,
}

/// Units of the volume's coordinate axes.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", tag = "kind")]
pub enum AxisUnits {
    Arbitrary,
    Photons,
    VoltSeconds,
    /// Dimensionless: signal divided by the mean sum signal `s0` (V·s).
    RelativeToS0 { s0: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum NormalizeMode {
    PeakOne,
    /// Rescale coordinates by `1/s0`; `s0` is the mean sum signal in V·s.
    S0Units { s0: f64 },
}

/// Quasiprobability values on a [`VolumeSpec`] grid, x fastest.
#[derive(Debug, Clone, PartialEq)]
pub struct QpdVolume {
    pub spec: VolumeSpec,
    pub values: Vec<f64>,
    pub normalization: Normalization,
    pub units: AxisUnits,
}

impl QpdVolume {
    pub fn from_fn<F>(spec: VolumeSpec, units: AxisUnits, f: F) -> Self
    where
        F: Fn(&Vector3<f64>) -> f64 + Sync,
    {
        let n = spec.resolution;
        let mut values = vec![0.0; spec.voxel_count()];
        values.par_chunks_mut(n * n).enumerate().for_each(|(iz, slab)| {
            for iy in 0..n {
                for ix in 0..n {
                    slab[ix + n * iy] = f(&spec.position(ix, iy, iz));
                }
            }
        });
        Self { spec, values, normalization: Normalization::Raw, units }
    }

    pub fn value(&self, ix: usize, iy: usize, iz: usize) -> f64 {
        self.values[self.spec.index(ix, iy, iz)]
    }

    /// Maximum value and its voxel (first in storage order on ties).
    pub fn max(&self) -> (f64, [usize; 3]) {
        let (idx, &v) = self
            .values
            .iter()
            .enumerate()
            .fold((0, &f64::NEG_INFINITY), |best, cur| if cur.1 > best.1 { cur } else { best });
        (v, self.spec.unflatten(idx))
    }

    pub fn argmax_position(&self) -> Vector3<f64> {
        let [i, j, k] = self.max().1;
        self.spec.position(i, j, k)
    }

    /// Trilinear interpolation; `None` outside the grid.
    pub fn interpolate(&self, p: &Vector3<f64>) -> Option<f64> {
        let n = self.spec.resolution;
        let h = self.spec.voxel_size();
        let half = (n / 2) as f64;
        let mut base = [0usize; 3];
        let mut frac = [0.0; 3];
        for a in 0..3 {
            let u = p[a] / h + half;
            if !(u >= -1e-9 && u <= (n - 1) as f64 + 1e-9) {
                return None;
            }
            let i = (u.floor().max(0.0) as usize).min(n - 2);
            base[a] = i;
            frac[a] = (u - i as f64).clamp(0.0, 1.0);
        }
        let mut acc = 0.0;
        for corner in 0..8 {
            let off = [corner & 1, (corner >> 1) & 1, (corner >> 2) & 1];
            let mut w = 1.0;
            for a in 0..3 {
                w *= if off[a] == 1 { frac[a] } else { 1.0 - frac[a] };
            }
            if w != 0.0 {
                acc += w * self.value(base[0] + off[0], base[1] + off[1], base[2] + off[2]);
            }
        }
        Some(acc)
    }
}

/// Second derivative in `S` of the unnormalized Gaussian profile:
/// `[(S−μ)²/σ⁴ − 1/σ²]·exp(−(S−μ)²/2σ²)`.
pub fn filtered_projection(fit: &GaussianFit, s: f64) -> f64 {
    let var = fit.std * fit.std;
    let d = s - fit.mean;
    (d * d / (var * var) - 1.0 / var) * (-0.5 * d * d / var).exp()
}

/// [`filtered_projection`] of the unit-area projection (divided by `σ√(2π)`).
///
/// The inverse Radon sum needs projections of one distribution, which all
/// carry the same total probability; peak-one profiles of different widths
/// would weight directions by their σ.
pub fn unit_area_filtered_projection(fit: &GaussianFit, s: f64) -> f64 {
    filtered_projection(fit, s) / (fit.std * (2.0 * PI).sqrt())
}

struct Kernel {
    normal: Vector3<f64>,
    mean: f64,
    inv_var: f64,
    weight: f64,
}

fn kernels(set: &TomogramSet) -> Result<Vec<Kernel>> {
    if set.len() < 3 {
        return Err(TomoError::InsufficientDirections { count: set.len() });
    }
    let mut scatter = Matrix3::zeros();
    let mut out = Vec::with_capacity(set.len());
    for t in &set.tomograms {
        let fit = t.oriented_fit();
        if !(fit.std > 0.0 && fit.std.is_finite()) {
            return Err(TomoError::invalid("tomogram std", format!("must be positive, got {}", fit.std)));
        }
        let n = t.direction.unit_vector();
        scatter += n * n.transpose();
        let var = fit.std * fit.std;
        out.push(Kernel {
            normal: n,
            mean: fit.mean,
            inv_var: 1.0 / var,
            weight: t.weight() / (fit.std * (2.0 * PI).sqrt()),
        });
    }
    let min_eig = SymmetricEigen::new(scatter).eigenvalues.min();
    if min_eig <= 1e-9 * set.len() as f64 {
        return Err(TomoError::InsufficientDirections { count: set.len() });
    }
    Ok(out)
}

/// Evaluates the hemisphere inverse Radon sum on every voxel of `spec`.
///
/// Voxels are independent and each sums its tomograms in input order, so the
/// output does not depend on the number of worker threads.
pub fn reconstruct(set: &TomogramSet, spec: &VolumeSpec) -> Result<QpdVolume> {
    spec.validate()?;
    let ks = kernels(set)?;
    let scale = -set.d_theta * set.d_phi;
    Ok(QpdVolume::from_fn(*spec, AxisUnits::Arbitrary, |p| {
        let mut acc = 0.0;
        for k in &ks {
            let d = p.dot(&k.normal) - k.mean;
            let q = d * d * k.inv_var;
            acc += k.weight * (q - 1.0) * k.inv_var * (-0.5 * q).exp();
        }
        scale * acc
    }))
}

/// Closed-form QPD of a Gaussian state: the Fourier transform of
/// `χ(u) = exp(i u·m − ½ uᵀΣu)`, a normalized 3D Gaussian density.
pub fn analytic_gaussian_qpd(mean: &Vector3<f64>, covariance: &Matrix3<f64>, point: &Vector3<f64>) -> Result<f64> {
    let chol = covariance.cholesky().ok_or(TomoError::SingularCovariance)?;
    let d = point - mean;
    let y = chol.l().solve_lower_triangular(&d).ok_or(TomoError::SingularCovariance)?;
    let det_sqrt: f64 = chol.l().diagonal().iter().product();
    Ok((-0.5 * y.norm_squared()).exp() / ((2.0 * PI).powf(1.5) * det_sqrt))
}

/// [`analytic_gaussian_qpd`] sampled on a grid.
pub fn analytic_volume(mean: &Vector3<f64>, covariance: &Matrix3<f64>, spec: &VolumeSpec) -> Result<QpdVolume> {
    spec.validate()?;
    analytic_gaussian_qpd(mean, covariance, mean)?;
    Ok(QpdVolume::from_fn(*spec, AxisUnits::Arbitrary, |p| {
        analytic_gaussian_qpd(mean, covariance, p).expect("covariance checked above")
    }))
}

/// Peak-one scaling or `1/s0` coordinate rescaling; both idempotent.
pub fn normalize(volume: &QpdVolume, mode: NormalizeMode) -> Result<QpdVolume> {
    match mode {
        NormalizeMode::PeakOne => {
            let (max, _) = volume.max();
            if !(max > 0.0) {
                return Err(TomoError::NonPositiveMaximum { max });
            }
            Ok(QpdVolume {
                values: volume.values.iter().map(|v| v / max).collect(),
                normalization: Normalization::PeakOne,
                ..volume.clone()
            })
        }
        NormalizeMode::S0Units { s0 } => {
            if !(s0 > 0.0 && s0.is_finite()) {
                return Err(TomoError::invalid("s0", format!("must be positive, got {s0}")));
            }
            match volume.units {
                AxisUnits::RelativeToS0 { .. } => Ok(volume.clone()),
                AxisUnits::VoltSeconds | AxisUnits::Arbitrary => {
                    let spec = VolumeSpec { extent: volume.spec.extent / s0, ..volume.spec };
                    Ok(QpdVolume { spec, units: AxisUnits::RelativeToS0 { s0 }, ..volume.clone() })
                }
                AxisUnits::Photons => Err(TomoError::invalid(
                    "units",
                    "photon-unit volumes must be converted to V·s before S0 normalization",
                )),
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::stokes::{build_grid, GridSpec, StokesAxis};

    fn unit_fit() -> GaussianFit {
        GaussianFit { mean: 0.0, std: 1.0, residual: 0.0 }
    }

    #[test]
    fn filtered_projection_values() {
        let f = unit_fit();
        assert_eq!(filtered_projection(&f, 0.0), -1.0);
        assert_eq!(filtered_projection(&f, 1.0), 0.0);
        assert!((filtered_projection(&f, 2.0) - 3.0 * (-2f64).exp()).abs() < 1e-15);
    }

    #[test]
    fn spec_validation() {
        assert!(VolumeSpec::new(1.0, 60).is_err());
        assert!(VolumeSpec::new(1.0, 1).is_err());
        assert!(VolumeSpec::new(0.0, 5).is_err());
        let s = VolumeSpec::new(4.0, 61).unwrap();
        assert_eq!(s.coordinate(30), 0.0);
        assert!((s.coordinate(0) + 4.0).abs() < 1e-12);
        assert!((s.coordinate(60) - 4.0).abs() < 1e-12);
        assert_eq!(s.unflatten(s.index(3, 7, 11)), [3, 7, 11]);
    }

    #[test]
    fn analytic_values() {
        let i = Matrix3::identity();
        let z = Vector3::zeros();
        let v0 = analytic_gaussian_qpd(&z, &i, &z).unwrap();
        assert!((v0 - (2.0 * PI).powf(-1.5)).abs() < 1e-15);
        assert!((v0 - 0.063_493_6).abs() < 1e-6);
        let v1 = analytic_gaussian_qpd(&z, &i, &Vector3::new(0.0, 1.0, 0.0)).unwrap();
        assert!((v1 / v0 - (-0.5f64).exp()).abs() < 1e-14);
        let c = Matrix3::from_diagonal(&Vector3::new(1.0, 0.25, 4.0));
        let a = analytic_gaussian_qpd(&z, &c, &Vector3::new(0.0, 0.5, 0.0)).unwrap()
            / analytic_gaussian_qpd(&z, &c, &z).unwrap();
        assert!((a - (-0.5f64).exp()).abs() < 1e-14);
        assert!(matches!(analytic_gaussian_qpd(&z, &Matrix3::zeros(), &z), Err(TomoError::SingularCovariance)));
    }

    #[test]
    fn rejects_coplanar_directions() {
        let grid = build_grid(&GridSpec::standard()).unwrap();
        let mut set = TomogramSet::from_gaussian(&grid, &Vector3::zeros(), &Matrix3::identity()).unwrap();
        set.tomograms.retain(|t| (t.direction.theta - std::f64::consts::FRAC_PI_2).abs() < 1e-9);
        assert!(set.len() >= 3);
        let spec = VolumeSpec::new(3.0, 5).unwrap();
        assert!(matches!(reconstruct(&set, &spec), Err(TomoError::InsufficientDirections { .. })));
        set.tomograms.truncate(2);
        assert!(matches!(reconstruct(&set, &spec), Err(TomoError::InsufficientDirections { count: 2 })));
    }

    #[test]
    fn isotropic_falloff() {
        let grid = build_grid(&GridSpec::standard()).unwrap().mirror_completed(StokesAxis::S2);
        let set = TomogramSet::from_gaussian(&grid, &Vector3::zeros(), &Matrix3::identity()).unwrap();
        let spec = VolumeSpec::new(4.0, 61).unwrap();
        let vol = reconstruct(&set, &spec).unwrap();
        let (peak, at) = vol.max();
        assert_eq!(at, [30, 30, 30]);
        // r = 1 is voxel 30 ± 7.5, so interpolate
        for p in [Vector3::new(1.0, 0.0, 0.0), Vector3::new(0.0, 1.0, 0.0), Vector3::new(0.0, 0.0, 1.0)] {
            let ratio = vol.interpolate(&p).unwrap() / peak;
            assert!((ratio / (-0.5f64).exp() - 1.0).abs() < 0.03, "ratio {ratio}");
        }
    }

    #[test]
    fn normalize_modes() {
        let spec = VolumeSpec::new(3e-6, 5).unwrap();
        let mut vol = QpdVolume::from_fn(spec, AxisUnits::VoltSeconds, |p| 2.0 - p.norm() / 3e-6);
        let p = normalize(&vol, NormalizeMode::PeakOne).unwrap();
        assert_eq!(p.max().0, 1.0);
        assert_eq!(normalize(&p, NormalizeMode::PeakOne).unwrap(), p);
        let s = normalize(&vol, NormalizeMode::S0Units { s0: 3e-6 }).unwrap();
        assert!((s.spec.extent - 1.0).abs() < 1e-12);
        assert_eq!(normalize(&s, NormalizeMode::S0Units { s0: 3e-6 }).unwrap(), s);
        vol.values.iter_mut().for_each(|v| *v = -1.0);
        assert!(matches!(normalize(&vol, NormalizeMode::PeakOne), Err(TomoError::NonPositiveMaximum { .. })));
    }

    #[test]
    fn trilinear_reproduces_linear_fields() {
        let spec = VolumeSpec::new(2.0, 7).unwrap();
        let vol = QpdVolume::from_fn(spec, AxisUnits::Arbitrary, |p| 1.0 + 2.0 * p.x - p.y + 0.5 * p.z);
        let q = Vector3::new(0.37, -1.21, 1.9);
        assert!((vol.interpolate(&q).unwrap() - (1.0 + 0.74 + 1.21 + 0.95)).abs() < 1e-12);
        assert!(vol.interpolate(&Vector3::new(2.5, 0.0, 0.0)).is_none());
    }
}
