//! Quantitative analysis of reconstructed volumes.

use std::collections::HashMap;

use nalgebra::{Matrix3, SymmetricEigen, Vector3};
use serde::{Deserialize, Serialize};

use crate::error::{Result, TomoError};
use crate::mc_tables::TRIANGLE_TABLE;
use crate::radon::{AxisUnits, QpdVolume};
use crate::states::Calibration;
use crate::stokes::StokesAxis;

/// `1/√e`: the level at which a Gaussian's isosurface semi-axes equal its
/// standard deviations.
pub const INV_SQRT_E: f64 = 0.606_530_659_712_633_4;

#[derive(Debug, Clone, PartialEq)]
pub struct IsoSurface {
    pub threshold_fraction: f64,
    /// Absolute level, `threshold_fraction × max`.
    pub level: f64,
    /// Edge crossings, in volume coordinates.
    pub points: Vec<Vector3<f64>>,
    pub triangles: Option<Vec<[u32; 3]>>,
}

impl IsoSurface {
    /// Largest `|p_k − c_k|` over the surface, per axis. For an axis-aligned
    /// ellipsoid centred on `center` these are its semi-axes.
    pub fn axis_extents(&self, center: &Vector3<f64>) -> [f64; 3] {
        let mut out = [0.0f64; 3];
        for p in &self.points {
            for (a, o) in out.iter_mut().enumerate() {
                *o = o.max((p[a] - center[a]).abs());
            }
        }
        out
    }
}

// Bourke cube: corner k sits at offset CORNERS[k]; edge e joins EDGES[e].
const CORNERS: [[usize; 3]; 8] =
    [[0, 0, 0], [1, 0, 0], [1, 1, 0], [0, 1, 0], [0, 0, 1], [1, 0, 1], [1, 1, 1], [0, 1, 1]];
const EDGES: [[usize; 2]; 12] =
    [[0, 1], [1, 2], [3, 2], [0, 3], [4, 5], [5, 6], [7, 6], [4, 7], [0, 4], [1, 5], [2, 6], [3, 7]];

fn check_level(volume: &QpdVolume, fraction: f64) -> Result<f64> {
    if !(fraction > 0.0 && fraction < 1.0) {
        return Err(TomoError::invalid("threshold_fraction", format!("must lie in (0, 1), got {fraction}")));
    }
    let (max, _) = volume.max();
    if !(max > 0.0) {
        return Err(TomoError::NonPositiveMaximum { max });
    }
    Ok(fraction * max)
}

/// Marching cubes at `fraction × max`. Vertices are linear interpolations
/// along axis-aligned voxel edges, so each evaluates to the level exactly
/// under trilinear interpolation.
pub fn extract_isosurface(volume: &QpdVolume, fraction: f64) -> Result<IsoSurface> {
    let level = check_level(volume, fraction)?;
    let spec = &volume.spec;
    let n = spec.resolution;
    let mut vertex_ids: HashMap<(usize, usize), u32> = HashMap::new();
    let mut points = Vec::new();
    let mut triangles = Vec::new();

    for iz in 0..n - 1 {
        for iy in 0..n - 1 {
            for ix in 0..n - 1 {
                let corner_idx: [[usize; 3]; 8] = CORNERS.map(|c| [ix + c[0], iy + c[1], iz + c[2]]);
                let vals = corner_idx.map(|c| volume.value(c[0], c[1], c[2]));
                let mut case = 0usize;
                for (k, v) in vals.iter().enumerate() {
                    if *v < level {
                        case |= 1 << k;
                    }
                }
                if case == 0 || case == 255 {
                    continue;
                }
                let mut edge_vertex = [u32::MAX; 12];
                let row = &TRIANGLE_TABLE[case];
                for &e in row.iter().take_while(|&&e| e >= 0) {
                    let e = e as usize;
                    if edge_vertex[e] != u32::MAX {
                        continue;
                    }
                    let [a, b] = EDGES[e];
                    let (ca, cb) = (corner_idx[a], corner_idx[b]);
                    let axis = (0..3).find(|&k| ca[k] != cb[k]).expect("edge spans one axis");
                    let key = (spec.index(ca[0], ca[1], ca[2]), axis);
                    let id = *vertex_ids.entry(key).or_insert_with(|| {
                        let t = (level - vals[a]) / (vals[b] - vals[a]);
                        let pa = spec.position(ca[0], ca[1], ca[2]);
                        let mut p = pa;
                        p[axis] += t * spec.voxel_size();
                        points.push(p);
                        (points.len() - 1) as u32
                    });
                    edge_vertex[e] = id;
                }
                for tri in row.chunks(3).take_while(|t| t[0] >= 0) {
                    triangles.push([
                        edge_vertex[tri[0] as usize],
                        edge_vertex[tri[1] as usize],
                        edge_vertex[tri[2] as usize],
                    ]);
                }
            }
        }
    }
    if points.is_empty() {
        return Err(TomoError::EmptyLevelSet { fraction });
    }
    Ok(IsoSurface { threshold_fraction: fraction, level, points, triangles: Some(triangles) })
}

/// [`extract_isosurface`] without the triangle list.
pub fn extract_isosurface_points(volume: &QpdVolume, fraction: f64) -> Result<IsoSurface> {
    let mut s = extract_isosurface(volume, fraction)?;
    s.triangles = None;
    Ok(s)
}

/// First and second central moments of a volume read as a density.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct VolumeMoments {
    pub mean: Vector3<f64>,
    pub covariance: Matrix3<f64>,
    /// Negative mass removed by clamping, as a fraction of the total
    /// absolute mass.
    pub clamped_fraction: f64,
}

/// Midpoint-rule moments after clamping negative ripple to zero.
pub fn volume_covariance(volume: &QpdVolume) -> Result<VolumeMoments> {
    let spec = &volume.spec;
    let n = spec.resolution;
    let mut mass = 0.0;
    let mut negative = 0.0;
    let mut first = Vector3::zeros();
    for iz in 0..n {
        for iy in 0..n {
            for ix in 0..n {
                let w = volume.value(ix, iy, iz);
                if w <= 0.0 {
                    negative -= w;
                    continue;
                }
                mass += w;
                first += w * spec.position(ix, iy, iz);
            }
        }
    }
    if !(mass > 0.0) {
        return Err(TomoError::ZeroMass);
    }
    let mean = first / mass;
    let mut second = Matrix3::zeros();
    for iz in 0..n {
        for iy in 0..n {
            for ix in 0..n {
                let w = volume.value(ix, iy, iz);
                if w > 0.0 {
                    let d = spec.position(ix, iy, iz) - mean;
                    second += w * d * d.transpose();
                }
            }
        }
    }
    Ok(VolumeMoments { mean, covariance: second / mass, clamped_fraction: negative / (mass + negative) })
}

/// `(λmax − λmin)/(λmax + λmin)` of a covariance matrix.
pub fn second_order_dop(covariance: &Matrix3<f64>) -> f64 {
    let eig = SymmetricEigen::new(*covariance).eigenvalues;
    let (lo, hi) = (eig.min(), eig.max());
    if hi + lo == 0.0 {
        0.0
    } else {
        (hi - lo) / (hi + lo)
    }
}

/// Signal-unit → photon conversion factor for a volume's axes.
/// `Arbitrary` axes are read as photons.
pub fn photons_per_unit(units: AxisUnits, calibration: &Calibration) -> f64 {
    match units {
        AxisUnits::Photons | AxisUnits::Arbitrary => 1.0,
        AxisUnits::VoltSeconds => 1.0 / calibration.volts_per_photon,
        AxisUnits::RelativeToS0 { s0 } => s0 / calibration.volts_per_photon,
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SqueezingReport {
    /// Reconstructed standard deviations along S1, S2, S3, in photons.
    pub axis_stds: [f64; 3],
    /// `√⟨N⟩`.
    pub shot_noise_std: f64,
    pub squeezed_axes: Vec<StokesAxis>,
    pub dop2: f64,
    /// Reconstructed mean, in photons.
    pub mean: [f64; 3],
    pub clamped_fraction: f64,
}

/// Compares the reconstructed Stokes variances with the shot noise `⟨N⟩` of
/// a coherent beam with the same mean photon number. An axis is squeezed
/// when its variance is below `⟨N⟩`.
pub fn squeezing_report(volume: &QpdVolume, mean_photons: f64, calibration: &Calibration) -> Result<SqueezingReport> {
    if !(mean_photons > 0.0) {
        return Err(TomoError::invalid("mean_photons", format!("must be positive, got {mean_photons}")));
    }
    let moments = volume_covariance(volume)?;
    let k = photons_per_unit(volume.units, calibration);
    let cov = moments.covariance * (k * k);
    let axis_stds = [cov[(0, 0)].sqrt(), cov[(1, 1)].sqrt(), cov[(2, 2)].sqrt()];
    let squeezed_axes = StokesAxis::ALL.into_iter().filter(|a| cov[(a.index(), a.index())] < mean_photons).collect();
    Ok(SqueezingReport {
        axis_stds,
        shot_noise_std: mean_photons.sqrt(),
        squeezed_axes,
        dop2: second_order_dop(&cov),
        mean: (moments.mean * k).into(),
        clamped_fraction: moments.clamped_fraction,
    })
}

/// One axis-aligned plane of the volume.
#[derive(Debug, Clone, PartialEq)]
pub struct Slice {
    /// Axis held fixed.
    pub normal: StokesAxis,
    pub fixed_coordinate: f64,
    /// Axes spanning the slice, (row, column) order.
    pub axes: [StokesAxis; 2],
    pub coordinates: Vec<f64>,
    /// Row-major `resolution × resolution`.
    pub values: Vec<f64>,
}

/// The three axis-aligned slices through the volume maximum.
pub fn slices_through_max(volume: &QpdVolume) -> [Slice; 3] {
    let (_, at) = volume.max();
    let n = volume.spec.resolution;
    let coordinates: Vec<f64> = (0..n).map(|i| volume.spec.coordinate(i)).collect();
    StokesAxis::ALL.map(|normal| {
        let fixed = normal.index();
        let (ra, ca) = match normal {
            StokesAxis::S1 => (StokesAxis::S2, StokesAxis::S3),
            StokesAxis::S2 => (StokesAxis::S1, StokesAxis::S3),
            StokesAxis::S3 => (StokesAxis::S1, StokesAxis::S2),
        };
        let mut values = Vec::with_capacity(n * n);
        for r in 0..n {
            for c in 0..n {
                let mut idx = [0usize; 3];
                idx[fixed] = at[fixed];
                idx[ra.index()] = r;
                idx[ca.index()] = c;
                values.push(volume.value(idx[0], idx[1], idx[2]));
            }
        }
        Slice {
            normal,
            fixed_coordinate: volume.spec.coordinate(at[fixed]),
            axes: [ra, ca],
            coordinates: coordinates.clone(),
            values,
        }
    })
}
