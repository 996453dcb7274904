//! Stokes-space geometry.
//!
//! Angles are configured in degrees (the waveplate protocol is specified that
//! way) and carried in radians everywhere else.

use std::f64::consts::{FRAC_PI_2, PI, TAU};

use nalgebra::Vector3;
use serde::{Deserialize, Serialize};

use crate::error::{Result, TomoError};

/// Angular tolerance used for equator tests and direction deduplication.
pub const ANGLE_TOLERANCE: f64 = 1e-9;

/// Values this close to a boundary (equator, 2π seam) are treated as on it.
const SEAM_TOLERANCE: f64 = 1e-12;

/// Mean Stokes vector `(S0, S1, S2, S3)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StokesVector {
    pub s0: f64,
    pub s1: f64,
    pub s2: f64,
    pub s3: f64,
}

impl StokesVector {
    pub fn new(s0: f64, s1: f64, s2: f64, s3: f64) -> Self {
        Self { s0, s1, s2, s3 }
    }

    pub fn unpolarized(s0: f64) -> Self {
        Self::new(s0, 0.0, 0.0, 0.0)
    }

    /// The polarization part `(S1, S2, S3)`.
    pub fn polarization(&self) -> Vector3<f64> {
        Vector3::new(self.s1, self.s2, self.s3)
    }

    pub fn scaled(&self, factor: f64) -> Self {
        Self::new(self.s0 * factor, self.s1 * factor, self.s2 * factor, self.s3 * factor)
    }

    /// `|s|² ≤ s0²` with relative slack `1e-9·s0²`, and `s0 ≥ 0`.
    pub fn is_physical(&self) -> bool {
        self.s0 >= 0.0 && self.polarization().norm_squared() <= self.s0 * self.s0 * (1.0 + 1e-9)
    }
}

/// One of the three polarization axes of Stokes space.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum StokesAxis {
    S1,
    S2,
    S3,
}

impl StokesAxis {
    pub const ALL: [StokesAxis; 3] = [StokesAxis::S1, StokesAxis::S2, StokesAxis::S3];

    pub fn index(self) -> usize {
        match self {
            StokesAxis::S1 => 0,
            StokesAxis::S2 => 1,
            StokesAxis::S3 => 2,
        }
    }

    pub fn unit(self) -> Vector3<f64> {
        let mut v = Vector3::zeros();
        v[self.index()] = 1.0;
        v
    }
}

impl std::fmt::Display for StokesAxis {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let name = match self {
            StokesAxis::S1 => "S1",
            StokesAxis::S2 => "S2",
            StokesAxis::S3 => "S3",
        };
        f.write_str(name)
    }
}

/// A point on the Poincaré sphere in spherical coordinates (radians).
///
/// `theta` is the polar angle measured from the S3 axis and `phi` the
/// azimuth in the S1–S2 plane measured from S1.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Direction {
    pub theta: f64,
    pub phi: f64,
}

impl Direction {
    /// Builds a direction, folding any real `(theta, phi)` into
    /// `theta ∈ [0, π]`, `phi ∈ [0, 2π)` without moving the unit vector.
    pub fn new(theta: f64, phi: f64) -> Self {
        let mut theta = theta.rem_euclid(TAU);
        let mut phi = phi;
        if theta > PI {
            // theta in (π, 2π) is the same ray as (2π − theta, phi + π)
            theta = TAU - theta;
            phi += PI;
        }
        Self { theta, phi: wrap_angle(phi) }
    }

    pub fn from_degrees(theta_deg: f64, phi_deg: f64) -> Self {
        Self::new(theta_deg.to_radians(), phi_deg.to_radians())
    }

    /// Inverse of [`Direction::unit_vector`]; the azimuth of a pole is 0.
    pub fn from_vector(v: &Vector3<f64>) -> Self {
        let n = v.normalize();
        let theta = n.z.clamp(-1.0, 1.0).acos();
        let phi = if n.x.abs() < SEAM_TOLERANCE && n.y.abs() < SEAM_TOLERANCE {
            0.0
        } else {
            n.y.atan2(n.x)
        };
        Self::new(theta, phi)
    }

    pub fn unit_vector(&self) -> Vector3<f64> {
        let (st, ct) = self.theta.sin_cos();
        let (sp, cp) = self.phi.sin_cos();
        Vector3::new(st * cp, st * sp, ct)
    }

    pub fn axis(axis: StokesAxis) -> Self {
        Self::from_vector(&axis.unit())
    }

    pub fn theta_deg(&self) -> f64 {
        self.theta.to_degrees()
    }

    pub fn phi_deg(&self) -> f64 {
        self.phi.to_degrees()
    }

    pub fn antipode(&self) -> Self {
        Self::new(PI - self.theta, self.phi + PI)
    }

    /// True when both unit vectors agree within [`ANGLE_TOLERANCE`].
    pub fn approx_eq(&self, other: &Direction) -> bool {
        (self.unit_vector() - other.unit_vector()).norm() <= ANGLE_TOLERANCE
    }
}

/// Wraps an angle into `[0, 2π)`, snapping values within rounding of 2π to 0.
pub fn wrap_angle(angle: f64) -> f64 {
    let w = angle.rem_euclid(TAU);
    if TAU - w < SEAM_TOLERANCE {
        0.0
    } else {
        w
    }
}

/// Sign relating a measured direction to its canonical representative.
///
/// `Minus` means the measurement was taken along the antipode, so its
/// histogram must be mirrored `S → −S` before use.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Sign {
    Plus,
    Minus,
}

impl Sign {
    pub fn value(self) -> f64 {
        match self {
            Sign::Plus => 1.0,
            Sign::Minus => -1.0,
        }
    }

    pub fn flip(self) -> Self {
        match self {
            Sign::Plus => Sign::Minus,
            Sign::Minus => Sign::Plus,
        }
    }

    pub fn combine(self, other: Sign) -> Sign {
        if self == other {
            Sign::Plus
        } else {
            Sign::Minus
        }
    }
}

/// Half-wave-plate (`alpha`) and quarter-wave-plate (`beta`) orientations,
/// in degrees, stored exactly as configured.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WavePlateSetting {
    pub alpha: f64,
    pub beta: f64,
}

impl WavePlateSetting {
    pub fn new(alpha: f64, beta: f64) -> Self {
        Self { alpha, beta }
    }
}

/// Maps a HWP/QWP pair onto the analysed Stokes direction:
/// `theta = π/2 − 2β`, `phi = 2β − 4α`.
///
/// The raw polar angle goes negative for `β > 45°`; it is folded back
/// into `[0, π]` (with `phi + π`) so the returned direction is the same ray.
pub fn waveplate_to_direction(setting: WavePlateSetting) -> Direction {
    let alpha = setting.alpha.to_radians();
    let beta = setting.beta.to_radians();
    Direction::new(FRAC_PI_2 - 2.0 * beta, 2.0 * beta - 4.0 * alpha)
}

/// Maps a direction onto the `theta ≤ π/2` hemisphere.
///
/// On the equator only `phi ∈ [0, π)` is canonical. Directions outside the
/// hemisphere are replaced by their antipode with [`Sign::Minus`].
pub fn canonicalize_direction(d: Direction) -> (Direction, Sign) {
    let d = Direction::new(d.theta, d.phi);
    let on_equator = (d.theta - FRAC_PI_2).abs() <= SEAM_TOLERANCE;
    let canonical = if on_equator {
        d.phi < PI - SEAM_TOLERANCE
    } else {
        d.theta < FRAC_PI_2
    };
    if canonical {
        (d, Sign::Plus)
    } else {
        let mut a = d.antipode();
        if on_equator {
            a.theta = FRAC_PI_2;
        }
        (a, Sign::Minus)
    }
}

/// Reflects a direction through the coordinate plane normal to `axis`.
pub fn mirror_direction(d: Direction, axis: StokesAxis) -> Direction {
    let mut v = d.unit_vector();
    v[axis.index()] = -v[axis.index()];
    Direction::from_vector(&v)
}

/// Equally spaced waveplate angles: `start + k·step`, `k < count`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AngleSteps {
    pub start: f64,
    pub step: f64,
    pub count: usize,
}

impl AngleSteps {
    pub fn new(start: f64, step: f64, count: usize) -> Self {
        Self { start, step, count }
    }

    pub fn values(&self) -> impl Iterator<Item = f64> + '_ {
        (0..self.count).map(move |k| self.start + k as f64 * self.step)
    }
}

/// The rotation schedule of both waveplates.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GridSpec {
    pub alpha: AngleSteps,
    pub beta: AngleSteps,
}

impl GridSpec {
    /// HWP 0–45° in 2.5° steps and QWP 0–90° in 5° steps, 19 positions each.
    pub fn standard() -> Self {
        Self { alpha: AngleSteps::new(0.0, 2.5, 19), beta: AngleSteps::new(0.0, 5.0, 19) }
    }

    /// HWP 0–87.5° in 2.5° steps, QWP as in [`GridSpec::standard`].
    /// Covers the full hemisphere without relying on state symmetries.
    pub fn full_hemisphere() -> Self {
        Self { alpha: AngleSteps::new(0.0, 2.5, 36), beta: AngleSteps::new(0.0, 5.0, 19) }
    }

    pub fn validate(&self) -> Result<()> {
        if self.alpha.count == 0 || self.beta.count == 0 {
            return Err(TomoError::EmptyGrid);
        }
        for (name, steps) in [("alpha.step", &self.alpha), ("beta.step", &self.beta)] {
            if !(steps.step > 0.0 && steps.step.is_finite()) {
                return Err(TomoError::invalid(name, format!("must be positive, got {}", steps.step)));
            }
            if !steps.start.is_finite() {
                return Err(TomoError::invalid(name, "start angle must be finite"));
            }
        }
        Ok(())
    }

    /// Every waveplate setting, alpha-major.
    pub fn settings(&self) -> Vec<WavePlateSetting> {
        self.alpha
            .values()
            .flat_map(|a| self.beta.values().map(move |b| WavePlateSetting::new(a, b)))
            .collect()
    }

    /// Polar step `2·Δβ` in radians.
    pub fn d_theta(&self) -> f64 {
        (2.0 * self.beta.step).to_radians()
    }

    /// Azimuthal step `4·Δα` in radians.
    pub fn d_phi(&self) -> f64 {
        (4.0 * self.alpha.step).to_radians()
    }
}

/// One measurement direction on the canonical hemisphere.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GridEntry {
    pub direction: Direction,
    pub sign: Sign,
    pub setting: WavePlateSetting,
    /// Set when the entry was produced by reflecting the measurement of
    /// `setting` through the plane normal to this axis.
    pub mirrored: Option<StokesAxis>,
}

impl GridEntry {
    /// The direction the detector actually analysed (`sign · canonical`).
    pub fn measured_direction(&self) -> Direction {
        match self.sign {
            Sign::Plus => self.direction,
            Sign::Minus => self.direction.antipode(),
        }
    }
}

/// Deduplicated canonical directions with the quadrature steps of the
/// waveplate schedule that generated them.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PoincareGrid {
    pub entries: Vec<GridEntry>,
    pub d_theta: f64,
    pub d_phi: f64,
}

impl PoincareGrid {
    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// Index of the entry whose canonical direction matches `d`.
    pub fn find(&self, d: &Direction) -> Option<usize> {
        let (c, _) = canonicalize_direction(*d);
        self.entries.iter().position(|e| e.direction.approx_eq(&c))
    }

    /// Adds the reflection of every entry through the plane normal to
    /// `axis`, skipping reflections that land on an existing direction.
    ///
    /// Valid only for states whose Stokes statistics share that symmetry.
    pub fn mirror_completed(&self, axis: StokesAxis) -> PoincareGrid {
        let mut entries = self.entries.clone();
        for e in &self.entries {
            let reflected = mirror_direction(e.measured_direction(), axis);
            let (direction, sign) = canonicalize_direction(reflected);
            if !entries.iter().any(|x| x.direction.approx_eq(&direction)) {
                entries.push(GridEntry { direction, sign, setting: e.setting, mirrored: Some(axis) });
            }
        }
        PoincareGrid { entries, d_theta: self.d_theta, d_phi: self.d_phi }
    }
}

/// Generates all waveplate settings, maps and canonicalizes them, and keeps
/// the first setting that reaches each distinct direction.
pub fn build_grid(spec: &GridSpec) -> Result<PoincareGrid> {
    spec.validate()?;
    let mut entries: Vec<GridEntry> = Vec::new();
    for setting in spec.settings() {
        let (direction, sign) = canonicalize_direction(waveplate_to_direction(setting));
        if !entries.iter().any(|e| e.direction.approx_eq(&direction)) {
            entries.push(GridEntry { direction, sign, setting, mirrored: None });
        }
    }
    Ok(PoincareGrid { entries, d_theta: spec.d_theta(), d_phi: spec.d_phi() })
}

/// First-order degree of polarization `|s| / s0`.
pub fn dop_first_order(mean: &StokesVector) -> Result<f64> {
    if !(mean.s0 > 0.0) {
        return Err(TomoError::invalid("s0", format!("must be positive, got {}", mean.s0)));
    }
    Ok(mean.polarization().norm() / mean.s0)
}

/// Resolution of the brute-force direction scan used by [`dop_higher_order`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DirectionScan {
    pub theta_samples: usize,
    pub phi_samples: usize,
}

impl Default for DirectionScan {
    /// 1° steps: 181 polar × 360 azimuthal samples.
    fn default() -> Self {
        Self { theta_samples: 181, phi_samples: 360 }
    }
}

impl DirectionScan {
    pub fn directions(&self) -> impl Iterator<Item = Direction> + '_ {
        let dt = if self.theta_samples > 1 { PI / (self.theta_samples - 1) as f64 } else { 0.0 };
        let dp = TAU / self.phi_samples.max(1) as f64;
        (0..self.theta_samples).flat_map(move |i| {
            (0..self.phi_samples).map(move |j| Direction { theta: i as f64 * dt, phi: j as f64 * dp })
        })
    }
}

/// Higher-order degree of polarization `(M_max − M_min)/(M_max + M_min)`,
/// where `M(n)` is the `order`-th central moment of the Stokes observable
/// along `n`, found by scanning directions.
pub fn dop_higher_order<F>(central_moment: F, order: u32, scan: &DirectionScan) -> Result<f64>
where
    F: Fn(&Direction) -> f64,
{
    if order < 2 {
        return Err(TomoError::invalid("order", format!("must be at least 2, got {order}")));
    }
    let (lo, hi) = scan
        .directions()
        .map(|d| central_moment(&d))
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), m| (lo.min(m), hi.max(m)));
    let sum = hi + lo;
    if sum == 0.0 || !sum.is_finite() {
        return Err(TomoError::ZeroMomentSum);
    }
    Ok((hi - lo) / sum)
}
