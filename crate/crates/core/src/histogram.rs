//! Histograms of the difference signal, Gaussian fits and tomograms.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Result, TomoError};
use crate::stokes::{canonicalize_direction, mirror_direction, Direction, PoincareGrid, Sign, StokesAxis};

/// Bins used for the goodness-of-fit residual.
pub const DEFAULT_BINS: usize = 100;

/// Residuals above this flag the histogram as non-Gaussian.
pub const NON_GAUSSIAN_RESIDUAL: f64 = 0.1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Histogram {
    pub bin_edges: Vec<f64>,
    pub counts: Vec<u64>,
    pub n_samples: u64,
}

impl Histogram {
    pub fn bin_count(&self) -> usize {
        self.counts.len()
    }

    pub fn bin_width(&self) -> f64 {
        self.bin_edges[1] - self.bin_edges[0]
    }

    pub fn bin_centers(&self) -> impl Iterator<Item = f64> + '_ {
        self.bin_edges.windows(2).map(|w| 0.5 * (w[0] + w[1]))
    }

    /// Counts scaled to a probability density.
    pub fn density(&self) -> Vec<f64> {
        let scale = 1.0 / (self.n_samples as f64 * self.bin_width());
        self.counts.iter().map(|&c| c as f64 * scale).collect()
    }
}

fn check_spread(samples: &[f64]) -> Result<(f64, f64)> {
    if samples.len() < 2 {
        return Err(TomoError::invalid("samples", format!("need at least 2 samples, got {}", samples.len())));
    }
    let (lo, hi) = samples.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &x| (lo.min(x), hi.max(x)));
    if !(lo.is_finite() && hi.is_finite()) {
        return Err(TomoError::invalid("samples", "contain non-finite values"));
    }
    if lo == hi {
        return Err(TomoError::DegenerateSamples { count: samples.len(), value: lo });
    }
    Ok((lo, hi))
}

/// Uniform bins spanning `[min, max]`; the maximum lands in the last bin.
pub fn build_histogram(samples: &[f64], bin_count: usize) -> Result<Histogram> {
    if bin_count < 4 {
        return Err(TomoError::invalid("bin_count", format!("must be at least 4, got {bin_count}")));
    }
    let (lo, hi) = check_spread(samples)?;
    let width = (hi - lo) / bin_count as f64;
    let mut bin_edges: Vec<f64> = (0..bin_count).map(|i| lo + i as f64 * width).collect();
    bin_edges.push(hi);
    let mut counts = vec![0u64; bin_count];
    for &x in samples {
        let idx = (((x - lo) / width) as usize).min(bin_count - 1);
        counts[idx] += 1;
    }
    Ok(Histogram { bin_edges, counts, n_samples: samples.len() as u64 })
}

/// Mean `⟨S⟩`, width `ΔS` and residual of a Gaussian fit.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GaussianFit {
    pub mean: f64,
    pub std: f64,
    /// RMS deviation of the histogram density from the fitted density,
    /// relative to the fitted peak density.
    pub residual: f64,
}

impl GaussianFit {
    /// A fit with zero residual, for analytically generated tomograms.
    pub fn exact(mean: f64, std: f64) -> Result<Self> {
        if !(std > 0.0 && std.is_finite()) || !mean.is_finite() {
            return Err(TomoError::invalid("std", format!("must be positive and finite, got {std}")));
        }
        Ok(Self { mean, std, residual: 0.0 })
    }

    pub fn variance(&self) -> f64 {
        self.std * self.std
    }

    pub fn is_non_gaussian(&self) -> bool {
        self.residual > NON_GAUSSIAN_RESIDUAL
    }

    /// Unnormalized profile `exp(−(S−⟨S⟩)²/2ΔS²)`.
    pub fn profile(&self, s: f64) -> f64 {
        let z = (s - self.mean) / self.std;
        (-0.5 * z * z).exp()
    }

    pub fn density(&self, s: f64) -> f64 {
        self.profile(s) / (self.std * (2.0 * PI).sqrt())
    }
}

/// Moment fit: sample mean and unbiased (`n − 1`) standard deviation.
///
/// The residual compares a [`DEFAULT_BINS`]-bin histogram with the fitted
/// density. High residuals are reported, not rejected.
pub fn fit_gaussian(samples: &[f64]) -> Result<GaussianFit> {
    check_spread(samples)?;
    let n = samples.len() as f64;
    let mean = samples.iter().sum::<f64>() / n;
    let ss: f64 = samples.iter().map(|x| (x - mean) * (x - mean)).sum();
    let std = (ss / (n - 1.0)).sqrt();
    if !(std > 0.0) {
        return Err(TomoError::DegenerateSamples { count: samples.len(), value: mean });
    }
    let mut fit = GaussianFit { mean, std, residual: 0.0 };
    let hist = build_histogram(samples, DEFAULT_BINS)?;
    fit.residual = fit_residual(&hist, &fit);
    Ok(fit)
}

/// Normalized RMS deviation between a histogram and a Gaussian density.
pub fn fit_residual(hist: &Histogram, fit: &GaussianFit) -> f64 {
    let peak = 1.0 / (fit.std * (2.0 * PI).sqrt());
    let density = hist.density();
    let sq: f64 = hist.bin_centers().zip(&density).map(|(c, d)| (d - fit.density(c)).powi(2)).sum();
    (sq / hist.bin_count() as f64).sqrt() / peak
}

/// Removes independent Gaussian noise by variance subtraction.
pub fn deconvolve_noise(signal: &GaussianFit, noise: &GaussianFit) -> Result<GaussianFit> {
    if signal.std <= noise.std {
        return Err(TomoError::NoiseDominated { signal_std: signal.std, noise_std: noise.std });
    }
    Ok(GaussianFit {
        mean: signal.mean - noise.mean,
        std: (signal.variance() - noise.variance()).sqrt(),
        residual: signal.residual,
    })
}

/// The fit of the same histogram read along the antipodal direction.
pub fn mirror_fit(fit: &GaussianFit) -> GaussianFit {
    GaussianFit { mean: -fit.mean, ..*fit }
}

/// One measured (or symmetry-derived) Stokes-observable distribution.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Tomogram {
    /// Canonical direction, `theta ≤ π/2`.
    pub direction: Direction,
    /// Relation between the analysed direction and `direction`.
    pub sign: Sign,
    /// Fit of the histogram as measured, i.e. along `sign · direction`.
    pub fit: GaussianFit,
    /// Quadrature weight in place of `sin ϑ` of `direction`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub weight: Option<f64>,
}

impl Tomogram {
    /// Canonicalizes `measured` and keeps the fit as measured.
    pub fn from_measurement(measured: Direction, fit: GaussianFit) -> Self {
        let (direction, sign) = canonicalize_direction(measured);
        Self { direction, sign, fit, weight: None }
    }

    /// `sin ϑ` of the canonical direction unless set explicitly.
    pub fn weight(&self) -> f64 {
        self.weight.unwrap_or_else(|| self.direction.theta.sin())
    }

    /// The fit along the canonical direction (mirrored when `sign` is minus).
    pub fn oriented_fit(&self) -> GaussianFit {
        match self.sign {
            Sign::Plus => self.fit,
            Sign::Minus => mirror_fit(&self.fit),
        }
    }

    pub fn measured_direction(&self) -> Direction {
        match self.sign {
            Sign::Plus => self.direction,
            Sign::Minus => self.direction.antipode(),
        }
    }
}

/// Tomograms on one hemisphere with the angular steps of their grid.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TomogramSet {
    pub tomograms: Vec<Tomogram>,
    pub d_theta: f64,
    pub d_phi: f64,
}

impl TomogramSet {
    pub fn new(tomograms: Vec<Tomogram>, d_theta: f64, d_phi: f64) -> Self {
        Self { tomograms, d_theta, d_phi }
    }

    /// Tomograms of a Gaussian model on every grid entry, computed exactly:
    /// `⟨S⟩ = m·n`, `ΔS² = nᵀΣn`.
    pub fn from_gaussian(
        grid: &PoincareGrid,
        mean: &nalgebra::Vector3<f64>,
        covariance: &nalgebra::Matrix3<f64>,
    ) -> Result<Self> {
        let tomograms = grid
            .entries
            .iter()
            .map(|e| {
                let n = e.measured_direction().unit_vector();
                let var = (n.transpose() * covariance * n)[(0, 0)];
                let fit = GaussianFit::exact(mean.dot(&n), var.sqrt())?;
                Ok(Tomogram { direction: e.direction, sign: e.sign, fit, weight: None })
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(Self::new(tomograms, grid.d_theta, grid.d_phi))
    }

    pub fn len(&self) -> usize {
        self.tomograms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tomograms.is_empty()
    }

    /// Adds reflections through the plane normal to `axis`, reusing each
    /// source fit, where no tomogram exists yet. Only valid when the state's
    /// statistics are symmetric under that reflection.
    pub fn mirror_completed(&self, axis: StokesAxis) -> Self {
        let mut out = self.tomograms.clone();
        for t in &self.tomograms {
            let reflected = Tomogram::from_measurement(mirror_direction(t.measured_direction(), axis), t.fit);
            if !out.iter().any(|x| x.direction.approx_eq(&reflected.direction)) {
                out.push(reflected);
            }
        }
        Self::new(out, self.d_theta, self.d_phi)
    }

    /// Zeroes every mean, moving the reconstruction to the origin.
    pub fn recentered(&self) -> Self {
        let tomograms = self
            .tomograms
            .iter()
            .map(|t| Tomogram { fit: GaussianFit { mean: 0.0, ..t.fit }, ..*t })
            .collect();
        Self::new(tomograms, self.d_theta, self.d_phi)
    }

    /// Relabels Stokes axes: component `i` of every direction moves to
    /// `perm[i]`. Each tomogram keeps its fit and its quadrature weight, so
    /// the reconstruction is the original volume with permuted axes.
    pub fn permuted_axes(&self, perm: [usize; 3]) -> Result<Self> {
        let mut seen = [false; 3];
        for &p in &perm {
            if p > 2 || std::mem::replace(&mut seen[p], true) {
                return Err(TomoError::invalid("perm", format!("{perm:?} is not a permutation of 0, 1, 2")));
            }
        }
        let tomograms = self
            .tomograms
            .iter()
            .map(|t| {
                let n = t.measured_direction().unit_vector();
                let mut m = nalgebra::Vector3::zeros();
                for i in 0..3 {
                    m[perm[i]] = n[i];
                }
                let moved = Tomogram::from_measurement(Direction::from_vector(&m), t.fit);
                Ok(Tomogram { weight: Some(t.weight()), ..moved })
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(Self::new(tomograms, self.d_theta, self.d_phi))
    }

    pub fn max_std(&self) -> f64 {
        self.tomograms.iter().map(|t| t.fit.std).fold(0.0, f64::max)
    }

    pub fn max_abs_mean(&self) -> f64 {
        self.tomograms.iter().map(|t| t.fit.mean.abs()).fold(0.0, f64::max)
    }
}
