//! Gaussian Stokes-statistics models of the light states under study and a
//! seeded simulator of the pulsed two-detector acquisition.
//!
//! Macroscopic Bell states are unpolarized in the first order, so they are
//! carried here as a zero mean Stokes vector plus a 3×3 covariance in
//! photon-number units. Shot noise (`SN`) is the mean photon number `⟨N⟩`.

use nalgebra::{Matrix3, SymmetricEigen, Vector3};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{Result, TomoError};
use crate::stokes::{Direction, StokesAxis, StokesVector};

/// Photons ↔ detector signal conversion.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Calibration {
    /// Integrated detector signal per photon, in V·s.
    pub volts_per_photon: f64,
}

impl Default for Calibration {
    /// 3×10⁻⁶ V·s ↔ 3×10⁵ photons.
    fn default() -> Self {
        Self { volts_per_photon: 1e-11 }
    }
}

impl Calibration {
    pub fn new(volts_per_photon: f64) -> Result<Self> {
        if !(volts_per_photon > 0.0 && volts_per_photon.is_finite()) {
            return Err(TomoError::invalid(
                "volts_per_photon",
                format!("must be positive and finite, got {volts_per_photon}"),
            ));
        }
        Ok(Self { volts_per_photon })
    }

    pub fn photons(&self, volt_seconds: f64) -> f64 {
        volt_seconds / self.volts_per_photon
    }

    pub fn volt_seconds(&self, photons: f64) -> f64 {
        photons * self.volts_per_photon
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum StateKind {
    /// Triplet, S2 squeezed.
    PhiMinus,
    /// Triplet, S3 squeezed.
    PhiPlus,
    /// Triplet, S1 squeezed.
    PsiPlus,
    /// Singlet, all three Stokes observables squeezed.
    PsiMinus,
    PseudoCoherent,
    /// No light: only detector noise.
    ElectronicNoise,
}

impl StateKind {
    /// The single squeezed axis of a triplet state.
    pub fn squeezed_axis(self) -> Option<StokesAxis> {
        match self {
            StateKind::PsiPlus => Some(StokesAxis::S1),
            StateKind::PhiMinus => Some(StokesAxis::S2),
            StateKind::PhiPlus => Some(StokesAxis::S3),
            _ => None,
        }
    }

    pub fn is_bell(self) -> bool {
        matches!(self, StateKind::PhiMinus | StateKind::PhiPlus | StateKind::PsiPlus | StateKind::PsiMinus)
    }
}

/// Mean photon number per mode of a parametric amplifier with gain `Γ`:
/// `sinh²Γ`.
pub fn mean_photons_from_gain(gain: f64) -> f64 {
    gain.sinh().powi(2)
}

/// Construction parameters for [`make_state`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StateParams {
    pub kind: StateKind,
    /// `⟨N⟩` before losses.
    pub mean_photons: f64,
    /// Parametric gain `Γ`, kept for bookkeeping.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub gain: Option<f64>,
    /// Squeezed variance in shot-noise units (`ξ`).
    #[serde(default = "default_squeeze")]
    pub squeeze: f64,
    /// Anti-squeezed variance in shot-noise units (`ζ`).
    #[serde(default = "default_antisqueeze")]
    pub antisqueeze: f64,
    #[serde(default = "default_one")]
    pub g2: f64,
    /// Overall detection efficiency `η`.
    #[serde(default = "default_one")]
    pub efficiency: f64,
    #[serde(default)]
    pub calibration: Calibration,
    /// Electronic noise standard deviation per detector, in V·s.
    #[serde(default)]
    pub electronic_noise_std: f64,
    /// Polarization direction of the pseudo-coherent beam (normalized on use).
    #[serde(default = "default_polarization")]
    pub polarization: [f64; 3],
    /// Pseudo-coherent only: excess noise cancels in balanced detection, so
    /// every Stokes variance is the shot noise `⟨N⟩`.
    #[serde(default)]
    pub balanced_detection: bool,
}

fn default_squeeze() -> f64 {
    0.5
}

fn default_antisqueeze() -> f64 {
    2.0
}

fn default_one() -> f64 {
    1.0
}

fn default_polarization() -> [f64; 3] {
    [1.0, 0.0, 0.0]
}

impl StateParams {
    pub fn new(kind: StateKind, mean_photons: f64) -> Self {
        Self {
            kind,
            mean_photons,
            gain: None,
            squeeze: default_squeeze(),
            antisqueeze: default_antisqueeze(),
            g2: 1.0,
            efficiency: 1.0,
            calibration: Calibration::default(),
            electronic_noise_std: 0.0,
            polarization: default_polarization(),
            balanced_detection: false,
        }
    }

    /// Sets `⟨N⟩ = sinh²Γ` and records `Γ`.
    pub fn from_gain(kind: StateKind, gain: f64) -> Self {
        let mut p = Self::new(kind, mean_photons_from_gain(gain));
        p.gain = Some(gain);
        p
    }

    pub fn squeezing(mut self, squeeze: f64, antisqueeze: f64) -> Self {
        self.squeeze = squeeze;
        self.antisqueeze = antisqueeze;
        self
    }

    pub fn g2(mut self, g2: f64) -> Self {
        self.g2 = g2;
        self
    }

    pub fn efficiency(mut self, efficiency: f64) -> Self {
        self.efficiency = efficiency;
        self
    }

    pub fn electronic_noise(mut self, std_volt_seconds: f64) -> Self {
        self.electronic_noise_std = std_volt_seconds;
        self
    }

    pub fn calibration(mut self, calibration: Calibration) -> Self {
        self.calibration = calibration;
        self
    }

    pub fn balanced(mut self, balanced: bool) -> Self {
        self.balanced_detection = balanced;
        self
    }

    pub fn polarization(mut self, direction: [f64; 3]) -> Self {
        self.polarization = direction;
        self
    }

    pub fn validate(&self) -> Result<()> {
        let finite = |name: &'static str, v: f64| {
            if v.is_finite() {
                Ok(())
            } else {
                Err(TomoError::invalid(name, "must be finite"))
            }
        };
        finite("mean_photons", self.mean_photons)?;
        finite("squeeze", self.squeeze)?;
        finite("antisqueeze", self.antisqueeze)?;
        finite("g2", self.g2)?;
        finite("efficiency", self.efficiency)?;
        if self.kind != StateKind::ElectronicNoise && !(self.mean_photons > 0.0) {
            return Err(TomoError::invalid("mean_photons", format!("must be positive, got {}", self.mean_photons)));
        }
        // ξ = 0 is the ideal (noise-free) limit and is allowed.
        if !(0.0..=1.0).contains(&self.squeeze) {
            return Err(TomoError::invalid("squeeze", format!("must lie in [0, 1], got {}", self.squeeze)));
        }
        if self.antisqueeze < 1.0 {
            return Err(TomoError::invalid("antisqueeze", format!("must be at least 1, got {}", self.antisqueeze)));
        }
        if self.g2 < 1.0 {
            return Err(TomoError::invalid("g2", format!("must be at least 1, got {}", self.g2)));
        }
        if !(0.0..=1.0).contains(&self.efficiency) {
            return Err(TomoError::invalid("efficiency", format!("must lie in [0, 1], got {}", self.efficiency)));
        }
        Calibration::new(self.calibration.volts_per_photon)?;
        if !(self.electronic_noise_std >= 0.0 && self.electronic_noise_std.is_finite()) {
            return Err(TomoError::invalid(
                "electronic_noise_std",
                format!("must be non-negative, got {}", self.electronic_noise_std),
            ));
        }
        if self.kind == StateKind::PseudoCoherent && Vector3::from(self.polarization).norm() == 0.0 {
            return Err(TomoError::invalid("polarization", "must be a non-zero vector"));
        }
        if let Some(g) = self.gain {
            finite("gain", g)?;
        }
        Ok(())
    }
}

/// Statistical model of a light state in photon units.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StokesState {
    pub kind: StateKind,
    pub mean: StokesVector,
    pub covariance: Matrix3<f64>,
    pub gain: Option<f64>,
    pub g2: f64,
    pub efficiency: f64,
    pub calibration: Calibration,
    /// Per-detector electronic noise standard deviation, V·s.
    pub electronic_noise_std: f64,
}

/// Photon-number variance `⟨N⟩ + (g⁽²⁾ − 1)⟨N⟩²`.
pub fn photon_variance(mean_photons: f64, g2: f64) -> f64 {
    mean_photons + (g2 - 1.0) * mean_photons * mean_photons
}

/// Beam-splitter loss: `Var → η²·Var + η(1 − η)·⟨N⟩`.
pub fn lossy_variance(variance: f64, mean_photons: f64, efficiency: f64) -> f64 {
    efficiency * efficiency * variance + efficiency * (1.0 - efficiency) * mean_photons
}

/// Builds the ideal covariance of `params.kind` and passes it through the
/// detection loss.
pub fn make_state(params: &StateParams) -> Result<StokesState> {
    params.validate()?;
    let n = params.mean_photons;
    let eta = params.efficiency;
    let (mean, variances) = match params.kind {
        StateKind::ElectronicNoise => (StokesVector::unpolarized(0.0), Vector3::zeros()),
        StateKind::PsiMinus => (StokesVector::unpolarized(n), Vector3::repeat(params.squeeze * n)),
        StateKind::PhiMinus | StateKind::PhiPlus | StateKind::PsiPlus => {
            let mut v = Vector3::repeat(params.antisqueeze * n);
            let axis = params.kind.squeezed_axis().expect("triplet has a squeezed axis");
            v[axis.index()] = params.squeeze * n;
            (StokesVector::unpolarized(n), v)
        }
        StateKind::PseudoCoherent => {
            let p = Vector3::from(params.polarization).normalize() * n;
            let var = if params.balanced_detection { n } else { photon_variance(n, params.g2) };
            (StokesVector::new(n, p.x, p.y, p.z), Vector3::repeat(var))
        }
    };
    let lossy = variances.map(|v| lossy_variance(v, n, eta));
    let mean = if params.kind == StateKind::ElectronicNoise { mean } else { mean.scaled(eta) };
    Ok(StokesState {
        kind: params.kind,
        mean,
        covariance: Matrix3::from_diagonal(&lossy),
        gain: params.gain,
        g2: params.g2,
        efficiency: eta,
        calibration: params.calibration,
        electronic_noise_std: params.electronic_noise_std,
    })
}

impl StokesState {
    /// Detected mean photon number (`s0` after losses).
    pub fn mean_photons(&self) -> f64 {
        self.mean.s0
    }

    pub fn is_positive_semidefinite(&self) -> bool {
        let eig = SymmetricEigen::new(self.covariance).eigenvalues;
        let tol = 1e-9 * self.covariance.trace().abs().max(f64::MIN_POSITIVE);
        (self.covariance - self.covariance.transpose()).amax() <= tol && eig.iter().all(|&l| l >= -tol)
    }

    /// Mean and variance of `S·n` in photon units.
    pub fn projected_statistics(&self, d: &Direction) -> (f64, f64) {
        projected_statistics(self, d)
    }

    /// `k`-th central moment of `S·n` for the Gaussian model: `(k−1)!!·var^{k/2}`
    /// for even `k`, 0 for odd `k`.
    pub fn central_moment(&self, d: &Direction, k: u32) -> f64 {
        let (_, var) = projected_statistics(self, d);
        if k % 2 == 1 {
            return 0.0;
        }
        let double_factorial: f64 = (1..k).step_by(2).map(|j| j as f64).product();
        double_factorial * var.powi(k as i32 / 2)
    }
}

/// Projects the model on `n`: `(s·n, nᵀΣn)`.
pub fn projected_statistics(state: &StokesState, d: &Direction) -> (f64, f64) {
    let n = d.unit_vector();
    let mean = state.mean.polarization().dot(&n);
    let var = (n.transpose() * state.covariance * n)[(0, 0)];
    (mean, var.max(0.0))
}

/// Signal variance as a quadratic in mean signal `x` (V·s):
/// `a + b·x + c·x²`.
///
/// For a single detector `b` is the calibration and `c = g⁽²⁾ − 1`, so this
/// is the photon-number variance mapped into volt units plus an
/// electronic floor `a`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SignalVarianceModel {
    pub constant: f64,
    pub linear: f64,
    pub quadratic: f64,
}

impl SignalVarianceModel {
    /// The quadratic fit for the He–Ne pseudo-coherent source:
    /// `a = 3×10⁻¹⁷ V²s²`, `b = 1×10⁻¹¹ V·s`, `c = 6.0×10⁻⁶`.
    pub fn he_ne_fit() -> Self {
        Self { constant: 3e-17, linear: 1e-11, quadratic: 6.0e-6 }
    }

    pub fn from_photon_statistics(calibration: Calibration, g2: f64, electronic_variance: f64) -> Self {
        Self { constant: electronic_variance, linear: calibration.volts_per_photon, quadratic: g2 - 1.0 }
    }

    /// Implied `g⁽²⁾`.
    pub fn g2(&self) -> f64 {
        1.0 + self.quadratic
    }

    /// Variance at mean signal `x` (V·s).
    pub fn variance(&self, x: f64) -> f64 {
        self.constant + self.linear * x + self.quadratic * x * x
    }

    /// Same variance computed through the photon model:
    /// `v²·Var(N = x/v) + a`.
    pub fn variance_via_photons(&self, x: f64) -> f64 {
        let v = self.linear;
        self.constant + v * v * photon_variance(x / v, self.g2())
    }

    /// Difference-signal model under balanced detection as a function of the
    /// mean sum signal: excess noise cancels and both detectors contribute
    /// their electronic floor.
    pub fn balanced(&self) -> Self {
        Self { constant: 2.0 * self.constant, linear: self.linear, quadratic: 0.0 }
    }
}

/// Integrated signals of both detectors for one light pulse, in V·s.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PulseRecord {
    pub d1: f64,
    pub d2: f64,
}

impl PulseRecord {
    /// Stokes-observable sample.
    pub fn difference(&self) -> f64 {
        self.d1 - self.d2
    }

    /// `S0` sample.
    pub fn sum(&self) -> f64 {
        self.d1 + self.d2
    }
}

/// Draws `n_pulses` records of the state analysed along `d`.
///
/// Per pulse, the photon-number difference is `Normal(s·n, nᵀΣn)` and the
/// sum is `Normal(s0, Var(N))`, drawn independently. Each detector then
/// gets independent electronic noise. The same arguments always give
/// bit-identical output.
pub fn sample_pulses(state: &StokesState, d: &Direction, n_pulses: usize, seed: u64) -> Result<Vec<PulseRecord>> {
    if n_pulses == 0 {
        return Err(TomoError::invalid("n_pulses", "must be at least 1"));
    }
    let (mean_diff, var_diff) = projected_statistics(state, d);
    let sd_diff = var_diff.sqrt();
    let mean_sum = state.mean.s0;
    let sd_sum = photon_variance(mean_sum, state.g2).max(0.0).sqrt();
    let v = state.calibration.volts_per_photon;
    let sd_e = state.electronic_noise_std;

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let records = (0..n_pulses)
        .map(|_| {
            let z_diff: f64 = rng.sample(StandardNormal);
            let z_sum: f64 = rng.sample(StandardNormal);
            let z1: f64 = rng.sample(StandardNormal);
            let z2: f64 = rng.sample(StandardNormal);
            let diff = mean_diff + sd_diff * z_diff;
            let sum = mean_sum + sd_sum * z_sum;
            PulseRecord { d1: v * 0.5 * (sum + diff) + sd_e * z1, d2: v * 0.5 * (sum - diff) + sd_e * z2 }
        })
        .collect();
    Ok(records)
}

/// Mixes a stream index into a base seed (SplitMix64 finalizer).
pub fn derive_seed(base: u64, stream: u64) -> u64 {
    let mut z = base ^ stream.wrapping_add(1).wrapping_mul(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}
