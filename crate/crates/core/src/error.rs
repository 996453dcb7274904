use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = TomoError> = std::result::Result<T, E>;

/// Every failure the library can report.
///
/// Variants fall into three classes that the `tomo` binary maps onto its
/// exit codes: validation (1), runtime/numerical (2) and I/O or file
/// format (3). See [`TomoError::exit_code`].
#[derive(Debug, Error)]
pub enum TomoError {
    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("empty waveplate grid: alpha_count and beta_count must both be at least 1")]
    EmptyGrid,

    #[error("degenerate samples: all {count} values equal {value} (delta distribution)")]
    DegenerateSamples { count: usize, value: f64 },

    #[error("noise-dominated input: signal std {signal_std:e} <= noise std {noise_std:e}")]
    NoiseDominated { signal_std: f64, noise_std: f64 },

    #[error("extremal moments sum to zero; degree of polarization undefined")]
    ZeroMomentSum,

    #[error("need at least 3 tomograms whose directions span all three Stokes axes (got {count})")]
    InsufficientDirections { count: usize },

    #[error("covariance matrix is not positive definite")]
    SingularCovariance,

    #[error("volume maximum {max:e} is not positive")]
    NonPositiveMaximum { max: f64 },

    #[error("empty level set: threshold fraction {fraction} is not below the volume maximum")]
    EmptyLevelSet { fraction: f64 },

    #[error("volume has zero total mass after clamping")]
    ZeroMass,

    #[error("direction (theta = {theta_deg:.4} deg, phi = {phi_deg:.4} deg): {source}")]
    AtDirection {
        theta_deg: f64,
        phi_deg: f64,
        #[source]
        source: Box<TomoError>,
    },

    #[error("{path}: unsupported format version {found} (this build reads version {expected})")]
    FormatVersion { path: PathBuf, found: u32, expected: u32 },

    #[error("{path}: malformed file: {reason}")]
    Format { path: PathBuf, reason: String },

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl TomoError {
    pub fn invalid(name: &'static str, reason: impl Into<String>) -> Self {
        TomoError::InvalidParameter { name, reason: reason.into() }
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        TomoError::Io { path: path.into(), source }
    }

    pub(crate) fn format(path: impl Into<PathBuf>, reason: impl Into<String>) -> Self {
        TomoError::Format { path: path.into(), reason: reason.into() }
    }

    /// Process exit code: 1 validation, 2 runtime/numerical, 3 I/O.
    pub fn exit_code(&self) -> i32 {
        match self {
            TomoError::InvalidParameter { .. } | TomoError::EmptyGrid => 1,
            TomoError::FormatVersion { .. } | TomoError::Format { .. } | TomoError::Io { .. } => 3,
            TomoError::AtDirection { source, .. } => source.exit_code(),
            _ => 2,
        }
    }
}
