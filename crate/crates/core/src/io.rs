//! On-disk formats.
//!
//! | file            | format                                                     |
//! |-----------------|------------------------------------------------------------|
//! | config          | TOML ([`ExperimentConfig`])                                |
//! | manifest        | TOML ([`Manifest`])                                        |
//! | pulse records   | CSV `pulse_index,d1,d2` after a `# format_version=1` line  |
//! | tomograms       | TOML ([`TomogramFile`])                                    |
//! | volume          | TOML header ([`VolumeHeader`]) + flat little-endian `f64`, x fastest |
//! | isosurface      | ASCII PLY                                                  |
//! | slices          | CSV matrices                                               |
//!
//! Every file carries `format_version`; readers reject anything else.

use std::fs;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use crate::analysis::{IsoSurface, Slice};
use crate::error::{Result, TomoError};
use crate::histogram::GaussianFit;
use crate::radon::{AxisUnits, Normalization, QpdVolume, VolumeSpec};
use crate::states::{Calibration, PulseRecord, StateKind, StateParams};
use crate::stokes::{AngleSteps, GridSpec, Sign, StokesAxis};

pub const FORMAT_VERSION: u32 = 1;

const CSV_VERSION_LINE: &str = "# format_version=1";

/// How to fill the hemisphere beyond the measured directions.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum GridCompletion {
    #[default]
    None,
    MirrorS1,
    MirrorS2,
    MirrorS3,
}

impl GridCompletion {
    pub fn axis(self) -> Option<StokesAxis> {
        match self {
            GridCompletion::None => None,
            GridCompletion::MirrorS1 => Some(StokesAxis::S1),
            GridCompletion::MirrorS2 => Some(StokesAxis::S2),
            GridCompletion::MirrorS3 => Some(StokesAxis::S3),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridConfig {
    pub alpha: AngleSteps,
    pub beta: AngleSteps,
    #[serde(default)]
    pub completion: GridCompletion,
}

impl GridConfig {
    pub fn new(spec: GridSpec, completion: GridCompletion) -> Self {
        Self { alpha: spec.alpha, beta: spec.beta, completion }
    }

    pub fn spec(&self) -> GridSpec {
        GridSpec { alpha: self.alpha, beta: self.beta }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AcquisitionConfig {
    pub n_pulses: usize,
    pub seed: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct VolumeConfig {
    pub resolution: usize,
    /// Fixed half-width in V·s; derived from the tomograms when absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub extent: Option<f64>,
    /// Zero all tomogram means before reconstructing.
    #[serde(default)]
    pub recenter: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AnalysisConfig {
    pub threshold_fraction: f64,
    pub deconvolve_noise: bool,
    /// Multiplies deviations from the centre in exported isosurfaces only.
    #[serde(default = "one")]
    pub display_scale_std: f64,
}

fn one() -> f64 {
    1.0
}

/// Everything needed to run the pipeline end to end.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub format_version: u32,
    pub state: StateParams,
    pub grid: GridConfig,
    pub acquisition: AcquisitionConfig,
    pub volume: VolumeConfig,
    pub analysis: AnalysisConfig,
}

impl ExperimentConfig {
    /// 3×10⁵ photons, 19×19 waveplate grid, 20000 pulses, 61³ voxels,
    /// `1/√e` threshold, electronic-noise deconvolution on.
    pub fn standard(kind: StateKind) -> Self {
        let mut state = StateParams::new(kind, 3e5).electronic_noise(2e-9);
        if kind == StateKind::PseudoCoherent {
            state = state.balanced(true);
        }
        Self {
            format_version: FORMAT_VERSION,
            state,
            grid: GridConfig::new(GridSpec::standard(), GridCompletion::MirrorS2),
            acquisition: AcquisitionConfig { n_pulses: 20000, seed: 1 },
            volume: VolumeConfig {
                resolution: crate::radon::DEFAULT_RESOLUTION,
                extent: None,
                recenter: kind == StateKind::PseudoCoherent,
            },
            analysis: AnalysisConfig {
                threshold_fraction: crate::analysis::INV_SQRT_E,
                deconvolve_noise: true,
                display_scale_std: 1.0,
            },
        }
    }

    /// Field-level checks on everything except I/O.
    pub fn validate(&self) -> Result<()> {
        if self.format_version != FORMAT_VERSION {
            return Err(TomoError::invalid(
                "format_version",
                format!("expected {FORMAT_VERSION}, got {}", self.format_version),
            ));
        }
        self.state.validate()?;
        self.grid.spec().validate()?;
        if self.acquisition.n_pulses < 2 {
            return Err(TomoError::invalid(
                "acquisition.n_pulses",
                format!("must be at least 2, got {}", self.acquisition.n_pulses),
            ));
        }
        if let Some(extent) = self.volume.extent {
            VolumeSpec::new(extent, self.volume.resolution)?;
        } else {
            VolumeSpec::new(1.0, self.volume.resolution)?;
        }
        let f = self.analysis.threshold_fraction;
        if !(f > 0.0 && f < 1.0) {
            return Err(TomoError::invalid("analysis.threshold_fraction", format!("must lie in (0, 1), got {f}")));
        }
        let k = self.analysis.display_scale_std;
        if !(k > 0.0 && k.is_finite()) {
            return Err(TomoError::invalid("analysis.display_scale_std", format!("must be positive, got {k}")));
        }
        Ok(())
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config serializes")
    }

    pub fn from_toml(text: &str) -> std::result::Result<Self, toml::de::Error> {
        toml::from_str(text)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let cfg: Self = read_toml(path)?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        write_text(path, &self.to_toml())
    }
}

/// One record file of a dataset.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ManifestEntry {
    pub index: usize,
    pub alpha: f64,
    pub beta: f64,
    /// Analysed direction implied by (alpha, beta), degrees, informational.
    pub theta_deg: f64,
    pub phi_deg: f64,
    pub file: String,
    pub seed: u64,
}

/// Index of a pulse-record dataset directory.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Manifest {
    pub format_version: u32,
    pub kind: StateKind,
    pub n_pulses: usize,
    pub seed: u64,
    pub calibration: Calibration,
    pub grid: GridSpec,
    pub entries: Vec<ManifestEntry>,
}

pub const MANIFEST_FILE: &str = "manifest.toml";

impl Manifest {
    pub fn load(dir: &Path) -> Result<Self> {
        read_toml(&dir.join(MANIFEST_FILE))
    }

    pub fn save(&self, dir: &Path) -> Result<()> {
        write_text(&dir.join(MANIFEST_FILE), &toml::to_string(self).expect("manifest serializes"))
    }
}

#[derive(Debug, Serialize, Deserialize)]
struct PulseRow {
    pulse_index: usize,
    d1: f64,
    d2: f64,
}

pub fn write_pulses(path: &Path, records: &[PulseRecord]) -> Result<()> {
    let file = fs::File::create(path).map_err(|e| TomoError::io(path, e))?;
    let mut out = BufWriter::new(file);
    writeln!(out, "{CSV_VERSION_LINE}").map_err(|e| TomoError::io(path, e))?;
    let mut w = csv::Writer::from_writer(out);
    for (i, r) in records.iter().enumerate() {
        w.serialize(PulseRow { pulse_index: i, d1: r.d1, d2: r.d2 })
            .map_err(|e| TomoError::format(path, e.to_string()))?;
    }
    w.flush().map_err(|e| TomoError::io(path, e))
}

pub fn read_pulses(path: &Path) -> Result<Vec<PulseRecord>> {
    let text = fs::read_to_string(path).map_err(|e| TomoError::io(path, e))?;
    let body = check_csv_version(path, &text)?;
    let mut r = csv::ReaderBuilder::new().has_headers(true).from_reader(body.as_bytes());
    let headers = r.headers().map_err(|e| TomoError::format(path, e.to_string()))?.clone();
    if headers.iter().collect::<Vec<_>>() != ["pulse_index", "d1", "d2"] {
        return Err(TomoError::format(path, "expected columns pulse_index,d1,d2"));
    }
    r.deserialize::<PulseRow>()
        .map(|row| {
            row.map(|p| PulseRecord { d1: p.d1, d2: p.d2 })
                .map_err(|e| TomoError::format(path, e.to_string()))
        })
        .collect()
}

fn check_csv_version<'a>(path: &Path, text: &'a str) -> Result<&'a str> {
    let (first, rest) = text.split_once('\n').unwrap_or((text, ""));
    let first = first.trim_end();
    let version = first
        .strip_prefix("# format_version=")
        .ok_or_else(|| TomoError::format(path, "missing `# format_version=` line"))?;
    let found: u32 = version.parse().map_err(|_| TomoError::format(path, format!("bad version `{version}`")))?;
    if found != FORMAT_VERSION {
        return Err(TomoError::FormatVersion { path: path.to_path_buf(), found, expected: FORMAT_VERSION });
    }
    Ok(rest)
}

/// Where a tomogram came from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum TomogramOrigin {
    Measured,
    Mirrored,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TomogramRecord {
    /// Canonical direction, radians.
    pub theta: f64,
    pub phi: f64,
    pub sign: Sign,
    pub origin: TomogramOrigin,
    /// Waveplate settings pooled into this direction.
    pub settings: usize,
    pub raw: GaussianFit,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub deconvolved: Option<GaussianFit>,
}

/// A directory entry skipped because noise dominated it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SkippedDirection {
    pub theta_deg: f64,
    pub phi_deg: f64,
    pub reason: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TomogramFile {
    pub format_version: u32,
    pub d_theta: f64,
    pub d_phi: f64,
    /// Mean of `d1 + d2` over all signal pulses, V·s.
    pub mean_sum_signal: f64,
    pub calibration: Calibration,
    pub completion: GridCompletion,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub noise: Option<GaussianFit>,
    #[serde(default)]
    pub skipped: Vec<SkippedDirection>,
    pub tomograms: Vec<TomogramRecord>,
}

impl TomogramFile {
    pub fn load(path: &Path) -> Result<Self> {
        read_toml(path)
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        write_text(path, &toml::to_string(self).expect("tomograms serialize"))
    }
}

/// Summary written next to a reconstructed volume.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VolumeSummary {
    pub max: f64,
    pub argmax: [f64; 3],
    pub clamped_fraction: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct VolumeHeader {
    pub format_version: u32,
    /// Binary payload, relative to the header.
    pub data_file: String,
    pub byte_order: String,
    pub voxel_order: String,
    pub extent: f64,
    pub resolution: usize,
    pub normalization: Normalization,
    pub units: AxisUnits,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mean_sum_signal: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub calibration: Option<Calibration>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub summary: Option<VolumeSummary>,
}

/// A volume plus the acquisition context needed to analyse it.
#[derive(Debug, Clone, PartialEq)]
pub struct StoredVolume {
    pub volume: QpdVolume,
    pub mean_sum_signal: Option<f64>,
    pub calibration: Option<Calibration>,
    pub summary: Option<VolumeSummary>,
}

/// Writes `<header>` and its `.f64` payload next to it.
pub fn write_volume(header_path: &Path, stored: &StoredVolume) -> Result<()> {
    let data_path = header_path.with_extension("f64");
    let data_file = data_path
        .file_name()
        .and_then(|s| s.to_str())
        .ok_or_else(|| TomoError::format(header_path, "header path has no file name"))?
        .to_string();
    let v = &stored.volume;
    let header = VolumeHeader {
        format_version: FORMAT_VERSION,
        data_file,
        byte_order: "little-endian".into(),
        voxel_order: "x-fastest".into(),
        extent: v.spec.extent,
        resolution: v.spec.resolution,
        normalization: v.normalization,
        units: v.units,
        mean_sum_signal: stored.mean_sum_signal,
        calibration: stored.calibration,
        summary: stored.summary.clone(),
    };
    let mut bytes = Vec::with_capacity(v.values.len() * 8);
    for x in &v.values {
        bytes.extend_from_slice(&x.to_le_bytes());
    }
    fs::write(&data_path, bytes).map_err(|e| TomoError::io(&data_path, e))?;
    write_text(header_path, &toml::to_string(&header).expect("header serializes"))
}

pub fn read_volume(header_path: &Path) -> Result<StoredVolume> {
    let header: VolumeHeader = read_toml(header_path)?;
    if header.byte_order != "little-endian" || header.voxel_order != "x-fastest" {
        return Err(TomoError::format(header_path, "only little-endian, x-fastest volumes are supported"));
    }
    let spec = VolumeSpec::new(header.extent, header.resolution)
        .map_err(|e| TomoError::format(header_path, e.to_string()))?;
    let data_path = header_path.parent().unwrap_or(Path::new(".")).join(&header.data_file);
    let bytes = fs::read(&data_path).map_err(|e| TomoError::io(&data_path, e))?;
    if bytes.len() != spec.voxel_count() * 8 {
        return Err(TomoError::format(
            &data_path,
            format!("expected {} bytes, found {}", spec.voxel_count() * 8, bytes.len()),
        ));
    }
    let values = bytes.chunks_exact(8).map(|c| f64::from_le_bytes(c.try_into().expect("8 bytes"))).collect();
    Ok(StoredVolume {
        volume: QpdVolume { spec, values, normalization: header.normalization, units: header.units },
        mean_sum_signal: header.mean_sum_signal,
        calibration: header.calibration,
        summary: header.summary,
    })
}

/// ASCII PLY with `double` vertices and, when present, triangle faces.
pub fn write_ply(path: &Path, surface: &IsoSurface, transform: impl Fn(&nalgebra::Vector3<f64>) -> [f64; 3]) -> Result<()> {
    let mut s = String::new();
    let faces = surface.triangles.as_deref().unwrap_or(&[]);
    s.push_str("ply\nformat ascii 1.0\n");
    s.push_str(&format!("comment format_version {FORMAT_VERSION}\n"));
    s.push_str(&format!("comment threshold_fraction {}\n", surface.threshold_fraction));
    s.push_str(&format!("element vertex {}\n", surface.points.len()));
    s.push_str("property double x\nproperty double y\nproperty double z\n");
    s.push_str(&format!("element face {}\n", faces.len()));
    s.push_str("property list uchar int vertex_indices\nend_header\n");
    for p in &surface.points {
        let [x, y, z] = transform(p);
        s.push_str(&format!("{x} {y} {z}\n"));
    }
    for t in faces {
        s.push_str(&format!("3 {} {} {}\n", t[0], t[1], t[2]));
    }
    write_text(path, &s)
}

/// First column holds row coordinates, first row column coordinates.
pub fn write_slice(path: &Path, slice: &Slice) -> Result<()> {
    let n = slice.coordinates.len();
    let mut s = String::new();
    s.push_str(CSV_VERSION_LINE);
    s.push('\n');
    s.push_str(&format!(
        "# normal={} fixed={} rows={} cols={}\n",
        slice.normal, slice.fixed_coordinate, slice.axes[0], slice.axes[1]
    ));
    s.push_str(&format!("{}\\{}", slice.axes[0], slice.axes[1]));
    for c in &slice.coordinates {
        s.push_str(&format!(",{c}"));
    }
    s.push('\n');
    for r in 0..n {
        s.push_str(&slice.coordinates[r].to_string());
        for c in 0..n {
            s.push_str(&format!(",{}", slice.values[r * n + c]));
        }
        s.push('\n');
    }
    write_text(path, &s)
}

#[derive(Deserialize)]
struct VersionProbe {
    format_version: Option<u32>,
}

/// Parses a TOML file after checking its `format_version`.
pub fn read_toml<T: DeserializeOwned>(path: &Path) -> Result<T> {
    let text = fs::read_to_string(path).map_err(|e| TomoError::io(path, e))?;
    let probe: VersionProbe = toml::from_str(&text).map_err(|e| TomoError::format(path, e.to_string()))?;
    match probe.format_version {
        None => return Err(TomoError::format(path, "missing `format_version`")),
        Some(v) if v != FORMAT_VERSION => {
            return Err(TomoError::FormatVersion { path: path.to_path_buf(), found: v, expected: FORMAT_VERSION })
        }
        Some(_) => {}
    }
    toml::from_str(&text).map_err(|e| TomoError::format(path, e.to_string()))
}

pub fn write_text(path: &Path, text: &str) -> Result<()> {
    fs::write(path, text).map_err(|e| TomoError::io(path, e))
}

pub fn create_dir(path: &Path) -> Result<PathBuf> {
    fs::create_dir_all(path).map_err(|e| TomoError::io(path, e))?;
    Ok(path.to_path_buf())
}
