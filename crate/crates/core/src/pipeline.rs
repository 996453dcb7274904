//! simulate → fit → reconstruct → analyze.
//!
//! Each stage exists twice: an in-memory function working on library types,
//! and a `cmd_*` wrapper that reads and writes the files described in
//! [`crate::io`]. Per-direction work runs on the rayon pool; every output is
//! assembled in grid order, so results do not depend on the thread count.

use std::path::{Path, PathBuf};

use nalgebra::Vector3;
use rayon::prelude::*;
use serde::Serialize;

use crate::analysis::{
    extract_isosurface, slices_through_max, squeezing_report, volume_covariance, IsoSurface, SqueezingReport,
};
use crate::error::{Result, TomoError};
use crate::histogram::{deconvolve_noise, fit_gaussian, GaussianFit, Tomogram, TomogramSet};
use crate::io::{
    self, ExperimentConfig, GridCompletion, Manifest, ManifestEntry, SkippedDirection, StoredVolume, TomogramFile,
    TomogramOrigin, TomogramRecord, VolumeSummary, FORMAT_VERSION,
};
use crate::radon::{reconstruct, AxisUnits, QpdVolume, VolumeSpec};
use crate::states::{derive_seed, make_state, sample_pulses, Calibration, PulseRecord, StateKind, StokesState};
use crate::stokes::{canonicalize_direction, waveplate_to_direction, Direction, GridSpec, Sign, WavePlateSetting};

/// Stream index reserved for the electronic-noise recording.
const NOISE_STREAM: u64 = u64::MAX;

/// Pulse records for every waveplate setting, in `settings` order.
pub fn simulate_records(
    state: &StokesState,
    settings: &[WavePlateSetting],
    n_pulses: usize,
    seed: u64,
) -> Result<Vec<Vec<PulseRecord>>> {
    settings
        .par_iter()
        .enumerate()
        .map(|(i, s)| sample_pulses(state, &waveplate_to_direction(*s), n_pulses, derive_seed(seed, i as u64)))
        .collect()
}

/// Electronic noise only: the same detectors with the light blocked.
pub fn simulate_noise(state: &StokesState, n_pulses: usize, seed: u64) -> Result<Vec<PulseRecord>> {
    let mut dark = state.clone();
    dark.kind = StateKind::ElectronicNoise;
    dark.mean = crate::stokes::StokesVector::unpolarized(0.0);
    dark.covariance = nalgebra::Matrix3::zeros();
    sample_pulses(&dark, &Direction::new(0.0, 0.0), n_pulses, derive_seed(seed, NOISE_STREAM))
}

/// Fits for one distinct canonical direction.
#[derive(Debug, Clone, PartialEq)]
pub struct DirectionFit {
    pub direction: Direction,
    /// Settings pooled into this direction.
    pub settings: usize,
    /// Fit of the pooled difference signal, oriented along `direction`.
    pub raw: GaussianFit,
    pub deconvolved: Option<GaussianFit>,
}

/// Result of the fitting stage.
#[derive(Debug, Clone, PartialEq)]
pub struct FitOutcome {
    pub directions: Vec<DirectionFit>,
    pub noise: Option<GaussianFit>,
    pub skipped: Vec<SkippedDirection>,
    /// Mean sum signal `S0` in V·s (noise offset removed when known).
    pub mean_sum_signal: f64,
}

fn at_direction(d: &Direction, err: TomoError) -> TomoError {
    TomoError::AtDirection { theta_deg: d.theta_deg(), phi_deg: d.phi_deg(), source: Box::new(err) }
}

/// Groups settings by canonical direction, pools their difference signals
/// (mirrored `S → −S` for antipodal settings), fits each group and, given
/// noise records, deconvolves the electronic noise.
///
/// Noise-dominated directions fail the run unless `allow_skip` is set, in
/// which case they are dropped and listed in [`FitOutcome::skipped`].
pub fn fit_records(
    settings: &[WavePlateSetting],
    records: &[Vec<PulseRecord>],
    noise: Option<&[PulseRecord]>,
    allow_skip: bool,
) -> Result<FitOutcome> {
    if settings.len() != records.len() {
        return Err(TomoError::invalid("records", "one record list per setting is required"));
    }
    let mut groups: Vec<(Direction, Vec<usize>, Vec<Sign>)> = Vec::new();
    for (i, s) in settings.iter().enumerate() {
        let (c, sign) = canonicalize_direction(waveplate_to_direction(*s));
        match groups.iter_mut().find(|g| g.0.approx_eq(&c)) {
            Some(g) => {
                g.1.push(i);
                g.2.push(sign);
            }
            None => groups.push((c, vec![i], vec![sign])),
        }
    }

    let noise_fit = match noise {
        Some(n) => {
            let diffs: Vec<f64> = n.iter().map(PulseRecord::difference).collect();
            Some(fit_gaussian(&diffs).map_err(|e| TomoError::invalid("noise", e.to_string()))?)
        }
        None => None,
    };

    let fitted: Vec<Result<std::result::Result<DirectionFit, SkippedDirection>>> = groups
        .par_iter()
        .map(|(dir, members, signs)| {
            let pooled: Vec<f64> = members
                .iter()
                .zip(signs)
                .flat_map(|(&i, s)| records[i].iter().map(move |r| s.value() * r.difference()))
                .collect();
            let raw = fit_gaussian(&pooled).map_err(|e| at_direction(dir, e))?;
            let deconvolved = match &noise_fit {
                None => None,
                Some(nf) => match deconvolve_noise(&raw, nf) {
                    Ok(f) => Some(f),
                    Err(e) if allow_skip => {
                        return Ok(Err(SkippedDirection {
                            theta_deg: dir.theta_deg(),
                            phi_deg: dir.phi_deg(),
                            reason: e.to_string(),
                        }))
                    }
                    Err(e) => return Err(at_direction(dir, e)),
                },
            };
            Ok(Ok(DirectionFit { direction: *dir, settings: members.len(), raw, deconvolved }))
        })
        .collect();

    let mut directions = Vec::new();
    let mut skipped = Vec::new();
    for r in fitted {
        match r? {
            Ok(d) => directions.push(d),
            Err(s) => skipped.push(s),
        }
    }

    let (sum, count) = records
        .iter()
        .flatten()
        .fold((0.0, 0usize), |(s, c), r| (s + r.sum(), c + 1));
    let noise_sum = noise
        .map(|n| n.iter().map(PulseRecord::sum).sum::<f64>() / n.len() as f64)
        .unwrap_or(0.0);
    Ok(FitOutcome { directions, noise: noise_fit, skipped, mean_sum_signal: sum / count as f64 - noise_sum })
}

impl FitOutcome {
    /// Tomograms from deconvolved fits when available, raw fits otherwise,
    /// completed by reflection when requested.
    pub fn tomogram_set(&self, grid: &GridSpec, completion: GridCompletion) -> TomogramSet {
        let tomograms = self
            .directions
            .iter()
            .map(|d| Tomogram { direction: d.direction, sign: Sign::Plus, fit: d.deconvolved.unwrap_or(d.raw), weight: None })
            .collect();
        let set = TomogramSet::new(tomograms, grid.d_theta(), grid.d_phi());
        match completion.axis() {
            Some(axis) => set.mirror_completed(axis),
            None => set,
        }
    }

    fn to_file(&self, grid: &GridSpec, completion: GridCompletion, calibration: Calibration) -> TomogramFile {
        let mut records: Vec<TomogramRecord> = self
            .directions
            .iter()
            .map(|d| TomogramRecord {
                theta: d.direction.theta,
                phi: d.direction.phi,
                sign: Sign::Plus,
                origin: TomogramOrigin::Measured,
                settings: d.settings,
                raw: d.raw,
                deconvolved: d.deconvolved,
            })
            .collect();
        if let Some(axis) = completion.axis() {
            let measured = records.clone();
            for r in &measured {
                let m = crate::stokes::mirror_direction(Direction::new(r.theta, r.phi), axis);
                let (c, sign) = canonicalize_direction(m);
                if !records.iter().any(|x| Direction::new(x.theta, x.phi).approx_eq(&c)) {
                    records.push(TomogramRecord {
                        theta: c.theta,
                        phi: c.phi,
                        sign,
                        origin: TomogramOrigin::Mirrored,
                        ..r.clone()
                    });
                }
            }
        }
        TomogramFile {
            format_version: FORMAT_VERSION,
            d_theta: grid.d_theta(),
            d_phi: grid.d_phi(),
            mean_sum_signal: self.mean_sum_signal,
            calibration,
            completion,
            noise: self.noise,
            skipped: self.skipped.clone(),
            tomograms: records,
        }
    }
}

impl TomogramFile {
    /// Tomograms for reconstruction: deconvolved fits where present.
    pub fn tomogram_set(&self) -> TomogramSet {
        let tomograms = self
            .tomograms
            .iter()
            .map(|r| Tomogram {
                direction: Direction::new(r.theta, r.phi),
                sign: r.sign,
                fit: r.deconvolved.unwrap_or(r.raw),
                weight: None,
            })
            .collect();
        TomogramSet::new(tomograms, self.d_theta, self.d_phi)
    }
}

/// Volume for a tomogram set under a volume configuration (V·s axes).
pub fn reconstruct_volume(set: &TomogramSet, cfg: &io::VolumeConfig) -> Result<QpdVolume> {
    let set = if cfg.recenter { set.recentered() } else { set.clone() };
    let spec = match cfg.extent {
        Some(extent) => VolumeSpec::new(extent, cfg.resolution)?,
        None => VolumeSpec::for_tomograms(&set, cfg.resolution)?,
    };
    let mut vol = reconstruct(&set, &spec)?;
    vol.units = AxisUnits::VoltSeconds;
    Ok(vol)
}

pub fn summarize(volume: &QpdVolume) -> Result<VolumeSummary> {
    let (max, _) = volume.max();
    let moments = volume_covariance(volume)?;
    Ok(VolumeSummary { max, argmax: volume.argmax_position().into(), clamped_fraction: moments.clamped_fraction })
}

/// Squeezing report plus the isosurface at the configured threshold.
#[derive(Debug, Clone, PartialEq)]
pub struct Analysis {
    pub report: SqueezingReport,
    pub isosurface: IsoSurface,
    /// Isosurface half-widths along S1, S2, S3 about the volume peak, photons.
    pub iso_extents: [f64; 3],
    pub mean_photons: f64,
}

pub fn analyze_volume(
    volume: &QpdVolume,
    mean_photons: f64,
    calibration: &Calibration,
    threshold_fraction: f64,
) -> Result<Analysis> {
    let report = squeezing_report(volume, mean_photons, calibration)?;
    let isosurface = extract_isosurface(volume, threshold_fraction)?;
    let k = crate::analysis::photons_per_unit(volume.units, calibration);
    let iso_extents = isosurface.axis_extents(&volume.argmax_position()).map(|e| e * k);
    Ok(Analysis { report, isosurface, iso_extents, mean_photons })
}

/// In-memory simulate → fit → reconstruct → analyze for one config.
#[derive(Debug, Clone)]
pub struct PipelineRun {
    pub state: StokesState,
    pub fit: FitOutcome,
    pub tomograms: TomogramSet,
    pub volume: QpdVolume,
    pub analysis: Analysis,
}

pub fn run_in_memory(cfg: &ExperimentConfig) -> Result<PipelineRun> {
    cfg.validate()?;
    let state = make_state(&cfg.state)?;
    let settings = cfg.grid.spec().settings();
    let records = simulate_records(&state, &settings, cfg.acquisition.n_pulses, cfg.acquisition.seed)?;
    let noise = if cfg.analysis.deconvolve_noise {
        Some(simulate_noise(&state, cfg.acquisition.n_pulses, cfg.acquisition.seed)?)
    } else {
        None
    };
    let fit = fit_records(&settings, &records, noise.as_deref(), false)?;
    let tomograms = fit.tomogram_set(&cfg.grid.spec(), cfg.grid.completion);
    let volume = reconstruct_volume(&tomograms, &cfg.volume)?;
    let mean_photons = state.calibration.photons(fit.mean_sum_signal);
    let analysis = analyze_volume(&volume, mean_photons, &state.calibration, cfg.analysis.threshold_fraction)?;
    Ok(PipelineRun { state, fit, tomograms, volume, analysis })
}

// ---- file-based commands ----

/// Layout of a working directory.
#[derive(Debug, Clone)]
pub struct WorkDir {
    pub root: PathBuf,
}

impl WorkDir {
    pub fn new(root: impl Into<PathBuf>) -> Self {
        Self { root: root.into() }
    }
    pub fn signal(&self) -> PathBuf {
        self.root.join("signal")
    }
    pub fn noise(&self) -> PathBuf {
        self.root.join("noise")
    }
    pub fn tomograms(&self) -> PathBuf {
        self.root.join("tomograms.toml")
    }
    pub fn volume(&self) -> PathBuf {
        self.root.join("volume.toml")
    }
    pub fn analysis(&self) -> PathBuf {
        self.root.join("analysis")
    }
}

fn write_dataset(
    dir: &Path,
    kind: StateKind,
    cfg: &ExperimentConfig,
    settings: &[WavePlateSetting],
    records: &[Vec<PulseRecord>],
    seeds: &[u64],
) -> Result<Manifest> {
    io::create_dir(dir)?;
    let entries: Vec<ManifestEntry> = settings
        .iter()
        .enumerate()
        .map(|(i, s)| {
            let d = waveplate_to_direction(*s);
            ManifestEntry {
                index: i,
                alpha: s.alpha,
                beta: s.beta,
                theta_deg: d.theta_deg(),
                phi_deg: d.phi_deg(),
                file: format!("pulses_{i:04}.csv"),
                seed: seeds[i],
            }
        })
        .collect();
    entries
        .par_iter()
        .zip(records)
        .try_for_each(|(e, r)| io::write_pulses(&dir.join(&e.file), r))?;
    let manifest = Manifest {
        format_version: FORMAT_VERSION,
        kind,
        n_pulses: cfg.acquisition.n_pulses,
        seed: cfg.acquisition.seed,
        calibration: cfg.state.calibration,
        grid: cfg.grid.spec(),
        entries,
    };
    manifest.save(dir)?;
    Ok(manifest)
}

/// Writes `signal/` (one CSV per waveplate setting plus a manifest) and,
/// when noise deconvolution is enabled, `noise/`. The config is validated
/// before anything touches the disk.
pub fn cmd_simulate(cfg: &ExperimentConfig, out: &Path) -> Result<Manifest> {
    cfg.validate()?;
    let state = make_state(&cfg.state)?;
    let settings = cfg.grid.spec().settings();
    let seed = cfg.acquisition.seed;
    let records = simulate_records(&state, &settings, cfg.acquisition.n_pulses, seed)?;
    let wd = WorkDir::new(out);
    io::create_dir(out)?;
    cfg.save(&out.join("config.toml"))?;
    let seeds: Vec<u64> = (0..settings.len() as u64).map(|i| derive_seed(seed, i)).collect();
    let manifest = write_dataset(&wd.signal(), cfg.state.kind, cfg, &settings, &records, &seeds)?;
    if cfg.analysis.deconvolve_noise {
        let noise = simulate_noise(&state, cfg.acquisition.n_pulses, seed)?;
        let dark = [WavePlateSetting::new(0.0, 0.0)];
        write_dataset(&wd.noise(), StateKind::ElectronicNoise, cfg, &dark, &[noise], &[derive_seed(seed, NOISE_STREAM)])?;
    }
    Ok(manifest)
}

fn load_dataset(dir: &Path) -> Result<(Manifest, Vec<WavePlateSetting>, Vec<Vec<PulseRecord>>)> {
    let manifest = Manifest::load(dir)?;
    let settings: Vec<WavePlateSetting> =
        manifest.entries.iter().map(|e| WavePlateSetting::new(e.alpha, e.beta)).collect();
    let records = manifest
        .entries
        .par_iter()
        .map(|e| io::read_pulses(&dir.join(&e.file)))
        .collect::<Result<Vec<_>>>()?;
    Ok((manifest, settings, records))
}

/// Fits a dataset (and optional noise dataset) into a tomogram file.
pub fn cmd_fit(
    dataset: &Path,
    noise: Option<&Path>,
    completion: GridCompletion,
    allow_skip: bool,
    out_file: &Path,
) -> Result<TomogramFile> {
    let (manifest, settings, records) = load_dataset(dataset)?;
    let noise_records = match noise {
        Some(dir) => {
            let (_, _, recs) = load_dataset(dir)?;
            Some(recs.into_iter().flatten().collect::<Vec<_>>())
        }
        None => None,
    };
    let outcome = fit_records(&settings, &records, noise_records.as_deref(), allow_skip)?;
    let file = outcome.to_file(&manifest.grid, completion, manifest.calibration);
    if let Some(parent) = out_file.parent() {
        io::create_dir(parent)?;
    }
    file.save(out_file)?;
    Ok(file)
}

/// Reconstructs a tomogram file into `volume.toml` + `volume.f64`.
pub fn cmd_reconstruct(tomograms: &Path, volume_cfg: &io::VolumeConfig, out_header: &Path) -> Result<StoredVolume> {
    let file = TomogramFile::load(tomograms)?;
    let volume = reconstruct_volume(&file.tomogram_set(), volume_cfg)?;
    let stored = StoredVolume {
        summary: Some(summarize(&volume)?),
        volume,
        mean_sum_signal: Some(file.mean_sum_signal),
        calibration: Some(file.calibration),
    };
    if let Some(parent) = out_header.parent() {
        io::create_dir(parent)?;
    }
    io::write_volume(out_header, &stored)?;
    Ok(stored)
}

#[derive(Debug, Serialize)]
struct ReportFile<'a> {
    format_version: u32,
    mean_photons: f64,
    mean_sum_signal: Option<f64>,
    threshold_fraction: f64,
    isosurface_points: usize,
    isosurface_extents_photons: [f64; 3],
    report: &'a SqueezingReport,
}

/// Options that only affect exported files.
#[derive(Debug, Clone, Copy)]
pub struct ExportOptions {
    pub threshold_fraction: f64,
    pub display_scale_std: f64,
}

/// Writes `report.json`, `report.txt`, `isosurface.ply` and three slice CSVs.
///
/// The PLY is in units of `S0` when the volume records it; deviations from
/// the peak are multiplied by `display_scale_std` there and nowhere else.
pub fn cmd_analyze(volume_header: &Path, cfg: &ExperimentConfig, opts: ExportOptions, out: &Path) -> Result<Analysis> {
    let stored = io::read_volume(volume_header)?;
    let calibration = stored.calibration.unwrap_or(cfg.state.calibration);
    let mean_photons = match stored.mean_sum_signal {
        Some(s0) => calibration.photons(s0),
        None => make_state(&cfg.state)?.mean_photons(),
    };
    let analysis = analyze_volume(&stored.volume, mean_photons, &calibration, opts.threshold_fraction)?;
    io::create_dir(out)?;

    let report = ReportFile {
        format_version: FORMAT_VERSION,
        mean_photons,
        mean_sum_signal: stored.mean_sum_signal,
        threshold_fraction: opts.threshold_fraction,
        isosurface_points: analysis.isosurface.points.len(),
        isosurface_extents_photons: analysis.iso_extents,
        report: &analysis.report,
    };
    let json = serde_json::to_string_pretty(&report).expect("report serializes");
    io::write_text(&out.join("report.json"), &format!("{json}\n"))?;
    io::write_text(&out.join("report.txt"), &render_report(&analysis))?;

    let center = stored.volume.argmax_position();
    let unit_scale = match (stored.volume.units, stored.mean_sum_signal) {
        (AxisUnits::VoltSeconds, Some(s0)) => 1.0 / s0,
        _ => 1.0,
    };
    let k = opts.display_scale_std;
    io::write_ply(&out.join("isosurface.ply"), &analysis.isosurface, |p: &Vector3<f64>| {
        ((center + (p - center) * k) * unit_scale).into()
    })?;
    for slice in slices_through_max(&stored.volume) {
        let name = format!("slice_{}.csv", slice.normal.to_string().to_lowercase());
        io::write_slice(&out.join(name), &slice)?;
    }
    Ok(analysis)
}

pub fn render_report(a: &Analysis) -> String {
    let r = &a.report;
    let mut s = String::new();
    s.push_str(&format!("mean photon number      {:.6e}\n", a.mean_photons));
    s.push_str(&format!("shot-noise std          {:.6e}\n", r.shot_noise_std));
    for (axis, std) in crate::stokes::StokesAxis::ALL.iter().zip(r.axis_stds) {
        s.push_str(&format!(
            "{axis} std                  {:.6e}  ({:.4} x shot noise)\n",
            std,
            std / r.shot_noise_std
        ));
    }
    let squeezed: Vec<String> = r.squeezed_axes.iter().map(|a| a.to_string()).collect();
    s.push_str(&format!(
        "squeezed axes           {}\n",
        if squeezed.is_empty() { "none".to_string() } else { squeezed.join(", ") }
    ));
    s.push_str(&format!("second-order DOP        {:.6}\n", r.dop2));
    s.push_str(&format!("clamped mass fraction   {:.6}\n", r.clamped_fraction));
    s.push_str(&format!(
        "isosurface extents      {:.6e} {:.6e} {:.6e}  (threshold {:.6})\n",
        a.iso_extents[0], a.iso_extents[1], a.iso_extents[2], a.isosurface.threshold_fraction
    ));
    s
}

/// All four stages into one working directory.
pub fn cmd_all(cfg: &ExperimentConfig, out: &Path, allow_skip: bool) -> Result<Analysis> {
    cmd_simulate(cfg, out)?;
    let wd = WorkDir::new(out);
    let noise = cfg.analysis.deconvolve_noise.then(|| wd.noise());
    cmd_fit(&wd.signal(), noise.as_deref(), cfg.grid.completion, allow_skip, &wd.tomograms())?;
    cmd_reconstruct(&wd.tomograms(), &cfg.volume, &wd.volume())?;
    let opts = ExportOptions {
        threshold_fraction: cfg.analysis.threshold_fraction,
        display_scale_std: cfg.analysis.display_scale_std,
    };
    cmd_analyze(&wd.volume(), cfg, opts, &wd.analysis())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::states::StateParams;

    fn small_cfg(kind: StateKind) -> ExperimentConfig {
        let mut cfg = ExperimentConfig::standard(kind);
        cfg.acquisition.n_pulses = 2000;
        cfg.volume.resolution = 21;
        cfg
    }

    #[test]
    fn pooling_merges_duplicate_directions() {
        let cfg = small_cfg(StateKind::PhiMinus);
        let state = make_state(&cfg.state).unwrap();
        let settings = cfg.grid.spec().settings();
        let recs = simulate_records(&state, &settings, 200, 3).unwrap();
        let out = fit_records(&settings, &recs, None, false).unwrap();
        assert_eq!(out.directions.iter().map(|d| d.settings).sum::<usize>(), 361);
        assert_eq!(out.directions.len(), crate::stokes::build_grid(&cfg.grid.spec()).unwrap().len());
    }

    #[test]
    fn noise_dominated_direction_fails_or_skips() {
        let params = StateParams::new(StateKind::PsiMinus, 100.0).squeezing(0.01, 1.0).electronic_noise(1e-9);
        let state = make_state(&params).unwrap();
        let settings = vec![WavePlateSetting::new(0.0, 0.0), WavePlateSetting::new(0.0, 10.0)];
        let recs = simulate_records(&state, &settings, 500, 1).unwrap();
        // louder noise than the signal's own electronic contribution
        let mut loud = state.clone();
        loud.electronic_noise_std = 5e-9;
        let noise = simulate_noise(&loud, 500, 1).unwrap();
        let err = fit_records(&settings, &recs, Some(&noise), false).unwrap_err();
        assert!(matches!(err, TomoError::AtDirection { .. }));
        assert!(err.to_string().contains("theta"));
        let ok = fit_records(&settings, &recs, Some(&noise), true).unwrap();
        assert_eq!(ok.skipped.len(), 2);
    }

    #[test]
    fn degenerate_direction_is_named() {
        let params = StateParams::new(StateKind::PsiMinus, 100.0).squeezing(0.0, 1.0);
        let state = make_state(&params).unwrap();
        let settings = vec![WavePlateSetting::new(0.0, 20.0)];
        let recs = simulate_records(&state, &settings, 100, 1).unwrap();
        let err = fit_records(&settings, &recs, None, false).unwrap_err();
        match err {
            TomoError::AtDirection { theta_deg, source, .. } => {
                assert!((theta_deg - 50.0).abs() < 1e-9);
                assert!(matches!(*source, TomoError::DegenerateSamples { .. }));
            }
            other => panic!("unexpected {other}"),
        }
    }

    #[test]
    fn in_memory_matches_files() {
        let cfg = small_cfg(StateKind::PsiMinus);
        let run = run_in_memory(&cfg).unwrap();
        let dir = tempfile::tempdir().unwrap();
        cmd_all(&cfg, dir.path(), false).unwrap();
        let stored = io::read_volume(&WorkDir::new(dir.path()).volume()).unwrap();
        assert_eq!(stored.volume.values, run.volume.values);
    }
}
