use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use polartomo::io::{ExperimentConfig, VolumeConfig};
use polartomo::pipeline::{self, ExportOptions, WorkDir};
use polartomo::states::StateKind;
use polartomo::{Result, TomoError};

/// Quantum polarization tomography: simulate, fit, reconstruct, analyze.
#[derive(Parser)]
#[command(name = "tomo", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
    #[command(flatten)]
    global: Global,
}

#[derive(Args)]
struct Global {
    /// Experiment config (TOML). Defaults to the Φ⁻ reference configuration.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Overrides the acquisition seed.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Working directory.
    #[arg(long, global = true, default_value = "tomo-out")]
    out: PathBuf,
    /// Worker threads (default: all cores).
    #[arg(long, global = true)]
    threads: Option<usize>,
    /// Drop noise-dominated directions instead of failing.
    #[arg(long, global = true)]
    allow_skip_directions: bool,
    /// Exaggerates isosurface deviations from the peak in the PLY export.
    #[arg(long, global = true)]
    display_scale_std: Option<f64>,
    /// Isosurface level as a fraction of the maximum.
    #[arg(long, global = true)]
    threshold_fraction: Option<f64>,
}

#[derive(Subcommand)]
enum Command {
    /// Generate pulse records for every waveplate setting.
    Simulate,
    /// Fit histograms into tomograms.
    Fit,
    /// Inverse Radon transform of the tomograms.
    Reconstruct,
    /// Squeezing report, isosurface and slices.
    Analyze,
    /// All of the above.
    All,
}

fn load_config(g: &Global) -> Result<ExperimentConfig> {
    let mut cfg = match &g.config {
        Some(path) => ExperimentConfig::load(path)?,
        None => ExperimentConfig::standard(StateKind::PhiMinus),
    };
    if let Some(seed) = g.seed {
        cfg.acquisition.seed = seed;
    }
    if let Some(k) = g.display_scale_std {
        cfg.analysis.display_scale_std = k;
    }
    if let Some(f) = g.threshold_fraction {
        cfg.analysis.threshold_fraction = f;
    }
    cfg.validate()?;
    Ok(cfg)
}

fn run(cli: &Cli) -> Result<()> {
    let g = &cli.global;
    let cfg = load_config(g)?;
    let wd = WorkDir::new(&g.out);
    let opts = ExportOptions {
        threshold_fraction: cfg.analysis.threshold_fraction,
        display_scale_std: cfg.analysis.display_scale_std,
    };
    match cli.command {
        Command::Simulate => {
            let m = pipeline::cmd_simulate(&cfg, &g.out)?;
            println!("wrote {} settings to {}", m.entries.len(), wd.signal().display());
        }
        Command::Fit => {
            let noise = wd.noise();
            let noise = (cfg.analysis.deconvolve_noise && noise.exists()).then_some(noise);
            let f = pipeline::cmd_fit(
                &wd.signal(),
                noise.as_deref(),
                cfg.grid.completion,
                g.allow_skip_directions,
                &wd.tomograms(),
            )?;
            let non_gaussian = f.tomograms.iter().filter(|t| t.raw.is_non_gaussian()).count();
            println!(
                "{} tomograms ({} skipped, {non_gaussian} non-Gaussian) -> {}",
                f.tomograms.len(),
                f.skipped.len(),
                wd.tomograms().display()
            );
        }
        Command::Reconstruct => {
            let vc: &VolumeConfig = &cfg.volume;
            let v = pipeline::cmd_reconstruct(&wd.tomograms(), vc, &wd.volume())?;
            println!("volume {}^3 -> {}", v.volume.spec.resolution, wd.volume().display());
        }
        Command::Analyze => {
            let a = pipeline::cmd_analyze(&wd.volume(), &cfg, opts, &wd.analysis())?;
            print!("{}", pipeline::render_report(&a));
        }
        Command::All => {
            let a = pipeline::cmd_all(&cfg, &g.out, g.allow_skip_directions)?;
            print!("{}", pipeline::render_report(&a));
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 1 } else { 0 });
        }
    };
    if let Some(n) = cli.global.threads {
        if n == 0 {
            eprintln!("error: {}", TomoError::invalid("threads", "must be at least 1"));
            return ExitCode::from(1);
        }
        rayon::ThreadPoolBuilder::new().num_threads(n).build_global().expect("global pool is built once");
    }
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
