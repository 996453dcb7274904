//! simulate → fit → reconstruct → analyze through files, as the CLI does.

use std::path::PathBuf;

use polartomo::io::ExperimentConfig;
use polartomo::pipeline::{cmd_all, render_report};
use polartomo::states::StateKind;

fn main() {
    let out = std::env::args().nth(1).map(PathBuf::from).unwrap_or_else(|| std::env::temp_dir().join("tomo-example"));
    let mut cfg = ExperimentConfig::standard(StateKind::PsiMinus);
    cfg.acquisition.n_pulses = 2_000;
    cfg.volume.resolution = 31;

    match cmd_all(&cfg, &out, false) {
        Ok(analysis) => {
            print!("{}", render_report(&analysis));
            println!("outputs in {}", out.display());
        }
        Err(e) => {
            eprintln!("error: {e}");
            std::process::exit(e.exit_code());
        }
    }
}
