//! Φ⁻, singlet and coherent light through the in-memory pipeline.
//!
//! Takes a few seconds per state in release builds.

use polartomo::io::ExperimentConfig;
use polartomo::pipeline::{render_report, run_in_memory};
use polartomo::states::StateKind;

fn main() -> polartomo::Result<()> {
    for kind in [StateKind::PhiMinus, StateKind::PsiMinus, StateKind::PseudoCoherent] {
        let mut cfg = ExperimentConfig::standard(kind);
        cfg.acquisition.n_pulses = 10_000;
        cfg.volume.resolution = 41;
        let run = run_in_memory(&cfg)?;
        println!("== {kind:?}\n{}", render_report(&run.analysis));
    }
    Ok(())
}
