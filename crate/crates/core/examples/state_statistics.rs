//! Stokes-noise structure of the four Bell-like states and a coherent beam.

use polartomo::states::{make_state, photon_variance, SignalVarianceModel, StateKind, StateParams};
use polartomo::stokes::{dop_higher_order, Direction, DirectionScan, StokesAxis};

fn main() -> polartomo::Result<()> {
    let n = 1e5;
    for kind in [StateKind::PsiPlus, StateKind::PhiMinus, StateKind::PhiPlus, StateKind::PsiMinus, StateKind::PseudoCoherent] {
        let state = make_state(&StateParams::new(kind, n))?;
        let rel: Vec<f64> = StokesAxis::ALL
            .iter()
            .map(|a| state.projected_statistics(&Direction::axis(*a)).1 / n)
            .collect();
        let p2 = dop_higher_order(|d| state.central_moment(d, 2), 2, &DirectionScan::default())?;
        println!("{kind:?}: variance / shot noise along S1,S2,S3 = {rel:.2?}, second-order DOP {p2:.3}");
    }

    // excess noise of a super-Poissonian source
    let model = SignalVarianceModel::he_ne_fit();
    for x in [1e-6, 3e-6, 1e-5] {
        println!(
            "mean signal {x:.0e} V s: variance {:.3e} (balanced {:.3e})",
            model.variance(x),
            model.balanced().variance(x)
        );
    }
    println!("Var(N) at N=1e5, g2=1.5: {:.3e}", photon_variance(1e5, 1.5));
    Ok(())
}
