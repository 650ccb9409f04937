//! Coarse-to-fine localization: a ξ = 0.25 stage picks the branch, ξ = 2
//! and ξ = 4 stages refine it.

use runwave::localization::{coarse_relative_phase, coarse_to_fine, Noise, SimulatedSource, Stage, Window};
use runwave::LoopLayout;

fn main() -> runwave::Result<()> {
    let window = Window::one_wavelength();
    let stages = vec![
        Stage::new(LoopLayout::diamond_with_magnification(0.25, coarse_relative_phase(window, 0.25))?, 5.0),
        Stage::new(LoopLayout::diamond_with_magnification(2.0, 0.0)?, 5.0),
        Stage::new(LoopLayout::diamond_with_magnification(4.0, 0.0)?, 5.0),
    ];
    let mut atom = SimulatedSource {
        z_true: 0.15,
        band: 0.05,
        noise: Some(Noise { sigma: 0.01, seed: 7 }),
    };
    let res = coarse_to_fine(&mut atom, &stages, window)?;
    for s in &res.stages {
        println!(
            "ξ = {:<5} R = {:.4}  {} candidates  z in [{:.4}, {:.4}]",
            s.xi, s.measurement.ratio(), s.candidate_count, s.interval.z_lo, s.interval.z_hi
        );
    }
    println!("z = {:.5} λ, relative uncertainty {:.4}", res.z_hat(), res.relative_uncertainty());
    Ok(())
}
