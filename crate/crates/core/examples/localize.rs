//! Candidate positions and error intervals for a single measurement.

use std::f64::consts::PI;

use runwave::localization::{propagate_error, simulate_measurement, Window};
use runwave::LoopLayout;

fn main() -> runwave::Result<()> {
    let z_true = 0.15;
    let window = Window::one_wavelength();
    for (xi, phi0) in [(2.0, 0.0), (4.0, 0.0), (2.0, PI / 4.0)] {
        let layout = LoopLayout::diamond_with_magnification(xi, phi0)?;
        let m = simulate_measurement(z_true, &layout, 5.0, None, Some(0.05))?;
        let set = propagate_error(&m, &layout, 5.0, window)?;
        println!("ξ = {xi}, φ₀ = {phi0:.3}: R = {:.4}, {} candidates", m.ratio(), set.len());
        for c in &set.candidates {
            println!(
                "  z = {:.4} in [{:.4}, {:.4}]  uncertainty {:.4} {:?}",
                c.z_hat,
                c.z_lo,
                c.z_hi,
                c.relative_uncertainty(),
                c.flags.names()
            );
        }
    }
    Ok(())
}
