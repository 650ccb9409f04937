//! Pick the relative phase that puts an estimated position on the steepest
//! part of the ratio curve.

use std::f64::consts::TAU;

use runwave::localization::{optimize_phase, propagate_error, simulate_measurement, Window};
use runwave::observables::slope;
use runwave::LoopLayout;

fn main() -> runwave::Result<()> {
    let (z_est, x) = (0.15, 5.0);
    let base = LoopLayout::diamond_with_magnification(2.0, 0.0)?;
    let phi0 = optimize_phase(z_est, &base, x)?;
    println!("φ₀* = {phi0:.4}");
    for (name, p) in [("φ₀ = 0", 0.0), ("φ₀*", phi0)] {
        let layout = base.with_relative_phase(p);
        let m = simulate_measurement(z_est, &layout, x, None, Some(0.05))?;
        let c = *propagate_error(&m, &layout, x, Window::one_wavelength())?.nearest(z_est).unwrap();
        println!(
            "{name}: dR/dΦ = {:+.4}, uncertainty {:.4}",
            slope(x, TAU * 2.0 * z_est + p),
            c.relative_uncertainty()
        );
    }
    Ok(())
}
