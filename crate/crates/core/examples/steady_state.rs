//! Solve the four-level master equation and compare with the closed form.

use std::f64::consts::PI;

use runwave::dynamics::diamond_steady_state;
use runwave::observables::{ratio_analytic, ratio_numeric};
use runwave::{DecayModel, DriveParams};

fn main() -> runwave::Result<()> {
    let decay = DecayModel::unit();
    let drive = DriveParams::uniform(5.0)?;
    for phi in [0.0, 0.3 * PI, 0.6 * PI, PI] {
        let rho = diamond_steady_state(phi, &drive, [0.0; 3], &decay)?;
        let p = rho.populations();
        let r = ratio_numeric(&rho, &decay)?;
        println!(
            "Φ = {:.3}: populations [{:.4}, {:.4}, {:.4}, {:.4}]  R = {r:.6} (closed form {:.6})",
            phi,
            p[0],
            p[1],
            p[2],
            p[3],
            ratio_analytic(5.0, phi)
        );
    }

    // unequal decay rates and a detuned pair of legs
    let decay = DecayModel::new([1.0, 0.5, 1.0, 2.0])?;
    let rho = diamond_steady_state(0.6 * PI, &drive, [0.5, -0.5, 0.0], &decay)?;
    println!("detuned, unequal rates: R = {:.6}", ratio_numeric(&rho, &decay)?);
    Ok(())
}
